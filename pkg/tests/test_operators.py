"""Random projection bases and bilinear relation operators."""

import math

import numpy as np
import pytest

from hgalign import (
    BilinearOperatorSet,
    NodeType,
    OperatorVariant,
    Relation,
    build_operator,
    init_projections,
    reconstruct_relation,
)
from hgalign.operators import default_rank, default_sigma

TYPES3 = [NodeType("t0", 4, 3), NodeType("t1", 5, 2), NodeType("t2", 3, 2)]
RELS = [Relation("r0", "t0", "t1"), Relation("r1", "t0", "t2"), Relation("r2", "t1", "t2")]


class TestInitProjections:
    def test_type_dual_shapes(self):
        ops = init_projections(TYPES3, RELS, "type", k=8, rho=2, seed=0)
        mats = list(ops.out_basis.values()) + list(ops.in_basis.values())
        assert len(mats) == 6
        assert all(m.shape == (8, 2) for m in mats)

    def test_relation_dual_shapes(self):
        ops = init_projections(TYPES3, RELS, "relation", k=6, rho=3, seed=0)
        assert set(ops.out_basis) == {"r0", "r1", "r2"}
        assert all(m.shape == (6, 3) for m in ops.out_basis.values())

    def test_global_and_fullrank_shapes(self):
        ops_g = init_projections(TYPES3, RELS, "global", k=5, seed=0)
        assert ops_g.shared.shape == (5, 5)
        ops_f = init_projections(TYPES3, RELS, "fullrank", k=5, seed=0)
        assert set(ops_f.dense) == {"r0", "r1", "r2"}
        assert all(m.shape == (5, 5) for m in ops_f.dense.values())

    def test_same_seed_is_bit_identical(self):
        a = init_projections(TYPES3, RELS, "type", k=8, rho=2, sigma=0.5, seed=7)
        b = init_projections(TYPES3, RELS, "type", k=8, rho=2, sigma=0.5, seed=7)
        for name in a.out_basis:
            np.testing.assert_array_equal(a.out_basis[name], b.out_basis[name])
            np.testing.assert_array_equal(a.in_basis[name], b.in_basis[name])

    def test_different_seed_differs(self):
        a = init_projections(TYPES3, RELS, "type", k=8, rho=2, seed=7)
        b = init_projections(TYPES3, RELS, "type", k=8, rho=2, seed=8)
        assert not np.array_equal(a.out_basis["t0"], b.out_basis["t0"])

    def test_sampled_moments_match_declared_distribution(self):
        # 49 types x 2 bases x 64 x 16 > 1e5 entries
        k, rho, sigma = 64, 16, 0.25
        types = [NodeType(f"t{i}", 1, 1) for i in range(49)]
        ops = init_projections(types, [], "type", k=k, rho=rho, sigma=sigma, seed=11)
        entries = np.concatenate(
            [m.ravel() for m in ops.out_basis.values()]
            + [m.ravel() for m in ops.in_basis.values()]
        )
        n = entries.size
        assert n >= 100_000
        assert abs(entries.mean()) <= 3 * sigma / math.sqrt(n)
        assert abs(entries.var() - sigma**2) <= 0.05 * sigma**2

    def test_invalid_arguments_raise(self):
        with pytest.raises(ValueError, match="rho"):
            init_projections(TYPES3, RELS, "type", k=4, rho=5)
        with pytest.raises(ValueError, match="sigma"):
            init_projections(TYPES3, RELS, "type", k=4, rho=2, sigma=0.0)
        with pytest.raises(ValueError, match="k must be"):
            init_projections(TYPES3, RELS, "type", k=0)
        with pytest.raises(ValueError, match="variant"):
            init_projections(TYPES3, RELS, "bogus", k=4)

    def test_defaults(self):
        assert default_rank(16) == 4
        assert default_rank(8) == 2
        assert default_rank(2) == 2
        assert default_rank(1) == 1
        assert default_sigma(4) == 0.5
        ops = init_projections(TYPES3, RELS, "type", k=16, seed=0)
        assert ops.rho == 4 and ops.sigma == 0.5


def _manual_type_dual(out_basis, in_basis, k, rho):
    return BilinearOperatorSet(
        OperatorVariant.TYPE_DUAL, k, rho, 1.0, 0, out_basis, in_basis, {}, None
    )


class TestBuildOperator:
    def test_identity_bases_compose_to_identity(self):
        eye = np.eye(3)
        ops = _manual_type_dual({"a": eye}, {"b": eye}, k=3, rho=3)
        np.testing.assert_array_equal(build_operator(ops, Relation("ab", "a", "b")), np.eye(3))

    def test_hand_outer_product(self):
        ops = _manual_type_dual(
            {"a": np.array([[1.0], [2.0]])}, {"b": np.array([[3.0], [4.0]])}, k=2, rho=1
        )
        np.testing.assert_allclose(
            build_operator(ops, Relation("ab", "a", "b")), [[3.0, 4.0], [6.0, 8.0]]
        )

    @pytest.mark.parametrize("variant", ["type", "relation"])
    @pytest.mark.parametrize("seed", range(4))
    def test_low_rank_variants_have_rank_at_most_rho(self, variant, seed):
        ops = init_projections(TYPES3, RELS, variant, k=8, rho=2, seed=seed)
        for rel in RELS:
            sv = np.linalg.svd(ops.operator(rel), compute_uv=False)
            assert sv[2] <= 1e-10 * sv[0]

    def test_relations_sharing_source_type_share_the_outgoing_basis(self):
        ops = init_projections(TYPES3, RELS, "type", k=8, rho=2, seed=5)
        a0 = ops.out_basis["t0"]
        np.testing.assert_array_equal(
            ops.operator(RELS[0]), a0 @ ops.in_basis["t1"].T
        )
        np.testing.assert_array_equal(
            ops.operator(RELS[1]), a0 @ ops.in_basis["t2"].T
        )

    def test_global_variant_shares_one_matrix(self):
        ops = init_projections(TYPES3, RELS, "global", k=4, seed=3)
        m0 = build_operator(ops, RELS[0])
        for rel in RELS[1:]:
            np.testing.assert_array_equal(build_operator(ops, rel), m0)

    def test_operator_lookup_is_cached_and_stable(self):
        ops = init_projections(TYPES3, RELS, "type", k=4, seed=2)
        first = ops.operator(RELS[0])
        assert ops.operator(RELS[0]) is first
        np.testing.assert_array_equal(first, build_operator(ops, RELS[0]))

    def test_self_relation_uses_distinct_roles(self):
        ops = init_projections(TYPES3, RELS, "type", k=4, rho=2, seed=9)
        m = build_operator(ops, Relation("loop", "t0", "t0"))
        np.testing.assert_array_equal(m, ops.out_basis["t0"] @ ops.in_basis["t0"].T)
        assert not np.array_equal(ops.out_basis["t0"], ops.in_basis["t0"])

    def test_bases_and_cached_operators_are_read_only(self):
        ops = init_projections(TYPES3, RELS, "type", k=4, rho=2, seed=1)
        with pytest.raises(ValueError):
            ops.out_basis["t0"][0, 0] = 1.0
        with pytest.raises(ValueError):
            ops.operator(RELS[0])[0, 0] = 1.0

    def test_unknown_names_raise(self):
        ops = init_projections(TYPES3, RELS, "type", k=4, seed=0)
        with pytest.raises(KeyError):
            build_operator(ops, Relation("rx", "t0", "ghost"))
        ops_f = init_projections(TYPES3, RELS, "fullrank", k=4, seed=0)
        with pytest.raises(KeyError):
            build_operator(ops_f, Relation("ghost_rel", "t0", "t1"))


class TestReconstructRelation:
    def test_zero_source_annihilates(self):
        out = reconstruct_relation(np.zeros((3, 2)), np.ones((2, 2)), np.ones((4, 2)))
        np.testing.assert_array_equal(out, np.zeros((3, 4)))

    def test_scalar_product(self):
        out = reconstruct_relation([[2.0]], [[3.0]], [[5.0]])
        np.testing.assert_allclose(out, [[30.0]])

    def test_matches_triple_loop(self):
        rng = np.random.default_rng(0)
        h_src, m, h_dst = rng.normal(size=(4, 3)), rng.normal(size=(3, 3)), rng.normal(size=(5, 3))
        out = reconstruct_relation(h_src, m, h_dst)
        for i in range(4):
            for j in range(5):
                expect = sum(
                    h_src[i, a] * m[a, b] * h_dst[j, b] for a in range(3) for b in range(3)
                )
                np.testing.assert_allclose(out[i, j], expect, rtol=1e-12)

    def test_bilinearity_in_source(self):
        rng = np.random.default_rng(1)
        h_src, m, h_dst = rng.normal(size=(4, 3)), rng.normal(size=(3, 3)), rng.normal(size=(5, 3))
        np.testing.assert_allclose(
            reconstruct_relation(2.5 * h_src, m, h_dst),
            2.5 * reconstruct_relation(h_src, m, h_dst),
            rtol=1e-12,
        )

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError, match="mismatch"):
            reconstruct_relation(np.zeros((3, 2)), np.zeros((3, 3)), np.zeros((4, 3)))
