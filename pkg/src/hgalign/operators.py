"""Fixed random dual projections and per-relation bilinear operators.

Each relation r from source type s to destination type d interacts in the
shared k-dimensional latent space through a k-by-k operator. Under the
default "type" variant the operator is composed from two per-type bases,
an outgoing one for the source and an incoming one for the destination:

    M_r = out_basis[s] @ in_basis[d].T

with both bases of shape (k, rank), rank <= k. The bases are sampled once
from N(0, sigma^2) and never trained; sharing them across all relations
touching a type is what couples the relation subspaces. Three ablation
variants replace this composition: a per-relation low-rank pair
("relation"), one dense matrix shared by every relation ("global"), and
an independent dense matrix per relation ("fullrank").
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Sequence

import numpy as np

from .graph import NodeType, Relation, _freeze

# Sub-stream tags so that projection sampling and solver-state sampling
# derived from the same user seed stay statistically independent.
_PROJECTION_STREAM = 0


class OperatorVariant(str, Enum):
    """How per-relation operators are parameterized."""

    TYPE_DUAL = "type"
    RELATION_DUAL = "relation"
    GLOBAL_SHARED = "global"
    FULL_RANK = "fullrank"

    @classmethod
    def parse(cls, value: "OperatorVariant | str") -> "OperatorVariant":
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            valid = ", ".join(v.value for v in cls)
            raise ValueError(
                f"unknown operator variant '{value}' (expected one of: {valid})"
            ) from None


def default_rank(k: int) -> int:
    """Default subspace rank: k/4, floored at 2 (and never above k)."""
    return min(k, max(2, k // 4))


def default_sigma(rank: int) -> float:
    """Default sampling std 1/sqrt(rank).

    Keeps operator entries at variance 1/rank for every variant: a dual
    composition of (k, rank) factors with entry variance sigma^2 has entry
    variance rank * sigma^4, which matches a dense draw at sigma^2.
    """
    return 1.0 / math.sqrt(rank)


class BilinearOperatorSet:
    """Immutable set of random projection bases and derived operators.

    Construct via `init_projections`. Operators are materialized on first
    use and cached; they never change afterwards.
    """

    def __init__(
        self,
        variant: OperatorVariant,
        k: int,
        rho: int,
        sigma: float,
        seed: int,
        out_basis: dict[str, np.ndarray],
        in_basis: dict[str, np.ndarray],
        dense: dict[str, np.ndarray],
        shared: np.ndarray | None,
    ):
        self.variant = variant
        self.k = k
        self.rho = rho
        self.sigma = sigma
        self.seed = seed
        self.out_basis = out_basis
        self.in_basis = in_basis
        self.dense = dense
        self.shared = shared
        self._cache: dict[str, np.ndarray] = {}

    def operator(self, relation: Relation) -> np.ndarray:
        """The k-by-k operator for `relation` (cached, read-only)."""
        m = self._cache.get(relation.name)
        if m is None:
            m = _freeze(build_operator(self, relation))
            self._cache[relation.name] = m
        return m


def init_projections(
    node_types: Sequence[NodeType | str],
    relations: Sequence[Relation],
    variant: OperatorVariant | str = OperatorVariant.TYPE_DUAL,
    k: int = 16,
    rho: int | None = None,
    sigma: float | None = None,
    seed: int = 0,
) -> BilinearOperatorSet:
    """Sample the fixed random projection bases for a schema.

    Every entry is drawn i.i.d. from N(0, sigma^2). Sampling is
    deterministic in (seed, schema order, variant): bases are drawn in
    declaration order, outgoing before incoming.
    """
    variant = OperatorVariant.parse(variant)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if rho is None:
        rho = default_rank(k)
    if not 1 <= rho <= k:
        raise ValueError(f"rho must satisfy 1 <= rho <= k={k}, got {rho}")
    if sigma is None:
        sigma = default_sigma(rho)
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")

    type_names = [t.name if isinstance(t, NodeType) else str(t) for t in node_types]
    rng = np.random.default_rng([_PROJECTION_STREAM, seed])

    out_basis: dict[str, np.ndarray] = {}
    in_basis: dict[str, np.ndarray] = {}
    dense: dict[str, np.ndarray] = {}
    shared: np.ndarray | None = None

    if variant is OperatorVariant.TYPE_DUAL:
        for name in type_names:
            out_basis[name] = _freeze(rng.normal(0.0, sigma, size=(k, rho)))
            in_basis[name] = _freeze(rng.normal(0.0, sigma, size=(k, rho)))
    elif variant is OperatorVariant.RELATION_DUAL:
        for rel in relations:
            out_basis[rel.name] = _freeze(rng.normal(0.0, sigma, size=(k, rho)))
            in_basis[rel.name] = _freeze(rng.normal(0.0, sigma, size=(k, rho)))
    elif variant is OperatorVariant.GLOBAL_SHARED:
        shared = _freeze(rng.normal(0.0, sigma, size=(k, k)))
    else:  # FULL_RANK
        for rel in relations:
            dense[rel.name] = _freeze(rng.normal(0.0, sigma, size=(k, k)))

    return BilinearOperatorSet(variant, k, rho, sigma, seed, out_basis, in_basis, dense, shared)


def build_operator(ops: BilinearOperatorSet, relation: Relation) -> np.ndarray:
    """Compose the k-by-k operator for one relation from the stored bases."""
    v = ops.variant
    if v is OperatorVariant.TYPE_DUAL:
        try:
            a = ops.out_basis[relation.src_type]
            b = ops.in_basis[relation.dst_type]
        except KeyError as exc:
            raise KeyError(f"relation '{relation.name}': unknown node type {exc}") from None
        return a @ b.T
    if v is OperatorVariant.RELATION_DUAL:
        if relation.name not in ops.out_basis:
            raise KeyError(f"unknown relation '{relation.name}'")
        return ops.out_basis[relation.name] @ ops.in_basis[relation.name].T
    if v is OperatorVariant.GLOBAL_SHARED:
        assert ops.shared is not None
        return ops.shared.copy()
    if relation.name not in ops.dense:
        raise KeyError(f"unknown relation '{relation.name}'")
    return ops.dense[relation.name].copy()


def reconstruct_relation(h_src: np.ndarray, m_r: np.ndarray, h_dst: np.ndarray) -> np.ndarray:
    """Predicted relation structure h_src @ m_r @ h_dst.T, shape (n_src, n_dst)."""
    h_src = np.asarray(h_src, dtype=np.float64)
    h_dst = np.asarray(h_dst, dtype=np.float64)
    m_r = np.asarray(m_r, dtype=np.float64)
    if h_src.ndim != 2 or h_dst.ndim != 2 or m_r.ndim != 2:
        raise ValueError("reconstruct_relation expects 2-D arrays")
    k = m_r.shape[0]
    if m_r.shape != (k, k) or h_src.shape[1] != k or h_dst.shape[1] != k:
        raise ValueError(
            f"dimension mismatch: h_src {h_src.shape}, m_r {m_r.shape}, h_dst {h_dst.shape}"
        )
    return h_src @ m_r @ h_dst.T
