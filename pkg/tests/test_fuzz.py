"""Randomized robustness sweep over the public solver surface.

Small bounded fuzz: random schemas (including self-relations, types
narrower than the latent dimension, empty and dense relations), every
operator variant, and assorted hyperparameters. Each run must finish
with finite blocks, an exact decomposition identity, and a sane report.
"""

import numpy as np
import pytest

from hgalign import SolverConfig, run_alignment

from helpers import random_graph


@pytest.mark.parametrize("case", range(24))
def test_random_configurations_run_clean(case):
    rng = np.random.default_rng(9000 + case)
    n_types = int(rng.integers(1, 4))
    graph = random_graph(
        rng,
        n_types=n_types,
        n_range=(1, 9),
        d_range=(1, 5),
        n_relations=int(rng.integers(0, 4)) if n_types > 1 else int(rng.integers(0, 2)),
        allow_self=True,
        density=float(rng.uniform(0.0, 1.0)),
    )
    variant = ("type", "relation", "global", "fullrank")[case % 4]
    k = int(rng.integers(1, 7))
    cfg = SolverConfig(
        k=k,
        rho=int(rng.integers(1, k + 1)),
        beta=float(10.0 ** rng.uniform(-2, 2)),
        gamma=float(rng.choice([0.0, 10.0 ** rng.uniform(-2, 2)])),
        max_iters=int(rng.integers(0, 8)),
        seed=case,
        variant=variant,
        rel_tol=float(rng.choice([0.0, 1e-4])),
        init_scale=float(rng.choice([0.0, 0.5, 1.0, 3.0])),
    )
    try:
        state, report = run_alignment(graph, cfg)
    except ValueError as exc:
        # the one legitimate refusal: gamma=0 with a singular feature Gram
        assert "gamma" in str(exc)
        return

    for t in graph.node_types:
        h = state.latent[t.name]
        assert np.isfinite(h).all()
        assert np.isfinite(state.projection[t.name]).all()
        assert np.isfinite(state.residual[t.name]).all()
        if cfg.max_iters > 0:
            drift = (
                h
                - graph.feature_matrix(t.name) @ state.projection[t.name]
                - state.residual[t.name]
            )
            assert np.linalg.norm(drift) <= 1e-10 * (1.0 + np.linalg.norm(h))
    assert all(np.isfinite(v) for v in state.objective_trace)
    assert all(e.frobenius_error >= 0 for e in report.per_relation_error.values())
    if report.type_separation is not None:
        assert report.type_separation >= 0
