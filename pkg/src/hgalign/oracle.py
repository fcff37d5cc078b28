"""Independent brute-force references for certifying the closed-form solver.

Nothing here calls into `solver`; objectives and gradients are
re-implemented from scratch so agreement between the two modules is
evidence, not tautology. `brute_objective` is the deliberately naive
loop-and-fsum version; the gradient-descent minimizer keeps its own
vectorized objective because plain loops would be too slow inside a
line search. Desk-scale instances only; everything is single-threaded
for reproducibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph import HeteroGraph
from .operators import BilinearOperatorSet

_ALL_BLOCKS = ("latent", "projection", "residual")


@dataclass(frozen=True)
class OracleConfig:
    step_size: float = 1e-2
    max_steps: int = 5000
    grad_tol: float = 1e-7

    def __post_init__(self) -> None:
        if not self.step_size > 0:
            raise ValueError(f"step_size must be > 0, got {self.step_size}")
        if not self.grad_tol > 0:
            raise ValueError(f"grad_tol must be > 0, got {self.grad_tol}")


@dataclass
class GDResult:
    latent: dict[str, np.ndarray]
    projection: dict[str, np.ndarray]
    residual: dict[str, np.ndarray]
    objective_trace: list[float] = field(default_factory=list)


def _objective(graph, ops, latent, projection, residual, beta, gamma) -> float:
    total = 0.0
    for rel in graph.relations:
        r = graph.adjacency(rel.name)
        diff = r - latent[rel.src_type] @ ops.operator(rel) @ latent[rel.dst_type].T
        total += float(np.vdot(diff, diff))
    for t in graph.node_types:
        x = graph.feature_matrix(t.name)
        mismatch = latent[t.name] - x @ projection[t.name] - residual[t.name]
        total += float(np.vdot(mismatch, mismatch))
        total += beta * float(np.vdot(residual[t.name], residual[t.name]))
        total += gamma * float(np.vdot(projection[t.name], projection[t.name]))
    return total


def _gradients(graph, ops, latent, projection, residual, beta, gamma):
    """Analytic gradients of the joint objective with respect to every block."""
    g_lat = {t.name: np.zeros_like(latent[t.name]) for t in graph.node_types}
    g_proj = {}
    g_res = {}
    for rel in graph.relations:
        r = graph.adjacency(rel.name)
        m = ops.operator(rel)
        h_s = latent[rel.src_type]
        h_d = latent[rel.dst_type]
        diff = r - h_s @ m @ h_d.T
        g_lat[rel.src_type] += -2.0 * diff @ h_d @ m.T
        g_lat[rel.dst_type] += -2.0 * diff.T @ h_s @ m
    for t in graph.node_types:
        x = graph.feature_matrix(t.name)
        mismatch = latent[t.name] - x @ projection[t.name] - residual[t.name]
        g_lat[t.name] += 2.0 * mismatch
        g_proj[t.name] = -2.0 * x.T @ mismatch + 2.0 * gamma * projection[t.name]
        g_res[t.name] = -2.0 * mismatch + 2.0 * beta * residual[t.name]
    return {"latent": g_lat, "projection": g_proj, "residual": g_res}


def _blocks_from(state) -> dict[str, dict[str, np.ndarray]]:
    return {
        "latent": {k: np.array(v, dtype=np.float64) for k, v in state.latent.items()},
        "projection": {k: np.array(v, dtype=np.float64) for k, v in state.projection.items()},
        "residual": {k: np.array(v, dtype=np.float64) for k, v in state.residual.items()},
    }


def gd_minimize(
    graph: HeteroGraph,
    ops: BilinearOperatorSet,
    state,
    beta: float,
    gamma: float,
    cfg: OracleConfig | None = None,
    free: tuple[str, ...] = _ALL_BLOCKS,
) -> GDResult:
    """Full-batch gradient descent with backtracking on the joint objective.

    `free` selects which block families move; the rest stay frozen at the
    initial point (e.g. free=("projection",) minimizes the projection
    slice with latent and residual fixed). Every accepted step strictly
    decreases the objective; the step is halved whenever a trial step
    fails to decrease it and doubled after success. Stops when the
    gradient norm over the free blocks drops below grad_tol or after
    max_steps accepted steps.
    """
    cfg = cfg or OracleConfig()
    for name in free:
        if name not in _ALL_BLOCKS:
            raise ValueError(f"unknown block family '{name}'")
    blocks = _blocks_from(state)

    def value(b):
        return _objective(graph, ops, b["latent"], b["projection"], b["residual"], beta, gamma)

    f = value(blocks)
    trace = [f]
    step = cfg.step_size
    for _ in range(cfg.max_steps):
        grads = _gradients(
            graph, ops, blocks["latent"], blocks["projection"], blocks["residual"], beta, gamma
        )
        gnorm_sq = 0.0
        for fam in free:
            for g in grads[fam].values():
                gnorm_sq += float(np.vdot(g, g))
        if math.sqrt(gnorm_sq) < cfg.grad_tol:
            break
        halvings = 0
        while True:
            candidate = {
                fam: (
                    {k: v - step * grads[fam][k] for k, v in blocks[fam].items()}
                    if fam in free
                    else blocks[fam]
                )
                for fam in _ALL_BLOCKS
            }
            f_new = value(candidate)
            if f_new < f:
                break
            step *= 0.5
            halvings += 1
            if halvings > 60:
                raise RuntimeError(
                    "gradient-descent oracle failed to descend after 60 step halvings; "
                    "the oracle is misconfigured for this instance"
                )
        blocks = candidate
        f = f_new
        trace.append(f)
        step *= 2.0
    return GDResult(blocks["latent"], blocks["projection"], blocks["residual"], trace)


def finite_diff_gradcheck(
    objective_fn,
    graph: HeteroGraph,
    ops: BilinearOperatorSet,
    state,
    beta: float,
    gamma: float,
    epsilon: float = 1e-5,
) -> float:
    """Max discrepancy between central differences of `objective_fn` and
    the oracle's analytic gradient, over every coordinate of every block.

    `objective_fn(latent, projection, residual) -> float` is the evaluator
    under test (pass the production objective to cross-check it against
    the analytic formulas); None uses the oracle's own objective.
    Discrepancies are normalized by max(1, largest analytic entry).
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise ValueError(f"epsilon must lie in [1e-7, 1e-3], got {epsilon}")
    blocks = _blocks_from(state)
    if objective_fn is None:
        def objective_fn(latent, projection, residual):
            return _objective(graph, ops, latent, projection, residual, beta, gamma)

    analytic = _gradients(
        graph, ops, blocks["latent"], blocks["projection"], blocks["residual"], beta, gamma
    )
    scale = 1.0
    for fam in _ALL_BLOCKS:
        for g in analytic[fam].values():
            if g.size:
                scale = max(scale, float(np.abs(g).max()))

    worst = 0.0
    for fam in _ALL_BLOCKS:
        for name, arr in blocks[fam].items():
            flat = arr.ravel()
            for idx in range(flat.size):
                orig = flat[idx]
                flat[idx] = orig + epsilon
                f_plus = objective_fn(blocks["latent"], blocks["projection"], blocks["residual"])
                flat[idx] = orig - epsilon
                f_minus = objective_fn(blocks["latent"], blocks["projection"], blocks["residual"])
                flat[idx] = orig
                fd = (f_plus - f_minus) / (2.0 * epsilon)
                an = analytic[fam][name].ravel()[idx]
                worst = max(worst, abs(fd - an) / scale)
    return worst


def fit_bilinear_operator(
    z_src: np.ndarray,
    z_dst: np.ndarray,
    target: np.ndarray,
    cfg: OracleConfig | None = None,
) -> np.ndarray:
    """Gradient-descent fit of the k-by-k operator m minimizing
    ||target - z_src @ m @ z_dst.T||_F^2 for fixed embedding blocks.

    Same backtracking loop as gd_minimize; used to give baseline-aligned
    features their best bilinear reconstruction for comparison purposes.
    """
    cfg = cfg or OracleConfig()
    z_src = np.asarray(z_src, dtype=np.float64)
    z_dst = np.asarray(z_dst, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    k = z_src.shape[1]
    m = np.zeros((k, z_dst.shape[1]))

    def value(candidate):
        diff = target - z_src @ candidate @ z_dst.T
        return float(np.vdot(diff, diff))

    f = value(m)
    step = cfg.step_size
    for _ in range(cfg.max_steps):
        diff = target - z_src @ m @ z_dst.T
        grad = -2.0 * z_src.T @ diff @ z_dst
        if float(np.linalg.norm(grad)) < cfg.grad_tol:
            break
        halvings = 0
        while True:
            candidate = m - step * grad
            f_new = value(candidate)
            if f_new < f:
                break
            step *= 0.5
            halvings += 1
            if halvings > 60:
                raise RuntimeError(
                    "operator fit failed to descend after 60 step halvings; "
                    "the oracle is misconfigured for this instance"
                )
        m = candidate
        f = f_new
        step *= 2.0
    return m


def brute_objective(graph: HeteroGraph, ops: BilinearOperatorSet, state, beta, gamma) -> float:
    """Naive loop re-implementation of the joint objective.

    Every sum is written out elementwise and accumulated with math.fsum;
    shares no code with the production evaluator. Desk-scale inputs only.
    """
    terms = []
    for rel in graph.relations:
        r = graph.adjacency(rel.name)
        m = ops.operator(rel)
        h_s = state.latent[rel.src_type]
        h_d = state.latent[rel.dst_type]
        n_s, n_d = r.shape
        k = m.shape[0]
        for i in range(n_s):
            for j in range(n_d):
                pred = math.fsum(
                    h_s[i, a] * m[a, b] * h_d[j, b] for a in range(k) for b in range(k)
                )
                terms.append((r[i, j] - pred) ** 2)
    for t in graph.node_types:
        x = graph.feature_matrix(t.name)
        h = state.latent[t.name]
        p = state.projection[t.name]
        e = state.residual[t.name]
        n, d = x.shape
        k = h.shape[1]
        for i in range(n):
            for a in range(k):
                projected = math.fsum(x[i, b] * p[b, a] for b in range(d))
                terms.append((h[i, a] - projected - e[i, a]) ** 2)
                terms.append(beta * e[i, a] * e[i, a])
        for b in range(d):
            for a in range(k):
                terms.append(gamma * p[b, a] * p[b, a])
    return math.fsum(terms)
