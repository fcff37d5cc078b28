"""Two-stage block-coordinate alignment solver.

One outer iteration sweeps all node types twice, in schema order:

* structure pass: for each type, refit its latent block against every
  incident relation, holding all other blocks at their latest values
  (Gauss-Seidel). The subproblem is a ridge-regularized least squares
  whose normal equations use a k-by-k SPD system, solved by Cholesky
  factorization; no explicit inverse is formed.
* feature pass: for each type, refit the semantic projection by ridge
  regression, recompute the structural residual in closed form, and
  reassemble the latent block as projection-plus-residual. After this
  pass the decomposition identity latent = features @ projection +
  residual holds exactly by construction.

The same `beta` weighs both the structure pass's latent ridge and the
residual penalty; `gamma` regularizes the projection. The full pipeline
is a pure function of (graph, config): same inputs, bit-identical
outputs in single-threaded mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .graph import HeteroGraph, require_valid
from .operators import (
    BilinearOperatorSet,
    OperatorVariant,
    default_rank,
    default_sigma,
    init_projections,
)

_STATE_STREAM = 1

# Relative residual ceiling for every structure-pass solve.
SOLVE_RESIDUAL_TOL = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    """Hyperparameters and run controls for the alignment solver.

    `rho` and `sigma` default to `max(2, k // 4)` and `1/sqrt(rho)` when
    left as None. `rel_tol=0` disables early stopping (fixed `max_iters`
    iterations). `init_scale=0` yields the all-zero initial state,
    degenerate but valid.
    """

    k: int = 16
    rho: int | None = None
    beta: float = 1.0
    gamma: float = 1.0
    max_iters: int = 30
    sigma: float | None = None
    seed: int = 0
    variant: OperatorVariant = OperatorVariant.TYPE_DUAL
    rel_tol: float = 0.0
    init_scale: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "variant", OperatorVariant.parse(self.variant))
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        rho = default_rank(self.k) if self.rho is None else self.rho
        if not 1 <= rho <= self.k:
            raise ValueError(f"rho must satisfy 1 <= rho <= k={self.k}, got {rho}")
        object.__setattr__(self, "rho", rho)
        sigma = default_sigma(rho) if self.sigma is None else self.sigma
        object.__setattr__(self, "sigma", float(sigma))
        for name in ("beta", "gamma", "sigma", "rel_tol", "init_scale"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.max_iters < 0:
            raise ValueError(f"max_iters must be >= 0, got {self.max_iters}")
        if self.rel_tol < 0:
            raise ValueError(f"rel_tol must be >= 0, got {self.rel_tol}")
        if self.init_scale < 0:
            raise ValueError(f"init_scale must be >= 0, got {self.init_scale}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "rho": self.rho,
            "beta": self.beta,
            "gamma": self.gamma,
            "max_iters": self.max_iters,
            "sigma": self.sigma,
            "seed": self.seed,
            "variant": self.variant.value,
            "rel_tol": self.rel_tol,
            "init_scale": self.init_scale,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SolverConfig":
        return cls(**d)


@dataclass
class AlignmentState:
    """Per-type solver blocks plus the objective trace.

    latent[t]     : (n_t, k) aligned representation
    projection[t] : (d_t, k) semantic map from raw features
    residual[t]   : (n_t, k) structural residual
    """

    latent: dict[str, np.ndarray]
    projection: dict[str, np.ndarray]
    residual: dict[str, np.ndarray]
    iteration: int = 0
    objective_trace: list[float] = field(default_factory=list)


def init_state(graph: HeteroGraph, cfg: SolverConfig) -> AlignmentState:
    """Gaussian latent blocks (std init_scale/sqrt(k)), zero projections,
    residual equal to the latent block so the decomposition identity holds
    from step zero. Deterministic in cfg.seed."""
    rng = np.random.default_rng([_STATE_STREAM, cfg.seed])
    scale = cfg.init_scale / math.sqrt(cfg.k)
    latent, projection, residual = {}, {}, {}
    for t in graph.node_types:
        h = rng.normal(0.0, scale, size=(t.count, cfg.k))
        latent[t.name] = h
        projection[t.name] = np.zeros((t.feature_dim, cfg.k))
        residual[t.name] = h.copy()
    return AlignmentState(latent, projection, residual)


def operators_for(graph: HeteroGraph, cfg: SolverConfig) -> BilinearOperatorSet:
    """The operator set a run with this config uses (rebuildable off-line)."""
    return init_projections(
        graph.node_types, graph.relations, cfg.variant, cfg.k, cfg.rho, cfg.sigma, cfg.seed
    )


def _spd_solve(g: np.ndarray, rhs: np.ndarray, context: str) -> np.ndarray:
    """Solve g @ x = rhs for SPD g via Cholesky, with one refinement step
    if the relative residual exceeds SOLVE_RESIDUAL_TOL."""
    try:
        factor = cho_factor(g, lower=True)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            f"{context}: SPD factorization failed ({exc}); "
            "the system is positive definite by construction, so this signals corrupted data"
        ) from exc
    x = cho_solve(factor, rhs)
    denom = max(float(np.linalg.norm(rhs)), 1e-30)
    resid = float(np.linalg.norm(g @ x - rhs)) / denom
    if resid > SOLVE_RESIDUAL_TOL:
        x = x + cho_solve(factor, rhs - g @ x)
        resid = float(np.linalg.norm(g @ x - rhs)) / denom
        if resid > SOLVE_RESIDUAL_TOL:
            raise RuntimeError(f"{context}: solve residual {resid:.3e} exceeds tolerance")
    return x


def structure_system(
    state: AlignmentState,
    graph: HeteroGraph,
    ops: BilinearOperatorSet,
    type_name: str,
    beta: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Normal-equation pieces (G, W) for one type's structure subproblem.

    G = beta*I + sum_out M Sigma_dst M^T + sum_in M^T Sigma_src M, with
    Sigma the Gram matrix of the neighbor block; W collects the matching
    adjacency-weighted terms, rows indexed by the type's nodes. A
    self-relation contributes to both sums, with the current latent block
    standing in for both endpoints.
    """
    k = ops.k
    n = graph.node_type(type_name).count
    g = beta * np.eye(k)
    w = np.zeros((n, k))
    for rel in graph.relations:
        m = ops.operator(rel)
        if rel.src_type == type_name:
            h_dst = state.latent[rel.dst_type]
            r = graph.adjacency(rel.name)
            g = g + m @ (h_dst.T @ h_dst) @ m.T
            w = w + r @ (h_dst @ m.T)
        if rel.dst_type == type_name:
            h_src = state.latent[rel.src_type]
            r = graph.adjacency(rel.name)
            g = g + m.T @ (h_src.T @ h_src) @ m
            w = w + r.T @ (h_src @ m)
    return g, w


def structure_update(
    state: AlignmentState,
    graph: HeteroGraph,
    ops: BilinearOperatorSet,
    type_name: str,
    beta: float,
) -> np.ndarray:
    """Refit one type's latent block against its incident relations.

    Solves G @ latent^T = W^T and writes the result back into the state;
    all other types are read at their latest values.
    """
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    g, w = structure_system(state, graph, ops, type_name, beta)
    if not (np.isfinite(g).all() and np.isfinite(w).all()):
        raise FloatingPointError(f"structure update for '{type_name}': non-finite system")
    h_new = _spd_solve(g, w.T, f"structure update for '{type_name}'").T
    state.latent[type_name] = h_new
    return h_new


def feature_decompose(
    state: AlignmentState,
    graph: HeteroGraph,
    type_name: str,
    beta: float,
    gamma: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Ridge-refit one type's projection, then residual, then reassemble.

    With h0/e0 the incoming blocks:

        projection = (X^T X + gamma*I)^-1 X^T (h0 - e0)
        residual   = (h0 - X @ projection) / (1 + beta)
        latent     = X @ projection + residual

    Each of the first two lines is the exact minimizer of the per-type
    decomposition objective in its own block.
    """
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    x = graph.feature_matrix(type_name)
    h0 = state.latent[type_name]
    e0 = state.residual[type_name]
    d = x.shape[1]
    a = x.T @ x + gamma * np.eye(d)
    if gamma == 0 and (d > x.shape[0] or np.linalg.cond(a) > 1e12):
        raise ValueError(
            f"feature decomposition for '{type_name}': X^T X is singular or nearly so "
            "with gamma=0; set gamma > 0"
        )
    p = _spd_solve(a, x.T @ (h0 - e0), f"feature decomposition for '{type_name}'")
    e = (h0 - x @ p) / (1.0 + beta)
    h = x @ p + e
    state.projection[type_name] = p
    state.residual[type_name] = e
    state.latent[type_name] = h
    return p, e, h


def objective(
    state: AlignmentState,
    graph: HeteroGraph,
    ops: BilinearOperatorSet,
    beta: float,
    gamma: float,
) -> float:
    """Global alignment objective: squared relation reconstruction error,
    squared decomposition inconsistency, plus the residual and projection
    penalties."""
    total = 0.0
    for rel in graph.relations:
        r = graph.adjacency(rel.name)
        pred = state.latent[rel.src_type] @ ops.operator(rel) @ state.latent[rel.dst_type].T
        total += float(((r - pred) ** 2).sum())
    for t in graph.node_types:
        x = graph.feature_matrix(t.name)
        h = state.latent[t.name]
        p = state.projection[t.name]
        e = state.residual[t.name]
        total += float(((h - x @ p - e) ** 2).sum())
        total += beta * float((e**2).sum())
        total += gamma * float((p**2).sum())
    if not math.isfinite(total):
        raise FloatingPointError("objective evaluated to a non-finite value")
    return total


def structure_objective(
    candidate: np.ndarray,
    state: AlignmentState,
    graph: HeteroGraph,
    ops: BilinearOperatorSet,
    type_name: str,
    beta: float,
) -> float:
    """Structure subproblem value at a candidate latent block for one type:
    reconstruction error over incident relations (other blocks fixed) plus
    the beta ridge on the candidate."""
    candidate = np.asarray(candidate, dtype=np.float64)
    total = beta * float((candidate**2).sum())
    for rel in graph.relations:
        if rel.src_type != type_name and rel.dst_type != type_name:
            continue
        h_src = candidate if rel.src_type == type_name else state.latent[rel.src_type]
        h_dst = candidate if rel.dst_type == type_name else state.latent[rel.dst_type]
        r = graph.adjacency(rel.name)
        pred = h_src @ ops.operator(rel) @ h_dst.T
        total += float(((r - pred) ** 2).sum())
    if not math.isfinite(total):
        raise FloatingPointError("structure objective evaluated to a non-finite value")
    return total


def run_alignment(graph: HeteroGraph, cfg: SolverConfig):
    """Run the full alternating solve; returns (state, diagnostics report).

    Sweeps are Gauss-Seidel in schema order. The objective trace holds the
    value at initialization followed by one value per completed iteration;
    with rel_tol > 0 the loop stops once the relative objective change
    drops below it.
    """
    from .diagnostics import build_report  # local import to keep diagnostics solver-free

    require_valid(graph)
    ops = operators_for(graph, cfg)
    state = init_state(graph, cfg)
    state.objective_trace.append(objective(state, graph, ops, cfg.beta, cfg.gamma))
    for it in range(1, cfg.max_iters + 1):
        for t in graph.node_types:
            structure_update(state, graph, ops, t.name, cfg.beta)
        for t in graph.node_types:
            feature_decompose(state, graph, t.name, cfg.beta, cfg.gamma)
        state.iteration = it
        value = objective(state, graph, ops, cfg.beta, cfg.gamma)
        prev = state.objective_trace[-1]
        state.objective_trace.append(value)
        if cfg.rel_tol > 0 and abs(value - prev) < cfg.rel_tol * max(abs(prev), 1e-30):
            break
    report = build_report(state, graph, ops)
    return state, report
