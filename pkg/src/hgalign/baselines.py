"""Global feature-alignment baselines: per-type truncated SVD and PCA.

These project each node type's features independently to a unified width,
exactly the input-level alignment step this package's solver is meant to
replace. They read features only; relation structure is never touched.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .graph import HeteroGraph, require_valid

#: Unified alignment width used by the standard evaluation protocol.
PROTOCOL_DIM = 50


@dataclass(frozen=True)
class BaselineConfig:
    method: str = "svd"  # "svd" or "pca"
    target_dim: int = PROTOCOL_DIM

    def __post_init__(self) -> None:
        if self.method not in ("svd", "pca"):
            raise ValueError(f"method must be 'svd' or 'pca', got '{self.method}'")
        if self.target_dim < 1:
            raise ValueError(f"target_dim must be >= 1, got {self.target_dim}")


def truncated_svd(x: np.ndarray, target_dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top `target_dim` singular triplets of x with a deterministic sign fix.

    Returns (u, s, vt) with u (n, t), s (t,), vt (t, d). Each right
    singular vector's largest-magnitude entry is made non-negative, with
    the matching left vector flipped to preserve the product. When
    target_dim exceeds the number of available triplets the extras are
    zero-padded and a warning is emitted.
    """
    x = np.asarray(x, dtype=np.float64)
    if target_dim < 1:
        raise ValueError(f"target_dim must be >= 1, got {target_dim}")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    avail = s.shape[0]
    t = min(target_dim, avail)
    u, s, vt = u[:, :t].copy(), s[:t].copy(), vt[:t].copy()
    for i in range(t):
        j = int(np.argmax(np.abs(vt[i])))
        if vt[i, j] < 0:
            vt[i] = -vt[i]
            u[:, i] = -u[:, i]
    if target_dim > avail:
        warnings.warn(
            f"target_dim={target_dim} exceeds the {avail} available singular triplets; "
            "padding with zeros",
            stacklevel=2,
        )
        u = np.hstack([u, np.zeros((x.shape[0], target_dim - avail))])
        s = np.concatenate([s, np.zeros(target_dim - avail)])
        vt = np.vstack([vt, np.zeros((target_dim - avail, x.shape[1]))])
    return u, s, vt


def svd_align(x: np.ndarray, target_dim: int) -> np.ndarray:
    """Uncentered SVD scores: u_t * s_t, the projection of x onto its
    dominant singular subspace."""
    u, s, _ = truncated_svd(x, target_dim)
    return u * s


def pca_align(x: np.ndarray, target_dim: int) -> np.ndarray:
    """PCA scores: column-center x, then project onto the top principal
    directions (same sign convention as svd_align). Requires n >= 2."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] < 2:
        raise ValueError(f"pca_align requires at least 2 rows, got {x.shape[0]}")
    centered = x - x.mean(axis=0, keepdims=True)
    u, s, _ = truncated_svd(centered, target_dim)
    return u * s


def align_features(graph: HeteroGraph, cfg: BaselineConfig) -> dict[str, np.ndarray]:
    """Apply the chosen method independently per node type.

    Returns one (count, target_dim) block per type, in schema order.
    Relation blocks are ignored by construction.
    """
    require_valid(graph)
    project = svd_align if cfg.method == "svd" else pca_align
    return {t.name: project(graph.feature_matrix(t.name), cfg.target_dim) for t in graph.node_types}
