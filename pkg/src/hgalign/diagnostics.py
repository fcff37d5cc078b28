"""Metrics for the two failure modes of global feature alignment:
relation confusion (how poorly aligned features reconstruct relation
structure) and type collapse (how little distinct node types separate in
the shared space). All functions are pure."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .graph import HeteroGraph
from .operators import BilinearOperatorSet, reconstruct_relation

# Floor used both for relative-error denominators and for the radius term
# of the separation score (which therefore caps at distance / EPS when
# both clusters are degenerate points).
EPS = 1e-12


@dataclass(frozen=True)
class RelationError:
    """Reconstruction error for one relation."""

    frobenius_error: float
    relative_error: float
    error_map_path: str | None = None


@dataclass
class DiagnosticsReport:
    """Scalar diagnostics for one aligned embedding set."""

    objective_trace: list[float] = field(default_factory=list)
    per_relation_error: dict[str, RelationError] = field(default_factory=dict)
    type_separation: float | None = None
    per_type_norms: dict[str, float] = field(default_factory=dict)

    def total_frobenius_error(self) -> float:
        return float(
            np.sqrt(sum(e.frobenius_error**2 for e in self.per_relation_error.values()))
        )

    def mean_relative_error(self) -> float:
        errs = [e.relative_error for e in self.per_relation_error.values()]
        return float(np.mean(errs)) if errs else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "objective_trace": list(self.objective_trace),
            "per_relation_error": {
                name: {
                    "frobenius_error": e.frobenius_error,
                    "relative_error": e.relative_error,
                    "error_map_path": e.error_map_path,
                }
                for name, e in self.per_relation_error.items()
            },
            "type_separation": self.type_separation,
            "per_type_norms": dict(self.per_type_norms),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "DiagnosticsReport":
        return cls(
            objective_trace=list(d.get("objective_trace", [])),
            per_relation_error={
                name: RelationError(
                    frobenius_error=v["frobenius_error"],
                    relative_error=v["relative_error"],
                    error_map_path=v.get("error_map_path"),
                )
                for name, v in d.get("per_relation_error", {}).items()
            },
            type_separation=d.get("type_separation"),
            per_type_norms=dict(d.get("per_type_norms", {})),
        )


def relation_recon_error(
    h_src: np.ndarray, m_r: np.ndarray, h_dst: np.ndarray, r: np.ndarray
) -> tuple[float, float, np.ndarray]:
    """Absolute reconstruction error of one relation.

    Returns (frobenius_error, relative_error, error_map) where the map is
    the entrywise |r - h_src @ m_r @ h_dst^T| and the relative error is
    normalized by max(||r||_F, EPS).
    """
    r = np.asarray(r, dtype=np.float64)
    pred = reconstruct_relation(h_src, m_r, h_dst)
    if pred.shape != r.shape:
        raise ValueError(f"relation matrix shape {r.shape} does not match prediction {pred.shape}")
    error_map = np.abs(r - pred)
    frob = float(np.sqrt((error_map**2).sum()))
    rel = frob / max(float(np.linalg.norm(r)), EPS)
    return frob, rel, error_map


def type_separation_score(blocks: Mapping[str, np.ndarray]) -> float:
    """Worst-pair cluster separation of per-type embedding blocks.

    For each pair of types: centroid distance divided by (the mean of the
    two within-type RMS radii, plus EPS). The minimum over pairs is
    returned; higher means better separated, 0 means two types coincide.
    Point-like types (zero radius) make the ratio cap at distance / EPS.
    Requires at least two types of common width.
    """
    names = list(blocks)
    if len(names) < 2:
        raise ValueError("type separation is undefined for fewer than two types")
    widths = {np.asarray(blocks[n]).shape[1] for n in names}
    if len(widths) != 1:
        raise ValueError(f"blocks must share a common width, got {sorted(widths)}")
    centroids = {}
    radii = {}
    for n in names:
        b = np.asarray(blocks[n], dtype=np.float64)
        if b.ndim != 2 or b.shape[0] < 1:
            raise ValueError(f"block '{n}' must be a non-empty 2-D array")
        c = b.mean(axis=0)
        centroids[n] = c
        radii[n] = float(np.sqrt(((b - c) ** 2).sum(axis=1).mean()))
    score = np.inf
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            dist = float(np.linalg.norm(centroids[a] - centroids[b]))
            denom = 0.5 * (radii[a] + radii[b]) + EPS
            score = min(score, dist / denom)
    return float(score)


def export_error_map(error_map: np.ndarray, path) -> None:
    """Write a dense error map in the workbench CSV matrix format."""
    from .io import write_matrix

    error_map = np.asarray(error_map, dtype=np.float64)
    if not np.isfinite(error_map).all():
        raise ValueError("error map contains non-finite entries")
    write_matrix(path, error_map)


def build_report(
    state,
    graph: HeteroGraph,
    ops: BilinearOperatorSet,
) -> DiagnosticsReport:
    """Assemble a DiagnosticsReport from a solver state."""
    per_rel = {}
    for rel in graph.relations:
        frob, rel_err, _ = relation_recon_error(
            state.latent[rel.src_type],
            ops.operator(rel),
            state.latent[rel.dst_type],
            graph.adjacency(rel.name),
        )
        per_rel[rel.name] = RelationError(frob, rel_err)
    separation = None
    if len(graph.node_types) >= 2:
        separation = type_separation_score({t.name: state.latent[t.name] for t in graph.node_types})
    norms = {t.name: float(np.linalg.norm(state.latent[t.name])) for t in graph.node_types}
    return DiagnosticsReport(
        objective_trace=list(state.objective_trace),
        per_relation_error=per_rel,
        type_separation=separation,
        per_type_norms=norms,
    )
