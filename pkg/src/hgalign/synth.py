"""Synthetic benchmark generation with planted ground truth.

A dataset is grown from a hidden latent configuration: per-type latent
blocks (optionally pushed apart by per-type center offsets), type-dual
planted operators, relation adjacency obtained by thresholding the
real-valued bilinear scores, and features that are a random full-rank
linear read-out of the latent blocks plus optional Gaussian noise.
Everything needed to reproduce the relations bit-exactly (latent blocks,
operators, scores, threshold) is written to a `ground_truth/` sidecar
next to the generated manifest.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .graph import NodeType, Relation
from .io import RUN_META, SCHEMA_VERSION, save_graph, write_matrix
from .operators import default_rank

_SYNTH_STREAM = 2


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic dataset.

    `latent_dim` is the hidden dimension the data is generated from;
    `rho` the rank of the planted operators (defaults like the solver's).
    Latent clouds can carry cluster structure: each type draws
    `clusters_per_type` centers with coordinate std `center_scale` and
    scatters its nodes around them with std `cluster_spread`. The
    defaults (one cluster, zero center scale, unit spread) give a plain
    standard-normal cloud per type; center_scale > 0 produces
    well-separated per-type feature distributions.
    """

    node_types: tuple[NodeType, ...]
    relations: tuple[Relation, ...]
    latent_dim: int = 8
    rho: int | None = None
    noise_std: float = 0.0
    edge_threshold: float = 0.0
    seed: int = 0
    clusters_per_type: int = 1
    center_scale: float = 0.0
    cluster_spread: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "node_types", tuple(self.node_types))
        object.__setattr__(self, "relations", tuple(self.relations))
        if self.latent_dim < 1:
            raise ValueError(f"latent_dim must be >= 1, got {self.latent_dim}")
        rho = default_rank(self.latent_dim) if self.rho is None else self.rho
        if not 1 <= rho <= self.latent_dim:
            raise ValueError(f"rho must satisfy 1 <= rho <= latent_dim, got {rho}")
        object.__setattr__(self, "rho", rho)
        if not (math.isfinite(self.noise_std) and self.noise_std >= 0):
            raise ValueError(f"noise_std must be finite and >= 0, got {self.noise_std}")
        if not math.isfinite(self.edge_threshold):
            raise ValueError("edge_threshold must be finite")
        if self.clusters_per_type < 1:
            raise ValueError(f"clusters_per_type must be >= 1, got {self.clusters_per_type}")
        if not (math.isfinite(self.center_scale) and self.center_scale >= 0):
            raise ValueError(f"center_scale must be finite and >= 0, got {self.center_scale}")
        if not (math.isfinite(self.cluster_spread) and self.cluster_spread >= 0):
            raise ValueError(f"cluster_spread must be finite and >= 0, got {self.cluster_spread}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "node_types": [
                {"name": t.name, "count": t.count, "feature_dim": t.feature_dim}
                for t in self.node_types
            ],
            "relations": [
                {"name": r.name, "src_type": r.src_type, "dst_type": r.dst_type}
                for r in self.relations
            ],
            "latent_dim": self.latent_dim,
            "rho": self.rho,
            "noise_std": self.noise_std,
            "edge_threshold": self.edge_threshold,
            "seed": self.seed,
            "clusters_per_type": self.clusters_per_type,
            "center_scale": self.center_scale,
            "cluster_spread": self.cluster_spread,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SynthSpec":
        return cls(
            node_types=tuple(
                NodeType(e["name"], int(e["count"]), int(e["feature_dim"]))
                for e in d["node_types"]
            ),
            relations=tuple(
                Relation(e["name"], e["src_type"], e["dst_type"]) for e in d["relations"]
            ),
            latent_dim=int(d.get("latent_dim", 8)),
            rho=d.get("rho"),
            noise_std=float(d.get("noise_std", 0.0)),
            edge_threshold=float(d.get("edge_threshold", 0.0)),
            seed=int(d.get("seed", 0)),
            clusters_per_type=int(d.get("clusters_per_type", 1)),
            center_scale=float(d.get("center_scale", 0.0)),
            cluster_spread=float(d.get("cluster_spread", 1.0)),
        )


def planted_quantities(spec: SynthSpec) -> dict[str, Any]:
    """Draw every hidden quantity for a spec (deterministic in the seed).

    Returns latent blocks, per-type operator bases, per-relation operators
    and score matrices, adjacency matrices, and feature matrices. Draw
    order: per-type centers and latent blocks, per-type operator bases,
    per-type feature read-outs and noise, all in schema order.
    """
    rng = np.random.default_rng([_SYNTH_STREAM, spec.seed])
    k = spec.latent_dim

    latent: dict[str, np.ndarray] = {}
    for t in spec.node_types:
        centers = spec.center_scale * rng.normal(size=(spec.clusters_per_type, k))
        labels = rng.integers(0, spec.clusters_per_type, size=t.count)
        latent[t.name] = centers[labels] + spec.cluster_spread * rng.normal(size=(t.count, k))

    out_basis: dict[str, np.ndarray] = {}
    in_basis: dict[str, np.ndarray] = {}
    scale = 1.0 / math.sqrt(spec.rho)
    for t in spec.node_types:
        out_basis[t.name] = rng.normal(0.0, scale, size=(k, spec.rho))
        in_basis[t.name] = rng.normal(0.0, scale, size=(k, spec.rho))

    operators: dict[str, np.ndarray] = {}
    scores: dict[str, np.ndarray] = {}
    adjacency: dict[str, np.ndarray] = {}
    for r in spec.relations:
        m = out_basis[r.src_type] @ in_basis[r.dst_type].T
        s = latent[r.src_type] @ m @ latent[r.dst_type].T
        a = (s > spec.edge_threshold).astype(np.float64)
        if a.min() == a.max():
            which = "all-one" if a.max() == 1.0 else "all-zero"
            warnings.warn(
                f"relation '{r.name}': edge_threshold={spec.edge_threshold} produced an "
                f"{which} relation",
                stacklevel=2,
            )
        operators[r.name] = m
        scores[r.name] = s
        adjacency[r.name] = a

    features: dict[str, np.ndarray] = {}
    for t in spec.node_types:
        readout = rng.normal(0.0, 1.0 / math.sqrt(k), size=(k, t.feature_dim))
        noise = rng.normal(size=(t.count, t.feature_dim))
        features[t.name] = latent[t.name] @ readout + spec.noise_std * noise

    return {
        "latent": latent,
        "out_basis": out_basis,
        "in_basis": in_basis,
        "operators": operators,
        "scores": scores,
        "adjacency": adjacency,
        "features": features,
    }


def generate(spec: SynthSpec, out_dir) -> Path:
    """Generate a dataset on disk; returns the manifest path.

    Layout: `manifest.json` + `features/` + `edges/` for the public data,
    and `ground_truth/` holding the planted latent blocks (one CSV per
    type), per-relation operator and score matrices, and a metadata file
    sufficient to reconstruct every adjacency bit-exactly.
    """
    from .graph import HeteroGraph

    out_dir = Path(out_dir)
    q = planted_quantities(spec)
    edges = {name: np.argwhere(a == 1.0) for name, a in q["adjacency"].items()}
    graph = HeteroGraph.from_data(spec.node_types, spec.relations, q["features"], edges)
    manifest_path = save_graph(graph, out_dir)

    gt_dir = out_dir / "ground_truth"
    gt_dir.mkdir(parents=True, exist_ok=True)
    for t in spec.node_types:
        write_matrix(gt_dir / f"{t.name}.csv", q["latent"][t.name])
    for r in spec.relations:
        write_matrix(gt_dir / f"operator_{r.name}.csv", q["operators"][r.name])
        write_matrix(gt_dir / f"scores_{r.name}.csv", q["scores"][r.name])
    meta = {
        "schema_version": SCHEMA_VERSION,
        "kind": "planted",
        "types": [t.name for t in spec.node_types],
        "relations": [r.name for r in spec.relations],
        "spec": spec.to_dict(),
    }
    (gt_dir / RUN_META).write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return manifest_path
