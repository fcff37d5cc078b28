"""File formats and persistence.

* manifest: JSON describing a graph; feature and edge files are paths
  relative to the manifest's directory.
* matrices (features, embeddings, error maps): headerless CSV, one row
  per node, comma-separated decimal fields printed at 17 significant
  digits so float64 values round-trip exactly.
* edge lists: two whitespace-separated 0-based integer columns per line,
  `#` starts a comment. Node indices are file row order; there is no ID
  remapping layer.
* embedding directories: one `<type>.csv` per node type plus a
  `run_meta.json` recording what produced them (solver config and
  objective trace for alignment runs; method and dimension for baseline
  runs; planted ground truth for synthetic data).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .graph import HeteroGraph, NodeType, Relation, require_valid

SCHEMA_VERSION = "1"
RUN_META = "run_meta.json"
MATRIX_FORMAT = "%.17g"


def write_matrix(path, matrix: np.ndarray) -> Path:
    path = Path(path)
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError(f"{path}: matrix must be 2-D, got ndim={matrix.ndim}")
    try:
        np.savetxt(path, matrix, fmt=MATRIX_FORMAT, delimiter=",")
    except OSError as exc:
        raise OSError(f"{path}: {exc}") from exc
    return path


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    try:
        return np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise ValueError(f"{path}: not a valid matrix file ({exc})") from exc


def write_edges(path, edges: np.ndarray) -> Path:
    path = Path(path)
    edges = np.asarray(edges, dtype=np.int64)
    if edges.size == 0:
        edges = edges.reshape(0, 2)
    if edges.ndim != 2 or edges.shape[1] != 2:
        raise ValueError(f"{path}: edges must be (m, 2), got {edges.shape}")
    with open(path, "w", encoding="utf-8") as f:
        f.write("# source_index destination_index\n")
        for i, j in edges:
            f.write(f"{i} {j}\n")
    return path


def read_edges(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path}: no such file")
    rows: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected two integer fields, got {body!r}")
            try:
                rows.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: expected two integer fields, got {body!r}"
                ) from None
    if not rows:
        return np.zeros((0, 2), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64)


def _require(entry: dict, key: str, where: str):
    if key not in entry:
        raise ValueError(f"{where}: missing field '{key}'")
    return entry[key]


def load_graph(manifest_path) -> HeteroGraph:
    """Load and fully validate a graph from a manifest.

    Any inconsistency (missing file, shape mismatch, duplicate edges,
    non-finite features, dangling type names) raises with the offending
    file and field named.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise FileNotFoundError(f"{manifest_path}: no such file")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{manifest_path}: invalid JSON ({exc})") from exc
    base = manifest_path.parent

    node_types = []
    features = {}
    for i, entry in enumerate(manifest.get("node_types", [])):
        where = f"{manifest_path}: node_types[{i}]"
        name = _require(entry, "name", where)
        count = int(_require(entry, "count", where))
        dim = int(_require(entry, "feature_dim", where))
        fpath = base / _require(entry, "feature_file", where)
        matrix = read_matrix(fpath)
        if matrix.shape != (count, dim):
            raise ValueError(
                f"{fpath}: feature matrix for '{name}' has shape {matrix.shape}, "
                f"manifest declares ({count}, {dim})"
            )
        if not np.isfinite(matrix).all():
            raise ValueError(f"{fpath}: feature matrix for '{name}' has non-finite entries")
        node_types.append(NodeType(name, count, dim))
        features[name] = matrix

    relations = []
    edges = {}
    for i, entry in enumerate(manifest.get("relations", [])):
        where = f"{manifest_path}: relations[{i}]"
        name = _require(entry, "name", where)
        epath = base / _require(entry, "edge_file", where)
        relations.append(
            Relation(name, _require(entry, "src_type", where), _require(entry, "dst_type", where))
        )
        edges[name] = read_edges(epath)

    graph = HeteroGraph.from_data(node_types, relations, features, edges)
    return require_valid(graph)


def save_graph(graph: HeteroGraph, out_dir, manifest_name: str = "manifest.json") -> Path:
    """Write a graph as manifest + feature CSVs + edge files; returns the
    manifest path. load_graph of the result reproduces the graph exactly."""
    out_dir = Path(out_dir)
    (out_dir / "features").mkdir(parents=True, exist_ok=True)
    (out_dir / "edges").mkdir(parents=True, exist_ok=True)
    manifest: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "node_types": [], "relations": []}
    for t in graph.node_types:
        rel_path = f"features/{t.name}.csv"
        write_matrix(out_dir / rel_path, graph.feature_matrix(t.name))
        manifest["node_types"].append(
            {"name": t.name, "count": t.count, "feature_dim": t.feature_dim,
             "feature_file": rel_path}
        )
    for r in graph.relations:
        rel_path = f"edges/{r.name}.txt"
        write_edges(out_dir / rel_path, graph.relation_block(r.name).edges)
        manifest["relations"].append(
            {"name": r.name, "src_type": r.src_type, "dst_type": r.dst_type,
             "edge_file": rel_path}
        )
    manifest_path = out_dir / manifest_name
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest_path


def save_embeddings(state, cfg, out_dir) -> Path:
    """Write one `<type>.csv` per node type plus run metadata (full solver
    config, objective trace, iteration count). Returns the metadata path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    types = list(state.latent)
    for name in types:
        write_matrix(out_dir / f"{name}.csv", state.latent[name])
    meta = {
        "schema_version": SCHEMA_VERSION,
        "kind": "alignment",
        "types": types,
        "config": cfg.to_dict(),
        "iterations": state.iteration,
        "objective_trace": list(state.objective_trace),
    }
    meta_path = out_dir / RUN_META
    meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return meta_path


def save_baseline_embeddings(blocks: dict[str, np.ndarray], cfg, out_dir) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, block in blocks.items():
        write_matrix(out_dir / f"{name}.csv", block)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "kind": "baseline",
        "types": list(blocks),
        "method": cfg.method,
        "target_dim": cfg.target_dim,
    }
    meta_path = out_dir / RUN_META
    meta_path.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return meta_path


def load_embeddings(emb_dir) -> tuple[dict[str, np.ndarray], dict[str, Any]]:
    """Load an embedding directory; returns (blocks by type, metadata)."""
    emb_dir = Path(emb_dir)
    meta_path = emb_dir / RUN_META
    if not meta_path.exists():
        raise FileNotFoundError(f"{meta_path}: no such file (not an embedding directory?)")
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValueError(f"{meta_path}: invalid JSON ({exc})") from exc
    types = meta.get("types")
    if not types:
        raise ValueError(f"{meta_path}: missing field 'types'")
    blocks = {name: read_matrix(emb_dir / f"{name}.csv") for name in types}
    return blocks, meta
