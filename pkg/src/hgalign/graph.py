"""Heterogeneous graph data model.

A graph is a typed schema (node types, directed relations) plus one dense
feature matrix per node type and one edge list per relation. All objects
are immutable after construction and safe to share across workers; arrays
are stored with the writeable flag cleared.

Relations are always directed. Undirected data must be ingested either as
a single chosen direction or as two declared relations, because the solver
treats outgoing and incoming incidence separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class SchemaError(ValueError):
    """A graph violates its declared schema."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class NodeType:
    """A node type with `count` nodes carrying `feature_dim`-wide features."""

    name: str
    count: int
    feature_dim: int


@dataclass(frozen=True)
class Relation:
    """A directed edge type from `src_type` nodes to `dst_type` nodes."""

    name: str
    src_type: str
    dst_type: str
    directed: bool = True


@dataclass(frozen=True)
class FeatureBlock:
    """Dense feature matrix for one node type, shape (count, feature_dim)."""

    type_name: str
    matrix: np.ndarray

    def __post_init__(self) -> None:
        # np.array copies, so freezing never flips a caller's array read-only
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2:
            raise SchemaError(
                f"feature block '{self.type_name}': matrix must be 2-D, got ndim={m.ndim}"
            )
        object.__setattr__(self, "matrix", _freeze(m))


@dataclass(frozen=True)
class RelationBlock:
    """Edge list for one relation, stored as an (m, 2) integer array.

    Row (i, j) means an edge from source node i to destination node j,
    0-based in file row order. Duplicate pairs are rejected at validation
    rather than merged, so ingestion errors stay visible.
    """

    relation_name: str
    edges: np.ndarray

    def __post_init__(self) -> None:
        e = np.array(self.edges, dtype=np.int64)
        if e.size == 0:
            e = e.reshape(0, 2)
        if e.ndim != 2 or e.shape[1] != 2:
            raise SchemaError(
                f"relation block '{self.relation_name}': edges must be (m, 2), got {e.shape}"
            )
        object.__setattr__(self, "edges", _freeze(e))

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]


def densify_relation(block: RelationBlock, n_src: int, n_dst: int) -> np.ndarray:
    """Materialize an edge list as a dense 0/1 matrix of shape (n_src, n_dst)."""
    dense = np.zeros((n_src, n_dst), dtype=np.float64)
    e = block.edges
    if e.shape[0] == 0:
        return dense
    bad_src = (e[:, 0] < 0) | (e[:, 0] >= n_src)
    bad_dst = (e[:, 1] < 0) | (e[:, 1] >= n_dst)
    if bad_src.any() or bad_dst.any():
        i = int(np.argmax(bad_src | bad_dst))
        raise SchemaError(
            f"relation block '{block.relation_name}': edge "
            f"({e[i, 0]}, {e[i, 1]}) out of range for shape ({n_src}, {n_dst})"
        )
    dense[e[:, 0], e[:, 1]] = 1.0
    return dense


@dataclass(frozen=True)
class HeteroGraph:
    """Schema plus per-type feature blocks and per-relation edge blocks.

    Node types and relations keep their declared order; that order is part
    of the deterministic contract of everything downstream (projection
    sampling, solver sweeps).
    """

    node_types: tuple[NodeType, ...]
    relations: tuple[Relation, ...]
    features: tuple[FeatureBlock, ...]
    relation_blocks: tuple[RelationBlock, ...]
    _dense_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "node_types", tuple(self.node_types))
        object.__setattr__(self, "relations", tuple(self.relations))
        object.__setattr__(self, "features", tuple(self.features))
        object.__setattr__(self, "relation_blocks", tuple(self.relation_blocks))

    @classmethod
    def from_data(
        cls,
        node_types: Sequence[NodeType],
        relations: Sequence[Relation],
        features: dict[str, np.ndarray],
        edges: dict[str, Iterable],
    ) -> "HeteroGraph":
        """Assemble a graph from per-name arrays, ordered by the schema."""
        fblocks = tuple(FeatureBlock(t.name, features[t.name]) for t in node_types)
        rblocks = tuple(RelationBlock(r.name, np.asarray(list(edges[r.name]))) for r in relations)
        return cls(tuple(node_types), tuple(relations), fblocks, rblocks)

    def node_type(self, name: str) -> NodeType:
        for t in self.node_types:
            if t.name == name:
                return t
        raise KeyError(f"unknown node type '{name}'")

    def relation(self, name: str) -> Relation:
        for r in self.relations:
            if r.name == name:
                return r
        raise KeyError(f"unknown relation '{name}'")

    def feature_matrix(self, type_name: str) -> np.ndarray:
        for b in self.features:
            if b.type_name == type_name:
                return b.matrix
        raise KeyError(f"no feature block for node type '{type_name}'")

    def relation_block(self, relation_name: str) -> RelationBlock:
        for b in self.relation_blocks:
            if b.relation_name == relation_name:
                return b
        raise KeyError(f"no relation block for relation '{relation_name}'")

    def adjacency(self, relation_name: str) -> np.ndarray:
        """Dense 0/1 adjacency of a relation (cached; the solver's working form)."""
        cached = self._dense_cache.get(relation_name)
        if cached is None:
            rel = self.relation(relation_name)
            n_src = self.node_type(rel.src_type).count
            n_dst = self.node_type(rel.dst_type).count
            cached = _freeze(densify_relation(self.relation_block(relation_name), n_src, n_dst))
            self._dense_cache[relation_name] = cached
        return cached


def validate_schema(graph: HeteroGraph) -> list[str]:
    """Check every schema invariant; return all violations (empty list = valid).

    Violations are data, not exceptions: callers that require a valid graph
    should raise on a non-empty report (see `require_valid`).
    """
    violations: list[str] = []

    if not graph.node_types:
        violations.append("no node types declared")

    seen_types: set[str] = set()
    for t in graph.node_types:
        if t.name in seen_types:
            violations.append(f"duplicate node type name '{t.name}'")
        seen_types.add(t.name)
        if t.count < 1:
            violations.append(f"node type '{t.name}': count must be >= 1, got {t.count}")
        if t.feature_dim < 1:
            violations.append(
                f"node type '{t.name}': feature_dim must be >= 1, got {t.feature_dim}"
            )

    seen_rels: set[str] = set()
    for r in graph.relations:
        if r.name in seen_rels:
            violations.append(f"duplicate relation name '{r.name}'")
        seen_rels.add(r.name)
        if r.src_type not in seen_types:
            violations.append(f"relation '{r.name}': unknown src_type '{r.src_type}'")
        if r.dst_type not in seen_types:
            violations.append(f"relation '{r.name}': unknown dst_type '{r.dst_type}'")
        if not r.directed:
            violations.append(
                f"relation '{r.name}': undirected relations are not supported; "
                "declare one direction or two relations"
            )

    feature_names = [b.type_name for b in graph.features]
    for t in graph.node_types:
        n = feature_names.count(t.name)
        if n != 1:
            violations.append(f"node type '{t.name}': expected exactly 1 feature block, got {n}")
    for b in graph.features:
        if b.type_name not in seen_types:
            violations.append(f"feature block for undeclared node type '{b.type_name}'")
            continue
        t = graph.node_type(b.type_name)
        if b.matrix.shape != (t.count, t.feature_dim):
            violations.append(
                f"feature block '{b.type_name}': shape {b.matrix.shape} does not match "
                f"declared ({t.count}, {t.feature_dim})"
            )
        if not np.isfinite(b.matrix).all():
            violations.append(f"feature block '{b.type_name}': non-finite entries")

    block_names = [b.relation_name for b in graph.relation_blocks]
    for r in graph.relations:
        n = block_names.count(r.name)
        if n != 1:
            violations.append(f"relation '{r.name}': expected exactly 1 relation block, got {n}")
    for b in graph.relation_blocks:
        if b.relation_name not in seen_rels:
            violations.append(f"relation block for undeclared relation '{b.relation_name}'")
            continue
        r = graph.relation(b.relation_name)
        if r.src_type not in seen_types or r.dst_type not in seen_types:
            continue  # endpoint violation already reported
        n_src = graph.node_type(r.src_type).count
        n_dst = graph.node_type(r.dst_type).count
        e = b.edges
        if e.shape[0]:
            out = (e[:, 0] < 0) | (e[:, 0] >= n_src) | (e[:, 1] < 0) | (e[:, 1] >= n_dst)
            for i in np.flatnonzero(out):
                violations.append(
                    f"relation block '{b.relation_name}': edge ({e[i, 0]}, {e[i, 1]}) "
                    f"out of range for ({n_src}, {n_dst})"
                )
            uniq = len(set(map(tuple, e.tolist())))
            if uniq != e.shape[0]:
                violations.append(
                    f"relation block '{b.relation_name}': {e.shape[0] - uniq} duplicate edge pair(s)"
                )

    return violations


def require_valid(graph: HeteroGraph) -> HeteroGraph:
    """Raise SchemaError listing all violations; return the graph if clean."""
    report = validate_schema(graph)
    if report:
        raise SchemaError("invalid graph: " + "; ".join(report))
    return graph
