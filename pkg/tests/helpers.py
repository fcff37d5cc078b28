"""Shared builders for random desk-scale test instances."""

from __future__ import annotations

import numpy as np

from hgalign import AlignmentState, HeteroGraph, NodeType, Relation


def random_graph(
    rng: np.random.Generator,
    n_types: int = 3,
    n_range: tuple[int, int] = (3, 6),
    d_range: tuple[int, int] = (2, 4),
    n_relations: int = 2,
    allow_self: bool = False,
    density: float = 0.4,
) -> HeteroGraph:
    """Random schema with Bernoulli relation blocks and Gaussian features."""
    types = [
        NodeType(
            f"t{i}",
            int(rng.integers(n_range[0], n_range[1] + 1)),
            int(rng.integers(d_range[0], d_range[1] + 1)),
        )
        for i in range(n_types)
    ]
    if n_types < 2 and n_relations > 0 and not allow_self:
        raise ValueError("non-self relations need at least two node types")
    relations = []
    for j in range(n_relations):
        while True:
            src, dst = rng.integers(0, n_types, size=2)
            if allow_self or src != dst:
                break
        relations.append(Relation(f"r{j}", f"t{src}", f"t{dst}"))
    features = {t.name: rng.normal(size=(t.count, t.feature_dim)) for t in types}
    edges = {}
    for r in relations:
        n_src = types[int(r.src_type[1:])].count
        n_dst = types[int(r.dst_type[1:])].count
        mask = rng.random((n_src, n_dst)) < density
        edges[r.name] = np.argwhere(mask)
    return HeteroGraph.from_data(types, relations, features, edges)


def random_state(
    graph: HeteroGraph, k: int, rng: np.random.Generator, scale: float = 1.0
) -> AlignmentState:
    """Random blocks of matching shapes (decomposition identity not enforced)."""
    latent = {t.name: scale * rng.normal(size=(t.count, k)) for t in graph.node_types}
    projection = {t.name: scale * rng.normal(size=(t.feature_dim, k)) for t in graph.node_types}
    residual = {t.name: scale * rng.normal(size=(t.count, k)) for t in graph.node_types}
    return AlignmentState(latent, projection, residual)


def unique_random_edges(rng: np.random.Generator, n_src: int, n_dst: int, m: int) -> np.ndarray:
    """Exactly m distinct (src, dst) pairs."""
    flat = rng.choice(n_src * n_dst, size=m, replace=False)
    return np.stack(np.unravel_index(flat, (n_src, n_dst)), axis=1)
