"""File formats: matrices, edge lists, manifests, embedding directories."""

import json

import numpy as np
import pytest

from hgalign import SolverConfig, load_graph, run_alignment, save_graph
from hgalign.io import (
    load_embeddings,
    read_edges,
    read_matrix,
    save_embeddings,
    write_edges,
    write_matrix,
)

from helpers import random_graph


class TestMatrixFormat:
    def test_round_trip_is_bitwise_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        m = rng.normal(size=(9, 4)) * 10.0 ** rng.integers(-200, 200, size=(9, 4))
        path = write_matrix(tmp_path / "m.csv", m)
        np.testing.assert_array_equal(read_matrix(path), m)

    def test_single_row_and_single_column_shapes(self, tmp_path):
        row = np.array([[1.5, 2.5, 3.5]])
        col = np.array([[1.0], [2.0]])
        np.testing.assert_array_equal(read_matrix(write_matrix(tmp_path / "r.csv", row)), row)
        np.testing.assert_array_equal(read_matrix(write_matrix(tmp_path / "c.csv", col)), col)

    def test_non_2d_rejected(self, tmp_path):
        with pytest.raises(ValueError, match="2-D"):
            write_matrix(tmp_path / "m.csv", np.zeros(3))

    def test_missing_file_and_garbage_content(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_matrix(tmp_path / "nope.csv")
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,two\n")
        with pytest.raises(ValueError, match="bad.csv"):
            read_matrix(bad)


class TestEdgeFormat:
    def test_round_trip(self, tmp_path):
        edges = np.array([[0, 1], [3, 2], [5, 0]])
        path = write_edges(tmp_path / "e.txt", edges)
        np.testing.assert_array_equal(read_edges(path), edges)

    def test_comments_and_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("# header\n\n0 1\n2 3  # trailing comment\n")
        np.testing.assert_array_equal(read_edges(path), [[0, 1], [2, 3]])

    def test_empty_edge_file(self, tmp_path):
        path = write_edges(tmp_path / "e.txt", np.zeros((0, 2)))
        out = read_edges(path)
        assert out.shape == (0, 2)

    def test_bad_line_cites_file_and_line(self, tmp_path):
        path = tmp_path / "e.txt"
        path.write_text("0 1\n2\n")
        with pytest.raises(ValueError, match=r"e\.txt:2"):
            read_edges(path)
        path.write_text("0 x\n")
        with pytest.raises(ValueError, match=r"e\.txt:1"):
            read_edges(path)


class TestGraphRoundTrip:
    def test_save_then_load_reproduces_graph_exactly(self, tmp_path):
        g = random_graph(np.random.default_rng(1), n_types=3, n_relations=3)
        manifest = save_graph(g, tmp_path)
        loaded = load_graph(manifest)
        assert loaded.node_types == g.node_types
        assert loaded.relations == g.relations
        for t in g.node_types:
            np.testing.assert_array_equal(loaded.feature_matrix(t.name), g.feature_matrix(t.name))
        for r in g.relations:
            np.testing.assert_array_equal(
                loaded.relation_block(r.name).edges, g.relation_block(r.name).edges
            )

    def test_acm_shaped_manifest_loads_clean(self, tmp_path):
        from test_graph import acm_shaped_graph

        manifest = save_graph(acm_shaped_graph(), tmp_path)
        loaded = load_graph(manifest)
        assert [t.count for t in loaded.node_types] == [4019, 7167, 60]
        assert [loaded.relation_block(r.name).num_edges for r in loaded.relations] == [13407, 4019]

    def test_shape_mismatch_error_cites_feature_file(self, tmp_path):
        g = random_graph(np.random.default_rng(2), n_types=2, n_relations=1)
        manifest_path = save_graph(g, tmp_path)
        manifest = json.loads(manifest_path.read_text())
        manifest["node_types"][0]["count"] += 1
        manifest_path.write_text(json.dumps(manifest))
        with pytest.raises(ValueError, match=r"features/t0\.csv"):
            load_graph(manifest_path)

    def test_missing_field_and_missing_file(self, tmp_path):
        manifest_path = tmp_path / "manifest.json"
        manifest_path.write_text(json.dumps({"node_types": [{"name": "a", "count": 1}]}))
        with pytest.raises(ValueError, match="feature_dim"):
            load_graph(manifest_path)
        manifest_path.write_text(
            json.dumps(
                {
                    "node_types": [
                        {"name": "a", "count": 1, "feature_dim": 1, "feature_file": "gone.csv"}
                    ],
                    "relations": [],
                }
            )
        )
        with pytest.raises(FileNotFoundError, match="gone.csv"):
            load_graph(manifest_path)

    def test_invalid_json_is_reported(self, tmp_path):
        path = tmp_path / "manifest.json"
        path.write_text("{not json")
        with pytest.raises(ValueError, match="invalid JSON"):
            load_graph(path)

    def test_duplicate_edges_rejected_at_load(self, tmp_path):
        g = random_graph(np.random.default_rng(3), n_types=2, n_relations=1)
        manifest = save_graph(g, tmp_path)
        edge_file = tmp_path / "edges" / f"{g.relations[0].name}.txt"
        edge_file.write_text("0 0\n0 0\n")
        with pytest.raises(Exception, match="duplicate edge"):
            load_graph(manifest)


class TestEmbeddingPersistence:
    def test_one_file_per_type_plus_metadata(self, tmp_path):
        g = random_graph(np.random.default_rng(4), n_types=2, n_relations=1)
        cfg = SolverConfig(k=3, max_iters=2, seed=7)
        state, _ = run_alignment(g, cfg)
        save_embeddings(state, cfg, tmp_path)
        csvs = sorted(p.name for p in tmp_path.glob("*.csv"))
        assert csvs == sorted(f"{t.name}.csv" for t in g.node_types)
        meta = json.loads((tmp_path / "run_meta.json").read_text())
        assert meta["config"]["seed"] == 7
        assert meta["objective_trace"] == state.objective_trace

    def test_round_trip_is_exact(self, tmp_path):
        g = random_graph(np.random.default_rng(5), n_types=2, n_relations=2)
        cfg = SolverConfig(k=4, max_iters=3, seed=1)
        state, _ = run_alignment(g, cfg)
        save_embeddings(state, cfg, tmp_path)
        blocks, meta = load_embeddings(tmp_path)
        for name, block in state.latent.items():
            np.testing.assert_array_equal(blocks[name], block)

    def test_rerun_from_recorded_config_reproduces_embeddings(self, tmp_path):
        g = random_graph(np.random.default_rng(6), n_types=2, n_relations=2)
        cfg = SolverConfig(k=3, max_iters=4, seed=11)
        state, _ = run_alignment(g, cfg)
        save_embeddings(state, cfg, tmp_path)
        _, meta = load_embeddings(tmp_path)
        state2, _ = run_alignment(g, SolverConfig.from_dict(meta["config"]))
        for name in state.latent:
            np.testing.assert_array_equal(state2.latent[name], state.latent[name])

    def test_missing_metadata_is_an_error(self, tmp_path):
        with pytest.raises(FileNotFoundError, match="run_meta"):
            load_embeddings(tmp_path)
