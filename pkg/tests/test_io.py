"""File-format round trips and byte determinism."""

import numpy as np
import pytest

from uws import io as uio
from uws import label_model as lm
from uws import synthetic as syn
from uws.errors import InvalidArgumentError
from uws.metric_spaces import classical_mds, graph_hop_metric


def test_canonical_json_deterministic_and_nan_free():
    payload = {"b": np.float64(1.5), "a": np.array([1.0, np.nan]), "c": np.int64(3)}
    text = uio.canonical_json(payload)
    assert text == uio.canonical_json(payload)
    assert "NaN" not in text and "null" in text
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')


def test_config_hash_stable():
    assert uio.config_hash({"x": 1}) == uio.config_hash({"x": 1})
    assert uio.config_hash({"x": 1}) != uio.config_hash({"x": 2})


class TestDatasetRoundTrip:
    def test_ranking(self, tmp_path):
        _, data = syn.gen_ranking_tasks(syn.RankingScenario(n=20, rho=11, thetas=(1.0,) * 3, seed=0))
        path = tmp_path / "dataset.csv"
        uio.write_dataset(path, data)
        back = uio.read_dataset(path)
        assert back.space_kind == lm.RANKING
        assert (back.labels == data.labels).all()

    def test_real(self, tmp_path):
        s = syn.RegressionScenario(n=15, accuracies=(0.5, 0.5, 0.5),
                                   lf_cov=tuple(map(tuple, np.eye(3) + 0.25)), prior_var=1.0, seed=1)
        _, data = syn.gen_regression_tasks(s)
        path = tmp_path / "dataset.csv"
        uio.write_dataset(path, data)
        back = uio.read_dataset(path)
        assert back.space_kind == lm.REAL_VECTOR
        np.testing.assert_array_equal(back.labels, data.labels)  # repr round-trips exactly

    def test_nodes(self, tmp_path):
        space, truth, data = syn.gen_graph_tasks(
            syn.GraphScenario(n_nodes=8, n_edges=12, n=10, thetas=(1.0,) * 3, seed=2)
        )
        path = tmp_path / "dataset.csv"
        uio.write_dataset(path, data)
        back = uio.read_dataset(path, space=space)
        assert back.space_kind == lm.FINITE_METRIC
        assert (back.labels == data.labels).all()

    def test_node_dataset_requires_space(self, tmp_path):
        space, _, data = syn.gen_graph_tasks(
            syn.GraphScenario(n_nodes=8, n_edges=12, n=5, thetas=(1.0,) * 3, seed=3)
        )
        path = tmp_path / "dataset.csv"
        uio.write_dataset(path, data)
        with pytest.raises(InvalidArgumentError):
            uio.read_dataset(path)

    def test_rejects_garbage_header(self, tmp_path):
        path = tmp_path / "dataset.csv"
        path.write_text("foo,bar\n1,2\n")
        with pytest.raises(InvalidArgumentError):
            uio.read_dataset(path)


class TestTruthRoundTrip:
    def test_ranking_truth(self, tmp_path):
        truth, _ = syn.gen_ranking_tasks(syn.RankingScenario(n=12, rho=5, thetas=(1.0,) * 3, seed=4))
        path = tmp_path / "truth.csv"
        uio.write_truth(path, truth, lm.RANKING)
        kind, back = uio.read_truth(path)
        assert kind == lm.RANKING
        assert (back == truth).all()

    def test_real_truth(self, tmp_path):
        truth = np.array([0.25, -1.5, 3.125e-7])
        path = tmp_path / "truth.csv"
        uio.write_truth(path, truth, lm.REAL_VECTOR)
        kind, back = uio.read_truth(path)
        assert kind == lm.REAL_VECTOR
        np.testing.assert_array_equal(back, truth)


class TestModelRoundTrip:
    def test_ranking_model(self, tmp_path):
        _, data = syn.gen_ranking_tasks(syn.RankingScenario(n=500, rho=5, thetas=(1.5, 1.0, 0.7), seed=5))
        model = lm.learn_label_model(data)
        path = tmp_path / "model.json"
        uio.write_model(path, model)
        back = uio.read_model(path)
        assert back.space_kind == model.space_kind
        assert back.dims == model.dims
        np.testing.assert_allclose(back.thetas, model.thetas)
        np.testing.assert_allclose(back.pairwise_moments, model.pairwise_moments)
        assert back.version == model.version

    def test_nan_accuracies_survive_as_null(self, tmp_path):
        space, truth, data = syn.gen_graph_tasks(
            syn.GraphScenario(n_nodes=10, n_edges=16, n=300, thetas=(2.0, 1.0, 0.5), seed=6)
        )
        model = lm.learn_label_model(data)
        path = tmp_path / "model.json"
        uio.write_model(path, model)
        back = uio.read_model(path)
        assert np.isnan(back.accuracies).all()

    def test_missing_field_named(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"space_kind": "ranking"}\n')
        with pytest.raises(InvalidArgumentError, match="path"):
            uio.read_model(path)

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text("{oops")
        with pytest.raises(InvalidArgumentError, match="malformed"):
            uio.read_model(path)


def test_edge_list_round_trip(tmp_path):
    edges = [(0, 1), (1, 2), (0, 3)]
    path = tmp_path / "edges.txt"
    uio.write_edge_list(path, edges)
    assert uio.read_edge_list(path) == edges


def test_edge_list_rejects_bad_line(tmp_path):
    path = tmp_path / "edges.txt"
    path.write_text("0 1\n1 2 3\n")
    with pytest.raises(InvalidArgumentError):
        uio.read_edge_list(path)


def test_distance_matrix_round_trip(tmp_path):
    space = graph_hop_metric([(0, 1), (1, 2), (2, 3), (3, 0)], 4)
    path = tmp_path / "dist.csv"
    uio.write_distance_matrix(path, space)
    back = uio.read_distance_matrix(path)
    np.testing.assert_array_equal(back.dist, space.dist)


def test_embedding_writer(tmp_path):
    space = graph_hop_metric([(0, 1), (1, 2)], 3)
    report = classical_mds(space, dim=1)
    coords_path, json_path = uio.write_embedding(tmp_path / "emb", report)
    assert coords_path.exists() and json_path.exists()
    text = json_path.read_text()
    for key in ("dim", "epsilon", "scale", "exponent"):
        assert f'"{key}"' in text
