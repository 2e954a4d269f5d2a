"""File formats, loaders with positioned errors, and model persistence."""

import numpy as np
import pytest

from ecrm import (DataFormatError, HierarchyDag, JointKernelSpec,
                  KernelSpec, default_flow_network, fit, fit_additive, load_model,
                  save_additive_model, save_model, weights)
from ecrm.io import (fmt, load_binary_labels, load_hierarchy, load_matrix,
                     load_network, load_permutations, save_hierarchy, save_matrix,
                     save_network)
from conftest import random_feasible_label, random_tree


class TestMatrixFiles:
    def test_empty_file_errors(self, tmp_path):
        path = tmp_path / "empty.txt"
        path.write_text("")
        with pytest.raises(DataFormatError, match="empty"):
            load_matrix(path)

    def test_single_cell(self, tmp_path):
        path = tmp_path / "one.txt"
        path.write_text("0.5\n")
        np.testing.assert_array_equal(load_matrix(path), [[0.5]])

    def test_round_trip_is_identity(self, tmp_path, rng):
        M = rng.normal(size=(7, 4))
        path = tmp_path / "m.txt"
        save_matrix(path, M)
        np.testing.assert_array_equal(load_matrix(path), M)

    def test_ragged_rows_error_carries_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1 2\n3 4 5\n")
        with pytest.raises(DataFormatError, match=":2:"):
            load_matrix(path)

    def test_parse_error_carries_line(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("1 2\n3 x\n")
        with pytest.raises(DataFormatError, match=":2:"):
            load_matrix(path)

    def test_binary_label_validation(self, tmp_path):
        path = tmp_path / "y.txt"
        path.write_text("1 0\n0 2\n")
        with pytest.raises(DataFormatError):
            load_binary_labels(path)

    def test_permutation_validation(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("1 2 3\n1 1 3\n")
        with pytest.raises(DataFormatError, match=":2:"):
            load_permutations(path)

    def test_fmt_round_trips(self, rng):
        for v in rng.normal(size=50):
            assert float(fmt(v)) == v


class TestHierarchyFiles:
    def test_star(self, tmp_path):
        path = tmp_path / "h.txt"
        path.write_text("0 1\n0 2\n")
        G = load_hierarchy(path)
        assert G.d == 3 and G.roots == (0,)

    def test_self_loop_rejected(self, tmp_path):
        path = tmp_path / "h.txt"
        path.write_text("1 1\n")
        with pytest.raises(DataFormatError, match="self-loop"):
            load_hierarchy(path)

    def test_cycle_rejected(self, tmp_path):
        path = tmp_path / "h.txt"
        path.write_text("0 1\n1 2\n2 0\n")
        with pytest.raises(DataFormatError, match="cycle"):
            load_hierarchy(path)

    def test_round_trip(self, tmp_path, rng):
        G = random_tree(rng, 9)
        path = tmp_path / "h.txt"
        save_hierarchy(path, G)
        G2 = load_hierarchy(path)
        assert G2.d == G.d and G2.arcs == G.arcs


class TestNetworkFiles:
    def test_round_trip_default_network(self, tmp_path):
        net = default_flow_network()
        path = tmp_path / "net.txt"
        save_network(path, net)
        net2 = load_network(path)
        assert net2.arcs == net.arcs and net2.b == net.b
        assert net2.n_arcs == 10

    def test_unbalanced_inflow_rejected(self, tmp_path):
        path = tmp_path / "net.txt"
        path.write_text("nodes 2 arcs 1\n0 1\n0 1.0\n1 0.5\n")
        with pytest.raises(DataFormatError, match="sum"):
            load_network(path)

    def test_cycle_rejected_when_required(self, tmp_path):
        path = tmp_path / "net.txt"
        path.write_text("nodes 2 arcs 2\n0 1\n1 0\n0 0.0\n1 0.0\n")
        with pytest.raises(DataFormatError, match="cycle"):
            load_network(path)
        net = load_network(path, require_acyclic=False)
        assert not net.is_acyclic

    def test_bad_header(self, tmp_path):
        path = tmp_path / "net.txt"
        path.write_text("vertices 2\n")
        with pytest.raises(DataFormatError, match=":1:"):
            load_network(path)


class TestModelPersistence:
    def test_base_round_trip(self, tmp_path, rng):
        G = random_tree(rng, 5)
        m = 6
        labels = np.array([random_feasible_label(rng, G) for _ in range(m)])
        X = rng.normal(size=(m, 3))
        model = fit(KernelSpec("rbf", gamma=0.8), 0.25, X, labels,
                    intercept_mode="centered")
        path = tmp_path / "model.ecrm"
        save_model(path, model)
        first = path.read_text().splitlines()[0]
        assert first == "ECRM-MODEL 1"
        loaded = load_model(path)
        assert loaded.kernel == model.kernel
        assert loaded.lam == model.lam
        assert loaded.intercept_mode == "centered"
        np.testing.assert_array_equal(loaded.inputs, model.inputs)
        np.testing.assert_array_equal(loaded.labels, model.labels)
        x = rng.normal(size=3)
        np.testing.assert_allclose(weights(loaded, x).w, weights(model, x).w,
                                   atol=1e-12)

    def test_linear_kernel_round_trip(self, tmp_path, rng):
        X = rng.normal(size=(4, 2))
        model = fit(KernelSpec("linear"), 1.0, X, np.array([[1.0, 2.0]] * 4))
        path = tmp_path / "model.ecrm"
        save_model(path, model)
        loaded = load_model(path)
        assert loaded.kernel.kind == "linear"
        np.testing.assert_array_equal(loaded.labels, model.labels)

    def test_additive_round_trip(self, tmp_path, rng):
        G = HierarchyDag(3, [(0, 1), (0, 2)])
        m = 4
        X = rng.normal(size=(m, 2))
        Y = np.array([random_feasible_label(rng, G) for _ in range(m)])
        joint = JointKernelSpec(base=KernelSpec("rbf", gamma=1.1), neighbors="adjacent")
        model = fit_additive(X, Y, G, joint, 0.6)
        path = tmp_path / "model.ecrm"
        save_additive_model(path, model)
        lines = path.read_text().splitlines()
        assert lines[0] == "ECRM-MODEL 1" and lines[1] == "variant additive"
        loaded = load_model(path)
        np.testing.assert_array_equal(loaded.alpha, model.alpha)
        np.testing.assert_array_equal(loaded.inputs, model.inputs)
        assert loaded.hierarchy.arcs == G.arcs
        assert loaded.joint == joint and loaded.lam == model.lam

    def test_wrong_magic_rejected(self, tmp_path):
        path = tmp_path / "model.ecrm"
        path.write_text("NOT-A-MODEL\n")
        with pytest.raises(DataFormatError, match="ECRM-MODEL"):
            load_model(path)
