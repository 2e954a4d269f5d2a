"""Output spaces: constraint builders, feasibility, TU checks, enumeration."""

import math

import numpy as np
import pytest

from ecrm import (ConstraintMatrix, FlowNetwork, HierarchyDag,
                  assignment_constraint_matrix, assignment_space, enumerate_space,
                  explicit_space, flow_space, hierarchy_constraint_matrix,
                  hierarchy_space, is_feasible, is_totally_unimodular)
from conftest import random_dag, random_tree


class TestHierarchyConstraintMatrix:
    def test_single_arc(self):
        cm = hierarchy_constraint_matrix(HierarchyDag(2, [(0, 1)]))
        np.testing.assert_array_equal(cm.A, [[-1, 1]])
        assert cm.senses == ("<=",) and cm.rhs[0] == 0.0

    def test_empty_arc_set(self):
        cm = hierarchy_constraint_matrix(HierarchyDag(3, []))
        assert cm.A.shape == (0, 3)

    def test_diamond_rows_sum_to_zero(self):
        G = HierarchyDag(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
        cm = hierarchy_constraint_matrix(G)
        assert cm.A.shape == (4, 4)
        np.testing.assert_array_equal(cm.A.sum(axis=1), np.zeros(4))
        assert np.all(np.sort(cm.A, axis=1)[:, 0] == -1)
        assert np.all(np.sort(cm.A, axis=1)[:, -1] == 1)


class TestFeasibility:
    def test_hierarchy_violation(self):
        space = hierarchy_space(HierarchyDag(2, [(0, 1)]))
        assert not is_feasible(space, [0, 1])
        assert is_feasible(space, [1, 1])
        assert is_feasible(space, [0, 0])

    def test_multi_parent_needs_all_parents(self):
        G = HierarchyDag(3, [(0, 2), (1, 2)])
        space = hierarchy_space(G)
        assert not is_feasible(space, [1, 0, 1])
        assert is_feasible(space, [1, 1, 1])

    def test_assignment_matrix_and_ranks(self):
        space = assignment_space(3)
        P = np.eye(3, dtype=int)
        assert is_feasible(space, P)
        assert is_feasible(space, [2, 3, 1])
        assert not is_feasible(space, [1, 1, 3])
        bad = np.ones((3, 3), dtype=int)
        assert not is_feasible(space, bad)

    def test_zero_flow_with_zero_inflows(self):
        net = FlowNetwork(3, [(0, 1), (1, 2)], [0.0, 0.0, 0.0])
        assert is_feasible(flow_space(net), [0.0, 0.0])

    def test_flow_conservation_and_nonnegativity(self):
        net = FlowNetwork(3, [(0, 1), (1, 2)], [1.0, 0.0, -1.0])
        space = flow_space(net)
        assert is_feasible(space, [1.0, 1.0], 1e-9)
        assert not is_feasible(space, [1.0, 0.5], 1e-9)
        assert not is_feasible(space, [-1.0, -1.0], 1e-9)

    def test_circulation_invariance_on_cycle(self):
        # Adding flow around a cycle leaves all divergences unchanged.
        net = FlowNetwork(3, [(0, 1), (1, 2), (2, 0), (0, 2)], [0.0, 0.0, 0.0])
        space = flow_space(net)
        y = np.zeros(4)
        assert is_feasible(space, y, 1e-9)
        circ = np.array([1.0, 1.0, 1.0, 0.0])  # cycle 0->1->2->0
        for scale in (0.5, 1.0, 7.25):
            assert is_feasible(space, y + scale * circ, 1e-9)

    def test_explicit_membership(self):
        space = explicit_space([[0.0, 1.0], [1.0, 0.0]])
        assert is_feasible(space, [1.0, 0.0])
        assert not is_feasible(space, [0.5, 0.5])


class TestTotallyUnimodular:
    def _cm(self, A):
        A = np.atleast_2d(np.asarray(A))
        return ConstraintMatrix(A=A, rhs=np.zeros(A.shape[0]),
                                senses=("<=",) * A.shape[0])

    def test_identity_is_tu(self):
        assert is_totally_unimodular(self._cm(np.eye(4))) is True

    def test_two_by_two_counterexample(self):
        assert is_totally_unimodular(self._cm([[1, 1], [1, -1]])) is False

    def test_entries_outside_ternary_fail(self):
        assert is_totally_unimodular(self._cm([[2, 0], [0, 1]])) is False

    def test_hierarchy_matrices_are_tu(self, rng):
        for _ in range(10):
            G = random_tree(rng, int(rng.integers(2, 7)))
            assert is_totally_unimodular(hierarchy_constraint_matrix(G)) is True
        for _ in range(5):
            G = random_dag(rng, int(rng.integers(3, 7)), extra=2)
            assert is_totally_unimodular(hierarchy_constraint_matrix(G)) is True

    def test_assignment_matrices_are_tu(self):
        for d in (2, 3, 4):
            assert is_totally_unimodular(assignment_constraint_matrix(d)) is True

    def test_size_cap_yields_unknown(self):
        cm = self._cm(np.eye(30))
        assert is_totally_unimodular(cm, size_cap=10) is None


class TestEnumerate:
    def test_two_chain(self):
        space = hierarchy_space(HierarchyDag(2, [(0, 1)]))
        got = [tuple(y) for y in enumerate_space(space)]
        assert got == [(0, 0), (1, 0), (1, 1)]

    def test_assignment_count_and_order(self):
        space = assignment_space(3)
        perms = enumerate_space(space)
        assert len(perms) == math.factorial(3)
        assert [tuple(p) for p in perms] == sorted(tuple(p) for p in perms)

    def test_explicit_returns_own_list(self):
        space = explicit_space([[3.0], [1.0]])
        got = [tuple(y) for y in enumerate_space(space)]
        assert got == [(3.0,), (1.0,)]

    def test_all_outputs_feasible_no_duplicates(self, rng):
        for _ in range(5):
            G = random_dag(rng, int(rng.integers(3, 9)), extra=2)
            space = hierarchy_space(G)
            members = enumerate_space(space)
            keys = {tuple(y) for y in members}
            assert len(keys) == len(members)
            assert all(is_feasible(space, y) for y in members)

    def test_cap_enforced(self):
        with pytest.raises(ValueError):
            enumerate_space(assignment_space(8), cap=100)

    def test_continuous_rejected(self):
        net = FlowNetwork(2, [(0, 1)], [1.0, -1.0])
        with pytest.raises(ValueError):
            enumerate_space(flow_space(net))

    def test_duplicate_members_rejected(self):
        with pytest.raises(ValueError):
            explicit_space([[1.0], [1.0]])
