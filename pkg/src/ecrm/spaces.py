"""Structured output spaces, feasibility checks and total-unimodularity tests."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .hierarchy import HierarchyDag

SPACE_KINDS = ("hierarchy", "assignment", "flow_polytope", "explicit_finite")

DEFAULT_CONTINUOUS_TOL = 1e-9


@dataclass(frozen=True)
class FlowNetwork:
    """Directed network with per-node external inflows ``b``.

    A flow vector assigns one value per arc; feasibility means nonnegative
    flows whose node divergences (outflow minus inflow) equal ``b``.  The
    inflows must sum to zero.  Cycles are allowed here; path-based routines
    (LMO, simulation) require acyclic networks and check separately.
    """

    n_nodes: int
    arcs: tuple[tuple[int, int], ...]
    b: tuple[float, ...]
    _paths: list = field(default=None, init=False, repr=False, compare=False)

    def __init__(self, n_nodes: int, arcs, b) -> None:
        arcs = tuple((int(t), int(h)) for t, h in arcs)
        b = tuple(float(v) for v in b)
        if len(b) != n_nodes:
            raise ValueError(f"b has {len(b)} entries for {n_nodes} nodes")
        for t, h in arcs:
            if not (0 <= t < n_nodes and 0 <= h < n_nodes):
                raise ValueError(f"arc ({t},{h}) references a node outside 0..{n_nodes - 1}")
            if t == h:
                raise ValueError(f"self-loop at node {t}")
        if abs(sum(b)) > 1e-9:
            raise ValueError("external inflows must sum to zero")
        object.__setattr__(self, "n_nodes", n_nodes)
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_paths", None)

    @property
    def n_arcs(self) -> int:
        return len(self.arcs)

    def topological_order(self) -> list[int] | None:
        """Node order with all arcs forward, or None when the graph has a cycle."""
        indeg = [0] * self.n_nodes
        out = [[] for _ in range(self.n_nodes)]
        for t, h in self.arcs:
            indeg[h] += 1
            out[t].append(h)
        order = [v for v in range(self.n_nodes) if indeg[v] == 0]
        head = 0
        while head < len(order):
            u = order[head]
            head += 1
            for v in out[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    order.append(v)
        return order if len(order) == self.n_nodes else None

    @property
    def is_acyclic(self) -> bool:
        return self.topological_order() is not None

    def unit_endpoints(self) -> tuple[int, int]:
        """Source and sink for a unit-throughput network (b is one +1, one -1)."""
        src = [j for j, v in enumerate(self.b) if v != 0.0 and v > 0]
        snk = [j for j, v in enumerate(self.b) if v != 0.0 and v < 0]
        if len(src) != 1 or len(snk) != 1 or self.b[src[0]] != 1.0 or self.b[snk[0]] != -1.0:
            raise ValueError("network does not have a single unit source and unit sink")
        return src[0], snk[0]

    def divergence(self, y) -> np.ndarray:
        """Node-wise outflow minus inflow for an arc vector."""
        y = np.asarray(y, dtype=float).ravel()
        if y.shape[0] != self.n_arcs:
            raise ValueError(f"flow has {y.shape[0]} entries for {self.n_arcs} arcs")
        div = np.zeros(self.n_nodes)
        for a, (t, h) in enumerate(self.arcs):
            div[t] += y[a]
            div[h] -= y[a]
        return div


@dataclass(frozen=True)
class ConstraintMatrix:
    """Linear constraint system ``A y (sense) b`` with senses in {<=, >=, =}."""

    A: np.ndarray
    rhs: np.ndarray
    senses: tuple[str, ...]

    def __post_init__(self) -> None:
        A = np.atleast_2d(np.asarray(self.A))
        rhs = np.asarray(self.rhs, dtype=float).ravel()
        if A.shape[0] != rhs.shape[0] or A.shape[0] != len(self.senses):
            raise ValueError("row count, rhs and senses must agree")
        for s in self.senses:
            if s not in ("<=", ">=", "="):
                raise ValueError(f"bad sense {s!r}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "rhs", rhs)


@dataclass(frozen=True)
class OutputSpace:
    kind: str
    hierarchy: HierarchyDag | None = None
    dim: int | None = None
    network: FlowNetwork | None = None
    members: tuple | None = None


def hierarchy_space(G: HierarchyDag) -> OutputSpace:
    return OutputSpace(kind="hierarchy", hierarchy=G, dim=G.d)


def assignment_space(d: int) -> OutputSpace:
    if d < 1:
        raise ValueError("assignment space needs d >= 1")
    return OutputSpace(kind="assignment", dim=int(d))


def flow_space(net: FlowNetwork) -> OutputSpace:
    return OutputSpace(kind="flow_polytope", network=net, dim=net.n_arcs)


def explicit_space(members) -> OutputSpace:
    canon = tuple(tuple(float(v) for v in np.asarray(m).ravel()) for m in members)
    if len(set(canon)) != len(canon):
        raise ValueError("explicit space members must be duplicate-free")
    if not canon:
        raise ValueError("explicit space must be nonempty")
    dims = {len(c) for c in canon}
    if len(dims) != 1:
        raise ValueError("explicit space members must share a dimension")
    return OutputSpace(kind="explicit_finite", members=canon, dim=dims.pop())


def hierarchy_constraint_matrix(G: HierarchyDag) -> ConstraintMatrix:
    """One row per arc: +1 on the child, -1 on the parent, ``<= 0``."""
    A = np.zeros((len(G.arcs), G.d), dtype=np.int64)
    for r, (parent, child) in enumerate(G.arcs):
        A[r, child] = 1
        A[r, parent] = -1
    return ConstraintMatrix(A=A, rhs=np.zeros(len(G.arcs)), senses=("<=",) * len(G.arcs))


def assignment_constraint_matrix(d: int) -> ConstraintMatrix:
    """Bipartite perfect-matching system over the d*d placement variables."""
    A = np.zeros((2 * d, d * d), dtype=np.int64)
    for j in range(d):
        A[j, j * d:(j + 1) * d] = 1          # each label gets one rank
    for k in range(d):
        A[d + k, k::d] = 1                   # each rank gets one label
    return ConstraintMatrix(A=A, rhs=np.ones(2 * d), senses=("=",) * (2 * d))


def flow_constraint_matrix(net: FlowNetwork) -> ConstraintMatrix:
    """Node-arc incidence rows (divergence = b) for a flow network."""
    A = np.zeros((net.n_nodes, net.n_arcs), dtype=np.int64)
    for a, (t, h) in enumerate(net.arcs):
        A[t, a] = 1
        A[h, a] = -1
    return ConstraintMatrix(A=A, rhs=np.asarray(net.b), senses=("=",) * net.n_nodes)


def is_feasible(space: OutputSpace, y, tol: float | None = None) -> bool:
    """Membership test; exact for the discrete kinds, tolerance-based for flows."""
    if space.kind == "hierarchy":
        y = np.asarray(y).ravel()
        G = space.hierarchy
        if y.shape[0] != G.d:
            raise ValueError(f"label length {y.shape[0]} does not match hierarchy size {G.d}")
        if not np.all((y == 0) | (y == 1)):
            return False
        return all(not (y[ch] == 1 and y[p] == 0) for p, ch in G.arcs)
    if space.kind == "assignment":
        d = space.dim
        y = np.asarray(y)
        if y.ndim == 2:
            if y.shape != (d, d):
                raise ValueError(f"assignment matrix must be {d}x{d}")
            if not np.all((y == 0) | (y == 1)):
                return False
            return bool(np.all(y.sum(axis=0) == 1) and np.all(y.sum(axis=1) == 1))
        y = y.ravel()
        if y.shape[0] != d:
            raise ValueError(f"rank vector length {y.shape[0]} does not match d={d}")
        return bool(np.array_equal(np.sort(y), np.arange(1, d + 1)))
    if space.kind == "flow_polytope":
        tol = DEFAULT_CONTINUOUS_TOL if tol is None else tol
        net = space.network
        y = np.asarray(y, dtype=float).ravel()
        if y.shape[0] != net.n_arcs:
            raise ValueError(f"flow has {y.shape[0]} entries for {net.n_arcs} arcs")
        if np.any(y < -tol):
            return False
        resid = net.divergence(y) - np.asarray(net.b)
        return bool(np.max(np.abs(resid)) <= tol)
    if space.kind == "explicit_finite":
        key = tuple(float(v) for v in np.asarray(y).ravel())
        return key in space.members
    raise ValueError(f"unknown space kind {space.kind!r}")


def flow_residual(net: FlowNetwork, y) -> float:
    """Max absolute conservation violation, including negativity of flows."""
    y = np.asarray(y, dtype=float).ravel()
    resid = float(np.max(np.abs(net.divergence(y) - np.asarray(net.b))))
    neg = float(max(0.0, -np.min(y))) if y.size else 0.0
    return max(resid, neg)


def is_totally_unimodular(cm: ConstraintMatrix, size_cap: int = 2_000_000) -> bool | None:
    """Exhaustively test every square submatrix determinant.

    Returns True/False, or None ("unknown") when the number of square
    submatrices exceeds ``size_cap``.  This is a brute-force verification
    utility, not part of the inference path.
    """
    A = np.asarray(cm.A, dtype=float)
    n, d = A.shape
    kmax = min(n, d)
    total = sum(math.comb(n, k) * math.comb(d, k) for k in range(1, kmax + 1))
    if total > size_cap:
        return None
    if not np.all(np.isin(A, (-1.0, 0.0, 1.0))):
        return False
    for k in range(2, kmax + 1):
        rows = list(itertools.combinations(range(n), k))
        cols = list(itertools.combinations(range(d), k))
        col_arr = np.array(cols)
        # Batch determinants one row-combination at a time.
        for rsel in rows:
            A_rows = A[np.array(rsel)]
            sub = A_rows[:, col_arr].transpose(1, 0, 2)  # (n_col_combos, k, k)
            dets = np.linalg.det(sub)
            if np.any(np.abs(np.abs(np.round(dets)) - np.abs(dets)) > 1e-6):
                return False
            if np.any(np.abs(np.round(dets)) > 1.5):
                return False
    return True


def enumerate_space(space: OutputSpace, cap: int = 1_000_000) -> list[np.ndarray]:
    """All members of a discrete space, in lexicographic order of the encoding.

    Raises when the member count would exceed ``cap`` or the space is
    continuous.
    """
    if space.kind == "explicit_finite":
        if len(space.members) > cap:
            raise ValueError(f"space has {len(space.members)} members, cap is {cap}")
        return [np.asarray(m, dtype=float) for m in space.members]
    if space.kind == "assignment":
        d = space.dim
        if math.factorial(d) > cap:
            raise ValueError(f"space has {math.factorial(d)} members, cap is {cap}")
        return [np.array(p, dtype=np.int64) for p in itertools.permutations(range(1, d + 1))]
    if space.kind == "hierarchy":
        G = space.hierarchy
        if G.d > 24:
            raise ValueError("hierarchy too large to enumerate exhaustively")
        n = 1 << G.d
        # Bit i of the counter is coordinate i, most significant first, so
        # candidates come out in lexicographic order.
        cand = (np.arange(n, dtype=np.int64)[:, None] >> np.arange(G.d - 1, -1, -1)) & 1
        ok = np.ones(n, dtype=bool)
        for p, ch in G.arcs:
            ok &= cand[:, ch] <= cand[:, p]
        feas = cand[ok]
        if feas.shape[0] > cap:
            raise ValueError(f"space has {feas.shape[0]} members, cap is {cap}")
        return [feas[i] for i in range(feas.shape[0])]
    raise ValueError(f"cannot enumerate a {space.kind} space")
