"""Exact hierarchy inference as a maximum-weight closure problem.

Minimizing a linear objective ``c . y`` over hierarchy-feasible binary
vectors is the complement of picking a maximum-weight set of nodes closed
under "child requires parent".  That closure problem reduces to a minimum
s-t cut: source arcs carry the positive node weights, sink arcs the
negative ones, and dependency arcs get infinite capacity.  Because the
relaxed constraint system is totally unimodular, the cut optimum matches
the linear-programming optimum and is integral, so the reduction is exact
for any real cost vector.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from .hierarchy import HierarchyDag


class _MaxFlow:
    """Dinic's algorithm on an adjacency-list residual graph."""

    def __init__(self, n: int) -> None:
        self.n = n
        self.to: list[int] = []
        self.cap: list[float] = []
        self.head: list[list[int]] = [[] for _ in range(n)]

    def add_edge(self, u: int, v: int, c: float) -> None:
        self.head[u].append(len(self.to))
        self.to.append(v)
        self.cap.append(c)
        self.head[v].append(len(self.to))
        self.to.append(u)
        self.cap.append(0.0)

    def _bfs(self, s: int, t: int, eps: float) -> list[int] | None:
        level = [-1] * self.n
        level[s] = 0
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.head[u]:
                v = self.to[e]
                if self.cap[e] > eps and level[v] < 0:
                    level[v] = level[u] + 1
                    q.append(v)
        return level if level[t] >= 0 else None

    def _dfs(self, u: int, t: int, f: float, level, it, eps: float) -> float:
        if u == t:
            return f
        while it[u] < len(self.head[u]):
            e = self.head[u][it[u]]
            v = self.to[e]
            if self.cap[e] > eps and level[v] == level[u] + 1:
                d = self._dfs(v, t, min(f, self.cap[e]), level, it, eps)
                if d > 0.0:
                    self.cap[e] -= d
                    self.cap[e ^ 1] += d
                    return d
            it[u] += 1
        return 0.0

    def max_flow(self, s: int, t: int, eps: float) -> float:
        total = 0.0
        while True:
            level = self._bfs(s, t, eps)
            if level is None:
                return total
            it = [0] * self.n
            while True:
                f = self._dfs(s, t, math.inf, level, it, eps)
                if f <= 0.0:
                    break
                total += f

    def reachable_from(self, s: int, eps: float) -> list[bool]:
        seen = [False] * self.n
        seen[s] = True
        q = deque([s])
        while q:
            u = q.popleft()
            for e in self.head[u]:
                v = self.to[e]
                if self.cap[e] > eps and not seen[v]:
                    seen[v] = True
                    q.append(v)
        return seen


def solve_hierarchy(costs, G: HierarchyDag) -> np.ndarray:
    """Exact minimizer of ``costs . y`` over hierarchy-feasible {0,1}^d.

    Among the optima the inclusion-minimal one is returned; optimal
    closures are closed under intersection, so that point is also the
    lexicographically smallest optimum.
    """
    c = np.asarray(costs, dtype=float).ravel()
    if c.shape[0] != G.d:
        raise ValueError(f"cost length {c.shape[0]} does not match hierarchy size {G.d}")
    if not np.all(np.isfinite(c)):
        raise ValueError("costs must be finite")
    weights = -c  # maximize total weight of the selected closure
    if not np.any(weights > 0):
        return np.zeros(G.d, dtype=np.int64)
    scale = float(np.max(np.abs(weights)))
    eps = 1e-12 * max(1.0, scale)
    s, t = G.d, G.d + 1
    mf = _MaxFlow(G.d + 2)
    for j in range(G.d):
        if weights[j] > 0:
            mf.add_edge(s, j, weights[j])
        elif weights[j] < 0:
            mf.add_edge(j, t, -weights[j])
    for parent, child in G.arcs:
        # Selecting the child forces the parent into the closure.
        mf.add_edge(child, parent, math.inf)
    mf.max_flow(s, t, eps)
    reach = mf.reachable_from(s, eps)
    y = np.array([1 if reach[j] else 0 for j in range(G.d)], dtype=np.int64)
    return y
