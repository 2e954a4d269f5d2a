"""Exact min-cost assignment by shortest augmenting paths with potentials.

Runs in O(d^3); entries may be negative or tie.  Ties in the augmenting
search prefer the smallest column index, so results are deterministic for
a given cost matrix.
"""

from __future__ import annotations

import math

import numpy as np


def solve_assignment(C) -> np.ndarray:
    """Minimum-cost perfect matching on a square cost matrix.

    Returns the permutation as a 1-based rank vector: entry ``j`` is the
    column (rank) assigned to row (label) ``j``, plus one.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    n = C.shape[0]
    if C.shape[0] != C.shape[1]:
        raise ValueError(f"cost matrix must be square, got {C.shape}")
    if not np.all(np.isfinite(C)):
        raise ValueError("cost matrix entries must be finite")

    INF = math.inf
    u = [0.0] * (n + 1)          # row potentials
    v = [0.0] * (n + 1)          # column potentials
    p = [0] * (n + 1)            # p[j] = row matched to column j (1-based, 0 = free)
    way = [0] * (n + 1)

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [INF] * (n + 1)
        used = [False] * (n + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = INF
            j1 = 0
            for j in range(1, n + 1):
                if used[j]:
                    continue
                cur = C[i0 - 1][j - 1] - u[i0] - v[j]
                if cur < minv[j]:
                    minv[j] = cur
                    way[j] = j0
                if minv[j] < delta:
                    delta = minv[j]
                    j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    sigma = np.zeros(n, dtype=np.int64)
    for j in range(1, n + 1):
        sigma[p[j] - 1] = j
    return sigma


def assignment_cost(C, sigma) -> float:
    """Cost of a rank vector under a cost matrix, summed in label order."""
    C = np.asarray(C, dtype=float)
    sigma = np.asarray(sigma, dtype=np.int64).ravel()
    return float(sum(C[j, sigma[j] - 1] for j in range(C.shape[0])))
