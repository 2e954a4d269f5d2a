"""Loss families over structured outputs.

Each discrete loss used for exact inference decomposes additively over the
coordinates of a binary encoding; ``additive_coefficients`` turns a loss
plus weighted training labels into the per-coordinate linear objective fed
to the combinatorial solvers, together with the constant offset that makes
objective values match the estimated conditional risk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hierarchy import HierarchyDag

LOSS_KINDS = ("zero_one", "hamming", "hierarchical", "footrule", "absolute", "square")


@dataclass(frozen=True)
class LossSpec:
    """Tagged loss family.

    ``hierarchy`` and the per-node penalty vector ``c`` are required for the
    hierarchical loss only; ``c`` defaults to the sibling weights.
    """

    kind: str
    hierarchy: HierarchyDag | None = None
    c: tuple | None = None

    def __init__(self, kind: str, hierarchy: HierarchyDag | None = None, c=None) -> None:
        if kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {kind!r}; expected one of {LOSS_KINDS}")
        if kind == "hierarchical":
            if hierarchy is None:
                raise ValueError("hierarchical loss requires a hierarchy")
            if not hierarchy.is_arborescence:
                raise ValueError("hierarchical loss is defined on arborescences only")
            if c is None:
                c = sibling_weights(hierarchy)
            c = tuple(float(v) for v in c)
            if len(c) != hierarchy.d:
                raise ValueError("penalty vector length does not match hierarchy size")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "hierarchy", hierarchy)
        object.__setattr__(self, "c", c)

    @property
    def penalties(self) -> np.ndarray:
        return np.asarray(self.c, dtype=float)


def hamming(y, yp) -> float:
    """Number of coordinates on which the two binary vectors disagree."""
    y = np.asarray(y).ravel()
    yp = np.asarray(yp).ravel()
    if y.shape != yp.shape:
        raise ValueError(f"length mismatch: {y.shape[0]} vs {yp.shape[0]}")
    return float(np.count_nonzero(y != yp))


def sibling_weights(G: HierarchyDag) -> np.ndarray:
    """Per-node penalties: 1 at the root, parent's weight split among siblings."""
    if not G.is_arborescence:
        raise ValueError("sibling weights require an arborescence")
    c = np.zeros(G.d)
    root = G.roots[0]
    c[root] = 1.0
    for j in G.topological_order:
        kids = G.children(j)
        for k in kids:
            c[k] = c[j] / len(kids)
    return c


def _check_hierarchy_feasible(G: HierarchyDag, y) -> np.ndarray:
    y = np.asarray(y).ravel()
    if y.shape[0] != G.d:
        raise ValueError(f"label length {y.shape[0]} does not match hierarchy size {G.d}")
    if not np.all((y == 0) | (y == 1)):
        raise ValueError("hierarchy labels must be 0/1 vectors")
    for p, ch in G.arcs:
        if y[ch] == 1 and y[p] == 0:
            raise ValueError(f"infeasible label: node {ch} active but parent {p} inactive")
    return y.astype(np.int64)


def hierarchical_loss(G: HierarchyDag, c, y, yp) -> float:
    """Direct definition: node ``j`` is penalized by ``c_j`` when it disagrees
    and every ancestor of ``j`` agrees."""
    if not G.is_arborescence:
        raise ValueError("hierarchical loss is defined on arborescences only")
    y = _check_hierarchy_feasible(G, y)
    yp = _check_hierarchy_feasible(G, yp)
    c = np.asarray(c, dtype=float)
    total = 0.0
    for j in range(G.d):
        if y[j] != yp[j] and all(y[k] == yp[k] for k in G.ancestors(j)):
            total += c[j]
    return total


def hierarchical_loss_closed(G: HierarchyDag, c, y, yp) -> float:
    """Closed form of the hierarchical loss: a root term plus one term per
    arc, each affine in both labels.  Agrees with the direct definition on
    all pairs of feasible labels."""
    if not G.is_arborescence:
        raise ValueError("hierarchical loss is defined on arborescences only")
    y = _check_hierarchy_feasible(G, y)
    yp = _check_hierarchy_feasible(G, yp)
    c = np.asarray(c, dtype=float)
    s = G.roots[0]
    total = c[s] * (y[s] + yp[s] - 2.0 * y[s] * yp[s])
    for parent, child in G.arcs:
        total += c[child] * (
            yp[child] * y[parent]
            + (yp[parent] - yp[parent] * yp[child] - yp[child]) * y[child]
        )
    return float(total)


def _check_permutation(sigma) -> np.ndarray:
    s = np.asarray(sigma).ravel()
    d = s.shape[0]
    if not np.array_equal(np.sort(s), np.arange(1, d + 1)):
        raise ValueError("not a permutation of 1..d")
    return s.astype(np.int64)


def footrule(sigma, sigmap) -> float:
    """Sum of absolute rank differences between two permutations of 1..d."""
    s = _check_permutation(sigma)
    sp = _check_permutation(sigmap)
    if s.shape != sp.shape:
        raise ValueError(f"length mismatch: {s.shape[0]} vs {sp.shape[0]}")
    return float(np.sum(np.abs(s - sp)))


def vector_loss(kind: str, y, yp) -> float:
    """Absolute (L1) or square (squared L2) loss between real vectors."""
    y = np.asarray(y, dtype=float).ravel()
    yp = np.asarray(yp, dtype=float).ravel()
    if y.shape != yp.shape:
        raise ValueError(f"length mismatch: {y.shape[0]} vs {yp.shape[0]}")
    if kind == "absolute":
        return float(np.sum(np.abs(y - yp)))
    if kind == "square":
        d = y - yp
        return float(np.dot(d, d))
    raise ValueError(f"vector_loss expects 'absolute' or 'square', got {kind!r}")


def loss_value(spec: LossSpec, y, yp) -> float:
    """Evaluate a tagged loss on a pair of outputs."""
    if spec.kind == "zero_one":
        a = np.asarray(y).ravel()
        b = np.asarray(yp).ravel()
        return float(not np.array_equal(a, b))
    if spec.kind == "hamming":
        return hamming(y, yp)
    if spec.kind == "hierarchical":
        return hierarchical_loss_closed(spec.hierarchy, spec.penalties, y, yp)
    if spec.kind == "footrule":
        return footrule(y, yp)
    return vector_loss(spec.kind, y, yp)


def additive_coefficients(spec: LossSpec, labels, w):
    """Per-coordinate linear objective of the weighted empirical risk.

    Returns ``(coeffs, offset)`` such that for every feasible binary
    encoding ``y`` the estimated risk equals ``sum(coeffs * y) + offset``.
    Coefficient shape is ``(d,)`` for Hamming/hierarchical and ``(d, d)``
    (label-by-rank cost matrix) for the footrule.
    """
    w = np.asarray(w, dtype=float)
    Y = np.asarray(labels)
    if spec.kind == "hamming":
        Y = Y.astype(float)
        coeffs = (1.0 - 2.0 * Y).T @ w
        offset = float(w @ Y.sum(axis=1))
        return coeffs, offset
    if spec.kind == "hierarchical":
        G = spec.hierarchy
        c = spec.penalties
        Y = Y.astype(float)
        coeffs = np.zeros(G.d)
        s = G.roots[0]
        coeffs[s] = c[s] * float(w @ (1.0 - 2.0 * Y[:, s]))
        offset = c[s] * float(w @ Y[:, s])
        for parent, child in G.arcs:
            coeffs[parent] += c[child] * float(w @ Y[:, child])
            coeffs[child] += c[child] * float(
                w @ (Y[:, parent] - Y[:, parent] * Y[:, child] - Y[:, child])
            )
        return coeffs, offset
    if spec.kind == "footrule":
        return footrule_cost_matrix(Y, w), 0.0
    raise ValueError(f"loss kind {spec.kind!r} has no additive binary decomposition")


def footrule_cost_matrix(sigmas, w) -> np.ndarray:
    """Assignment costs ``C[j,k] = sum_i w_i |(k+1) - sigma_i(j)|``.

    Placing label ``j`` at rank ``k+1`` contributes ``C[j,k]`` to the
    weighted footrule risk.
    """
    S = np.asarray(sigmas, dtype=float)
    w = np.asarray(w, dtype=float)
    d = S.shape[1]
    ranks = np.arange(1, d + 1, dtype=float)
    # |rank - sigma_i(j)| has shape (m, d, d): sample, label, candidate rank.
    diffs = np.abs(ranks[None, None, :] - S[:, :, None])
    return np.einsum("i,ijk->jk", w, diffs)


def loss_bound(spec: LossSpec, space=None) -> float:
    """Finite upper bound ``sup loss`` given the output space."""
    if spec.kind == "zero_one":
        return 1.0
    if spec.kind == "hierarchical":
        return float(np.sum(spec.penalties))
    if spec.kind == "hamming":
        if spec.hierarchy is not None:
            return float(spec.hierarchy.d)
        d = _space_dim(space)
        return float(d)
    if spec.kind == "footrule":
        d = _space_dim(space)
        return float((d * d) // 2)
    if spec.kind in ("absolute", "square"):
        # Convex losses attain their supremum at vertex pairs.
        verts = _space_vertices(space)
        best = 0.0
        for i in range(len(verts)):
            for j in range(i + 1, len(verts)):
                best = max(best, vector_loss(spec.kind, verts[i], verts[j]))
        return best
    raise ValueError(f"no bound rule for loss kind {spec.kind!r}")


def _space_dim(space) -> int:
    if space is None:
        raise ValueError("loss bound requires an output space for this loss kind")
    from .spaces import OutputSpace

    if isinstance(space, OutputSpace):
        return space.dim
    return int(space)


def _space_vertices(space):
    from .flow_opt import enumerate_path_vertices
    from .spaces import OutputSpace

    if isinstance(space, OutputSpace):
        if space.kind == "explicit_finite":
            return [np.asarray(mbr, dtype=float) for mbr in space.members]
        if space.kind == "flow_polytope":
            return list(enumerate_path_vertices(space.network))
    raise ValueError("loss bound for vector losses needs an explicit or flow space")
