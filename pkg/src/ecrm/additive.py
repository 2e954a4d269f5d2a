"""Additive conditional-risk model with a joint input-output kernel.

Per-node risks are estimated jointly: the score of assigning value v to
node j at input x is a kernel expansion with one coefficient per (training
sample, node, value) triple, where a node's expansion sums over its
neighborhood in the hierarchy.  The total estimated risk is the sum of node
scores, which is affine in each label coordinate, so exact inference
reduces to the same linear objective the closure solver handles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .closure import solve_hierarchy
from .errors import NumericalError
from .hierarchy import HierarchyDag
from .kernels import KernelSpec, gram_matrix, kernel_vector
from .losses import _check_hierarchy_feasible
from .results import EXACT, InferenceResult

NEIGHBOR_RULES = ("adjacent", "self")

_DENSE_LIMIT = 4000


@dataclass(frozen=True)
class JointKernelSpec:
    """Base input kernel plus the node-neighborhood rule of the joint kernel.

    ``adjacent`` couples each node with its hierarchy neighbors (parents,
    children and itself); ``self`` decouples the nodes entirely.
    """

    base: KernelSpec
    neighbors: str = "adjacent"

    def __post_init__(self) -> None:
        if self.neighbors not in NEIGHBOR_RULES:
            raise ValueError(f"neighbors must be one of {NEIGHBOR_RULES}")


@dataclass(frozen=True)
class AdditiveModel:
    """Fitted coefficients, indexed as alpha[sample, node, value]."""

    alpha: np.ndarray
    joint: JointKernelSpec
    lam: float
    hierarchy: HierarchyDag
    inputs: np.ndarray

    @property
    def m(self) -> int:
        return self.inputs.shape[0]

    @property
    def d(self) -> int:
        return self.hierarchy.d


def neighborhood_matrix(G: HierarchyDag, rule: str) -> np.ndarray:
    """0/1 node-coupling matrix: identity, plus adjacency for the default rule."""
    N = np.eye(G.d)
    if rule == "adjacent":
        for p, c in G.arcs:
            N[p, c] = 1.0
            N[c, p] = 1.0
    return N


def fit_additive(X, Y, G: HierarchyDag, joint: JointKernelSpec, lam: float) -> AdditiveModel:
    """Fit the per-node risk estimates by regularized least squares.

    The stationarity system ``(Gram + lambda I) alpha = targets`` is solved
    densely up to 2*m*d = 4000 unknowns and by MINRES beyond that.  The
    targets are the node-wise disagreement losses of both label values
    against each training label.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.asarray(Y)
    m, d = X.shape[0], G.d
    if Y.shape != (m, d):
        raise ValueError(f"labels must be {m}x{d} binary vectors")
    for i in range(m):
        _check_hierarchy_feasible(G, Y[i])

    Kx = gram_matrix(joint.base, X)
    N = neighborhood_matrix(G, joint.neighbors)
    # Targets t[(i, j, v)] = 1(v != Y[i, j]) with index order (sample, node, value).
    t = np.empty((m, d, 2))
    t[:, :, 0] = (Y != 0).astype(float)
    t[:, :, 1] = (Y != 1).astype(float)
    t = t.reshape(-1)

    n = 2 * m * d
    if n <= _DENSE_LIMIT:
        Gram = np.kron(Kx, np.kron(N, np.eye(2)))
        try:
            alpha = scipy.linalg.solve(Gram + lam * np.eye(n), t, assume_a="sym")
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
            raise NumericalError("additive system is singular; increase lambda") from exc
        if not np.all(np.isfinite(alpha)):
            raise NumericalError("additive system is singular; increase lambda")
    else:
        def matvec(v):
            V = v.reshape(m, d, 2)
            out = np.einsum("ij,jkl->ikl", Kx, np.einsum("kq,jql->jkl", N, V))
            return out.reshape(-1) + lam * v

        op = scipy.sparse.linalg.LinearOperator((n, n), matvec=matvec)
        alpha, info = scipy.sparse.linalg.minres(op, t, rtol=1e-7 / max(1.0, np.linalg.norm(t)))
        if info != 0:
            raise NumericalError("iterative additive solve did not converge")

    return AdditiveModel(alpha=alpha.reshape(m, d, 2), joint=joint, lam=lam,
                         hierarchy=G, inputs=X)


def node_scores(model: AdditiveModel, x) -> tuple[np.ndarray, np.ndarray]:
    """Per-node estimated risks of the off (0) and on (1) label values."""
    v = kernel_vector(model.joint.base, model.inputs, x)
    N = neighborhood_matrix(model.hierarchy, model.joint.neighbors)
    off = N @ (v @ model.alpha[:, :, 0])
    on = N @ (v @ model.alpha[:, :, 1])
    return off, on


def additive_risk(model: AdditiveModel, x, y) -> float:
    """Estimated conditional risk: sum of node scores, affine in each y_j."""
    y = _check_hierarchy_feasible(model.hierarchy, y)
    off, on = node_scores(model, x)
    return float(np.sum(off + y * (on - off)))


def infer_additive(model: AdditiveModel, x) -> InferenceResult:
    """Exact risk minimizer over the hierarchy via the closure solver."""
    off, on = node_scores(model, x)
    coeffs = on - off
    y = solve_hierarchy(coeffs, model.hierarchy)
    return InferenceResult(y_star=y, objective=float(np.sum(off) + coeffs @ y),
                           certificate=EXACT)
