"""Kernel families and Gram matrix construction.

Only two kernels are supported: the linear kernel ``k(x,x') = <x,x'>`` and
the RBF kernel ``k(x,x') = exp(-gamma * ||x - x'||^2)``.  Gram entries are
computed by a formula that is symmetric under exchanging the two arguments,
so Gram matrices are exactly symmetric (bitwise), not merely up to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

VALID_KINDS = ("linear", "rbf")

# Rows per chunk when building RBF blocks; bounds peak memory of the
# (rows, m, p) difference tensor.
_CHUNK_ELEMS = 4_000_000


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice plus parameters.

    gamma is the RBF bandwidth and must be positive; it is ignored for the
    linear kernel.
    """

    kind: str
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in VALID_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}; expected one of {VALID_KINDS}")
        if self.kind == "rbf":
            if self.gamma is None or not (self.gamma > 0):
                raise ValueError("rbf kernel requires gamma > 0")


def eval_kernel(spec: KernelSpec, x, xp) -> float:
    """Evaluate ``k(x, x')`` for two feature vectors of equal dimension."""
    x = np.asarray(x, dtype=float).ravel()
    xp = np.asarray(xp, dtype=float).ravel()
    if x.shape != xp.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {xp.shape[0]}")
    if spec.kind == "linear":
        return float(np.dot(x, xp))
    diff = x - xp
    return float(np.exp(-spec.gamma * np.dot(diff, diff)))


def cross_gram(spec: KernelSpec, A, B) -> np.ndarray:
    """Kernel matrix ``[k(a_i, b_j)]`` for row sets A (n,p) and B (m,p)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if spec.kind == "linear":
        # einsum keeps a fixed per-entry reduction order, so K[i,j] and
        # K[j,i] are bitwise equal when A is B.
        return np.einsum("ip,jp->ij", A, B)
    out = np.empty((A.shape[0], B.shape[0]))
    step = max(1, _CHUNK_ELEMS // max(1, B.shape[0] * B.shape[1]))
    for lo in range(0, A.shape[0], step):
        hi = min(lo + step, A.shape[0])
        diff = A[lo:hi, None, :] - B[None, :, :]
        out[lo:hi] = np.exp(-spec.gamma * np.einsum("ijp,ijp->ij", diff, diff))
    return out


def gram_matrix(spec: KernelSpec, X) -> np.ndarray:
    """Gram matrix of the training inputs; exactly symmetric."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] < 1:
        raise ValueError("need at least one input row")
    return cross_gram(spec, X, X)


def kernel_vector(spec: KernelSpec, X, x) -> np.ndarray:
    """The vector ``[k(x, x_i)]_i`` against stored training inputs."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != X.shape[1]:
        raise ValueError(f"dimension mismatch: query has {x.shape[0]} features, model has {X.shape[1]}")
    return cross_gram(spec, x[None, :], X)[0]


def kernel_sup_bound(spec: KernelSpec, X) -> float:
    """Upper bound on ``k(x,x)`` used by the generalization bound.

    Exactly 1 for RBF; for the linear kernel we use the maximum over the
    training inputs (the bound is input-domain dependent).
    """
    if spec.kind == "rbf":
        return 1.0
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return float(np.max(np.einsum("ip,ip->i", X, X)))
