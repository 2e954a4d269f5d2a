"""Surrogate-loss and generalization-bound analysis for the risk minimizer.

The margin surrogate at level ``rho`` is

    min( L,  max_{y'} [ loss(y', y) + (margin(y', x)) / rho ] )

where ``margin(y', x)`` is the (nonpositive) difference between the best
achievable estimated risk at ``x`` and the estimated risk of ``y'``, and
``L`` caps the value at the loss bound.  For additively-decomposable losses
on totally unimodular spaces the inner maximization is solved exactly by
the same combinatorial machinery as prediction, with negated coefficients;
on flow polytopes it falls back to the continuous solvers and the result is
flagged as heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assignment import assignment_cost, solve_assignment
from .closure import solve_hierarchy
from .flow_opt import solve_flow_abs, solve_flow_sq
from .inference import infer, infer_from_weights
from .losses import LossSpec, additive_coefficients, loss_bound, loss_value
from .model import TrainedModel, estimate_conditional_risk, weights
from .results import SolverParams
from .spaces import OutputSpace, enumerate_space


@dataclass(frozen=True)
class SurrogateConfig:
    """Parameters of the capped margin surrogate."""

    rho: float
    L: float
    space: OutputSpace

    def __post_init__(self) -> None:
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not self.L > 0:
            raise ValueError("the loss cap L must be positive")


def make_surrogate_config(rho: float, loss: LossSpec, space: OutputSpace) -> SurrogateConfig:
    return SurrogateConfig(rho=rho, L=loss_bound(loss, space), space=space)


def delta(model: TrainedModel, loss: LossSpec, space: OutputSpace, yprime, x,
          params: SolverParams | None = None) -> float:
    """Risk margin of a candidate: best risk at ``x`` minus its own risk (<= 0)."""
    best = infer(model, loss, space, x, params)
    return best.objective - estimate_conditional_risk(model, loss, yprime, x)


def _explicit_risks(w, labels, loss: LossSpec, space: OutputSpace):
    members = enumerate_space(space)
    risks = np.array([
        float(np.dot(w, [loss_value(loss, mbr, labels[i]) for i in range(len(labels))]))
        for mbr in members
    ])
    return members, risks


def realized_loss(model: TrainedModel, loss: LossSpec, space: OutputSpace, x, y,
                  params: SolverParams | None = None) -> float:
    """Loss of the risk-minimizing prediction against ``y``.

    When the risk minimizer is not unique on a finite space, the minimizer
    with the highest loss is charged (the pessimistic reading used by the
    surrogate analysis).
    """
    wv = weights(model, x)
    if space.kind in ("explicit_finite",):
        members, risks = _explicit_risks(wv.effective, model.labels, loss, space)
        rmin = float(np.min(risks))
        return max(loss_value(loss, members[i], y)
                   for i in range(len(members)) if risks[i] == rmin)
    result = infer(model, loss, space, x, params)
    return loss_value(loss, result.y_star, y)


def surrogate_loss(model: TrainedModel, loss: LossSpec, cfg: SurrogateConfig, x, y,
                   params: SolverParams | None = None) -> float:
    value, _ = surrogate_loss_detailed(model, loss, cfg, x, y, params)
    return value


def surrogate_loss_detailed(model: TrainedModel, loss: LossSpec, cfg: SurrogateConfig,
                            x, y, params: SolverParams | None = None) -> tuple[float, str]:
    """Capped margin surrogate plus how the inner maximization was certified
    ("exact" or "heuristic")."""
    space = cfg.space
    rho = cfg.rho
    wv = weights(model, x)
    w = wv.effective
    labels = model.labels

    if space.kind == "explicit_finite":
        members, risks = _explicit_risks(w, labels, loss, space)
        rmin = float(np.min(risks))
        vals = [loss_value(loss, members[i], y) + (rmin - risks[i]) / rho
                for i in range(len(members))]
        return min(cfg.L, max(vals)), "exact"

    if space.kind in ("hierarchy", "assignment"):
        risk_coeffs, risk_offset = additive_coefficients(loss, labels, w)
        # loss(y', y) viewed as a one-sample risk with unit weight; both
        # discrete losses here are symmetric in their arguments.
        loss_coeffs, loss_offset = additive_coefficients(loss, np.asarray(y)[None, :],
                                                         np.ones(1))
        if space.kind == "hierarchy":
            rmin = float(risk_coeffs @ solve_hierarchy(risk_coeffs, space.hierarchy)
                         + risk_offset)
            combined = loss_coeffs - risk_coeffs / rho
            ystar = solve_hierarchy(-combined, space.hierarchy)
            inner = float(combined @ ystar) + loss_offset + (rmin - risk_offset) / rho
        else:
            rmin = assignment_cost(risk_coeffs, solve_assignment(risk_coeffs)) + risk_offset
            combined = loss_coeffs - risk_coeffs / rho
            sigma = solve_assignment(-combined)
            inner = (assignment_cost(combined, sigma) + loss_offset
                     + (rmin - risk_offset) / rho)
        return min(cfg.L, inner), "exact"

    if space.kind == "flow_polytope":
        best = infer_from_weights(w, labels, loss, space, params)
        rmin = best.objective
        # max_y' [loss(y',y) - risk(y')/rho] = -min_y' of the same weighted
        # objective with the candidate label prepended at weight -1.
        aug_w = np.concatenate(([-1.0], w / rho))
        aug_labels = np.vstack([np.asarray(y, dtype=float)[None, :], np.asarray(labels)])
        if loss.kind == "absolute":
            res = solve_flow_abs(aug_w, aug_labels, space.network, params)
        elif loss.kind == "square":
            res = solve_flow_sq(aug_w, aug_labels, space.network, params)
        else:
            raise ValueError(f"loss {loss.kind!r} not supported on flow polytopes")
        inner = -res.objective + rmin / rho
        return min(cfg.L, inner), "heuristic"

    raise ValueError(f"surrogate loss not supported on {space.kind} spaces")


def empirical_surrogate_risk(model: TrainedModel, loss: LossSpec, cfg: SurrogateConfig,
                             X, Y, params: SolverParams | None = None) -> float:
    """Mean surrogate loss over a dataset."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    vals = [surrogate_loss(model, loss, cfg, X[i], Y[i], params)
            for i in range(X.shape[0])]
    return float(np.mean(vals))


@dataclass(frozen=True)
class BoundInputs:
    """Quantities entering the generalization bound."""

    empirical_risk: float
    L: float
    kappa: float
    lam: float
    rho: float
    delta: float
    m: int

    def __post_init__(self) -> None:
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if not (self.lam > 0 and self.rho > 0 and self.m >= 1):
            raise ValueError("lambda, rho must be positive and m >= 1")


def stability_factor(kappa: float, lam: float) -> float:
    """The kernel/regularization factor ``kappa/lambda + (kappa/lambda)^1.5``."""
    r = kappa / lam
    return r + r ** 1.5


def generalization_bound_terms(b: BoundInputs) -> tuple[float, float, float, float]:
    """(empirical risk, stability term, confidence term, total bound)."""
    nu = stability_factor(b.kappa, b.lam)
    stability = 4.0 * b.L * nu / (b.rho * b.m)
    confidence = b.L * (8.0 * nu / b.rho + 1.0) * math.sqrt(math.log(1.0 / b.delta) / (2.0 * b.m))
    return b.empirical_risk, stability, confidence, b.empirical_risk + stability + confidence


def generalization_bound(b: BoundInputs) -> float:
    """High-probability upper bound on the expected risk of the predictor."""
    return generalization_bound_terms(b)[3]


def bayes_conditional_risk(sampler, x, loss: LossSpec, space: OutputSpace,
                           n_mc: int = 20_000, seed: int = 0,
                           params: SolverParams | None = None) -> float:
    """Monte-Carlo estimate of the best achievable conditional risk at ``x``.

    ``sampler(x, n, seed)`` must draw ``n`` labels from the conditional law
    at ``x``.  The expectation is replaced by the empirical mean, so the
    minimization is a uniform-weight inference problem (convex on
    continuous spaces since the weights are nonnegative).
    """
    labels = np.asarray(sampler(x, n_mc, seed))
    w = np.full(labels.shape[0], 1.0 / labels.shape[0])
    result = infer_from_weights(w, labels, loss, space, params)
    return result.objective
