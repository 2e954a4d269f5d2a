"""Command-line front end.

Exit codes: 0 on success, 2 on usage or input errors, 3 on numerical
failure.  All randomness is derived from --seed; identical invocations
produce byte-identical output.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import io
from .additive import AdditiveModel, JointKernelSpec, fit_additive, infer_additive
from .analysis import (BoundInputs, empirical_surrogate_risk, generalization_bound_terms,
                       make_surrogate_config, surrogate_loss)
from .baselines import knn_local_risk_predict, krr_project_predict_batch
from .errors import DataFormatError, EcrmError, NumericalError
from .flow_opt import solve_flow_abs_batch
from .inference import infer
from .io import Dataset, fmt
from .kernels import KernelSpec, kernel_sup_bound
from .losses import LossSpec, loss_bound, loss_value
from .model import fit
from .results import SolverParams
from .simulate import FlowGeneratorSpec, default_flow_network, simulate_flow_data
from .spaces import (ConstraintMatrix, assignment_space, flow_space, hierarchy_space,
                     is_totally_unimodular)

SPACES = ("hierarchy", "assignment", "flow")
LOSSES = ("hamming", "hierarchical", "footrule", "absolute", "square")


def _kernel_from_args(args) -> KernelSpec:
    if args.kernel == "rbf":
        if args.gamma is None:
            raise DataFormatError("rbf kernel requires --gamma")
        return KernelSpec(kind="rbf", gamma=args.gamma)
    return KernelSpec(kind="linear")


def _space_from_args(args):
    if args.space == "hierarchy":
        if not args.hierarchy:
            raise DataFormatError("--space hierarchy requires --hierarchy FILE")
        G = io.load_hierarchy(args.hierarchy)
        return hierarchy_space(G)
    if args.space == "assignment":
        if args.dim is None:
            raise DataFormatError("--space assignment requires --dim D")
        return assignment_space(args.dim)
    if not args.network:
        raise DataFormatError("--space flow requires --network FILE")
    return flow_space(io.load_network(args.network))


def _loss_from_args(args, space) -> LossSpec:
    if args.loss == "hierarchical":
        if space.kind != "hierarchy":
            raise DataFormatError("hierarchical loss requires --space hierarchy")
        return LossSpec(kind="hierarchical", hierarchy=space.hierarchy)
    return LossSpec(kind=args.loss)


def _labels_loader(space):
    return {
        "hierarchy": io.load_binary_labels,
        "assignment": io.load_permutations,
        "flow_polytope": io.load_flows,
    }[space.kind]


def _solver_params(args) -> SolverParams:
    return SolverParams(max_iters=args.max_iters, step_a=args.step_a,
                        step_b=args.step_b, gap_tol=args.gap_tol,
                        restarts=args.restarts, seed=args.seed)


def _print_rows(rows, integral: bool) -> None:
    for row in rows:
        row = np.asarray(row).ravel()
        if integral:
            print(" ".join(str(int(v)) for v in row))
        else:
            print(" ".join(fmt(v) for v in row))


def _predict_rows(model, loss, space, X, params):
    if isinstance(model, AdditiveModel):
        return [infer_additive(model, X[i]).y_star for i in range(X.shape[0])]
    if space.kind == "flow_polytope" and loss.kind == "absolute":
        # Single batched call: identical math to per-row solves, one pass.
        from scipy.linalg import cho_solve
        from .kernels import cross_gram

        V = cross_gram(model.kernel, X, model.inputs)
        W = cho_solve(model.factor, V.T).T
        if model.intercept_mode == "centered":
            W = W + ((1.0 - W.sum(axis=1)) / model.m)[:, None]
        Y, _, _ = solve_flow_abs_batch(W, model.labels, space.network, params)
        return [Y[i] for i in range(Y.shape[0])]
    return [infer(model, loss, space, X[i], params).y_star for i in range(X.shape[0])]


def cmd_train(args) -> int:
    kernel = _kernel_from_args(args)
    space = _space_from_args(args)
    X = io.load_features(args.x)
    Y = _labels_loader(space)(args.labels)
    if args.variant == "additive":
        if space.kind != "hierarchy":
            raise DataFormatError("--variant additive requires --space hierarchy")
        model = fit_additive(X, Y, space.hierarchy,
                             JointKernelSpec(base=kernel, neighbors=args.neighbors),
                             args.lam)
        io.save_additive_model(args.out, model)
    else:
        model = fit(kernel, args.lam, X, Y, intercept_mode=args.intercept)
        io.save_model(args.out, model)
    return 0


def cmd_predict(args) -> int:
    model = io.load_model(args.model)
    X = io.load_features(args.x)
    if isinstance(model, AdditiveModel):
        space = hierarchy_space(model.hierarchy)
        loss = None
    else:
        space = _space_from_args(args)
        loss = _loss_from_args(args, space)
    rows = _predict_rows(model, loss, space, X, _solver_params(args))
    _print_rows(rows, integral=space.kind in ("hierarchy", "assignment"))
    return 0


def cmd_eval(args) -> int:
    model = io.load_model(args.model)
    X = io.load_features(args.x)
    if isinstance(model, AdditiveModel):
        space = hierarchy_space(model.hierarchy)
        loss = _loss_from_args(args, space)
        Y = io.load_binary_labels(args.labels)
    else:
        space = _space_from_args(args)
        loss = _loss_from_args(args, space)
        Y = _labels_loader(space)(args.labels)
    rows = _predict_rows(model, loss, space, X, _solver_params(args))
    vals = [loss_value(loss, rows[i], Y[i]) for i in range(len(rows))]
    print(f"mean_loss {fmt(np.mean(vals))}")
    return 0


def cmd_surrogate(args) -> int:
    model = io.load_model(args.model)
    if isinstance(model, AdditiveModel):
        raise DataFormatError("surrogate analysis expects a base model")
    space = _space_from_args(args)
    loss = _loss_from_args(args, space)
    X = io.load_features(args.x)
    Y = _labels_loader(space)(args.labels)
    cfg = make_surrogate_config(args.rho, loss, space)
    params = _solver_params(args)
    vals = [surrogate_loss(model, loss, cfg, X[i], Y[i], params)
            for i in range(X.shape[0])]
    for v in vals:
        print(fmt(v))
    print(f"mean {fmt(np.mean(vals))}")
    return 0


def cmd_bound(args) -> int:
    model = io.load_model(args.model)
    if isinstance(model, AdditiveModel):
        raise DataFormatError("bound analysis expects a base model")
    space = _space_from_args(args)
    loss = _loss_from_args(args, space)
    X = io.load_features(args.x)
    Y = _labels_loader(space)(args.labels)
    cfg = make_surrogate_config(args.rho, loss, space)
    params = _solver_params(args)
    emp = empirical_surrogate_risk(model, loss, cfg, X, Y, params)
    b = BoundInputs(empirical_risk=emp, L=loss_bound(loss, space),
                    kappa=kernel_sup_bound(model.kernel, model.inputs),
                    lam=model.lam, rho=args.rho, delta=args.delta, m=X.shape[0])
    emp, stab, conf, total = generalization_bound_terms(b)
    print(f"empirical {fmt(emp)}")
    print(f"stability {fmt(stab)}")
    print(f"confidence {fmt(conf)}")
    print(f"bound {fmt(total)}")
    return 0


def cmd_simulate_flow(args) -> int:
    net = io.load_network(args.network) if args.network else default_flow_network()
    spec = FlowGeneratorSpec.create(seed=args.seed, network=net, p=args.p, tau=args.tau)
    data = simulate_flow_data(spec, args.m)
    io.save_matrix(args.out_x, data.X)
    io.save_matrix(args.out_y, data.Y)
    return 0


def cmd_bench(args) -> int:
    """Training time against label-vector size; fit cost is label-size free."""
    dims = [int(t) for t in args.dims.split(",")]
    kernel = _kernel_from_args(args)
    rng = np.random.default_rng(args.seed)
    X = rng.uniform(size=(args.m, args.p))
    fit(kernel, args.lam, X, np.zeros((args.m, 1)))  # warm up BLAS paths
    print("d,train_seconds")
    for d in dims:
        Y = np.zeros((args.m, d), dtype=np.int64)  # all-roots-off labels, any hierarchy
        best = np.inf
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            fit(kernel, args.lam, X, Y)
            best = min(best, time.perf_counter() - t0)
        print(f"{d},{fmt(best)}")
    return 0


def cmd_tu_check(args) -> int:
    M = io.load_matrix(args.matrix)
    cm = ConstraintMatrix(A=M, rhs=np.zeros(M.shape[0]), senses=("<=",) * M.shape[0])
    verdict = is_totally_unimodular(cm, size_cap=args.cap)
    print("unknown" if verdict is None else ("true" if verdict else "false"))
    return 0


def cmd_baseline(args) -> int:
    space = _space_from_args(args)
    X_train = io.load_features(args.train_x)
    Y_train = _labels_loader(space)(args.train_labels)
    data = Dataset(X=X_train, Y=Y_train, space=space)
    Xq = io.load_features(args.x)
    if args.method == "knn":
        loss = _loss_from_args(args, space)
        params = _solver_params(args)
        rows = [knn_local_risk_predict(data, loss, space, Xq[i], args.k, params)
                for i in range(Xq.shape[0])]
    else:
        kernel = _kernel_from_args(args)
        preds = krr_project_predict_batch(data, space, kernel, args.lam, Xq)
        rows = [preds[i] for i in range(preds.shape[0])]
    _print_rows(rows, integral=space.kind in ("hierarchy", "assignment"))
    return 0


def _add_space_flags(p) -> None:
    p.add_argument("--space", choices=SPACES, required=True)
    p.add_argument("--hierarchy", help="hierarchy arc file (for --space hierarchy)")
    p.add_argument("--network", help="network file (for --space flow)")
    p.add_argument("--dim", type=int, help="label count (for --space assignment)")


def _add_solver_flags(p) -> None:
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--gap-tol", type=float, default=1e-6)
    p.add_argument("--step-a", type=float, default=1.0)
    p.add_argument("--step-b", type=float, default=0.1)


def _add_kernel_flags(p) -> None:
    p.add_argument("--kernel", choices=("linear", "rbf"), default="rbf")
    p.add_argument("--gamma", type=float)
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ecrm",
                                 description="Structured prediction by estimated "
                                             "conditional risk minimization")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model and write it to a file")
    p.add_argument("--x", required=True)
    p.add_argument("--labels", required=True)
    _add_space_flags(p)
    _add_kernel_flags(p)
    p.add_argument("--intercept", choices=("none", "centered"), default="none")
    p.add_argument("--variant", choices=("base", "additive"), default="base")
    p.add_argument("--neighbors", choices=("adjacent", "self"), default="adjacent")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="one prediction line per input row")
    p.add_argument("--model", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--loss", choices=LOSSES, default="hamming")
    _add_space_flags(p)
    _add_solver_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="mean loss of predictions against labels")
    p.add_argument("--model", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--loss", choices=LOSSES, required=True)
    _add_space_flags(p)
    _add_solver_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("surrogate", help="per-sample surrogate loss and its mean")
    p.add_argument("--model", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--loss", choices=LOSSES, required=True)
    p.add_argument("--rho", type=float, required=True)
    _add_space_flags(p)
    _add_solver_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_surrogate)

    p = sub.add_parser("bound", help="generalization-bound terms on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--loss", choices=LOSSES, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    _add_space_flags(p)
    _add_solver_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("simulate-flow", help="write synthetic flow data files")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--p", type=int, default=20)
    p.add_argument("--network")
    p.add_argument("--out-x", required=True)
    p.add_argument("--out-y", required=True)
    p.set_defaults(func=cmd_simulate_flow)

    p = sub.add_parser("bench", help="CSV of training seconds per hierarchy size")
    p.add_argument("--m", type=int, default=500)
    p.add_argument("--dims", default="10,100,1000")
    p.add_argument("--p", type=int, default=10)
    p.add_argument("--repeats", type=int, default=3)
    _add_kernel_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("tu-check", help="total unimodularity of a matrix file")
    p.add_argument("--matrix", required=True)
    p.add_argument("--cap", type=int, default=2_000_000)
    p.set_defaults(func=cmd_tu_check)

    p = sub.add_parser("baseline", help="nearest-neighbor or ridge-projection predictions")
    p.add_argument("--method", choices=("knn", "krr-project"), required=True)
    p.add_argument("--train-x", required=True)
    p.add_argument("--train-labels", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--loss", choices=LOSSES, default="absolute")
    p.add_argument("--k", type=int, default=5)
    _add_space_flags(p)
    _add_kernel_flags(p)
    _add_solver_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_baseline)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DataFormatError, EcrmError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
