"""Command-line surface: fit, cv, predict, path, simulate, diagnose.

Every command is deterministic given its flags and seed; output files are
written atomically. Exit codes: 0 success, 2 usage/parse errors, 3 solver
non-convergence under --strict, 4 infeasible LPD, 5 a class smaller than
the fold count, 6 model/data dimension mismatch.
"""

import argparse
import json
import sys

import numpy as np

from . import io
from .classify import (
    NaiveBayesModel,
    build_model,
    naive_bayes_fit,
    naive_bayes_predict_batch,
    predict_batch,
    pseudoinverse_lda_fit,
)
from .model import Dataset, DirectionSet, group_norms, pooled_scatter, summarize
from .select import kfold_cv, lambda_grid, lambda_max, support_metrics
from .simulate import (
    CovarianceSummary,
    covariance_summary,
    delta_quadratic,
    event_d_check,
    cone_condition_check,
    sample,
    sim1_spec,
    sim2_spec,
)
from .solvers import (
    LpInfeasibleError,
    fit_grouped,
    fit_lpd,
    fit_single_lasso,
    hard_threshold,
)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_NOCONV = 3
EXIT_INFEASIBLE = 4
EXIT_SMALL_CLASS = 5
EXIT_DIM = 6

ESTIMATORS = ("grouped", "single", "lpd", "nbayes", "pinv")


class CommandError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _load_dataset(path) -> Dataset:
    try:
        return io.read_dataset_csv(path)
    except FileNotFoundError:
        raise CommandError(EXIT_PARSE, f"cannot read {path}") from None
    except (io.FormatError, ValueError) as exc:
        raise CommandError(EXIT_PARSE, str(exc)) from None


def _parse_grid(text):
    try:
        lmax_s, n_s, dec_s = text.split(":")
        return float(lmax_s), int(n_s), float(dec_s)
    except ValueError:
        raise CommandError(EXIT_PARSE, f"bad grid spec '{text}', expected lmax:n:decades") from None


def _grid_for(args, deltas):
    if args.lambda_grid is not None:
        lmax, n, dec = _parse_grid(args.lambda_grid)
        try:
            return lambda_grid(lmax, n, dec)
        except ValueError as exc:
            raise CommandError(EXIT_PARSE, str(exc)) from None
    return lambda_grid(lambda_max(deltas), 50, 3.0)


def _fit_directions(estimator, S, cs, lam, strict):
    """Fit a DirectionSet with the chosen estimator; returns (ds, summary lines)."""
    lines = []
    if estimator == "grouped":
        ds, rep = fit_grouped(S, cs.deltas, lam)
        lines.append(
            f"solver grouped iterations {rep.iterations} converged {str(rep.converged).lower()}"
            f" kkt {rep.kkt_residual:.3e}"
        )
        if strict and not rep.converged:
            raise CommandError(EXIT_NOCONV, "grouped solver did not converge")
        return ds, lines
    if estimator == "single":
        cols = []
        for k, delta in enumerate(cs.deltas):
            beta, rep = fit_single_lasso(S, delta, lam)
            cols.append(beta)
            lines.append(
                f"solver single direction {k + 1} iterations {rep.iterations}"
                f" converged {str(rep.converged).lower()} kkt {rep.kkt_residual:.3e}"
            )
            if strict and not rep.converged:
                raise CommandError(EXIT_NOCONV, f"single-direction solver {k + 1} did not converge")
        return DirectionSet(np.column_stack(cols)), lines
    if estimator == "lpd":
        cols = []
        for k, delta in enumerate(cs.deltas):
            try:
                cols.append(fit_lpd(S, delta, lam))
            except LpInfeasibleError as exc:
                raise CommandError(EXIT_INFEASIBLE, str(exc)) from None
            lines.append(f"solver lpd direction {k + 1} done")
        return DirectionSet(np.column_stack(cols)), lines
    raise CommandError(EXIT_PARSE, f"estimator {estimator} does not produce directions")


def cmd_fit(args):
    data = _load_dataset(args.data)
    cs = summarize(data)
    if args.estimator == "nbayes":
        model = naive_bayes_fit(data)
        io.write_model_file(args.out, model, "nbayes")
        print(f"estimator nbayes classes {model.n_classes} features {model.p}")
        print(f"written {args.out}")
        return EXIT_OK
    S = pooled_scatter(data, cs)
    if args.estimator == "pinv":
        ds = pseudoinverse_lda_fit(S, cs)
        lines = ["solver pinv done"]
    else:
        if args.lam is None:
            raise CommandError(EXIT_PARSE, f"--lambda is required for estimator {args.estimator}")
        if args.lam < 0 or (args.estimator == "lpd" and args.lam == 0):
            raise CommandError(EXIT_PARSE, "bad --lambda value")
        ds, lines = _fit_directions(args.estimator, S, cs, args.lam, args.strict)
    if args.zeta > 0:
        ds = hard_threshold(ds, args.zeta)
    model = build_model(cs, ds)
    io.write_model_file(args.out, model, args.estimator)
    for ln in lines:
        print(ln)
    print(f"nonzero_rows {int(np.count_nonzero(group_norms(ds)))}")
    print(f"written {args.out}")
    return EXIT_OK


def cmd_cv(args):
    data = _load_dataset(args.data)
    cs = summarize(data)
    if int(cs.counts.min()) < args.folds:
        raise CommandError(EXIT_SMALL_CLASS, "a class has fewer samples than the fold count")
    grid = _grid_for(args, cs.deltas)
    result = kfold_cv(data, grid, folds=args.folds, seed=args.seed)
    lines = ["lambda,mean_error,sd_error"]
    for lam, me, sd in zip(result.lambdas, result.mean_errors, result.sd_errors):
        lines.append(f"{io.fmt(lam)},{io.fmt(me)},{io.fmt(sd)}")
    lines.append(f"# chosen_lambda,{io.fmt(result.chosen_lambda)}")
    io.atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"chosen_lambda {io.fmt(result.chosen_lambda)}")
    print(f"written {args.out}")
    return EXIT_OK


def cmd_predict(args):
    try:
        model, _ = io.read_model_file(args.model)
    except FileNotFoundError:
        raise CommandError(EXIT_PARSE, f"cannot read {args.model}") from None
    except io.FormatError as exc:
        raise CommandError(EXIT_PARSE, str(exc)) from None
    try:
        X, labels = io.read_feature_csv(args.data)
    except FileNotFoundError:
        raise CommandError(EXIT_PARSE, f"cannot read {args.data}") from None
    except io.FormatError as exc:
        raise CommandError(EXIT_PARSE, str(exc)) from None
    if X.shape[1] != model.p:
        raise CommandError(EXIT_DIM, "model and data feature dimensions differ")
    if isinstance(model, NaiveBayesModel):
        pred = naive_bayes_predict_batch(model, X)
    else:
        pred = predict_batch(model, X)
    io.atomic_write_text(args.out, "label\n" + "\n".join(str(int(v)) for v in pred) + "\n")
    if labels is not None:
        err = float(np.mean(pred != labels))
        print(f"error_rate {io.fmt(err)}")
    print(f"written {args.out}")
    return EXIT_OK


def cmd_path(args):
    data = _load_dataset(args.data)
    cs = summarize(data)
    S = pooled_scatter(data, cs)
    grid = _grid_for(args, cs.deltas)
    lines = ["lambda,direction,feature,coefficient,group_norm"]
    for lam in grid.values:
        ds, _ = _fit_directions(args.estimator, S, cs, float(lam), args.strict)
        norms = group_norms(ds)
        for k in range(ds.n_directions):
            col = ds.column(k)
            for j in range(ds.p):
                lines.append(
                    f"{io.fmt(lam)},{k + 1},{j + 1},{io.fmt(col[j])},{io.fmt(norms[j])}"
                )
    io.atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"written {args.out}")
    return EXIT_OK


def cmd_simulate(args):
    if args.design == "sim1":
        spec = sim1_spec(args.seed)
    elif args.design == "sim2":
        spec = sim2_spec(args.seed)
    else:
        raise CommandError(EXIT_PARSE, f"unknown design '{args.design}'")
    data = sample(spec)
    io.write_dataset_csv(args.out, data.features, data.labels)
    B = spec.true_directions
    summary = covariance_summary(spec.sigma)
    payload = {
        "design": args.design,
        "seed": args.seed,
        "K": spec.n_classes,
        "p": spec.p,
        "n_per_class": [int(v) for v in spec.n_per_class],
        "true_directions": [[float(v) for v in row] for row in B.matrix],
        "support_per_direction": [
            [int(j) + 1 for j in B.column_support(k)] for k in range(B.n_directions)
        ],
        "support_joint": [int(j) + 1 for j in B.joint_support()],
        "sigma_summary": {
            "plus_min": summary.plus_min,
            "plus_max": summary.plus_max,
            "minus_max": summary.minus_max,
        },
        "delta": [delta_quadratic(spec.sigma, d) for d in spec.deltas()],
    }
    io.write_truth_file(args.truth_out, payload)
    print(f"written {args.out}")
    print(f"written {args.truth_out}")
    return EXIT_OK


def cmd_diagnose(args):
    try:
        model, _ = io.read_model_file(args.model)
    except FileNotFoundError:
        raise CommandError(EXIT_PARSE, f"cannot read {args.model}") from None
    except io.FormatError as exc:
        raise CommandError(EXIT_PARSE, str(exc)) from None
    if isinstance(model, NaiveBayesModel):
        raise CommandError(EXIT_PARSE, "diagnose needs a direction-based model")
    try:
        truth = io.read_truth_file(args.truth)
    except FileNotFoundError:
        raise CommandError(EXIT_PARSE, f"cannot read {args.truth}") from None
    except io.FormatError as exc:
        raise CommandError(EXIT_PARSE, str(exc)) from None
    data = _load_dataset(args.data)
    B_true = DirectionSet(np.asarray(truth["true_directions"], dtype=float))
    est = model.directions
    if est.matrix.shape != B_true.matrix.shape or data.p != est.p:
        raise CommandError(EXIT_DIM, "model, truth and data dimensions differ")
    T = [j - 1 for j in truth["support_joint"]]
    cs = summarize(data)
    S = pooled_scatter(data, cs)
    sig = CovarianceSummary(**truth["sigma_summary"])
    gap = est.matrix - B_true.matrix
    sup_err = float(np.linalg.norm(gap, axis=1).max())
    metrics = support_metrics(est, B_true, zeta=args.zeta)
    records = [
        {"metric": "cone_condition", "value": bool(cone_condition_check(est, B_true, T))},
        {"metric": "event_d", "value": bool(event_d_check(S, sig))},
        {"metric": "sup_group_error", "value": sup_err},
    ]
    for k in range(est.n_directions):
        records.append(
            {
                "metric": "linf_error",
                "direction": k + 1,
                "value": float(np.abs(gap[:, k]).max()),
            }
        )
    records.append(
        {
            "metric": "support",
            "zeta": args.zeta,
            "joint": {
                "tp": metrics.joint.tp,
                "fp": metrics.joint.fp,
                "fn": metrics.joint.fn,
                "exact": metrics.joint.exact,
            },
            "per_direction": [
                {"tp": c.tp, "fp": c.fp, "fn": c.fn, "exact": c.exact}
                for c in metrics.per_direction
            ],
        }
    )
    text = "\n".join(json.dumps(r, sort_keys=True) for r in records) + "\n"
    io.atomic_write_text(args.out, text)
    print(f"written {args.out}")
    return EXIT_OK


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="glda",
        description="Grouped-lasso sparse multi-class linear discriminant analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit directions on a training CSV and save a model")
    p_fit.add_argument("data", help="training CSV (label,f1,...,fp)")
    p_fit.add_argument("--estimator", choices=ESTIMATORS, default="grouped")
    p_fit.add_argument("--lambda", dest="lam", type=float, default=None)
    p_fit.add_argument("--zeta", type=float, default=0.0)
    p_fit.add_argument("--strict", action="store_true")
    p_fit.add_argument("--out", required=True)
    p_fit.set_defaults(func=cmd_fit)

    p_cv = sub.add_parser("cv", help="cross-validate the grouped penalty level")
    p_cv.add_argument("data")
    p_cv.add_argument("--lambda-grid", dest="lambda_grid", default=None, metavar="LMAX:N:DECADES")
    p_cv.add_argument("--folds", type=int, default=5)
    p_cv.add_argument("--seed", type=int, default=0)
    p_cv.add_argument("--out", required=True)
    p_cv.set_defaults(func=cmd_cv)

    p_pred = sub.add_parser("predict", help="predict labels for a CSV with a saved model")
    p_pred.add_argument("model")
    p_pred.add_argument("data")
    p_pred.add_argument("--out", required=True)
    p_pred.set_defaults(func=cmd_predict)

    p_path = sub.add_parser("path", help="trace coefficients along a penalty grid")
    p_path.add_argument("data")
    p_path.add_argument("--estimator", choices=("grouped", "single", "lpd"), default="grouped")
    p_path.add_argument("--lambda-grid", dest="lambda_grid", default=None, metavar="LMAX:N:DECADES")
    p_path.add_argument("--strict", action="store_true")
    p_path.add_argument("--out", required=True)
    p_path.set_defaults(func=cmd_path)

    p_sim = sub.add_parser("simulate", help="write a synthetic dataset and its truth sidecar")
    p_sim.add_argument("design", help="sim1 or sim2")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--truth-out", dest="truth_out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_diag = sub.add_parser("diagnose", help="theory-side diagnostics of a fit against the truth")
    p_diag.add_argument("model")
    p_diag.add_argument("truth")
    p_diag.add_argument("data")
    p_diag.add_argument("--zeta", type=float, default=0.0)
    p_diag.add_argument("--out", required=True)
    p_diag.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except LpInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (io.FormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
