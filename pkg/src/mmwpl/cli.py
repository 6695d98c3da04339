"""Command-line entry point: ``mmwpl {gen,fit,evaluate,ablate,transfer,plotdata}``.

Exit status: 0 success, 2 usage/config/data degeneracy, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import pathloss as pl
from . import report as rp
from .datasets import (Dataset, Environment, Scenario, SplitSpec, load_dataset, read_environment,
                       save_dataset, sidecar_path, split_indices, write_environment, parse_key_values)
from .errors import MmwplError
from .metrics import evaluate
from .regression import fit_regression, predict
from .simulator import config_from_mapping, generate_dataset
from .transfer import DEFAULT_LADDER, MLR8_FEATURES, check_nested, run_ablation, run_transfer

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 2, 3


class UsageError(MmwplError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def load_data(path) -> Dataset:
    """Load a measurement CSV with its ``.env`` sidecar when present."""
    path = Path(path)
    side = sidecar_path(path)
    if side.exists():
        return load_dataset(path, read_environment(side))
    ds = load_dataset(path, Environment(scenario=Scenario.CUSTOM, name=path.stem or "data"))
    return replace(ds, environment=replace(ds.environment, carrier_frequency=float(ds.samples[0].frequency)))


def _features(text):
    if text is None:
        return None
    return tuple(f.strip() for f in text.split(",") if f.strip())


def _range(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"expected MIN,MAX, got {text!r}") from None
    if not 0 < lo < hi:
        raise UsageError(f"distance range must satisfy 0 < MIN < MAX, got {text!r}")
    return lo, hi


def _emit(report: dict, out):
    if out:
        rp.write_report(report, out)
    else:
        sys.stdout.write(rp.dumps(report))


# -------------------------------------------------------------------- commands


def cmd_gen(args) -> int:
    text = Path(args.config).read_text(encoding="utf-8")
    config = config_from_mapping(parse_key_values(text, args.config))
    ds = generate_dataset(config, workers=args.workers)
    out = Path(args.out)
    save_dataset(ds, out)
    write_environment(ds.environment, sidecar_path(out))
    print(f"wrote {len(ds)} samples to {out}", file=sys.stderr)
    return EXIT_OK


def _fit_model(model: str, train: Dataset, features, f0):
    if model in ("lr", "mlr"):
        if features is None:
            features = ("distance",) if model == "lr" else MLR8_FEATURES
        if model == "lr" and len(features) != 1:
            raise UsageError("--model lr takes exactly one feature; use mlr for several")
        fit = fit_regression(train, features)
        return rp.regression_block(fit, model, train), (lambda ds: predict(fit, ds))
    if features is not None:
        raise UsageError(f"--features does not apply to --model {model}")
    if model == "cif":
        pmodel = pl.fit_cif(train, f0 if f0 == "auto" else float(f0))
    else:
        pmodel = pl.FITTERS[model](train)
    return rp.pathloss_block(pmodel, train, len(train)), (lambda ds: pl.predict_dataset(pmodel, ds))


def cmd_fit(args, argv) -> int:
    t0 = time.perf_counter()
    ds = load_data(args.data)
    split = SplitSpec(args.split, args.seed)
    train_idx, test_idx = split_indices(len(ds), split)
    train, test = ds.subset(train_idx), ds.subset(test_idx)
    block, fn = _fit_model(args.model, train, _features(args.features), args.f0)
    evaluations = {}
    for name, part in (("train", train), ("test", test), ("full", ds)):
        evaluations[name] = rp.eval_block(evaluate(part.column("path_loss"), fn(part)), part.column("distance"))
    payload = {"kind": "fit", "environment": ds.environment.label, "split": rp.split_block(split),
               "model": block, "evaluations": evaluations}
    config = {"data": str(args.data), "model": args.model, "features": args.features,
              "split": args.split, "seed": args.seed, "f0": args.f0}
    _emit(rp.make_report("fit", argv, config, payload, time.perf_counter() - t0), args.report)
    return EXIT_OK


def cmd_evaluate(args, argv) -> int:
    t0 = time.perf_counter()
    src = rp.read_report(args.fit_report)
    block = src["payload"].get("model")
    if block is None:
        raise rp.ReportError(f"{args.fit_report}: report carries no model")
    ds = load_data(args.data)
    ev = evaluate(ds.column("path_loss"), rp.predictor(block)(ds))
    payload = {"kind": "evaluate", "environment": ds.environment.label, "model": block,
               "evaluations": {"data": rp.eval_block(ev, ds.column("distance"))}}
    config = {"fit_report": str(args.fit_report), "data": str(args.data)}
    _emit(rp.make_report("evaluate", argv, config, payload, time.perf_counter() - t0), args.report)
    return EXIT_OK


def _ladder(text):
    if text is None:
        return DEFAULT_LADDER
    return tuple(_features(r) for r in text.split(";") if r.strip())


def cmd_ablate(args, argv) -> int:
    t0 = time.perf_counter()
    ds = load_data(args.data)
    ladder = check_nested(_ladder(args.ladder))
    split = SplitSpec(args.split, args.seed)
    rep = run_ablation(ds, ladder, split)
    train_idx, test_idx = split_indices(len(ds), split)
    payload = rp.ablation_payload(rep, ds.subset(train_idx), ds.subset(test_idx))
    payload["environment"] = ds.environment.label
    config = {"data": str(args.data), "ladder": [list(r) for r in ladder], "split": args.split, "seed": args.seed}
    _emit(rp.make_report("ablate", argv, config, payload, time.perf_counter() - t0), args.report)
    return EXIT_OK


def cmd_transfer(args, argv) -> int:
    t0 = time.perf_counter()
    source = load_data(args.source)
    target = load_data(args.target)
    features = _features(args.features) or ("distance",)
    split = SplitSpec(args.split, args.seed)
    rep = run_transfer(source, target, features, split)
    train_idx, test_idx = split_indices(len(source), split)
    payload = rp.transfer_payload(rep, source.subset(test_idx).column("distance"), target.column("distance"),
                                  source.subset(train_idx))
    config = {"source": str(args.source), "target": str(args.target), "features": list(features),
              "split": args.split, "seed": args.seed}
    _emit(rp.make_report("transfer", argv, config, payload, time.perf_counter() - t0), args.report)
    return EXIT_OK


_DEFAULT_SET = {"fit": "test", "transfer": "cross_domain", "evaluate": "data", "ablation": "test"}


def _locate(report: dict, set_name):
    payload = report["payload"]
    kind = payload.get("kind")
    holder = payload["rungs"][-1] if kind == "ablation" else payload
    name = set_name or _DEFAULT_SET.get(kind)
    evals = holder.get("evaluations", {})
    if name not in evals:
        raise rp.ReportError(f"report has no evaluation set {name!r}; available: {', '.join(evals)}")
    return holder["model"], evals[name]


def _fmt(x) -> str:
    return repr(float(x))


def cmd_plotdata(args) -> int:
    report = rp.read_report(args.report)
    model, block = _locate(report, args.set)
    series = block["series"]
    lines = []
    if args.kind == "residuals":
        fitted = np.asarray(series["fitted"])
        resid = np.asarray(series["residual"])
        order = np.argsort(fitted, kind="stable")
        lines.append("# fitted_db\tresidual_db")
        lines += [f"{_fmt(fitted[i])}\t{_fmt(resid[i])}" for i in order]
    else:
        if "distance" not in series:
            raise rp.ReportError("evaluation set carries no distance series")
        d = np.asarray(series["distance"])
        observed = np.asarray(series["fitted"]) + np.asarray(series["residual"])
        lo, hi = _range(args.range)
        grid = np.linspace(lo, hi, args.points)
        line = rp.distance_line(model, grid)
        lines.append("# series: measured")
        lines.append("# distance_m\tpath_loss_db")
        lines += [f"{_fmt(a)}\t{_fmt(b)}" for a, b in zip(d, observed)]
        lines += ["", ""]
        lines.append(f"# series: model ({model['kind']}, transform={model.get('transform')})")
        lines.append("# distance_m\tpath_loss_db")
        lines += [f"{_fmt(a)}\t{_fmt(b)}" for a, b in zip(grid, line)]
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return EXIT_OK


# ---------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mmwpl", description="Fit, evaluate and transfer mmWave path loss models.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a synthetic measurement CSV from a key=value config")
    g.add_argument("config")
    g.add_argument("out")
    g.add_argument("--workers", type=int, default=1)

    def split_flags(sp):
        sp.add_argument("--split", type=float, default=0.7, help="training fraction (default 0.7)")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--report", help="report path (default: standard output)")

    f = sub.add_parser("fit", help="fit a model on the training split and score both splits")
    f.add_argument("data")
    f.add_argument("--model", required=True, choices=["ci", "cif", "fi", "abg", "lr", "mlr"])
    f.add_argument("--features", help="comma-separated feature names (lr/mlr only)")
    f.add_argument("--f0", default="auto", help="CIF reference frequency in GHz, or 'auto'")
    split_flags(f)

    e = sub.add_parser("evaluate", help="score the model of an earlier fit report on a dataset")
    e.add_argument("fit_report")
    e.add_argument("data")
    e.add_argument("--report")

    a = sub.add_parser("ablate", help="nested feature ablation on one split")
    a.add_argument("data")
    a.add_argument("--ladder", help="rungs separated by ';', features by ','")
    split_flags(a)

    t = sub.add_parser("transfer", help="fit on a source environment, evaluate on a target")
    t.add_argument("source")
    t.add_argument("target")
    t.add_argument("--features", help="comma-separated feature names (default: distance)")
    split_flags(t)

    pd = sub.add_parser("plotdata", help="emit two-column plot data from a report")
    pd.add_argument("report")
    pd.add_argument("--kind", required=True, choices=["residuals", "pl-vs-distance"])
    pd.add_argument("out")
    pd.add_argument("--set", help="evaluation set to plot (default depends on report kind)")
    pd.add_argument("--range", default="1,40", help="distance range for model line samples")
    pd.add_argument("--points", type=int, default=50, help="number of model line samples")
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "plotdata":
            if args.points < 2:
                raise UsageError("--points must be >= 2")
            return cmd_plotdata(args)
        handler = {"fit": cmd_fit, "evaluate": cmd_evaluate, "ablate": cmd_ablate, "transfer": cmd_transfer}
        return handler[args.command](args, argv)
    except OSError as exc:
        print(f"mmwpl: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (MmwplError, ValueError, KeyError) as exc:
        print(f"mmwpl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
