"""Versioned JSON run reports and the model blocks they carry.

Floats are written with Python's shortest round-trip representation, so
every value parses back bit-exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import pathloss as pl
from .datasets import Dataset, SplitSpec
from .errors import MmwplError
from .metrics import EvalReport, residual_diagnostics
from .regression import RegressionFit, feature_contributions, predict
from .transfer import AblationReport, TransferReport

SCHEMA = "mmwpl-report/1"


class ReportError(MmwplError):
    pass


def _floats(arr) -> list:
    return [float(x) for x in np.asarray(arr, dtype=float)]


def eval_block(report: EvalReport, distance=None) -> dict:
    block = dict(report.metrics())
    series = {"fitted": _floats(report.fitted), "residual": _floats(report.residuals)}
    if distance is not None:
        series["distance"] = _floats(distance)
    if report.n >= 3:
        diag = residual_diagnostics(report)
        block["residual_mean"] = diag.mean
        block["residual_lag1_autocorrelation"] = diag.lag1_autocorrelation
    block["series"] = series
    return block


def regression_block(fit: RegressionFit, kind: str, train: Optional[Dataset] = None) -> dict:
    block = {
        "kind": kind,
        "transform": "raw",
        "intercept": fit.intercept,
        "features": list(fit.features),
        "coefficients": dict(zip(fit.features, fit.coefficients)),
        "residual_variance": fit.residual_variance,
        "n_train": fit.n_train,
        "condition_diagnostic": fit.condition_diagnostic,
        "dropped_features": list(fit.dropped_features),
    }
    if train is not None:
        block["feature_means"] = {f: float(np.mean(train.column(f))) for f in fit.features}
        block["mean_contribution_db"] = {f: float(np.mean(v)) for f, v in feature_contributions(fit, train).items()}
    return block


def pathloss_block(model: pl.PathLossModel, train: Dataset, n_fit: int) -> dict:
    if isinstance(model, pl.CiModel):
        block = {"kind": "ci", "ple": model.ple, "carrier_frequency": model.carrier_frequency,
                 "reference_distance": model.reference_distance}
    elif isinstance(model, pl.CifModel):
        block = {"kind": "cif", "ple": model.ple, "slope_factor": model.slope_factor,
                 "reference_frequency": model.reference_frequency}
    elif isinstance(model, pl.FiModel):
        block = {"kind": "fi", "alpha": model.alpha, "beta": model.beta}
    else:
        block = {"kind": "abg", "alpha": model.alpha, "beta": model.beta, "gamma": model.gamma}
    block["shadow_sigma"] = model.shadow_sigma
    block["transform"] = "log10_distance"
    block["n_train"] = n_fit
    block["line_frequency"] = float(np.mean(train.column("frequency")))
    return block


def split_block(split: SplitSpec) -> dict:
    return {"train_fraction": split.train_fraction, "seed": split.seed}


def transfer_payload(rep: TransferReport, source_test_distance, target_distance, train: Dataset) -> dict:
    metrics = ("mae", "mse", "rmse", "r_square")
    return {
        "kind": "transfer",
        "source_env": rep.source_env,
        "target_env": rep.target_env,
        "split": split_block(rep.split),
        "model": regression_block(rep.fit, "lr" if len(rep.fit.features) == 1 else "mlr", train),
        "evaluations": {
            "in_domain": eval_block(rep.in_domain, source_test_distance),
            "cross_domain": eval_block(rep.cross_domain, target_distance),
        },
        # two labelled metric columns: fit-set test split vs target set
        "table": {
            "columns": [f"{rep.source_env} (in-domain test)", f"{rep.target_env} (cross-domain)"],
            "rows": {m: [getattr(rep.in_domain, m), getattr(rep.cross_domain, m)] for m in metrics},
        },
    }


def ablation_payload(rep: AblationReport, train: Dataset, test: Dataset) -> dict:
    all_features: list[str] = []
    for rung in rep.rungs:
        all_features += [f for f in rung.features if f not in all_features]
    rungs = []
    for rung in rep.rungs:
        rungs.append({
            "features": list(rung.features),
            "model": regression_block(rung.fit, "lr" if len(rung.features) == 1 else "mlr", train),
            "evaluations": {
                "train": eval_block(rung.train, train.column("distance")),
                "test": eval_block(rung.test, test.column("distance")),
            },
        })
    return {
        "kind": "ablation",
        "split": split_block(rep.split),
        "rungs": rungs,
        "coefficient_table": {
            "features": all_features,
            "rows": {f: [r.fit.coefficient(f) if f in r.features else None for r in rep.rungs] for f in all_features},
        },
        "metric_table": {
            m: [getattr(r.test, m) for r in rep.rungs] for m in ("mae", "mse", "rmse", "r_square")
        },
    }


def make_report(command: str, argv: list, config: dict, payload: dict, duration: float) -> dict:
    return {
        "schema": SCHEMA,
        "command": command,
        "argv": list(argv),
        "config": config,
        "payload": payload,
        "duration_s": duration,
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def write_report(report: dict, path) -> None:
    Path(path).write_text(dumps(report), encoding="utf-8")


def read_report(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        report = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ReportError(f"{path}: not a report ({exc})") from None
    if not isinstance(report, dict) or report.get("schema") != SCHEMA:
        raise ReportError(f"{path}: missing or unsupported schema tag (expected {SCHEMA})")
    return report


def strip_duration(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "duration_s"}


# -------------------------------------------------------------- reconstruction


def model_from_block(block: dict):
    kind = block.get("kind")
    try:
        if kind == "ci":
            return pl.CiModel(ple=block["ple"], carrier_frequency=block["carrier_frequency"],
                              shadow_sigma=block["shadow_sigma"])
        if kind == "cif":
            return pl.CifModel(ple=block["ple"], slope_factor=block["slope_factor"],
                               reference_frequency=block["reference_frequency"], shadow_sigma=block["shadow_sigma"])
        if kind == "fi":
            return pl.FiModel(alpha=block["alpha"], beta=block["beta"], shadow_sigma=block["shadow_sigma"])
        if kind == "abg":
            return pl.AbgModel(alpha=block["alpha"], beta=block["beta"], gamma=block["gamma"],
                               shadow_sigma=block["shadow_sigma"])
        if kind in ("lr", "mlr"):
            feats = tuple(block["features"])
            return RegressionFit(
                intercept=block["intercept"],
                coefficients=tuple(block["coefficients"][f] for f in feats),
                features=feats,
                residual_variance=block["residual_variance"],
                n_train=block["n_train"],
                condition_diagnostic=block["condition_diagnostic"],
                dropped_features=tuple(block["dropped_features"]),
            )
    except (KeyError, TypeError) as exc:
        raise ReportError(f"malformed {kind} model block: {exc}") from None
    raise ReportError(f"unknown model kind {kind!r}")


def predictor(block: dict) -> Callable[[Dataset], np.ndarray]:
    model = model_from_block(block)
    if isinstance(model, RegressionFit):
        return lambda ds: predict(model, ds)
    return lambda ds: pl.predict_dataset(model, ds)


def distance_line(block: dict, distances: np.ndarray) -> np.ndarray:
    """Model prediction along distance, other regressors held at their training means."""
    model = model_from_block(block)
    d = np.asarray(distances, dtype=float)
    if isinstance(model, RegressionFit):
        means = block.get("feature_means", {})
        out = np.full(d.shape, model.intercept)
        for f, b in zip(model.features, model.coefficients):
            if f == "distance":
                out = out + b * d
            else:
                if f not in means:
                    raise ReportError(f"report lacks the training mean of {f!r}")
                out = out + b * means[f]
        return out
    return np.asarray(pl.evaluate_model(model, d, block.get("line_frequency")), dtype=float)
