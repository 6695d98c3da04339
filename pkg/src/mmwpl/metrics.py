"""Goodness-of-fit statistics and residual diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class EvalReport:
    mae: float
    mse: float
    rmse: float
    r_square: Optional[float]  # None when the observed values have zero variance
    n: int
    residuals: np.ndarray  # observed - predicted
    fitted: np.ndarray

    @property
    def observed(self) -> np.ndarray:
        return self.fitted + self.residuals

    def metrics(self) -> dict:
        return {"mae": self.mae, "mse": self.mse, "rmse": self.rmse, "r_square": self.r_square, "n": self.n}


def evaluate(observed, predicted) -> EvalReport:
    y = np.asarray(observed, dtype=float).ravel()
    yhat = np.asarray(predicted, dtype=float).ravel()
    if y.shape != yhat.shape:
        raise ValueError(f"length mismatch: {y.size} observed vs {yhat.size} predicted")
    if y.size == 0:
        raise ValueError("cannot evaluate empty vectors")
    e = y - yhat
    mse = float(np.mean(e * e))
    dev = y - y.mean()
    ss_tot = float(dev @ dev)
    r2 = None if ss_tot == 0 else 1.0 - float(e @ e) / ss_tot
    return EvalReport(
        mae=float(np.mean(np.abs(e))),
        mse=mse,
        rmse=float(np.sqrt(mse)),
        r_square=r2,
        n=int(y.size),
        residuals=e,
        fitted=yhat.copy(),
    )


@dataclass(frozen=True, eq=False)
class ResidualDiagnostics:
    fitted: np.ndarray  # ascending
    residuals: np.ndarray  # reordered alongside fitted
    mean: float
    lag1_autocorrelation: Optional[float]


def _pearson(a: np.ndarray, b: np.ndarray) -> Optional[float]:
    da = a - a.mean()
    db = b - b.mean()
    denom = np.sqrt((da @ da) * (db @ db))
    if denom == 0:
        return None
    return float(da @ db / denom)


def residual_diagnostics(report: EvalReport) -> ResidualDiagnostics:
    """Residual-vs-fitted series plus a randomness summary.

    The autocorrelation is the Pearson correlation between consecutive
    residuals once samples are ordered by fitted value; structure left in
    the model shows up as a value far from zero.
    """
    if report.n < 3:
        raise ValueError("insufficient points for diagnostics")
    order = np.argsort(report.fitted, kind="stable")
    e = report.residuals[order]
    return ResidualDiagnostics(
        fitted=report.fitted[order],
        residuals=e,
        mean=float(e.mean()),
        lag1_autocorrelation=_pearson(e[:-1], e[1:]),
    )
