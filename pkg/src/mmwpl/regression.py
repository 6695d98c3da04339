"""Ordinary least squares over channel features.

The solver works on column-equilibrated designs with an SVD-based least
squares solve; the textbook normal-equations estimator is only used as a
test oracle. Degenerate columns (all-zero, constant next to an intercept,
or exactly collinear with earlier columns) are removed greedily in column
order and reported instead of failing the solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .datasets import FEATURE_NAMES, Dataset
from .errors import FitError

RANK_RTOL = 1e-10


def validate_features(features: Sequence[str]) -> tuple[str, ...]:
    feats = tuple(features)
    if not feats:
        raise ValueError("feature selection must be non-empty")
    unknown = [f for f in feats if f not in FEATURE_NAMES]
    if unknown:
        raise ValueError(f"unknown feature {unknown[0]!r}; valid names: {', '.join(FEATURE_NAMES)}")
    if len(set(feats)) != len(feats):
        dup = next(f for f in feats if feats.count(f) > 1)
        raise ValueError(f"duplicate feature {dup!r}")
    return feats


def build_design_matrix(dataset: Dataset, features: Sequence[str], intercept: bool = True):
    """Return ``(X, y)`` with columns ``[1?] + features`` and ``y`` = path loss."""
    feats = validate_features(features)
    if len(dataset) == 0:
        raise FitError("cannot build a design matrix from an empty dataset")
    cols = [dataset.column(f) for f in feats]
    if intercept:
        cols.insert(0, np.ones(len(dataset)))
    X = np.column_stack(cols).astype(float)
    y = np.array(dataset.column("path_loss"), dtype=float)
    return X, y


@dataclass(frozen=True)
class OlsResult:
    beta: np.ndarray  # full length k; zero where a column was dropped
    dropped: tuple[int, ...]
    rank: int
    condition: float


def _is_rank_deficient(cols: np.ndarray, rtol: float) -> bool:
    if cols.shape[1] > cols.shape[0]:
        return True
    s = np.linalg.svd(cols, compute_uv=False)
    return s[-1] <= rtol * s[0]


def ols_fit(design, response, rtol: float = RANK_RTOL) -> OlsResult:
    X = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: design {X.shape}, response {y.shape}")
    n, k = X.shape

    norms = np.linalg.norm(X, axis=0)
    constant = np.ptp(X, axis=0) == 0
    # trivially degenerate: zero columns and repeat constant columns
    first_const = next((j for j in range(k) if constant[j] and norms[j] > 0), None)
    trivial = sum(1 for j in range(k) if norms[j] == 0 or (constant[j] and j != first_const))
    if n < k - trivial:
        raise FitError(f"underdetermined system: {n} samples for {k - trivial} regressors")

    scaled = np.divide(X, norms, out=np.zeros_like(X), where=norms > 0)
    kept: list[int] = []
    dropped: list[int] = []
    for j in range(k):
        if norms[j] == 0 or kept and _is_rank_deficient(scaled[:, kept + [j]], rtol):
            dropped.append(j)
        else:
            kept.append(j)
    if not kept:
        raise FitError("no usable regressors")

    A = scaled[:, kept]
    coef, _, rank, sv = np.linalg.lstsq(A, y, rcond=None)
    beta = np.zeros(k)
    beta[kept] = coef / norms[kept]
    return OlsResult(beta=beta, dropped=tuple(dropped), rank=int(rank), condition=float(sv[0] / sv[-1]))


def residual_variance(design, response, beta_hat) -> float:
    """Sum of squared residuals over N - 1."""
    X = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float)
    n = y.shape[0]
    if n < 2:
        raise FitError("residual variance needs at least 2 samples")
    r = y - X @ np.asarray(beta_hat, dtype=float)
    return float(r @ r) / (n - 1)


@dataclass(frozen=True)
class RegressionFit:
    intercept: float
    coefficients: tuple[float, ...]
    features: tuple[str, ...]
    residual_variance: float
    n_train: int
    condition_diagnostic: float
    dropped_features: tuple[str, ...] = ()
    has_intercept: bool = True

    def __post_init__(self):
        if len(self.coefficients) != len(self.features):
            raise ValueError("coefficients and features differ in length")
        if self.residual_variance < 0:
            raise ValueError("residual_variance must be >= 0")

    def coefficient(self, feature: str) -> float:
        return self.coefficients[self.features.index(feature)]


def fit_regression(dataset: Dataset, features: Sequence[str], intercept: bool = True) -> RegressionFit:
    feats = validate_features(features)
    X, y = build_design_matrix(dataset, feats, intercept)
    res = ols_fit(X, y)
    offset = 1 if intercept else 0
    if intercept and 0 in res.dropped:
        raise FitError("intercept column was dropped; design is degenerate")
    dropped = tuple(feats[j - offset] for j in res.dropped)
    beta = res.beta
    return RegressionFit(
        intercept=float(beta[0]) if intercept else 0.0,
        coefficients=tuple(float(b) for b in beta[offset:]),
        features=feats,
        residual_variance=residual_variance(X, y, beta),
        n_train=len(dataset),
        condition_diagnostic=res.condition,
        dropped_features=dropped,
        has_intercept=intercept,
    )


def predict(fit: RegressionFit, samples: Dataset) -> np.ndarray:
    out = np.full(len(samples), fit.intercept, dtype=float)
    for name, b in zip(fit.features, fit.coefficients):
        try:
            col = samples.column(name)
        except KeyError:
            raise FitError(f"samples lack feature {name!r} required by the fit") from None
        out += b * col
    return out


def feature_contributions(fit: RegressionFit, samples: Dataset) -> dict[str, np.ndarray]:
    """Per-feature loss terms ``beta_j * x_j`` in dB; they sum with the intercept to ``predict``."""
    return {name: b * samples.column(name) for name, b in zip(fit.features, fit.coefficients)}
