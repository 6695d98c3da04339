"""Large-scale path loss models: close-in (CI), CI with frequency-dependent
exponent (CIF), floating intercept (FI) and alpha-beta-gamma (ABG).

Evaluation functions return the median path loss in dB; the shadowing term
is never added here. All evaluators accept scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .datasets import Dataset
from .errors import DomainError, FitError
from .regression import ols_fit

SPEED_OF_LIGHT = 299_792_458.0  # m/s
REFERENCE_DISTANCE = 1.0  # m


def _positive(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(arr > 0):
        raise DomainError(f"{name} must be > 0")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def fspl(frequency, distance):
    """Free-space path loss in dB, ``frequency`` in GHz and ``distance`` in m."""
    f = _positive("frequency", frequency)
    d = _positive("distance", distance)
    return _out(20.0 * np.log10(4.0 * np.pi * d * f * 1e9 / SPEED_OF_LIGHT))


@dataclass(frozen=True)
class CiModel:
    ple: float
    carrier_frequency: float  # GHz
    shadow_sigma: float = 0.0
    reference_distance: float = REFERENCE_DISTANCE

    def __post_init__(self):
        if not np.isfinite(self.ple):
            raise ValueError("ple must be finite")
        if self.shadow_sigma < 0:
            raise ValueError("shadow_sigma must be >= 0")
        if self.reference_distance != REFERENCE_DISTANCE:
            raise ValueError("reference_distance is fixed at 1 m")
        if not self.carrier_frequency > 0:
            raise ValueError("carrier_frequency must be > 0")


@dataclass(frozen=True)
class CifModel:
    ple: float
    slope_factor: float
    reference_frequency: float  # GHz
    shadow_sigma: float = 0.0

    def __post_init__(self):
        if not self.reference_frequency > 0:
            raise ValueError("reference_frequency must be > 0")
        if self.shadow_sigma < 0:
            raise ValueError("shadow_sigma must be >= 0")


@dataclass(frozen=True)
class FiModel:
    alpha: float  # dB
    beta: float  # multiplies 10*log10(d)
    shadow_sigma: float = 0.0

    def __post_init__(self):
        if self.shadow_sigma < 0:
            raise ValueError("shadow_sigma must be >= 0")


@dataclass(frozen=True)
class AbgModel:
    alpha: float  # distance slope
    beta: float  # dB offset
    gamma: float  # frequency slope
    shadow_sigma: float = 0.0

    def __post_init__(self):
        if self.shadow_sigma < 0:
            raise ValueError("shadow_sigma must be >= 0")


PathLossModel = Union[CiModel, CifModel, FiModel, AbgModel]


def _reference_distance_check(distance):
    d = np.asarray(distance, dtype=float)
    if not np.all(d >= REFERENCE_DISTANCE):
        raise DomainError("distance below the 1 m close-in reference")
    return d


def eval_ci(model: CiModel, distance):
    d = _reference_distance_check(distance)
    return _out(fspl(model.carrier_frequency, 1.0) + 10.0 * model.ple * np.log10(d))


def eval_cif(model: CifModel, distance, frequency):
    d = _reference_distance_check(distance)
    f = _positive("frequency", frequency)
    f0 = model.reference_frequency
    ple_f = model.ple * (1.0 + model.slope_factor * (f - f0) / f0)
    return _out(fspl(f, 1.0) + 10.0 * ple_f * np.log10(d))


def eval_fi(model: FiModel, distance):
    d = _positive("distance", distance)
    return _out(model.alpha + 10.0 * model.beta * np.log10(d))


def eval_abg(model: AbgModel, distance, frequency):
    d = _positive("distance", distance)
    f = _positive("frequency", frequency)
    return _out(10.0 * model.alpha * np.log10(d) + model.beta + 10.0 * model.gamma * np.log10(f))


def evaluate_model(model: PathLossModel, distance, frequency=None):
    """Dispatch on model type; ``frequency`` is ignored by CI and FI."""
    if isinstance(model, CiModel):
        return eval_ci(model, distance)
    if isinstance(model, FiModel):
        return eval_fi(model, distance)
    if frequency is None:
        raise ValueError(f"{type(model).__name__} needs a frequency")
    if isinstance(model, CifModel):
        return eval_cif(model, distance, frequency)
    if isinstance(model, AbgModel):
        return eval_abg(model, distance, frequency)
    raise TypeError(f"not a path loss model: {model!r}")


def predict_dataset(model: PathLossModel, dataset: Dataset) -> np.ndarray:
    return np.asarray(
        evaluate_model(model, dataset.column("distance"), dataset.column("frequency")), dtype=float
    ).reshape(len(dataset))


# ------------------------------------------------------------------ fitting


def _sigma(residuals: np.ndarray) -> float:
    n = residuals.shape[0]
    if n < 2:
        raise FitError("at least 2 samples are needed to estimate shadow fading")
    return float(np.sqrt(residuals @ residuals / (n - 1)))


def _single_frequency(dataset: Dataset) -> float:
    freqs = np.unique(dataset.column("frequency"))
    if freqs.size != 1:
        raise FitError(f"CI needs a single carrier frequency, found {freqs.size}; use CIF or ABG")
    return float(freqs[0])


def fit_ci(dataset: Dataset) -> CiModel:
    d = dataset.column("distance")
    if not np.all(d >= REFERENCE_DISTANCE):
        raise FitError("CI fitting requires all distances >= 1 m")
    f = _single_frequency(dataset)
    a = dataset.column("path_loss") - fspl(f, 1.0)
    b = 10.0 * np.log10(d)
    energy = b @ b
    if energy == 0:
        raise FitError("all samples at the 1 m reference distance; PLE is unfittable")
    n = float(a @ b / energy)
    return CiModel(ple=n, carrier_frequency=f, shadow_sigma=_sigma(a - n * b))


def fit_fi(dataset: Dataset) -> FiModel:
    d = dataset.column("distance")
    if np.unique(d).size < 2:
        raise FitError("FI fitting needs at least 2 distinct distances")
    x = 10.0 * np.log10(_positive("distance", d))
    X = np.column_stack([np.ones_like(x), x])
    y = dataset.column("path_loss")
    res = ols_fit(X, y)
    if res.dropped:
        raise FitError("FI design is degenerate")
    alpha, beta = res.beta
    return FiModel(alpha=float(alpha), beta=float(beta), shadow_sigma=_sigma(y - X @ res.beta))


def weighted_mean_frequency(dataset: Dataset) -> float:
    """Sample-count weighted average of the dataset's frequencies."""
    return float(np.mean(dataset.column("frequency")))


def fit_cif(dataset: Dataset, f0: Union[float, str] = "auto") -> CifModel:
    d = dataset.column("distance")
    f = dataset.column("frequency")
    if not np.all(d >= REFERENCE_DISTANCE):
        raise FitError("CIF fitting requires all distances >= 1 m")
    if np.unique(f).size < 2:
        raise FitError("b unidentifiable; fit CI instead (dataset has a single frequency)")
    if f0 == "auto":
        f0 = weighted_mean_frequency(dataset)
    f0 = float(f0)
    if not f0 > 0:
        raise FitError("reference frequency must be > 0")
    logd = 10.0 * np.log10(d)
    X = np.column_stack([logd, (f - f0) / f0 * logd])
    y = dataset.column("path_loss") - fspl(f, 1.0)
    res = ols_fit(X, y)
    if res.dropped:
        raise FitError("b unidentifiable; fit CI instead (degenerate CIF design)")
    n, nb = res.beta
    if n == 0:
        raise FitError("fitted PLE is zero; slope factor b is undefined")
    return CifModel(ple=float(n), slope_factor=float(nb / n), reference_frequency=f0,
                    shadow_sigma=_sigma(y - X @ res.beta))


def fit_abg(dataset: Dataset) -> AbgModel:
    d = dataset.column("distance")
    f = dataset.column("frequency")
    if np.unique(d).size < 2:
        raise FitError("ABG fitting needs at least 2 distinct distances")
    if np.unique(f).size < 2:
        raise FitError("frequency column is degenerate (single frequency); fit FI instead")
    X = np.column_stack([10.0 * np.log10(_positive("distance", d)), np.ones_like(d),
                         10.0 * np.log10(_positive("frequency", f))])
    y = dataset.column("path_loss")
    res = ols_fit(X, y)
    if res.dropped:
        raise FitError("ABG design is degenerate; fit FI instead")
    alpha, beta, gamma = res.beta
    return AbgModel(alpha=float(alpha), beta=float(beta), gamma=float(gamma),
                    shadow_sigma=_sigma(y - X @ res.beta))


FITTERS = {
    "ci": fit_ci,
    "cif": fit_cif,
    "fi": fit_fi,
    "abg": fit_abg,
}
