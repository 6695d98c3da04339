"""Cross-environment transfer and nested feature-ablation experiments."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

from .datasets import Dataset, SplitSpec, split_indices
from .metrics import EvalReport, evaluate
from .regression import RegressionFit, fit_regression, predict, validate_features

LR_FEATURES = ("distance",)
MLR3_FEATURES = ("distance", "time_delay", "received_power")
# the eight channel features, frequency included
MLR8_FEATURES = (
    "distance",
    "time_delay",
    "received_power",
    "azimuth_aod",
    "elevation_aod",
    "azimuth_aoa",
    "rms_delay_spread",
    "frequency",
)
# alternative top rung: frequency swapped for elevation AoA
MLR8_ELEVATION_FEATURES = (
    "distance",
    "time_delay",
    "received_power",
    "rms_delay_spread",
    "elevation_aod",
    "azimuth_aod",
    "azimuth_aoa",
    "elevation_aoa",
)
DEFAULT_LADDER = (LR_FEATURES, MLR3_FEATURES, MLR8_FEATURES)


@dataclass(frozen=True, eq=False)
class TransferReport:
    source_env: str
    target_env: str
    fit: RegressionFit
    in_domain: EvalReport
    cross_domain: EvalReport
    split: SplitSpec


@dataclass(frozen=True, eq=False)
class AblationRung:
    features: tuple[str, ...]
    fit: RegressionFit
    train: EvalReport
    test: EvalReport


@dataclass(frozen=True, eq=False)
class AblationReport:
    rungs: tuple[AblationRung, ...]
    split: SplitSpec

    def __len__(self):
        return len(self.rungs)


def fit_and_score(train: Dataset, test: Dataset, features: Sequence[str]) -> AblationRung:
    fit = fit_regression(train, features)
    return AblationRung(
        features=fit.features,
        fit=fit,
        train=evaluate(train.column("path_loss"), predict(fit, train)),
        test=evaluate(test.column("path_loss"), predict(fit, test)),
    )


def run_transfer(source: Dataset, target: Dataset, features: Sequence[str], split: SplitSpec) -> TransferReport:
    """Fit on the source training split only, then score that frozen fit on the
    source test split and on the whole target dataset."""
    feats = validate_features(features)
    if len(target) == 0:
        raise ValueError("target dataset is empty")
    train_idx, test_idx = split_indices(len(source), split)
    train, test = source.subset(train_idx), source.subset(test_idx)
    fit = fit_regression(train, feats)
    return TransferReport(
        source_env=source.environment.label,
        target_env=target.environment.label,
        fit=fit,
        in_domain=evaluate(test.column("path_loss"), predict(fit, test)),
        cross_domain=evaluate(target.column("path_loss"), predict(fit, target)),
        split=split,
    )


def check_nested(ladder: Sequence[Sequence[str]]) -> tuple[tuple[str, ...], ...]:
    rungs = tuple(validate_features(r) for r in ladder)
    if not rungs:
        raise ValueError("ablation ladder is empty")
    for i in range(1, len(rungs)):
        if not set(rungs[i - 1]) <= set(rungs[i]):
            missing = sorted(set(rungs[i - 1]) - set(rungs[i]))
            raise ValueError(f"ladder is not nested: rung {i} drops {missing}")
    return rungs


def run_ablation(dataset: Dataset, ladder: Optional[Sequence[Sequence[str]]] = None,
                 split: SplitSpec = SplitSpec(), workers: Optional[int] = None) -> AblationReport:
    rungs = check_nested(DEFAULT_LADDER if ladder is None else ladder)
    train_idx, test_idx = split_indices(len(dataset), split)
    train, test = dataset.subset(train_idx), dataset.subset(test_idx)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda f: fit_and_score(train, test, f), rungs))
    else:
        results = [fit_and_score(train, test, f) for f in rungs]
    return AblationReport(rungs=tuple(results), split=split)
