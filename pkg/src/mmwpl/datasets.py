"""Measurement data model, CSV/sidecar I/O and seeded train/test splitting."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field, fields, replace
from decimal import ROUND_HALF_UP, Decimal
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DatasetError, ParseError, SchemaError, ValidationError

# (sample field, CSV column) in on-disk order
COLUMNS: tuple[tuple[str, str], ...] = (
    ("distance", "distance_m"),
    ("frequency", "frequency_ghz"),
    ("time_delay", "time_delay_ns"),
    ("received_power", "received_power_dbm"),
    ("rms_delay_spread", "rms_delay_spread_ns"),
    ("azimuth_aod", "azimuth_aod_deg"),
    ("elevation_aod", "elevation_aod_deg"),
    ("azimuth_aoa", "azimuth_aoa_deg"),
    ("elevation_aoa", "elevation_aoa_deg"),
    ("path_loss", "path_loss_db"),
)
CSV_HEADER = tuple(col for _, col in COLUMNS)
FIELD_NAMES = tuple(name for name, _ in COLUMNS)
# every numeric field that may serve as a regressor
FEATURE_NAMES = tuple(name for name in FIELD_NAMES if name != "path_loss")

AZIMUTH_FIELDS = ("azimuth_aod", "azimuth_aoa")
ELEVATION_FIELDS = ("elevation_aod", "elevation_aoa")


class Scenario(str, enum.Enum):
    UMI = "UMi"
    UMA = "UMa"
    INH = "InH"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class Environment:
    scenario: Scenario = Scenario.UMI
    carrier_frequency: float = 28.0  # GHz
    bandwidth: float = 800.0  # MHz
    tx_power: float = 30.0  # dBm
    antenna_config: str = "SISO/ULA/Co-Pol"
    name: str = ""  # required for Custom scenarios

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if not self.carrier_frequency > 0:
            raise ValidationError(f"carrier_frequency must be > 0, got {self.carrier_frequency}")
        if not self.bandwidth > 0:
            raise ValidationError(f"bandwidth must be > 0, got {self.bandwidth}")
        if not math.isfinite(self.tx_power):
            raise ValidationError("tx_power must be finite")
        if self.scenario is Scenario.CUSTOM and not self.name.strip():
            raise ValidationError("Custom scenario requires a non-empty name")

    @property
    def label(self) -> str:
        if self.scenario is Scenario.CUSTOM:
            return self.name
        return self.scenario.value


@dataclass(frozen=True)
class ChannelSample:
    distance: float  # m
    frequency: float  # GHz
    time_delay: float  # ns
    received_power: float  # dBm
    rms_delay_spread: float  # ns
    azimuth_aod: float  # deg
    elevation_aod: float  # deg
    azimuth_aoa: float  # deg
    elevation_aoa: float  # deg
    path_loss: float  # dB

    def __post_init__(self):
        problems = sample_violations(self)
        if problems:
            raise ValidationError("; ".join(problems))


def sample_violations(sample: ChannelSample) -> list[str]:
    """Return a human-readable entry for each violated sample invariant."""
    out = []
    for f in fields(sample):
        if not math.isfinite(getattr(sample, f.name)):
            out.append(f"{f.name} must be finite")
    if out:
        return out
    if not sample.distance > 0:
        out.append(f"distance must be > 0 (got {sample.distance})")
    if not sample.frequency > 0:
        out.append(f"frequency must be > 0 (got {sample.frequency})")
    if not sample.time_delay > 0:
        out.append(f"time_delay must be > 0 (got {sample.time_delay})")
    if sample.rms_delay_spread < 0:
        out.append(f"rms_delay_spread must be >= 0 (got {sample.rms_delay_spread})")
    for name in AZIMUTH_FIELDS:
        v = getattr(sample, name)
        if not 0 <= v < 360:
            out.append(f"{name} must lie in [0, 360) (got {v})")
    for name in ELEVATION_FIELDS:
        v = getattr(sample, name)
        if not -90 <= v <= 90:
            out.append(f"{name} must lie in [-90, 90] (got {v})")
    if sample.path_loss < 0:
        out.append(f"path_loss must be >= 0 dB (got {sample.path_loss})")
    return out


@dataclass(frozen=True)
class Dataset:
    environment: Environment
    samples: tuple[ChannelSample, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(self.samples))

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @cached_property
    def _columns(self) -> dict[str, np.ndarray]:
        cols = {}
        for name in FIELD_NAMES:
            arr = np.fromiter((getattr(s, name) for s in self.samples), dtype=float, count=len(self.samples))
            arr.flags.writeable = False
            cols[name] = arr
        return cols

    def column(self, name: str) -> np.ndarray:
        """Read-only float array of one sample field, in sample order."""
        try:
            return self._columns[name]
        except KeyError:
            raise KeyError(f"unknown field {name!r}; valid names: {', '.join(FIELD_NAMES)}") from None

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return Dataset(self.environment, tuple(self.samples[i] for i in indices))

    def with_samples(self, samples: Sequence[ChannelSample]) -> "Dataset":
        return replace(self, samples=tuple(samples))


def normalize_azimuth(deg: float) -> float:
    v = deg % 360.0
    # tiny negatives wrap to exactly 360.0 in floating point
    return 0.0 if v >= 360.0 else v


# --------------------------------------------------------------------------- CSV


def load_dataset(path, environment: Environment) -> Dataset:
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: file is empty (no header)") from None
        missing = [c for c in CSV_HEADER if c not in header]
        if missing:
            raise SchemaError(f"{path}: missing column {missing[0]!r}", column=missing[0])
        index = {c: header.index(c) for c in CSV_HEADER}

        samples = []
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            values = {}
            for name, col in COLUMNS:
                try:
                    values[name] = float(row[index[col]])
                except (IndexError, ValueError):
                    cell = row[index[col]] if index[col] < len(row) else "<missing>"
                    raise ParseError(f"{path}: row {row_no}: cannot parse {col}={cell!r}", row=row_no) from None
            for name in AZIMUTH_FIELDS:
                if math.isfinite(values[name]):
                    values[name] = normalize_azimuth(values[name])
            try:
                samples.append(ChannelSample(**values))
            except ValidationError as exc:
                raise ValidationError(f"{path}: row {row_no}: {exc}", row=row_no) from None

    if not samples:
        raise DatasetError(f"{path}: empty dataset")
    return Dataset(environment, tuple(samples))


def save_dataset(dataset: Dataset, path) -> None:
    if len(dataset) == 0:
        raise DatasetError("refusing to write an empty dataset")
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for s in dataset.samples:
                # repr is the shortest string that parses back to the same float
                writer.writerow([repr(float(getattr(s, name))) for name in FIELD_NAMES])
    except OSError as exc:
        raise OSError(f"cannot write dataset to {path}: {exc.strerror or exc}") from exc


# ----------------------------------------------------------------------- sidecar


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".env")


def parse_key_values(text: str, source: str = "<string>") -> dict[str, str]:
    """Parse the ``key=value`` dialect shared by sidecars and config files.

    Blank lines and lines starting with ``#`` are ignored. Keys are
    lower-cased; values are stripped.
    """
    out = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"{source}: line {line_no}: expected key=value, got {raw!r}", row=line_no)
        key, value = line.split("=", 1)
        out[key.strip().lower()] = value.strip()
    return out


def environment_from_mapping(kv: dict[str, str]) -> Environment:
    scenario = kv.get("scenario", "UMi")
    name = kv.get("name", "")
    if ":" in scenario:
        scenario, name = (part.strip() for part in scenario.split(":", 1))
    try:
        scen = Scenario(scenario)
    except ValueError:
        valid = ", ".join(s.value for s in Scenario)
        raise ValidationError(f"unknown scenario {scenario!r}; expected one of {valid}") from None
    try:
        return Environment(
            scenario=scen,
            carrier_frequency=float(kv.get("frequency_ghz", 28.0)),
            bandwidth=float(kv.get("bandwidth_mhz", 800.0)),
            tx_power=float(kv.get("tx_power_dbm", 30.0)),
            antenna_config=kv.get("antenna", "SISO/ULA/Co-Pol"),
            name=name,
        )
    except ValueError as exc:
        if isinstance(exc, DatasetError):
            raise
        raise ParseError(f"bad environment value: {exc}") from None


def environment_to_text(env: Environment) -> str:
    lines = [f"scenario={env.scenario.value}"]
    if env.name:
        lines.append(f"name={env.name}")
    lines += [
        f"frequency_ghz={env.carrier_frequency!r}",
        f"bandwidth_mhz={env.bandwidth!r}",
        f"tx_power_dbm={env.tx_power!r}",
        f"antenna={env.antenna_config}",
    ]
    return "\n".join(lines) + "\n"


def read_environment(path) -> Environment:
    path = Path(path)
    return environment_from_mapping(parse_key_values(path.read_text(encoding="utf-8"), str(path)))


def write_environment(env: Environment, path) -> None:
    Path(path).write_text(environment_to_text(env), encoding="utf-8")


# ------------------------------------------------------------------------- split


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be an unsigned integer, got {self.seed}")


def train_size(n: int, train_fraction: float) -> int:
    """Round-half-up of ``train_fraction * n``, computed in decimal arithmetic."""
    exact = Decimal(repr(float(train_fraction))) * n
    return int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    if n < 2:
        raise DatasetError("dataset too small to split")
    k = train_size(n, spec.train_fraction)
    if k == 0 or k == n:
        raise DatasetError(f"split of {n} samples at fraction {spec.train_fraction} leaves an empty partition")
    perm = np.random.default_rng(spec.seed).permutation(n)
    return perm[:k], perm[k:]


def split_train_test(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    train_idx, test_idx = split_indices(len(dataset), spec)
    return dataset.subset(train_idx), dataset.subset(test_idx)
