"""Parametric synthetic channel-measurement generator.

Each sample draws a T-R distance, a median path loss from a known ground
truth law plus Gaussian (dB) shadowing, uniform angles, and a multipath
power delay profile from which first-arrival delay and RMS delay spread
are derived. Every sample owns an independent random substream keyed by
``(seed, index)``, so output does not depend on generation order.
"""

from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Sequence, Union

import numpy as np

from .datasets import ChannelSample, Dataset, Environment, Scenario, environment_from_mapping, normalize_azimuth
from .errors import ConfigError, DatasetError
from .pathloss import SPEED_OF_LIGHT, AbgModel, CiModel, fspl

GroundTruth = Union[CiModel, AbgModel]


@dataclass(frozen=True)
class SimConfig:
    environment: Environment = field(default_factory=Environment)
    n_samples: int = 1000
    distance_range: tuple[float, float] = (1.0, 40.0)  # m
    ground_truth: GroundTruth = field(default_factory=lambda: CiModel(ple=3.2, carrier_frequency=28.0, shadow_sigma=8.0))
    tap_count_range: tuple[int, int] = (2, 10)
    tap_decay_constant: float = 25.0  # ns; may be inf
    excess_delay_scale: float = 100.0  # ns
    seed: int = 0
    # mean excess delay of the first arrival over d/c (ns); 0 puts it at d/c
    first_arrival_excess_scale: float = 5.0
    tap_jitter_db: float = 2.0  # lognormal jitter on tap powers
    elevation_range: tuple[float, float] = (-30.0, 30.0)  # deg
    # per-sample frequency drawn uniformly from this set; empty = carrier only
    frequencies: tuple[float, ...] = ()
    # received power reading error (dB); 0 keeps received = tx - PL exactly
    rx_noise_db: float = 0.0
    # per-sample log10 spread of the excess-delay scale, and its correlation
    # with the shadowing draw (positive: extra loss stretches the delays)
    delay_scale_log_std: float = 0.0
    delay_shadow_correlation: float = 0.0

    def __post_init__(self):
        for name in ("distance_range", "tap_count_range", "elevation_range", "frequencies"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not isinstance(self.environment, Environment):
            raise ConfigError("environment must be an Environment")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ConfigError(f"n_samples must be a positive integer, got {self.n_samples}")
        dmin, dmax = self.distance_range
        if not (1.0 <= dmin <= dmax < np.inf):
            raise ConfigError(f"distance_range must satisfy 1 <= min <= max < inf, got {self.distance_range}")
        if not isinstance(self.ground_truth, (CiModel, AbgModel)):
            raise ConfigError("ground_truth must be a CI or ABG model")
        lmin, lmax = self.tap_count_range
        if int(lmin) != lmin or int(lmax) != lmax or not 1 <= lmin <= lmax:
            raise ConfigError(f"tap_count_range must be integers with 1 <= min <= max, got {self.tap_count_range}")
        if not self.tap_decay_constant > 0:
            raise ConfigError("tap_decay_constant must be > 0")
        if not 0 < self.excess_delay_scale < np.inf:
            raise ConfigError("excess_delay_scale must be positive and finite")
        if not 0 <= self.first_arrival_excess_scale < np.inf:
            raise ConfigError("first_arrival_excess_scale must be >= 0")
        if not 0 <= self.tap_jitter_db < np.inf:
            raise ConfigError("tap_jitter_db must be >= 0")
        emin, emax = self.elevation_range
        if not -90 <= emin <= emax <= 90:
            raise ConfigError(f"elevation_range must lie within [-90, 90], got {self.elevation_range}")
        if any(not f > 0 for f in self.frequencies):
            raise ConfigError("frequencies must all be > 0")
        if not 0 <= self.rx_noise_db < np.inf:
            raise ConfigError("rx_noise_db must be >= 0")
        if not 0 <= self.delay_scale_log_std < np.inf:
            raise ConfigError("delay_scale_log_std must be >= 0")
        if not -1 <= self.delay_shadow_correlation <= 1:
            raise ConfigError("delay_shadow_correlation must lie in [-1, 1]")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError("seed must be an unsigned integer")

    @property
    def shadow_sigma(self) -> float:
        return self.ground_truth.shadow_sigma


def campaign_config(scenario: str = "UMi", n_samples: int = 5000, seed: int = 0, **overrides) -> SimConfig:
    """Measurement setup of the UMi campaign (28 GHz, 800 MHz, 1-40 m, SISO).

    ``scenario="UMa"`` raises the ground-truth PLE by 0.5 and sigma by 2 dB.
    The presets add a 6 dB received-power reading error and couple delay
    dispersion to shadowing, so delay and power features carry partial,
    complementary information about the path loss.
    """
    scen = Scenario(scenario)
    ple, sigma = 3.2, 8.0
    if scen is Scenario.UMA:
        ple, sigma = ple + 0.5, sigma + 2.0
    env = Environment(scenario=scen, carrier_frequency=28.0, bandwidth=800.0, tx_power=30.0,
                      antenna_config="SISO/ULA/Co-Pol")
    base = SimConfig(
        environment=env,
        n_samples=n_samples,
        ground_truth=CiModel(ple=ple, carrier_frequency=28.0, shadow_sigma=sigma),
        seed=seed,
        rx_noise_db=6.0,
        delay_scale_log_std=0.3,
        delay_shadow_correlation=0.8,
    )
    return replace(base, **overrides)


# ---------------------------------------------------------------------- PDPs


@dataclass(frozen=True, eq=False)
class PowerDelayProfile:
    delays: np.ndarray  # ns, strictly increasing
    amplitudes: np.ndarray  # linear, sqrt(mW)

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=float)
        a = np.asarray(self.amplitudes, dtype=float)
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "amplitudes", a)
        if d.shape != a.shape or d.ndim != 1:
            raise ValueError("delays and amplitudes must be 1-D and equal length")
        if d.size and (np.any(d < 0) or np.any(np.diff(d) <= 0)):
            raise ValueError("tap delays must be non-negative and strictly increasing")
        if np.any(a <= 0):
            raise ValueError("tap amplitudes must be > 0")

    @property
    def powers(self) -> np.ndarray:
        return self.amplitudes ** 2

    def __len__(self):
        return self.delays.size


def sample_stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def synthesize_pdp(config: SimConfig, distance: float, stream: np.random.Generator,
                   total_power_dbm: float = 0.0, delay_factor: float = 1.0) -> PowerDelayProfile:
    """Draw one multipath profile whose tap powers sum to ``total_power_dbm``.

    ``delay_factor`` stretches the excess delays of the taps after the
    first arrival together with the power decay constant.
    """
    if not distance > 0:
        raise ValueError("distance must be > 0")
    lmin, lmax = config.tap_count_range
    n_taps = int(stream.integers(lmin, lmax + 1))
    first_scale = config.first_arrival_excess_scale
    first = stream.exponential(first_scale) if first_scale > 0 else 0.0
    later = np.sort(stream.exponential(config.excess_delay_scale * delay_factor, n_taps - 1))
    excess = np.concatenate([[first], first + later])
    jitter = stream.standard_normal(n_taps) * config.tap_jitter_db
    delays = distance / SPEED_OF_LIGHT * 1e9 + excess
    for i in range(1, n_taps):
        if delays[i] <= delays[i - 1]:
            delays[i] = np.nextafter(delays[i - 1], np.inf)
    # decay measured against tap excess delay, stretched with the delays
    log_w = -excess / (config.tap_decay_constant * delay_factor) + jitter * (np.log(10.0) / 10.0)
    weights = np.exp(log_w - log_w.max())
    powers = weights / weights.sum() * 10.0 ** (total_power_dbm / 10.0)
    powers = np.maximum(powers, np.finfo(float).tiny)
    return PowerDelayProfile(delays=delays, amplitudes=np.sqrt(powers))


def rms_delay_spread(pdp: PowerDelayProfile) -> float:
    """Square root of the power-weighted second central moment of delay (ns)."""
    if len(pdp) == 0:
        raise ValueError("empty power delay profile")
    p = pdp.powers
    # central moments are shift invariant; centring on the first tap limits cancellation
    tau = pdp.delays - pdp.delays[0]
    mean = p @ tau / p.sum()
    var = p @ (tau - mean) ** 2 / p.sum()
    return float(np.sqrt(max(var, 0.0)))


@dataclass(frozen=True, eq=False)
class Apdp:
    delays: np.ndarray  # left bin edges, ns
    power: np.ndarray  # mean tap power per bin


def apdp(pdps: Sequence[PowerDelayProfile], bin_width: float, align: bool = True) -> Apdp:
    """Average power delay profile over several profiles on a fixed delay grid.

    With ``align`` each profile's delays are taken relative to its first tap.
    """
    if not pdps:
        raise ValueError("no profiles to average")
    if not bin_width > 0:
        raise ValueError("bin_width must be > 0")
    taus, pows = [], []
    for pdp in pdps:
        if len(pdp) == 0:
            continue
        taus.append(pdp.delays - pdp.delays[0] if align else pdp.delays)
        pows.append(pdp.powers)
    if not taus:
        return Apdp(delays=np.zeros(0), power=np.zeros(0))
    tau = np.concatenate(taus)
    pw = np.concatenate(pows)
    bins = np.floor(tau / bin_width).astype(np.int64)
    total = np.bincount(bins, weights=pw)
    return Apdp(delays=np.arange(total.size) * bin_width, power=total / len(pdps))


# ---------------------------------------------------------------- generation


def _median_path_loss(truth: GroundTruth, distance: float, frequency: float) -> float:
    if isinstance(truth, CiModel):
        # CI is anchored at the sample's own frequency
        return fspl(frequency, 1.0) + 10.0 * truth.ple * np.log10(distance)
    return 10.0 * truth.alpha * np.log10(distance) + truth.beta + 10.0 * truth.gamma * np.log10(frequency)


def generate_sample(config: SimConfig, index: int) -> ChannelSample:
    rng = sample_stream(config.seed, index)
    dmin, dmax = config.distance_range
    distance = float(rng.uniform(dmin, dmax))
    if config.frequencies:
        frequency = float(config.frequencies[rng.integers(len(config.frequencies))])
    else:
        frequency = float(config.environment.carrier_frequency)
    z_shadow, z_delay, z_rx = rng.standard_normal(3)
    shadow = config.shadow_sigma * z_shadow
    path_loss = float(_median_path_loss(config.ground_truth, distance, frequency) + shadow)
    emin, emax = config.elevation_range
    az_aod = normalize_azimuth(rng.uniform(0.0, 360.0))
    el_aod = float(rng.uniform(emin, emax))
    az_aoa = normalize_azimuth(rng.uniform(0.0, 360.0))
    el_aoa = float(rng.uniform(emin, emax))

    rho = config.delay_shadow_correlation
    z_spread = rho * z_shadow + np.sqrt(1.0 - rho * rho) * z_delay
    delay_factor = 10.0 ** (config.delay_scale_log_std * z_spread)

    total_rx = config.environment.tx_power - path_loss
    pdp = synthesize_pdp(config, distance, rng, total_rx, delay_factor)
    received = total_rx + config.rx_noise_db * z_rx if config.rx_noise_db > 0 else total_rx
    return ChannelSample(
        distance=distance,
        frequency=frequency,
        time_delay=float(pdp.delays[0]),
        received_power=float(received),
        rms_delay_spread=rms_delay_spread(pdp),
        azimuth_aod=az_aod,
        elevation_aod=el_aod,
        azimuth_aoa=az_aoa,
        elevation_aoa=el_aoa,
        path_loss=path_loss,
    )


def generate_dataset(config: SimConfig, workers: Optional[int] = None) -> Dataset:
    n = config.n_samples
    if workers is None or workers <= 1:
        samples = [generate_sample(config, i) for i in range(n)]
    else:
        chunk = -(-n // workers)
        ranges = [range(s, min(s + chunk, n)) for s in range(0, n, chunk)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(lambda r: [generate_sample(config, i) for i in r], ranges)
            samples = [s for part in parts for s in part]
    return Dataset(config.environment, tuple(samples))


# -------------------------------------------------------------- config files

_TRUTH_RE = re.compile(r"^\s*(ci|abg)\s*\((.*)\)\s*$", re.IGNORECASE)
_ENV_KEYS = {"scenario", "name", "frequency_ghz", "bandwidth_mhz", "tx_power_dbm", "antenna"}


def parse_ground_truth(text: str, carrier_frequency: float) -> GroundTruth:
    """Parse ``CI(n=3.2, sigma=8)`` or ``ABG(alpha=3.4, beta=19.2, gamma=2.3, sigma=4)``."""
    m = _TRUTH_RE.match(text)
    if not m:
        raise ConfigError(f"cannot parse ground_truth {text!r}; expected CI(n=..., sigma=...) or ABG(...)")
    kind = m.group(1).lower()
    params = {}
    for part in filter(None, (p.strip() for p in m.group(2).split(","))):
        if "=" not in part:
            raise ConfigError(f"ground_truth parameter {part!r} is not key=value")
        k, v = (s.strip() for s in part.split("=", 1))
        try:
            params[k.lower()] = float(v)
        except ValueError:
            raise ConfigError(f"ground_truth parameter {k}={v!r} is not a number") from None
    need = {"ci": {"n"}, "abg": {"alpha", "beta", "gamma"}}[kind]
    missing = need - params.keys()
    extra = params.keys() - need - {"sigma"}
    if missing or extra:
        raise ConfigError(f"ground_truth {kind.upper()} needs {sorted(need)} (+ sigma); got {sorted(params)}")
    sigma = params.get("sigma", 0.0)
    try:
        if kind == "ci":
            return CiModel(ple=params["n"], carrier_frequency=carrier_frequency, shadow_sigma=sigma)
        return AbgModel(alpha=params["alpha"], beta=params["beta"], gamma=params["gamma"], shadow_sigma=sigma)
    except ValueError as exc:
        raise ConfigError(f"invalid ground_truth: {exc}") from None


def format_ground_truth(truth: GroundTruth) -> str:
    if isinstance(truth, CiModel):
        return f"CI(n={truth.ple!r}, sigma={truth.shadow_sigma!r})"
    return f"ABG(alpha={truth.alpha!r}, beta={truth.beta!r}, gamma={truth.gamma!r}, sigma={truth.shadow_sigma!r})"


def _floats(value: str, key: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in value.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated numbers, got {value!r}") from None


def _pair(value: str, key: str) -> tuple[float, float]:
    vals = _floats(value, key)
    if len(vals) != 2:
        raise ConfigError(f"{key}: expected two comma-separated numbers, got {value!r}")
    return vals


def _int(value: str, key: str) -> int:
    try:
        f = float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None
    if f != int(f):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    return int(f)


def _number(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def config_from_mapping(kv: dict[str, str]) -> SimConfig:
    """Build a SimConfig from ``key=value`` entries.

    An optional ``preset`` key (``umi``/``uma``) seeds the defaults; the
    remaining keys override it.
    """
    kv = dict(kv)
    preset = kv.pop("preset", None)
    if preset is not None:
        names = {"umi": "UMi", "uma": "UMa"}
        if preset.lower() not in names:
            raise ConfigError(f"unknown preset {preset!r}; expected umi or uma")
        base = campaign_config(names[preset.lower()])
    else:
        base = SimConfig()

    env_kv = {k: kv.pop(k) for k in list(kv) if k in _ENV_KEYS}
    env = base.environment
    if env_kv:
        merged = {
            "scenario": env.scenario.value, "name": env.name, "frequency_ghz": repr(env.carrier_frequency),
            "bandwidth_mhz": repr(env.bandwidth), "tx_power_dbm": repr(env.tx_power), "antenna": env.antenna_config,
        }
        merged.update(env_kv)
        try:
            env = environment_from_mapping(merged)
        except DatasetError as exc:
            raise ConfigError(f"environment: {exc}") from None

    updates: dict = {"environment": env}
    converters = {
        "n_samples": _int,
        "seed": _int,
        "distance_range": _pair,
        "tap_count_range": lambda v, k: tuple(_int(x, k) for x in _pair(v, k)),
        "elevation_range": _pair,
        "frequencies": _floats,
        "tap_decay_constant": _number,
        "excess_delay_scale": _number,
        "first_arrival_excess_scale": _number,
        "tap_jitter_db": _number,
        "rx_noise_db": _number,
        "delay_scale_log_std": _number,
        "delay_shadow_correlation": _number,
    }
    for key, value in kv.items():
        if key == "ground_truth":
            continue
        if key not in converters:
            valid = sorted(set(converters) | _ENV_KEYS | {"ground_truth", "preset"})
            raise ConfigError(f"unknown config key {key!r}; valid keys: {', '.join(valid)}")
        updates[key] = converters[key](value, key)
    if "ground_truth" in kv:
        updates["ground_truth"] = parse_ground_truth(kv["ground_truth"], env.carrier_frequency)
    elif isinstance(base.ground_truth, CiModel) and env is not base.environment:
        updates["ground_truth"] = replace(base.ground_truth, carrier_frequency=env.carrier_frequency)
    try:
        return replace(base, **updates)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def config_to_mapping(config: SimConfig) -> dict[str, str]:
    env = config.environment
    out = {
        "scenario": env.scenario.value,
        "frequency_ghz": repr(env.carrier_frequency),
        "bandwidth_mhz": repr(env.bandwidth),
        "tx_power_dbm": repr(env.tx_power),
        "antenna": env.antenna_config,
    }
    if env.name:
        out["name"] = env.name
    for f in fields(config):
        if f.name == "environment":
            continue
        v = getattr(config, f.name)
        if f.name == "ground_truth":
            out[f.name] = format_ground_truth(v)
        elif isinstance(v, tuple):
            out[f.name] = ",".join(repr(x) for x in v)
        else:
            out[f.name] = v if isinstance(v, str) else repr(v)
    return out
