from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mmwpl import pathloss as pl
from mmwpl.datasets import Environment, Scenario, parse_key_values
from mmwpl.errors import ConfigError
from mmwpl.simulator import (PowerDelayProfile, SimConfig, apdp, config_from_mapping, config_to_mapping,
                             generate_dataset, parse_ground_truth, rms_delay_spread, sample_stream,
                             synthesize_pdp, campaign_config)

from oracles import rms_delay_spread_bruteforce

C_NS = 299_792_458.0 / 1e9  # m per ns


def test_noise_free_ci_lies_on_curve():
    truth = pl.CiModel(ple=2.0, carrier_frequency=28.0, shadow_sigma=0.0)
    ds = generate_dataset(SimConfig(n_samples=300, ground_truth=truth, seed=5))
    expected = pl.eval_ci(truth, ds.column("distance"))
    assert np.array_equal(ds.column("path_loss"), expected)


def test_noise_free_abg_lies_on_surface():
    truth = pl.AbgModel(alpha=3.4, beta=19.2, gamma=2.3)
    ds = generate_dataset(SimConfig(n_samples=200, ground_truth=truth, frequencies=(28.0, 73.0), seed=1))
    expected = pl.eval_abg(truth, ds.column("distance"), ds.column("frequency"))
    np.testing.assert_allclose(ds.column("path_loss"), expected, rtol=0, atol=1e-12)
    assert set(np.unique(ds.column("frequency"))) == {28.0, 73.0}


def test_determinism_bit_identical():
    cfg = campaign_config("UMi", 500, seed=42)
    a, b = generate_dataset(cfg), generate_dataset(cfg)
    assert a == b
    assert generate_dataset(replace(cfg, seed=43)) != a


def test_parallel_matches_serial():
    cfg = campaign_config("UMa", 301, seed=3)
    assert generate_dataset(cfg, workers=4) == generate_dataset(cfg)


def test_sample_streams_are_order_independent():
    cfg = SimConfig(n_samples=50, seed=9)
    full = generate_dataset(cfg)
    from mmwpl.simulator import generate_sample
    assert generate_sample(cfg, 37) == full.samples[37]


def test_received_power_identity_in_total_mode():
    cfg = SimConfig(n_samples=400, seed=2)
    ds = generate_dataset(cfg)
    np.testing.assert_allclose(ds.column("received_power"), cfg.environment.tx_power - ds.column("path_loss"),
                               rtol=0, atol=1e-12)


def test_time_delay_is_first_arrival():
    ds = generate_dataset(SimConfig(n_samples=200, seed=4, first_arrival_excess_scale=0.0))
    np.testing.assert_allclose(ds.column("time_delay"), ds.column("distance") / C_NS, rtol=1e-14)
    ds = generate_dataset(SimConfig(n_samples=200, seed=4))
    assert np.all(ds.column("time_delay") >= ds.column("distance") / C_NS)


def test_angles_in_range():
    ds = generate_dataset(SimConfig(n_samples=2000, seed=6, elevation_range=(-20.0, 10.0)))
    for name in ("azimuth_aod", "azimuth_aoa"):
        col = ds.column(name)
        assert col.min() >= 0 and col.max() < 360
    for name in ("elevation_aod", "elevation_aoa"):
        col = ds.column(name)
        assert col.min() >= -20 and col.max() <= 10


def test_table1_ci_recovered_by_fi_slope():
    ds = generate_dataset(campaign_config("UMi", 20_000, seed=11))
    fi = pl.fit_fi(ds)
    assert abs(fi.beta - 3.2) <= 0.15


def test_statistical_recovery_rate():
    # PLE error over repeated seeds shrinks roughly like 1/sqrt(N)
    def mean_err(n):
        errs = []
        for seed in range(8):
            ds = generate_dataset(SimConfig(n_samples=n, seed=100 + seed))
            errs.append(abs(pl.fit_ci(ds).ple - 3.2))
        return np.mean(errs)
    small, large = mean_err(250), mean_err(4000)
    # sqrt(16) = 4; allow a factor-2 band for Monte-Carlo scatter
    assert large <= small / 2


def test_preset_delay_spread_tracks_shadowing():
    cfg = campaign_config("UMi", 3000, seed=8)
    ds = generate_dataset(cfg)
    median = pl.eval_ci(cfg.ground_truth, ds.column("distance"))
    shadow = ds.column("path_loss") - median
    assert np.corrcoef(shadow, np.log(ds.column("rms_delay_spread")))[0, 1] > 0.3


def test_uma_preset_offsets():
    umi, uma = campaign_config("UMi"), campaign_config("UMa")
    assert uma.ground_truth.ple == pytest.approx(umi.ground_truth.ple + 0.5)
    assert uma.shadow_sigma == pytest.approx(umi.shadow_sigma + 2.0)
    assert uma.environment.scenario is Scenario.UMA
    assert umi.environment.carrier_frequency == 28.0 and umi.distance_range == (1.0, 40.0)


@pytest.mark.parametrize("kw", [
    dict(n_samples=0), dict(distance_range=(0.5, 40.0)), dict(distance_range=(10.0, 5.0)),
    dict(tap_count_range=(0, 3)), dict(tap_count_range=(4, 2)), dict(excess_delay_scale=0.0),
    dict(tap_decay_constant=-1.0), dict(ground_truth=pl.FiModel(1.0, 2.0)), dict(elevation_range=(-100.0, 0.0)),
    dict(frequencies=(28.0, -1.0)), dict(rx_noise_db=-1.0), dict(delay_shadow_correlation=1.5), dict(seed=-1),
])
def test_invalid_config(kw):
    with pytest.raises(ConfigError):
        SimConfig(**kw)


# ----------------------------------------------------------------------- PDP


def test_single_tap_profile():
    cfg = SimConfig(tap_count_range=(1, 1), first_arrival_excess_scale=0.0)
    pdp = synthesize_pdp(cfg, 30.0, sample_stream(0, 0), total_power_dbm=-60.0)
    assert len(pdp) == 1
    assert pdp.delays[0] == pytest.approx(30.0 / C_NS, rel=1e-15)
    assert 10 * np.log10(pdp.powers[0]) == pytest.approx(-60.0, abs=1e-12)
    assert rms_delay_spread(pdp) == 0.0


def test_equal_power_limit():
    cfg = SimConfig(tap_count_range=(6, 6), tap_decay_constant=float("inf"), tap_jitter_db=0.0)
    pdp = synthesize_pdp(cfg, 10.0, sample_stream(1, 2))
    np.testing.assert_allclose(pdp.powers, np.full(6, 1 / 6), rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31), st.floats(1, 500), st.floats(-120, 10))
def test_pdp_power_normalised_and_deterministic(seed, d, p_dbm):
    cfg = SimConfig()
    a = synthesize_pdp(cfg, d, sample_stream(seed, 0), p_dbm)
    b = synthesize_pdp(cfg, d, sample_stream(seed, 0), p_dbm)
    np.testing.assert_array_equal(a.delays, b.delays)
    np.testing.assert_array_equal(a.amplitudes, b.amplitudes)
    assert 10 * np.log10(a.powers.sum()) == pytest.approx(p_dbm, abs=1e-9)
    assert np.all(np.diff(a.delays) > 0)
    assert 2 <= len(a) <= 10


def test_rms_examples():
    assert rms_delay_spread(PowerDelayProfile([0.0, 100.0], [1.0, 1.0])) == pytest.approx(50.0, abs=1e-12)
    assert rms_delay_spread(PowerDelayProfile([42.0], [0.3])) == 0.0
    with pytest.raises(ValueError):
        rms_delay_spread(PowerDelayProfile([], []))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(0.01, 500), st.floats(0.01, 10)), min_size=1, max_size=12), st.floats(0, 1e4))
def test_rms_against_bruteforce_and_shift(taps, shift):
    gaps = np.array([g for g, _ in taps])
    delays = np.cumsum(gaps)
    amps = np.array([a for _, a in taps])
    pdp = PowerDelayProfile(delays, amps)
    want = rms_delay_spread_bruteforce(delays, amps ** 2)
    # the E[t^2] - E[t]^2 oracle cancels to about sqrt(eps) * max delay
    assert rms_delay_spread(pdp) == pytest.approx(want, rel=1e-6, abs=1e-7 * delays.max())
    shifted = PowerDelayProfile(delays + shift, amps)
    assert rms_delay_spread(shifted) == pytest.approx(rms_delay_spread(pdp), rel=1e-9, abs=1e-7)


def test_pdp_validation():
    with pytest.raises(ValueError):
        PowerDelayProfile([5.0, 5.0], [1.0, 1.0])
    with pytest.raises(ValueError):
        PowerDelayProfile([1.0], [0.0])


def test_apdp_examples():
    one = PowerDelayProfile([10.0], [2.0])
    out = apdp([one] * 5, 1.0)
    assert np.count_nonzero(out.power) == 1 and out.power[0] == pytest.approx(4.0)
    p1 = PowerDelayProfile([0.0, 3.2], [1.0, 1.0])
    p3 = PowerDelayProfile([0.0, 3.7], [1.0, np.sqrt(3.0)])
    out = apdp([p1, p3], 1.0)
    assert out.power[3] == pytest.approx(2.0)
    assert out.delays[3] == 3.0
    with pytest.raises(ValueError):
        apdp([], 1.0)
    with pytest.raises(ValueError):
        apdp([one], 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 20), st.floats(0.5, 50))
def test_apdp_conserves_power(seed, count, width):
    cfg = SimConfig()
    pdps = [synthesize_pdp(cfg, 5.0 + i, sample_stream(seed, i), -50.0) for i in range(count)]
    out = apdp(pdps, width)
    total = sum(p.powers.sum() for p in pdps) / count
    assert out.power.sum() == pytest.approx(total, rel=1e-12)


# ------------------------------------------------------------------- configs


def test_config_text_round_trip():
    cfg = campaign_config("UMa", 123, seed=9, frequencies=(28.0, 73.0))
    again = config_from_mapping(config_to_mapping(cfg))
    assert again == cfg


def test_config_from_text():
    text = """
    # urban micro campaign
    scenario=UMi
    frequency_ghz=28
    tx_power_dbm=30
    n_samples=10
    distance_range=1,40
    ground_truth=CI(n=3.2, sigma=8)
    seed=7
    """
    cfg = config_from_mapping(parse_key_values(text))
    assert cfg.n_samples == 10 and cfg.seed == 7
    assert cfg.ground_truth == pl.CiModel(ple=3.2, carrier_frequency=28.0, shadow_sigma=8.0)


def test_preset_key_with_override():
    cfg = config_from_mapping({"preset": "uma", "n_samples": "50", "frequency_ghz": "39"})
    assert cfg.environment.carrier_frequency == 39.0
    assert cfg.ground_truth.carrier_frequency == 39.0
    assert cfg.ground_truth.ple == pytest.approx(3.7)


@pytest.mark.parametrize("kv", [
    {"n_samples": "0"}, {"n_samples": "1.5"}, {"bogus": "1"}, {"ground_truth": "FI(a=1)"},
    {"ground_truth": "CI(sigma=2)"}, {"distance_range": "1"}, {"preset": "rural"}, {"frequency_ghz": "-2"},
    {"seed": "x"},
])
def test_bad_config_entries(kv):
    with pytest.raises(ConfigError):
        config_from_mapping(kv)


def test_parse_abg_truth():
    t = parse_ground_truth("abg(alpha=3.4, beta=19.2, gamma=2.3, sigma=4)", 28.0)
    assert t == pl.AbgModel(alpha=3.4, beta=19.2, gamma=2.3, shadow_sigma=4.0)
