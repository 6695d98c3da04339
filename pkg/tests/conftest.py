import numpy as np
import pytest

from mmwpl.datasets import ChannelSample, Dataset, Environment

_ACCEPTANCE = []


def make_sample(**kw):
    base = dict(distance=10.0, frequency=28.0, time_delay=40.0, received_power=-70.0, rms_delay_spread=20.0,
                azimuth_aod=10.0, elevation_aod=0.0, azimuth_aoa=200.0, elevation_aoa=5.0, path_loss=100.0)
    base.update(kw)
    return ChannelSample(**base)


def make_dataset(columns, env=None, **fixed):
    """Dataset from equal-length column arrays; unspecified fields get benign defaults."""
    n = len(next(iter(columns.values())))
    rows = []
    for i in range(n):
        kw = dict(fixed)
        kw.update({k: float(v[i]) for k, v in columns.items()})
        rows.append(make_sample(**kw))
    return Dataset(env or Environment(), tuple(rows))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance():
    def record(tag, description, passed, detail=""):
        _ACCEPTANCE.append((tag, description, bool(passed), detail))
        assert passed, f"{tag} {description}: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for tag, desc, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {tag:<5} {desc}  {detail}")
