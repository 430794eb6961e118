import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ddmsim.params import WaveformConfig

settings.register_profile("ddmsim", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ddmsim")

# 64 subcarriers, 32 symbols, 1 MHz spacing, 64-sample CP
SMALL = WaveformConfig(B=64e6, N_c=64, N_sym=32, N_pr=4, N_p=4, cir_len=16)


@pytest.fixture
def small_cfg():
    return SMALL


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
