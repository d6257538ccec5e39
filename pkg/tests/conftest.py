import numpy as np
import pytest

from metastab import operators as ops
from metastab.iteration import Scenario
from metastab.rates import RateWitnessBundle, parse_binatfun, parse_natfun
from metastab.sequences import Geometric, HarmonicOffset, LinearGrowth, SequenceSpec


def box_scenario(**kw):
    """A = subdifferential of the indicator of [0,1], x0 = 3, alpha_n = 1/(n+2), beta_n = n+1."""
    return Scenario(ops.IndicatorBox([0.0], [1.0]), [3.0], SequenceSpec(HarmonicOffset(1), LinearGrowth(1, 1)),
                    **kw)


def geometric_scenario(**kw):
    seq = SequenceSpec(HarmonicOffset(1), LinearGrowth(1, 1), Geometric(1.0, 0.5, (1.0,)))
    return Scenario(ops.IndicatorBox([0.0], [1.0]), [3.0], seq, **kw)


def bundle(**specs):
    out = {}
    for k, v in specs.items():
        out[k] = parse_binatfun(v) if k == "Aprime" else parse_natfun(v)
    return RateWitnessBundle(**out)


@pytest.fixture
def box():
    return box_scenario()


@pytest.fixture
def geometric():
    return geometric_scenario()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record_verdict(label: str, ok: bool, detail: str = "") -> bool:
    line = f"{'PASS' if ok else 'FAIL'} {label}" + (f": {detail}" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
