import numpy as np
import pytest
from hypothesis import strategies as st

from custdyn.config import preset
from custdyn.model import ModelParams

TABLE1_STATE = (2200.0, 20.0, 22000.0, 200.0)
N0 = sum(TABLE1_STATE)

_ACCEPTANCE_LINES = []


def record_criterion(label, passed, detail=""):
    _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {label}" + (f"  ({detail})" if detail else ""))


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def table1():
    return preset("table1").params


@pytest.fixture
def table1_state():
    return np.array(TABLE1_STATE)


@pytest.fixture
def wom_right():
    return preset("fig1-right").params


@pytest.fixture
def wom_left():
    return preset("fig1-left").params


@pytest.fixture
def no_referral():
    return preset("no-referral").params


def random_params(rng, **fixed):
    """A valid parameter set with rates spread over several decades."""
    lu = lambda lo, hi: float(10 ** rng.uniform(np.log10(lo), np.log10(hi)))
    eps = lu(1e-3, 1e-1)
    kw = dict(
        lambda1=lu(1e-6, 1e-2), lambda2=lu(1e-7, 1e-3), lambda3=lu(1e-6, 1e-2),
        lambda4=lu(1e-6, 1e-3), lambda5=lu(1e-7, 1e-2), lambda6=lu(1e-7, 1e-3),
        lambda7=lu(1e-6, 1e-2), m=rng.uniform(0, 50), m_r=rng.uniform(0, 50),
        beta1=rng.uniform(0, 0.5), beta2=rng.uniform(0, 0.5), epsilon=eps,
        gamma=eps * rng.uniform(1e3, 1e5), alpha=rng.uniform(0, 1),
    )
    kw.update(fixed)
    return ModelParams(**kw)


def random_state(rng, params, spread=1.5):
    n = params.gamma / params.epsilon if params.epsilon > 0 else 1e4
    w = rng.dirichlet(np.ones(4))
    return w * n * rng.uniform(0.2, spread)


rates = st.floats(0, 1e-2, allow_nan=False)
small_rates = st.floats(0, 1e-3, allow_nan=False)


@st.composite
def model_params(draw, positive_epsilon=True):
    eps = draw(st.floats(1e-3, 0.1) if positive_epsilon else st.floats(0, 0.1))
    return ModelParams(
        lambda1=draw(rates), lambda2=draw(small_rates), lambda3=draw(rates), lambda4=draw(small_rates),
        lambda5=draw(rates), lambda6=draw(small_rates), lambda7=draw(rates),
        m=draw(st.floats(0, 50)), m_r=draw(st.floats(0, 50)),
        beta1=draw(st.floats(0, 0.5)), beta2=draw(st.floats(0, 0.5)), epsilon=eps,
        gamma=draw(st.floats(0, 5000)), alpha=draw(st.floats(0, 1)),
    )


states4 = st.lists(st.floats(-1e3, 1e5, allow_nan=False), min_size=4, max_size=4)
states2 = st.lists(st.floats(-1e3, 1e5, allow_nan=False), min_size=2, max_size=2)
