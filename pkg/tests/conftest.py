from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from shilov import EinModel, LagModel

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)

MODELS = [LagModel(1), LagModel(2), LagModel(3), EinModel(3), EinModel(4)]
MODEL_IDS = [m.spec for m in MODELS]


@pytest.fixture(params=MODELS, ids=MODEL_IDS)
def model(request):
    return request.param


@pytest.fixture
def lag2():
    return LagModel(2)


@pytest.fixture
def ein3():
    return EinModel(3)


def random_diamond(m, rng):
    from shilov import Diamond

    p = m.random_chart(rng)
    return Diamond(m, p, p + m.random_cone(rng))


def rng(seed):
    return np.random.default_rng(seed)


# acceptance summary: one line per criterion, printed at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
