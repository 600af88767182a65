import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def kron_all(*ops):
    out = np.eye(1)
    for op in ops:
        out = np.kron(out, op)
    return out


def orthogonal_from_seed(seed):
    from scipy.stats import ortho_group

    return ortho_group.rvs(3, random_state=np.random.default_rng(seed))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in module.summary_lines():
        terminalreporter.write_line(line)
