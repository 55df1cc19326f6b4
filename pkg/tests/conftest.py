import sys

import numpy as np
import pytest

from ritzforge.prescription import INF, Prescription, ResidualSchedule, RitzPrescription

WORKED_H = np.array([[1.28, -6.665], [0.96, 6.72]])


def random_hessenberg(rng, n, irreducible=True):
    h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h[np.tril_indices(n, -2)] = 0.0
    if irreducible and n > 1:
        idx = np.arange(1, n)
        h[idx, idx - 1] = rng.uniform(0.5, 2.0, n - 1)
    return h


def make(norms, steps, **kw):
    return Prescription(ResidualSchedule(norms), RitzPrescription(steps), **kw)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def worked():
    """n = 2: schedule [1, 0.6], harmonic Ritz values {(2), (3, 5)}."""
    return make([1.0, 0.6], [(2,), (3, 5)])


@pytest.fixture
def plateau3():
    """n = 3 with GMRES stagnating at step 2."""
    return make([1.0, 0.6, 0.6], [(2,), (2, INF), (1, 4, 7)])


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
