import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pafluid.params import ModelParams

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def grid_cells():
    """Every legal (model, p, kappa) of the standard parameter grid."""
    cells = []
    for model in ("graph", "urn"):
        for p in (0.3, 0.7, 1.0):
            if model == "urn" and p == 1.0:
                continue
            for kappa in (-0.5, 0.0, 0.5):
                cells.append((model, p, kappa))
    return cells


GRID = grid_cells()


@pytest.fixture(params=GRID, ids=lambda c: f"{c[0]}-p{c[1]}-k{c[2]}")
def grid_params(request):
    model, p, kappa = request.param
    return ModelParams.power(model, p, kappa)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
