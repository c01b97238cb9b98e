import numpy as np
import pytest

from optrec import _backend


@pytest.fixture(params=_backend.available())
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    kern = _backend.load(request.param)
    monkeypatch.setattr(_backend, "kernels", kern)
    return kern


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_spline(rng, n_knots=None, scale=1.0):
    """A random piecewise-linear function on random knots including 0 and 1."""
    from optrec.splinespace import PiecewiseLinear

    n = int(rng.integers(3, 40)) if n_knots is None else n_knots
    knots = np.unique(np.concatenate(([0.0, 1.0], rng.random(n - 2))))
    return PiecewiseLinear.from_knots(knots, scale * rng.standard_normal(knots.size))


def random_sites(rng, m):
    return np.sort(np.concatenate(([0.0, 1.0], rng.random(m - 2))))


def pytest_configure(config):
    config.acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def criterion(request):
    """``record(number, ok, detail)`` logs one PASS/FAIL line and asserts ``ok``."""
    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.acceptance_lines.append(line)
        reporter = request.config.pluginmanager.get_plugin("terminalreporter")
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        assert ok, line

    return record
