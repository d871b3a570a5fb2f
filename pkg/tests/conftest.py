import pytest

from fragsim import trapmodel
from fragsim._backend import get_kernels


def _available_backends():
    names = ["python"]
    try:
        get_kernels("compiled")
    except ImportError:
        pass
    else:
        names.append("compiled")
    return names


BACKENDS = _available_backends()


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def paper_trap(alpha=0.0, N=100, **overrides):
    """Sodium in an isotropic 19 Hz trap with a 6 um barrier."""
    kw = dict(mass_amu=22.98977, scattering_length_nm=3.0, omega_x_hz=19.0, omega_y_hz=19.0,
              omega_z_hz=19.0, delta_um=6.0, alpha_natural=alpha, particle_count=N)
    kw.update(overrides)
    return trapmodel.TrapSpec.from_lab_units(**kw)


@pytest.fixture
def paper_spec():
    return paper_trap()


_ACCEPTANCE_LINES = {}


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""

    def record(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES[number] = line
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(_ACCEPTANCE_LINES[key])
