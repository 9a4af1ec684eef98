import pytest
from hypothesis import settings

from hdelaunay import AmbientSpace

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# (kappa, tau) for H^2xR, Nil, SL2, S^2xR and a Berger sphere
SPACES = [(-1.0, 0.0), (0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (4.0, 0.5)]

_RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture(params=SPACES, ids=lambda p: f"k{p[0]:g}_t{p[1]:g}")
def space(request):
    return AmbientSpace(*request.param)


@pytest.fixture
def criterion():
    """Record one acceptance verdict; the summary is printed at the end of the run."""

    def record(number: int, ok: bool, detail: str):
        _RESULTS[number] = (bool(ok), detail)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        ok, detail = _RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
