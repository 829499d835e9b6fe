import numpy as np
import pytest

from ntrubke import _backend
from ntrubke.poly_ring import NtruParams

# N=7, q=41: small enough for exhaustive and linear-algebra oracles
TOY7 = NtruParams(7, 3, 41, weight_fg=2, weight_b=1, weight_expander=1, name="toy7")


@pytest.fixture
def rng():
    return np.random.default_rng(20251016)


@pytest.fixture
def toy7():
    return TOY7


@pytest.fixture(params=_backend.available_backends())
def backend(request):
    with _backend.use_backend(request.param):
        yield request.param


def pytest_terminal_summary(terminalreporter):
    from acceptance_report import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
