import itertools

import pytest

from parityformer import kernels
from parityformer.construction import ConstructionParams, build_parity_spec


@pytest.fixture(scope="session")
def spec():
    return build_parity_spec()


@pytest.fixture(scope="session")
def params():
    return ConstructionParams()


@pytest.fixture(params=sorted(kernels.implementations()))
def kernel_impl(request):
    """Run the test once per available kernel implementation."""
    with kernels.use(request.param):
        yield request.param


def all_words(n_max):
    for n in range(1, n_max + 1):
        yield from itertools.product((0, 1), repeat=n)


_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance():
    """Record one verdict line per acceptance criterion."""

    def record(number, title, passed, detail=""):
        _ACCEPTANCE[number] = (title, bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        title, passed, detail = _ACCEPTANCE[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}  {detail}".rstrip())
