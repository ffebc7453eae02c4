import pytest

from camchoi.library import build_cases, load_builtin


@pytest.fixture(scope="session")
def doc():
    return load_builtin()


@pytest.fixture(scope="session")
def case_results(doc):
    return {c.label: c.run(doc) for c in build_cases()}
