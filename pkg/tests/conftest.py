import pytest
from hypothesis import settings

from icosolve.binform import PrecisionContext
from icosolve.map31 import reference_map
from icosolve.param import default_paramdata
from icosolve.pipeline import default_solver, save

CTX = PrecisionContext(60)

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")


@pytest.fixture(scope="session")
def ctx():
    return CTX


@pytest.fixture(scope="session")
def ref(ctx):
    """(params, g, labelled critical set) of the calibrated map."""
    return reference_map(ctx)


@pytest.fixture(scope="session")
def pd(ctx):
    return default_paramdata(ctx)


@pytest.fixture(scope="session")
def solver(ctx):
    return default_solver(ctx)


@pytest.fixture(scope="session")
def cache_file(solver, tmp_path_factory):
    return str(save(solver, tmp_path_factory.mktemp("cache") / "cache.json"))
