import pytest

from queue_persuasion import lp_builder
from queue_persuasion.model import reference_config


@pytest.fixture(scope="session")
def ref_p0():
    return lp_builder.solve_design(reference_config(0.0))


@pytest.fixture(scope="session")
def ref_p02():
    return lp_builder.solve_design(reference_config(0.2))


@pytest.fixture(scope="session", params=["p0", "p02"])
def reference_solution(request, ref_p0, ref_p02):
    return {"p0": ref_p0, "p02": ref_p02}[request.param]
