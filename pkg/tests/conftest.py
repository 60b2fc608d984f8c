"""Shared fixtures and the acceptance-summary terminal hook."""

import math

import numpy as np
import pytest

from fbmink import (
    CapSpec,
    SupportKind,
    default_cap_spec,
    make_support,
    make_umbilical_cap,
)

# canonical placement parameters, one per support kind
CANONICAL_PARAMS = {
    SupportKind.EUCLIDEAN_SPHERE: {"radius": 1.0},
    SupportKind.HYP_GEODESIC_SPHERE: {"chart_radius": 0.5},
    SupportKind.EQUIDISTANT: {"theta": math.pi / 6.0},
    SupportKind.SPH_GEODESIC_SPHERE: {"chart_radius": 0.5},
}


def canonical_support(kind: SupportKind, n: int = 3):
    return make_support(kind, n, **CANONICAL_PARAMS.get(kind, {}))


def canonical_scenario(kind: SupportKind, n: int = 3):
    support = canonical_support(kind, n)
    return make_umbilical_cap(default_cap_spec(support))


@pytest.fixture
def hemisphere():
    """Unit upper hemisphere over the flat plane in R^3, weight 1."""
    support = canonical_support(SupportKind.EUCLIDEAN_PLANE)
    return make_umbilical_cap(CapSpec(support=support, radius=1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)


# -- acceptance summary -----------------------------------------------------------
#
# test_acceptance.py records one verdict per criterion here; the hook below
# repeats them after the pytest summary so the lines survive output capture.

ACCEPTANCE_RESULTS: dict = {}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        verdict = "PASS" if ACCEPTANCE_RESULTS[key] else "FAIL"
        terminalreporter.write_line(f"ACCEPTANCE {key}: {verdict}")
