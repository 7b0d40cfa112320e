"""
Shared fixtures for the GFBVP test suite

Generating functions are expensive to build, so the Hill and harmonic
oscillator ones are solved once per session.

Run from project root: pytest tests/ -v
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Fallback for running without installation
sys.path.insert(0, str(Path(__file__).parent.parent))

from gfbvp import (  # noqa: E402
    PhaseState,
    ReferenceTrajectory,
    harmonic_oscillator,
    hill,
    libration_point,
    solve_gf,
)


@pytest.fixture(scope="session")
def hill_model():
    return hill()


@pytest.fixture(scope="session")
def l2_state(hill_model):
    return libration_point(hill_model, "L2")


@pytest.fixture(scope="session")
def hill_ref(hill_model, l2_state):
    return ReferenceTrajectory.equilibrium(hill_model, l2_state)


@pytest.fixture(scope="session")
def hill_gf6(hill_model, hill_ref):
    """Order-6 Hill GF about L2, started in F2 and switching kinds up to t=3.5."""
    return solve_gf(hill_model, hill_ref, "F2", 6, 0.0, 3.5, switch_kinds=True)


@pytest.fixture(scope="session")
def hill_gf2(hill_model, hill_ref):
    """Order-2 (linear) Hill GF over the same span."""
    return solve_gf(hill_model, hill_ref, "F2", 2, 0.0, 3.5, switch_kinds=True)


@pytest.fixture(scope="session")
def ho_model():
    return harmonic_oscillator(omega=1.0)


@pytest.fixture(scope="session")
def ho_ref(ho_model):
    return ReferenceTrajectory.equilibrium(ho_model, PhaseState(np.zeros(1), np.zeros(1)))


@pytest.fixture(scope="session")
def ho_gf(ho_model, ho_ref):
    """Order-4 harmonic oscillator GF about the origin on [0, 3.5]."""
    return solve_gf(ho_model, ho_ref, "F2", 4, 0.0, 3.5, switch_kinds=True)
