"""
Tests for Hamiltonian models, flow and reference trajectories

Run from project root: pytest tests/test_dynamics.py -v
"""

import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pytest
import sympy as sp

try:
    import gfbvp  # noqa: F401
except ImportError:
    # Fallback for running directly without installation
    sys.path.insert(0, str(Path(__file__).parent.parent))

from gfbvp.dynamics import (
    PhaseState,
    ReferenceTrajectory,
    crtbp,
    eval_hamiltonian,
    flow,
    from_expression,
    get_model,
    hamilton_rhs,
    hessian_blocks,
    integration_counter,
    libration_point,
    libration_points,
    linear_eigen,
    taylor_hamiltonian,
)
from gfbvp.errors import ConfigError, DimensionError, DomainError

X_L2 = 3.0 ** (-1.0 / 3.0)
LAMBDA_L2 = np.sqrt(1.0 + 2.0 * np.sqrt(7.0))


def test_hill_l2_energy_and_equilibrium(hill_model, l2_state):
    """L2 sits at ``x = 3^(−1/3)`` with ``H = −1.5·3^(1/3)``."""
    print("Testing Hill L2...")
    assert np.allclose(l2_state.q, [X_L2, 0.0])
    assert np.allclose(l2_state.p, [0.0, X_L2]), "rest in the rotating frame: p = (−y, x)"
    H = eval_hamiltonian(hill_model, l2_state)
    assert H == pytest.approx(-2.16337, abs=1e-5), f"H(L2) = {H}"
    assert np.linalg.norm(hamilton_rhs(hill_model, l2_state)) < 1e-12
    print(f"  H(L2) = {H:.6f}")
    print("✓ Hill L2 test passed")


def test_singular_point_rejected(hill_model):
    """The gravitational centre is outside the domain."""
    with pytest.raises(DomainError):
        eval_hamiltonian(hill_model, PhaseState(np.zeros(2), np.zeros(2)))


def test_phase_state_validation():
    with pytest.raises(DimensionError):
        PhaseState(np.zeros(2), np.zeros(3))
    with pytest.raises(DomainError):
        PhaseState(np.array([np.nan]), np.zeros(1))
    z = PhaseState(np.array([1.0]), np.array([2.0]))
    assert np.allclose((z + z).vector, [2.0, 4.0])


def test_flow_conserves_energy(hill_model, l2_state):
    """Energy is conserved along a nonlinear Hill trajectory."""
    print("Testing energy conservation...")
    start = PhaseState.from_vector(l2_state.vector + [0.01, 0.0, 0.0, -0.02])
    end = flow(hill_model, start, 0.0, 3.0, tol=1e-12)
    drift = abs(eval_hamiltonian(hill_model, end) - eval_hamiltonian(hill_model, start))
    assert drift < 1e-9, f"energy drift {drift:.3e}"
    print("✓ Energy conservation test passed")


def test_harmonic_oscillator_flow(ho_model):
    """Closed-form rotation of the oscillator phase plane."""
    t = 0.7
    end = flow(ho_model, PhaseState(np.array([1.0]), np.array([0.5])), 0.0, t, tol=1e-12)
    expected = [np.cos(t) + 0.5 * np.sin(t), -np.sin(t) + 0.5 * np.cos(t)]
    assert np.allclose(end.vector, expected, atol=1e-10)


def test_integration_counter(ho_model):
    """``counting()`` resets and counts integrator calls inside the block."""
    with integration_counter.counting() as counter:
        flow(ho_model, PhaseState(np.array([1.0]), np.array([0.0])), 0.0, 1.0)
        flow(ho_model, PhaseState(np.array([1.0]), np.array([0.0])), 0.0, 0.0)
    assert counter.calls == 1, "a zero-length flow does not integrate"


def test_integration_counter_across_threads(ho_model):
    """Integrations from worker threads are all counted."""
    start = PhaseState(np.array([1.0]), np.array([0.0]))

    def work(k):
        for _ in range(10):
            flow(ho_model, start, 0.0, 0.1 * (k + 1))

    with integration_counter.counting() as counter:
        with ThreadPoolExecutor(max_workers=8) as executor:
            list(executor.map(work, range(8)))
    assert counter.calls == 80


def test_taylor_expansion_accuracy(hill_model, hill_ref, l2_state):
    """Order-6 expansion error scales like the seventh power of the offset."""
    print("Testing Taylor expansion...")
    poly = taylor_hamiltonian(hill_model, hill_ref, 6)
    assert abs(poly.constant_term) == 0.0
    assert np.allclose(poly.linear_coefficients(), 0.0), "expansion starts at degree 2"
    rng = np.random.default_rng(5)
    z_ref = l2_state.vector
    grad = hill_model.gradient(z_ref, 0.0)
    for _ in range(5):
        dz = rng.normal(size=4)
        dz *= 1e-2 / np.linalg.norm(dz)
        exact = hill_model.energy(z_ref + dz, 0.0) - hill_model.energy(z_ref, 0.0) - grad @ dz
        assert abs(poly(dz) - exact) < 1e-11, f"Taylor error {abs(poly(dz) - exact):.3e}"
    print("✓ Taylor expansion test passed")


def test_taylor_of_user_expression():
    """A pendulum expands ``−cos q`` to ``q²/2 − q⁴/24``."""
    q, p = sp.symbols("q p", real=True)
    model = from_expression("pendulum", p ** 2 / 2 - sp.cos(q), [q], [p])
    ref = ReferenceTrajectory.equilibrium(model, PhaseState(np.zeros(1), np.zeros(1)))
    poly = taylor_hamiltonian(model, ref, 4)
    assert poly.coefficient((2, 0)) == pytest.approx(0.5)
    assert poly.coefficient((0, 2)) == pytest.approx(0.5)
    assert poly.coefficient((4, 0)) == pytest.approx(-1.0 / 24.0)


def test_taylor_with_division():
    """Negative integer powers expand to finite coefficients: ``1/(2+q) = 1/2 − q/4 + q²/8``."""
    q, p = sp.symbols("q p", real=True)
    model = from_expression("reciprocal", p ** 2 / 2 + q ** 2 / 2 + 1 / (2 + q), [q], [p])
    ref = ReferenceTrajectory(model, [0.0], np.zeros((1, 2)))
    poly = taylor_hamiltonian(model, ref, 4)
    assert np.all(np.isfinite(poly.coeffs))
    assert poly.coefficient((2, 0)) == pytest.approx(0.5 + 0.125)
    assert poly.coefficient((3, 0)) == pytest.approx(-1.0 / 16.0)
    assert poly.coefficient((4, 0)) == pytest.approx(1.0 / 32.0)


def test_hill_linearization(hill_model, l2_state):
    """Hessian blocks and the hyperbolic/centre spectrum at L2."""
    print("Testing Hill linearization...")
    Hqq, Hqp, Hpq, Hpp = hessian_blocks(hill_model, l2_state)
    assert np.allclose(Hqq, np.diag([-8.0, 4.0]), atol=1e-10)
    assert np.allclose(Hqp, [[0.0, -1.0], [1.0, 0.0]], atol=1e-12)
    assert np.allclose(Hpq, Hqp.T)
    assert np.allclose(Hpp, np.eye(2))
    eigvals, _ = linear_eigen(hill_model, l2_state)
    real = sorted(ev.real for ev in eigvals if abs(ev.imag) < 1e-9)
    assert real[-1] == pytest.approx(LAMBDA_L2, abs=1e-9), f"λ = {real[-1]}"
    centre = max(ev.imag for ev in eigvals)
    assert centre == pytest.approx(np.sqrt(2.0 * np.sqrt(7.0) - 1.0), abs=1e-9)
    print("✓ Hill linearization test passed")


def test_libration_points():
    """Every CRTBP libration point is an equilibrium."""
    model = crtbp(0.01215)
    points = libration_points(model)
    assert len(points) == 5
    for point in points:
        assert np.linalg.norm(hamilton_rhs(model, point)) < 1e-10
    assert points[3].q[1] == pytest.approx(np.sqrt(3.0) / 2.0)
    with pytest.raises(ValueError):
        libration_point(model, "L7")
    with pytest.raises(ValueError):
        crtbp(0.7)


def test_reference_csv_round_trip(ho_model, tmp_path):
    """Sampled flows survive a CSV round trip and satisfy Hamilton's equations."""
    ref = ReferenceTrajectory.from_flow(ho_model, PhaseState(np.array([1.0]), np.zeros(1)),
                                        0.0, 1.0, samples=101, tol=1e-12)
    assert ref.max_residual() < 1e-6
    path = tmp_path / "ref.csv"
    ref.to_csv(path)
    back = ReferenceTrajectory.from_csv(path, ho_model)
    assert np.array_equal(back.times, ref.times)
    assert np.array_equal(back.states, ref.states)
    assert back.identifier == ref.identifier
    assert np.allclose(back.state_at(0.5).q, np.cos(0.5), atol=1e-8)
    with pytest.raises(ValueError):
        ref.state_at(2.0)


def test_equilibrium_check(hill_model):
    with pytest.raises(ValueError):
        ReferenceTrajectory.equilibrium(hill_model, PhaseState(np.array([1.0, 0.0]),
                                                               np.zeros(2)))


def test_model_registry():
    """Unknown names and bad parameters are configuration errors."""
    assert get_model("crtbp", {"mu": 0.1}).parameters["mu"] == 0.1
    with pytest.raises(ConfigError):
        get_model("kepler")
    with pytest.raises(ConfigError):
        get_model("hill", {"mu": 1.0})
    x = sp.Symbol("x")
    q, p = sp.symbols("q p")
    with pytest.raises(ConfigError):
        from_expression("bad", p ** 2 + x * q, [q], [p])


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
