"""
Tests for periodic orbits, LQ control, manifolds and formation maps

Run from project root: pytest tests/test_applications.py -v
"""

import sys
from pathlib import Path

import numpy as np
import pytest
import sympy as sp
from scipy.integrate import quad_vec
from scipy.linalg import expm

try:
    import gfbvp  # noqa: F401
except ImportError:
    # Fallback for running directly without installation
    sys.path.insert(0, str(Path(__file__).parent.parent))

from gfbvp.applications import (
    LQProblem,
    characteristic_time,
    days_to_time,
    formation_cost_map,
    hyperbolic_eigen,
    km_to_length,
    lq_cost,
    lq_hamiltonian,
    lq_solve,
    manifold_propagate,
    momentum_to_ms,
    optimal_control_reduce,
    periodic_f2_solve,
    periodic_position_scan,
    periodic_time_scan,
    small_amplitude_period,
    time_to_days,
)
from gfbvp.dynamics import PhaseState, flow
from gfbvp.errors import DimensionError, SingularKindError
from gfbvp.hj import legendre_transform, monitor_singularity

LAMBDA_L2 = np.sqrt(1.0 + 2.0 * np.sqrt(7.0))
PERIOD_L2 = 2.0 * np.pi / np.sqrt(2.0 * np.sqrt(7.0) - 1.0)
T_PERIODIC = 3.03353
P_PERIODIC = np.array([0.0, -0.0573157])


# ===== 周期轨道 / Periodic orbits =====
def test_small_amplitude_period(hill_model, l2_state):
    """The centre mode at L2 has period ``2π/√(2√7 − 1)``."""
    period = small_amplitude_period(hill_model, l2_state)
    assert period == pytest.approx(PERIOD_L2, abs=1e-9)
    assert period == pytest.approx(3.03306, abs=1e-3)


def test_time_scan_finds_periodic_orbit(hill_gf6):
    """Scanning T at ``q0 = (0.01, 0)`` finds the planar Lyapunov orbit."""
    print("Testing periodic time scan...")
    scan = periodic_time_scan(hill_gf6, [0.01, 0.0], (2.98, 3.08), samples=101)
    roots = [r for r in scan.roots if abs(r.T - T_PERIODIC) < 5e-3]
    assert roots, f"roots at {[r.T for r in scan.roots]}"
    root = roots[0]
    assert np.allclose(root.p, P_PERIODIC, atol=2e-3), f"p = {root.p}"
    assert root.flow_residual < 1e-4
    print(f"  T = {root.T:.6f}, p = {root.p}")
    print("✓ Time scan test passed")


def test_time_scan_edge_cases(hill_gf6):
    """The reference itself has no isolated root; samples beyond the span are masked."""
    flat = periodic_time_scan(hill_gf6, [0.0, 0.0], (2.98, 3.08), samples=21, verify=False)
    assert flat.roots == []
    beyond = periodic_time_scan(hill_gf6, [0.01, 0.0], (3.3, 3.8), samples=11, verify=False)
    assert np.all(beyond.masked_times > 3.5)
    assert beyond.mask[-1]
    with pytest.raises(DimensionError):
        periodic_time_scan(hill_gf6, [0.01], (2.9, 3.1))


def test_f2_periodic_solve(hill_gf6):
    """The direct F2 solve converges with T fixed or with the position fixed."""
    print("Testing direct F2 periodic solve...")
    orbits = periodic_f2_solve(hill_gf6, [[0.01, 0.0, 0.0, -0.057]], T=T_PERIODIC)
    converged = [o for o in orbits if o.converged]
    assert converged, f"residuals {[o.residual for o in orbits]}"
    assert converged[0].flow_residual < 1e-4

    free_T = periodic_f2_solve(hill_gf6, [[0.0, -0.057]], fixed_q=[0.01, 0.0], T_guess=3.034,
                               accept=1e-7)
    converged = [o for o in free_T if o.converged]
    assert converged
    assert converged[0].T == pytest.approx(T_PERIODIC, abs=5e-3)
    assert np.allclose(converged[0].p0, P_PERIODIC, atol=2e-3)

    with pytest.raises(ValueError):
        periodic_f2_solve(hill_gf6, [[0.0, -0.057]])
    with pytest.raises(ValueError):
        periodic_f2_solve(hill_gf6, [[0.0, -0.057]], fixed_q=[0.01, 0.0])
    print("✓ F2 periodic solve test passed")


def test_position_scan(hill_model, l2_state, hill_gf6, ho_gf):
    """Refined contour points are periodic with the requested period."""
    print("Testing periodic position scan...")
    T = 3.0332
    scan = periodic_position_scan(hill_gf6, T, half_width=0.03, grid=121, max_points=16)
    assert scan.curves, "no periodic-orbit curve found"
    assert len(scan.points) > 0
    f1 = legendre_transform(hill_gf6, "F1", T)
    for q in scan.points:
        g = f1.gradient(np.concatenate([q, q]))
        assert np.linalg.norm(g[:2] + g[2:]) < 1e-8
    q, p = scan.points[0], scan.momenta[0]
    start = PhaseState.from_vector(l2_state.vector + np.concatenate([q, p]))
    end = flow(hill_model, start, 0.0, T, tol=1e-12)
    assert np.linalg.norm(end.vector - start.vector) < 1e-4
    with pytest.raises(DimensionError):
        periodic_position_scan(ho_gf, 1.0)
    print("✓ Position scan test passed")


# ===== 线性二次最优控制 / LQ optimal control =====
def test_lq_single_integrator():
    """``ẋ = u`` from 1 to 0 in unit time costs ½ with ``u = −1``."""
    print("Testing single-integrator LQ...")
    prob = LQProblem([[0.0]], [[1.0]], [[0.0]], [[1.0]], 0.0, 1.0, [1.0], fixed_final=(0,))
    sol = lq_solve(prob)
    assert sol.cost == pytest.approx(0.5, abs=1e-10)
    assert sol.p0 == pytest.approx([1.0], abs=1e-10)
    assert np.allclose(sol.u, -1.0, atol=1e-10)
    assert sol.partition.kind == "F1"
    assert lq_cost(prob, lambda t: np.array([-1.0])) == pytest.approx(0.5, abs=1e-10)
    print("✓ Single-integrator test passed")


def test_lq_terminal_cost():
    """A free final state with ``Qf = 1`` halves the correction: ``J = ¼``, ``p0 = ½``."""
    prob = LQProblem([[0.0]], [[1.0]], [[0.0]], [[1.0]], 0.0, 1.0, [1.0], Qf=[[1.0]])
    sol = lq_solve(prob)
    assert sol.partition.kind == "F3"
    assert sol.cost == pytest.approx(0.25, abs=1e-10)
    assert sol.p0 == pytest.approx([0.5], abs=1e-10)
    assert sol.x[-1] == pytest.approx([0.5], abs=1e-10)


def _controllable_problem(rng):
    """Random fixed-endpoint LTI problem whose Hamiltonian ``Φqp`` block is well conditioned."""
    while True:
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, n + 1))
        A = rng.normal(scale=0.5, size=(n, n))
        B = rng.normal(size=(n, m))
        L = rng.normal(size=(n, n))
        Q = 0.5 * L @ L.T
        K = rng.normal(size=(m, m))
        R = K @ K.T + np.eye(m)
        x0 = rng.normal(size=n)
        x_f = 0.5 * rng.normal(size=n)
        prob = LQProblem(A, B, Q, R, 0.0, 1.0, x0, fixed_final=tuple(range(n)), x_f=x_f)
        phi = expm(lq_hamiltonian(prob).flow_matrix(0.0))
        if np.linalg.cond(phi[:n, n:]) < 1e3:
            return prob


def test_lq_matches_matrix_exponential():
    """Random fixed-endpoint LTI problems agree with a matrix-exponential oracle."""
    print("Testing LQ against the matrix-exponential oracle...")
    rng = np.random.default_rng(17)
    worst_path = worst_cost = 0.0
    for trial in range(50):
        prob = _controllable_problem(rng)
        n = prob.n
        B, Q, R, x0, x_f = prob.B, prob.Q, prob.R, prob.x0, prob.x_f
        sol = lq_solve(prob, samples=11)

        flow_matrix = lq_hamiltonian(prob).flow_matrix(0.0)
        phi = expm(flow_matrix)
        p0 = np.linalg.solve(phi[:n, n:], x_f - phi[:n, :n] @ x0)
        z0 = np.concatenate([x0, p0])
        path = np.array([expm(flow_matrix * t) @ z0 for t in sol.times])
        worst_path = max(worst_path, float(np.abs(path[:, :n] - sol.x).max()),
                         float(np.abs(path[:, n:] - sol.p).max()))

        W = np.block([[Q, np.zeros((n, n))],
                      [np.zeros((n, n)), B @ np.linalg.solve(R, B.T)]])
        integrand = lambda t: 0.5 * (expm(flow_matrix * t) @ z0) @ W @ (expm(flow_matrix * t) @ z0)
        oracle, _ = quad_vec(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13)
        worst_cost = max(worst_cost, abs(float(oracle) - sol.cost) / max(1.0, abs(sol.cost)))
    assert worst_path < 1e-7, f"path error {worst_path:.3e}"
    assert worst_cost < 1e-9, f"cost error {worst_cost:.3e}"
    print(f"  path error {worst_path:.2e}, cost error {worst_cost:.2e}")
    print("✓ LQ oracle test passed")


def test_lq_optimality_against_perturbed_control():
    """With a free final state any perturbation of the optimal control costs more."""
    prob = LQProblem([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]], np.eye(2) * 0.1, [[1.0]],
                     0.0, 2.0, [1.0, 0.0], Qf=np.eye(2) * 10.0)
    sol = lq_solve(prob)
    optimal = lq_cost(prob, sol.control)
    assert optimal == pytest.approx(sol.cost, rel=1e-6)
    for bump in (lambda t: 0.05 * np.sin(np.pi * t), lambda t: 0.02 * np.ones(1)):
        worse = lq_cost(prob, lambda t, b=bump: sol.control(t) + b(t))
        assert worse > optimal


def test_lq_validation():
    with pytest.raises(ValueError):
        LQProblem([[0.0]], [[1.0]], [[0.0]], [[0.0]], 0.0, 1.0, [1.0])
    with pytest.raises(ValueError):
        LQProblem([[0.0]], [[1.0]], [[0.0]], [[1.0]], 1.0, 1.0, [1.0])
    with pytest.raises(ValueError):
        LQProblem([[0.0]], [[1.0]], [[-1.0]], [[1.0]], 0.0, 1.0, [1.0])
    with pytest.raises(DimensionError):
        LQProblem(np.zeros((2, 2)), [[1.0]], [[0.0]], [[1.0]], 0.0, 1.0, [1.0])
    with pytest.raises(DimensionError):
        LQProblem([[0.0]], [[1.0]], [[0.0]], [[1.0]], 0.0, 1.0, [1.0], fixed_final=(1,))


def test_lq_singular_kind_reports_final_time():
    """An uncontrollable fixed final state fails at ``tf``, where the kind is used."""
    prob = LQProblem(np.zeros((2, 2)), [[1.0], [0.0]], np.zeros((2, 2)), [[1.0]], 0.0, 2.0,
                     [1.0, 1.0], fixed_final=(0, 1))
    with pytest.raises(SingularKindError) as info:
        lq_solve(prob)
    assert info.value.kind == "F1"
    assert info.value.time == pytest.approx(2.0)
    assert "t=2" in str(info.value)


def test_optimal_control_reduce():
    """``ẋ = u`` with ``L = ½u²`` and ``ū = −p`` reduces to ``H̄ = −½p²``."""
    x, p, u = sp.symbols("x p u", real=True)
    model = optimal_control_reduce([u], u ** 2 / 2, [-p], [x], [p], [u])
    assert model.n == 1
    assert model.energy(np.array([0.3, 2.0]), 0.0) == pytest.approx(-2.0)
    assert sp.simplify(model.expression + p ** 2 / 2) == 0
    with pytest.raises(DimensionError):
        optimal_control_reduce([u], u ** 2 / 2, [-p, p], [x], [p], [u])


# ===== 不稳定流形 / Unstable manifolds =====
def test_hyperbolic_eigen(hill_model, l2_state):
    lam, v = hyperbolic_eigen(hill_model, l2_state)
    assert lam == pytest.approx(LAMBDA_L2, abs=1e-9)
    assert np.linalg.norm(v) == pytest.approx(1.0)
    assert v[np.nonzero(np.abs(v) > 1e-12)[0][0]] > 0
    assert characteristic_time(hill_model, l2_state) == pytest.approx(1.0 / LAMBDA_L2)


def test_manifold_conserves_energy(hill_model, l2_state, hill_gf6):
    """Points propagated along the manifold keep the L2 energy."""
    lam, v = hyperbolic_eigen(hill_model, l2_state)
    traj = manifold_propagate(hill_gf6, lam, v, 1e-5, np.linspace(0.0, 1.0, 11))
    assert not traj.truncated
    assert np.ptp(traj.energy) < 1e-9
    assert traj.states.shape == (11, 4)


def test_manifold_needs_equilibrium(ho_model):
    from gfbvp.dynamics import ReferenceTrajectory
    from gfbvp.hj import solve_gf

    ref = ReferenceTrajectory.from_flow(ho_model, PhaseState(np.array([1.0]), np.zeros(1)),
                                        0.0, 1.0, samples=51)
    gf = solve_gf(ho_model, ref, "F2", 2, 0.0, 1.0)
    with pytest.raises(ValueError):
        manifold_propagate(gf, 1.0, np.array([1.0, 0.0]), 1e-5, [0.0, 0.5])


# ===== 编队重构 / Formation reconfiguration =====
def test_formation_symmetry_at_order_two(hill_gf2):
    """The linear cost map is antipodally symmetric."""
    print("Testing formation cost symmetry...")
    angles = np.linspace(0.0, 2.0 * np.pi, 72, endpoint=False)
    cmap = formation_cost_map(hill_gf2, km_to_length(20000.0), angles, [0.05, 0.5, 1.0])
    assert not cmap.mask.any()
    assert np.allclose(cmap.cost, np.roll(cmap.cost, 36, axis=1), rtol=1e-10)
    assert cmap.radial_points().shape == (3, 72, 2)
    print("✓ Formation symmetry test passed")


def test_formation_short_transfers_isotropic(hill_gf6):
    """Well below the characteristic time the cost barely depends on direction."""
    angles = np.linspace(0.0, 2.0 * np.pi, 36, endpoint=False)
    cmap = formation_cost_map(hill_gf6, km_to_length(20000.0), angles, [0.05])
    row = cmap.cost[0]
    variation = (row.max() - row.min()) / row.mean()
    assert variation < 0.10, f"variation {variation:.3f}"


def test_formation_masks_singular_period(hill_gf2):
    t_s = [t for part, t in monitor_singularity(hill_gf2, ["F1"])][0]
    angles = np.linspace(0.0, np.pi, 4)
    cmap = formation_cost_map(hill_gf2, 0.005, angles, [0.5, t_s])
    assert cmap.mask.tolist() == [False, True]
    assert np.isnan(cmap.best_angles()[1])
    with pytest.raises(ValueError):
        formation_cost_map(hill_gf2, 0.005, angles, [0.5], rest="speed")


def test_unit_conversions():
    assert float(km_to_length(21660.0)) == pytest.approx(0.01, rel=1e-3)
    assert float(time_to_days(days_to_time(47.0))) == pytest.approx(47.0)
    assert float(days_to_time(58.13)) == pytest.approx(1.0, rel=1e-3)
    assert float(momentum_to_ms(1.0)) == pytest.approx(431.0, rel=1e-2)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
