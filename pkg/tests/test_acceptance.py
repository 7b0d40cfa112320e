"""
End-to-end checks on Hill's problem about L2

Each test runs a complete workflow on the order-6 generating function:
periodic orbits, caustics, batch boundary value problems, the periodic
family, formation costs and the unstable manifold.

Run from project root: pytest tests/test_acceptance.py -v
"""

import sys
import warnings
from pathlib import Path

import numpy as np
import pytest

try:
    import gfbvp  # noqa: F401
except ImportError:
    # Fallback for running directly without installation
    sys.path.insert(0, str(Path(__file__).parent.parent))

from gfbvp.applications import (
    characteristic_time,
    days_to_time,
    formation_cost_map,
    growth_exponent,
    hyperbolic_eigen,
    km_to_length,
    manifold_propagate,
    periodic_position_scan,
    periodic_time_scan,
)
from gfbvp.dynamics import PhaseState, flow, integration_counter
from gfbvp.errors import TrustRadiusWarning
from gfbvp.lineargf import QuadraticHamiltonian, detect_singularity, stm
from gfbvp.partition import BoundaryPartition
from gfbvp.tpbvp import BVPSpec, enumerate_solutions, solve_batch

LAMBDA_L2 = np.sqrt(1.0 + 2.0 * np.sqrt(7.0))


def test_periodic_orbit_returns_after_one_period(hill_model, l2_state, hill_gf6):
    """The time-scan orbit through ``q0 = (0.01, 0)`` closes after one period."""
    print("Testing Hill periodic orbit...")
    scan = periodic_time_scan(hill_gf6, [0.01, 0.0], (2.95, 3.1), samples=151, verify=False)
    roots = [r for r in scan.roots if abs(r.T - 3.03353) <= 5e-3]
    assert roots, f"roots at {[r.T for r in scan.roots]}"
    root = roots[0]
    assert np.all(np.abs(root.p - [0.0, -0.0573157]) <= 2e-3), f"p = {root.p}"
    start = PhaseState.from_vector(l2_state.vector + np.concatenate([root.q0, root.p0]))
    end = flow(hill_model, start, 0.0, root.T, tol=1e-12)
    gap = np.linalg.norm(end.vector - start.vector)
    assert gap <= 1e-4, f"orbit misses its start by {gap:.3e}"
    print(f"  T = {root.T:.6f}, return gap {gap:.2e}")
    print("✓ Periodic orbit test passed")


def test_f1_caustic_is_a_fold(hill_model, hill_ref, hill_gf6):
    """F1 first fails at T ≈ 1.6822, where nearby queries have exactly two solutions."""
    print("Testing F1 caustic...")
    H = QuadraticHamiltonian.from_model(hill_model, hill_ref)
    roots = detect_singularity(stm(H, 0.0, 2.0, tol=1e-12), "F1")
    assert roots and abs(roots[0] - 1.6822) <= 0.01, f"F1 singular times {roots}"
    direction = np.array([1.0, 0.5, -0.3, 0.7])
    counts = []
    for sign in (1.0, -1.0):
        result = enumerate_solutions(hill_gf6, BVPSpec("F1", sign * 1e-3 * direction, roots[0],
                                                       hill_gf6))
        assert result.outcome == "fold"
        counts.append(len(result))
    assert 2 in counts, f"branch counts {counts}"
    print("✓ Fold test passed")


def test_thousand_problem_batch(hill_model, l2_state, hill_gf6):
    """F1 data generated by the flow is inverted without any integration."""
    print("Testing 1000-problem batch...")
    rng = np.random.default_rng(2024)
    directions = rng.normal(size=(1000, 4))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    rel0 = directions * rng.uniform(0.0, 5e-3, size=(1000, 1))
    T = 1.0
    rel1 = np.array([flow(hill_model, PhaseState.from_vector(l2_state.vector + r), 0.0, T,
                          tol=1e-13).vector - l2_state.vector for r in rel0])
    part = BoundaryPartition.F1(2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TrustRadiusWarning)
        with integration_counter.counting() as counter:
            sols = solve_batch(hill_gf6, part, part.independent(rel1, rel0), T)
    assert counter.calls == 0, f"{counter.calls} integrations during the batch"
    p0 = np.array([s.relative0.p for s in sols])
    p1 = np.array([s.relative1.p for s in sols])
    err = max(np.abs(p0 - rel0[:, 2:]).max(), np.abs(p1 - rel1[:, 2:]).max())
    assert err <= 1e-6, f"largest momentum error {err:.3e}"
    print(f"  largest momentum error {err:.2e}")
    print("✓ Batch test passed")


def test_periodic_family_curves(hill_model, l2_state, hill_gf6):
    """Position scans over a band of periods each find the family member."""
    print("Testing periodic family scans...")
    for k in range(10):
        T = 3.033 + 0.0005 * k
        scan = periodic_position_scan(hill_gf6, T, half_width=0.03, grid=81, max_points=4)
        assert scan.curves, f"no curve at T={T}"
        assert len(scan.points) > 0
        q, p = scan.points[-1], scan.momenta[-1]
        start = PhaseState.from_vector(l2_state.vector + np.concatenate([q, p]))
        end = flow(hill_model, start, 0.0, T, tol=1e-12)
        assert np.linalg.norm(end.vector - start.vector) < 1e-4, f"T={T}"
    print("✓ Periodic family test passed")


def _winding(curve):
    turn = np.diff(np.unwrap(np.arctan2(curve[:, 1], curve[:, 0])))
    return abs(turn.sum()) / (2.0 * np.pi)


# period, x range (A + |x at half period|), y half-extent of the Lyapunov orbit
FAMILY_MEMBERS = [(3.0335, 0.0196, 0.0315), (3.0340, 0.0281, 0.0451)]


@pytest.mark.parametrize("T, x_range, y_extent", FAMILY_MEMBERS)
def test_periodic_family_single_closed_curve(hill_gf6, T, x_range, y_extent):
    """Each family member appears as one closed curve around L2 with the orbit's extent."""
    print(f"Testing closed family curve at T={T}...")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TrustRadiusWarning)
        scan = periodic_position_scan(hill_gf6, T, half_width=0.05, grid=161, max_points=8)
    loops = [c for c in scan.closed_curves()
             if _winding(c) > 0.5 and np.abs(c[:, 1]).max() > 0.5 * y_extent]
    assert len(loops) == 1, f"{len(loops)} closed curve(s) around L2"
    loop = loops[0]
    assert np.ptp(loop[:, 0]) == pytest.approx(x_range, rel=0.15)
    assert np.abs(loop[:, 1]).max() == pytest.approx(y_extent, rel=0.15)
    print("✓ Closed family curve test passed")


def test_no_family_member_below_linear_period(hill_gf6):
    """Below ``2π/√(2√7 − 1)`` only the libration point itself is periodic."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TrustRadiusWarning)
        scan = periodic_position_scan(hill_gf6, 3.0325, half_width=0.05, grid=81, refine=False)
    assert not [c for c in scan.closed_curves() if np.abs(c[:, 1]).max() > 0.01]


def test_formation_cost_properties(hill_model, l2_state, hill_gf2, hill_gf6):
    """Antipodal symmetry, near-isotropy for short transfers and the preferred direction."""
    print("Testing formation cost map...")
    radius = float(km_to_length(20000.0))
    angles = np.linspace(0.0, 2.0 * np.pi, 72, endpoint=False)
    linear = formation_cost_map(hill_gf2, radius, angles, [0.2, 0.6])
    assert np.allclose(linear.cost, np.roll(linear.cost, 36, axis=1), rtol=1e-10)
    # cubic terms break the symmetry of the full map in proportion to the radius
    small = formation_cost_map(hill_gf6, float(km_to_length(1000.0)), angles, [0.2, 0.6])
    assert np.allclose(small.cost, np.roll(small.cost, 36, axis=1), rtol=2e-3)

    short = 0.1 * characteristic_time(hill_model, l2_state)
    cmap = formation_cost_map(hill_gf6, radius, angles, [short])
    row = cmap.cost[0]
    assert (row.max() - row.min()) / row.mean() < 0.10

    fine = np.deg2rad(np.arange(0.0, 360.0, 1.0))
    radius = float(km_to_length(108000.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TrustRadiusWarning)
        cmap = formation_cost_map(hill_gf6, radius, fine, days_to_time([40.0, 45.0]))
    assert not cmap.mask.any()
    best = np.rad2deg(cmap.best_angles()) % 180.0
    assert np.all(np.abs(best - 80.0) <= 10.0), f"minimum-cost directions {best}"
    print(f"  minimum-cost directions {best} deg")
    print("✓ Formation cost test passed")


def test_manifold_growth_exponent(hill_model, l2_state, hill_gf6):
    """Distance along the unstable manifold grows like ``exp(λt)``."""
    print("Testing manifold growth...")
    lam, v = hyperbolic_eigen(hill_model, l2_state)
    traj = manifold_propagate(hill_gf6, lam, v, 1e-6, np.linspace(0.0, 2.0, 21))
    assert len(traj.times) >= 10
    fitted = growth_exponent(traj)
    assert fitted == pytest.approx(LAMBDA_L2, rel=0.02), f"fitted {fitted:.6f}"
    print(f"  fitted exponent {fitted:.6f} vs {LAMBDA_L2:.6f}")
    print("✓ Manifold growth test passed")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
