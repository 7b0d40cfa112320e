"""
Tests for boundary value problems on generating functions

Run from project root: pytest tests/test_tpbvp.py -v
"""

import sys
from pathlib import Path

import numpy as np
import pytest

try:
    import gfbvp  # noqa: F401
except ImportError:
    # Fallback for running directly without installation
    sys.path.insert(0, str(Path(__file__).parent.parent))

from gfbvp.dynamics import PhaseState, flow, integration_counter
from gfbvp.errors import DimensionError, SingularKindError
from gfbvp.hj import monitor_singularity
from gfbvp.partition import BoundaryPartition
from gfbvp.tpbvp import (
    BVPSpec,
    enumerate_solutions,
    solution_columns,
    solutions_frame,
    solve_batch,
    solve_bvp,
    solve_lambert,
)


def test_oscillator_lambert(ho_gf):
    """Quarter period from ``q0 = 1`` to ``q = 0`` needs ``p0 = 0`` and arrives with ``p = −1``."""
    print("Testing oscillator Lambert problem...")
    sol = solve_lambert(ho_gf, [1.0], [0.0], np.pi / 2)
    assert sol.p0 == pytest.approx([0.0], abs=1e-8), f"p0 = {sol.p0}"
    assert sol.p == pytest.approx([-1.0], abs=1e-8), f"p = {sol.p}"
    assert sol.residual < 1e-8
    print("✓ Oscillator Lambert test passed")


def test_lambert_at_conjugate_time(ho_gf):
    """F1 is singular at T = π; the error names the pivot block."""
    with pytest.raises(SingularKindError) as info:
        solve_lambert(ho_gf, [1.0], [0.0], np.pi)
    assert info.value.block == "Phi_qp"


def test_spec_validation(ho_gf):
    """Shapes, spans and dimensions are checked when a BVPSpec is bound to a GF."""
    with pytest.raises(DimensionError):
        BVPSpec("F1", np.zeros(3), 1.0, ho_gf)
    with pytest.raises(ValueError):
        BVPSpec("F1", np.zeros(2), 5.0, ho_gf)
    with pytest.raises(DimensionError):
        BVPSpec(BoundaryPartition.F1(2), np.zeros(4), 1.0, ho_gf)
    with pytest.raises(ValueError):
        solve_bvp(BVPSpec("F1", np.zeros(2), 1.0))


def test_general_partition_batch(hill_model, l2_state, hill_gf6):
    """A mixed partition recovers the dependent coordinates without integrating."""
    print("Testing batch solve on a mixed partition...")
    part = BoundaryPartition.parse("I=1;K=2", 2)
    T = 0.4
    rng = np.random.default_rng(21)
    rel0 = rng.uniform(-1.0, 1.0, size=(50, 4)) * 2e-3
    rel1 = np.array([flow(hill_model, PhaseState.from_vector(l2_state.vector + r), 0.0, T,
                          tol=1e-13).vector - l2_state.vector for r in rel0])
    known = part.independent(rel1, rel0)
    with integration_counter.counting() as counter:
        sols = solve_batch(hill_gf6, part, known, T)
    assert counter.calls == 0, "batch solves must not integrate"
    got = np.array([part.dependent(s.relative1.vector, s.relative0.vector) for s in sols])
    expected = part.dependent(rel1, rel0)
    err = np.abs(got - expected).max()
    assert err < 1e-9, f"largest dependent error {err:.3e}"
    print(f"  largest error {err:.2e}")
    print("✓ Mixed partition batch test passed")


def test_solve_bvp_verifies_with_flow(hill_gf6):
    sol = solve_bvp(BVPSpec("F1", [0.002, -0.001, 0.001, 0.0], 1.0, hill_gf6))
    assert sol.residual < 1e-8
    assert not sol.flagged


def test_enumerate_at_fold(hill_gf6):
    """At the F1 singular time an F1 query has a fold with two verified branches."""
    print("Testing solution enumeration at a fold...")
    t_s = [t for part, t in monitor_singularity(hill_gf6, ["F1"])][0]
    direction = np.array([1.0, 0.5, -0.3, 0.7])
    results = [enumerate_solutions(hill_gf6, BVPSpec("F1", sign * 1e-3 * direction, t_s,
                                                     hill_gf6), verify=True)
               for sign in (1.0, -1.0)]
    for result in results:
        assert result.outcome == "fold"
        assert result.leading_degree == 2
        assert len(result) <= 2
    good = [r for r in results if len(r) == 2 and all(s.residual < 1e-5 for s in r)]
    assert good, f"branch counts {[len(r) for r in results]}"
    a, b = good[0].solutions
    assert np.linalg.norm(a.state0.vector - b.state0.vector) > 1e-6, "branches must differ"
    print("✓ Fold enumeration test passed")


def test_enumerate_regular_and_infinite(hill_gf6):
    """Away from caustics the answer is unique; at T = 0 every F1 query is degenerate."""
    spec = BVPSpec("F1", [0.001, 0.0, 0.001, 0.0], 1.0, hill_gf6)
    unique = enumerate_solutions(hill_gf6, spec, verify=False)
    assert unique.outcome == "unique" and len(unique) == 1
    direct = solve_bvp(spec, verify=False)
    assert np.allclose(list(unique)[0].state0.vector, direct.state0.vector, atol=1e-10)

    zero = enumerate_solutions(hill_gf6, BVPSpec("F1", np.zeros(4), 0.0, hill_gf6))
    assert zero.outcome == "infinite"
    assert len(zero) == 0


def test_solutions_frame(ho_gf):
    rows = np.array([[0.0, 1.0], [0.5, 1.0]])
    sols = solve_batch(ho_gf, "F1", rows, np.pi / 2, verify=True)
    frame = solutions_frame(sols, [np.pi / 2] * len(sols))
    assert list(frame.columns) == solution_columns(1)
    assert list(frame.columns) == ["T", "branch", "q0_1", "p0_1", "q1", "p1", "residual", "flagged"]
    assert frame["p1"].to_numpy() == pytest.approx([-1.0, -1.0], abs=1e-8)
    assert frame["flagged"].sum() == 0


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
