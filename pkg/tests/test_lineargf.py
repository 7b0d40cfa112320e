"""
Tests for boundary partitions and linearized generating functions

Run from project root: pytest tests/test_lineargf.py -v
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

from gfbvp.errors import ConfigError, SingularKindError
from gfbvp.lineargf import (
    QuadraticHamiltonian,
    detect_singularity,
    gf_from_stm,
    integrate_quadratic_gf,
    perturbation_matrices,
    pivot_condition,
    stm,
    stm_from_gf,
    symplectic_defect,
)
from gfbvp.partition import BoundaryPartition

HO = QuadraticHamiltonian(np.eye(2))


def _ho_f1(t):
    """Closed-form F1 matrix of the unit oscillator."""
    c, s = np.cos(t), np.sin(t)
    return np.array([[c / s, -1.0 / s], [-1.0 / s, c / s]])


def _random_hamiltonian(rng, n):
    M = rng.normal(scale=0.5, size=(2 * n, 2 * n))
    return QuadraticHamiltonian(0.5 * (M + M.T))


# ===== 边界划分 / Boundary partitions =====
def test_partition_parsing_and_properties():
    """Named kinds, 1-based parsing and identity admissibility."""
    print("Testing boundary partitions...")
    assert BoundaryPartition.parse("I=1,2;K=", 2) == BoundaryPartition.F2(2)
    assert BoundaryPartition.parse("f3", 2) == BoundaryPartition.F3(2)
    general = BoundaryPartition.parse("I=1;K=2", 2)
    assert general.kind == "I=1;K=2"
    assert general.identity_admissible, "K equal to the complement of I keeps the identity"

    f1 = BoundaryPartition.F1(1)
    assert not f1.identity_admissible
    assert f1.admissible_partner() == BoundaryPartition.F2(1)
    assert f1.block_name == "Phi_qp"
    assert list(f1.signs) == [1.0, -1.0]
    assert f1.variable_names() == (["q1", "q0_1"], ["p1", "p0_1"])
    assert len(BoundaryPartition.all_partitions(2)) == 16
    with pytest.raises(ConfigError):
        BoundaryPartition.parse("F5", 2)
    with pytest.raises(ConfigError):
        BoundaryPartition.parse("I=3;K=", 2)
    print("✓ Partition test passed")


def test_partition_assemble_round_trip():
    """Independent and dependent halves reassemble the two endpoint states."""
    part = BoundaryPartition.parse("I=2;K=1", 2)
    rng = np.random.default_rng(0)
    z1, z0 = rng.normal(size=4), rng.normal(size=4)
    a1, a0 = part.assemble(part.independent(z1, z0), part.dependent(z1, z0))
    assert np.allclose(a1, z1) and np.allclose(a0, z0)


# ===== 状态转移矩阵 / State transition matrices =====
def test_harmonic_oscillator_f1_closed_form():
    """F1 of the oscillator is ``[[cot t, −1/sin t], [−1/sin t, cot t]]``."""
    print("Testing oscillator F1...")
    path = stm(HO, 0.0, 3.0, tol=1e-12)
    for t in (0.3, 1.0, 2.0, 3.0):
        S = gf_from_stm(path.at(t), "F1").final
        assert np.allclose(S, _ho_f1(t), atol=1e-8), f"F1 mismatch at t={t}"
    at_quarter = gf_from_stm(path.at(np.pi / 4), "F1").final
    assert np.allclose(at_quarter, [[1.0, -np.sqrt(2.0)], [-np.sqrt(2.0), 1.0]], atol=1e-8)
    print("✓ Oscillator F1 test passed")


def test_harmonic_oscillator_singular_times():
    """F1 of the oscillator is singular at ``kπ``; the pivot names ``Phi_qp``."""
    print("Testing singular-time detection...")
    path = stm(HO, 0.0, 7.0, tol=1e-12)
    roots = detect_singularity(path, "F1")
    assert np.allclose(roots, [np.pi, 2.0 * np.pi], atol=1e-8), f"roots {roots}"
    f2_roots = detect_singularity(path, "F2")
    assert np.allclose(f2_roots, [np.pi / 2, 3 * np.pi / 2], atol=1e-8)

    at_pi = np.array([[np.cos(np.pi), np.sin(np.pi)], [-np.sin(np.pi), np.cos(np.pi)]])
    with pytest.raises(SingularKindError) as info:
        gf_from_stm(at_pi, "F1")
    assert info.value.block == "Phi_qp"
    assert pivot_condition(np.eye(2), BoundaryPartition.F1(1)) == np.inf
    print("✓ Singular-time test passed")


def test_riccati_matches_stm_elimination():
    """Riccati integration agrees with the STM route over random quadratic Hamiltonians."""
    print("Testing Riccati equations against STM elimination...")
    rng = np.random.default_rng(7)
    worst = 0.0
    for trial in range(100):
        n = int(rng.integers(1, 3))
        H = _random_hamiltonian(rng, n)
        phi = stm(H, 0.0, 0.5, tol=1e-12).final
        for kind in ("F2", "F3"):
            riccati = integrate_quadratic_gf(H, kind, 0.0, 0.5, tol=1e-12).final
            direct = gf_from_stm(phi, kind).final
            worst = max(worst, float(np.abs(riccati - direct).max()))
    assert worst < 1e-7, f"largest Riccati/STM difference {worst:.3e}"
    print(f"  largest difference {worst:.2e}")
    print("✓ Riccati test passed")


def test_stm_recovered_from_every_kind(hill_model, hill_ref):
    """STM → S → STM is the identity for every regular partition."""
    H = QuadraticHamiltonian.from_model(hill_model, hill_ref)
    phi = stm(H, 0.0, 0.5, tol=1e-12).final
    assert symplectic_defect(phi) < 1e-9
    checked = 0
    for part in BoundaryPartition.all_partitions(2):
        if pivot_condition(phi, part) > 1e6:
            continue
        back = stm_from_gf(gf_from_stm(phi, part)).final
        assert np.allclose(back, phi, atol=1e-9), f"round trip failed for {part.kind}"
        checked += 1
    assert checked >= 10, f"only {checked} partitions were regular"


def test_perturbation_matrices_symmetric(hill_model, hill_ref):
    """``C = ΦppΦqp⁻¹`` and ``C̃ = ΦpqΦqq⁻¹`` are symmetric along the flow."""
    print("Testing perturbation matrices...")
    H = QuadraticHamiltonian.from_model(hill_model, hill_ref)
    path = stm(H, 0.0, 0.7, tol=1e-12, t_eval=np.linspace(0.2, 0.7, 11))
    pm = perturbation_matrices(path)
    scale_C = np.abs(pm.C).max(axis=(1, 2))
    scale_Ct = np.abs(pm.C_tilde).max(axis=(1, 2))
    assert np.all(pm.C_defect / scale_C < 1e-8)
    assert np.all(pm.C_tilde_defect / scale_Ct < 1e-8)
    print("✓ Perturbation matrix test passed")


def test_hill_singular_times(hill_model, hill_ref):
    """F2 first fails near t ≈ 0.80 and F1 near t ≈ 1.6822 about L2."""
    print("Testing Hill singular times...")
    H = QuadraticHamiltonian.from_model(hill_model, hill_ref)
    path = stm(H, 0.0, 2.0, tol=1e-12)
    f1 = detect_singularity(path, "F1")
    f2 = detect_singularity(path, "F2")
    assert f1 and abs(f1[0] - 1.6822) < 0.01, f"F1 singular times {f1}"
    assert f2 and abs(f2[0] - 0.80) < 0.02, f"F2 singular times {f2}"
    print(f"  F1: {f1[0]:.6f}, F2: {f2[0]:.6f}")
    print("✓ Hill singular-time test passed")


def test_riccati_failure_modes():
    """F1 cannot start at t0; F2 of the oscillator blows up at π/2 with a bracket."""
    with pytest.raises(SingularKindError):
        integrate_quadratic_gf(HO, "F1", 0.0, 1.0)
    with pytest.raises(SingularKindError) as info:
        integrate_quadratic_gf(HO, "F2", 0.0, 2.0)
    bracket = info.value.bracket
    if bracket is not None:
        lo, hi = sorted(bracket)
        assert lo - 1e-3 <= np.pi / 2 <= hi + 1e-3, f"bracket {bracket}"


def test_seeded_riccati_and_frames():
    """A seeded F1 integration follows the closed form; frames carry named columns."""
    gf = integrate_quadratic_gf(HO, "F1", 0.0, 2.0, tol=1e-12, initial=(0.5, _ho_f1(0.5)),
                                t_eval=np.linspace(0.5, 2.0, 7))
    assert np.allclose(gf.final, _ho_f1(2.0), atol=1e-7)
    assert np.allclose(gf.F12[-1], -1.0 / np.sin(2.0), atol=1e-7)
    frame = gf.to_frame()
    assert list(frame.columns) == ["t", "S_11", "S_12", "S_21", "S_22"]
    assert len(frame) == 7

    path = stm(HO, 0.0, 1.0, tol=1e-12, t_eval=np.linspace(0.0, 1.0, 5))
    assert list(path.to_frame().columns) == ["t", "Phi_11", "Phi_12", "Phi_21", "Phi_22"]
    assert np.allclose(path.qp[-1], np.sin(1.0), atol=1e-10)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
