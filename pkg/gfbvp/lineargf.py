"""
线性（二次）生成函数模块 / Linear (Quadratic) Generating Functions Module
======================================================================

线性化动力学的状态转移矩阵（STM）、任意边界划分的二次生成函数、
两者之间的相互转换、矩阵Riccati方程的积分以及奇异时间的检测。
State transition matrices of linearized dynamics, quadratic generating
functions of any boundary partition, conversions between the two, the matrix
Riccati equations and detection of singular times.

二次生成函数写作 ``F = ½ xᵀ S x``，S 为对称矩阵，x 为划分的自变量。
A quadratic generating function is ``F = ½ xᵀ S x`` with symmetric S over the
partition's independent variables x.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from .constants import (
    BLOWUP_NORM,
    DEFAULT_TOL,
    PIVOT_CONDITION_LIMIT,
    SINGULAR_GRID_DENSITY,
    SINGULAR_TIME_XTOL,
)
from .dynamics import (
    HamiltonianModel,
    ReferenceTrajectory,
    integrate,
    symplectic_matrix,
    taylor_hamiltonian,
)
from .errors import DimensionError, IntegrationError, SingularKindError, describe_bracket
from .partition import BoundaryPartition, as_partition
from .poly import TruncatedPolynomial

logger = logging.getLogger(__name__)

MatrixFunction = Callable[[float], np.ndarray]


def _matrix_frame(times: np.ndarray, matrices: np.ndarray, prefix: str) -> pd.DataFrame:
    """One row per time: ``t`` then the entries ``{prefix}_ij`` (1-based, row-major)."""
    dim = matrices.shape[-1]
    columns = ["t"] + [f"{prefix}_{i + 1}{j + 1}" for i in range(dim) for j in range(dim)]
    return pd.DataFrame(np.column_stack([times, matrices.reshape(len(times), -1)]),
                        columns=columns)


# ============================================================================
# 二次哈密顿量 / Quadratic Hamiltonians
# ============================================================================
class QuadraticHamiltonian:
    """``H = ½ wᵀ M(t) w`` with ``w = (q, p)``.

    二次哈密顿量，M 可为常矩阵或时间函数。
    """

    def __init__(self, matrix: Union[np.ndarray, MatrixFunction]):
        if callable(matrix):
            self._matrix = matrix
            self.constant = False
            sample = np.asarray(matrix(0.0), dtype=float)
        else:
            sample = np.asarray(matrix, dtype=float)
            self._matrix = lambda t, m=0.5 * (sample + sample.T): m
            self.constant = True
        if sample.ndim != 2 or sample.shape[0] != sample.shape[1] or sample.shape[0] % 2:
            raise DimensionError("Hamiltonian matrix must be 2n x 2n")
        self.n = sample.shape[0] // 2

    @classmethod
    def from_blocks(cls, Hqq, Hqp, Hpq, Hpp) -> "QuadraticHamiltonian":
        """Assemble from blocks with ``Hqp[i, j] = ∂²H/∂q_i∂p_j`` (so ``Hpq = Hqpᵀ``)."""
        Hqq, Hqp, Hpq, Hpp = (np.atleast_2d(np.asarray(b, dtype=float))
                              for b in (Hqq, Hqp, Hpq, Hpp))
        if not np.allclose(Hpq, Hqp.T):
            raise ValueError("Hpq must equal Hqp transposed")
        return cls(np.block([[Hqq, Hqp], [Hpq, Hpp]]))

    @classmethod
    def from_model(cls, model: HamiltonianModel,
                   reference: ReferenceTrajectory) -> "QuadraticHamiltonian":
        """Order-2 Taylor part of a model about a reference trajectory."""
        if model.autonomous and reference.is_equilibrium:
            return cls(taylor_hamiltonian(model, reference, 2).quadratic_matrix())
        return cls(lambda t: taylor_hamiltonian(model, reference, 2, t).quadratic_matrix())

    def matrix(self, t: float) -> np.ndarray:
        return self._matrix(t)

    def blocks(self, t: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        M = self.matrix(t)
        n = self.n
        return M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]

    def flow_matrix(self, t: float) -> np.ndarray:
        """``J·M(t)``, the matrix of the linear Hamiltonian vector field."""
        return symplectic_matrix(self.n) @ self.matrix(t)


# ============================================================================
# 状态转移矩阵 / State Transition Matrices
# ============================================================================
class StateTransition:
    """Path of state transition matrices ``Φ(t, t0)``.

    状态转移矩阵路径；``at(t)`` 在稠密输出可用时给出任意时刻的值。
    """

    def __init__(self, times: Sequence[float], matrices: np.ndarray,
                 evaluator: Optional[MatrixFunction] = None, t0: Optional[float] = None):
        self.times = np.atleast_1d(np.asarray(times, dtype=float))
        self.matrices = np.asarray(matrices, dtype=float).reshape(self.times.size,
                                                                  *np.shape(matrices)[-2:])
        self.n = self.matrices.shape[-1] // 2
        self.t0 = float(self.times[0] if t0 is None else t0)
        self._evaluator = evaluator

    @classmethod
    def single(cls, matrix: np.ndarray, t: float = 0.0) -> "StateTransition":
        return cls([t], np.asarray(matrix)[None, :, :])

    def at(self, t: float) -> np.ndarray:
        if self._evaluator is not None:
            return self._evaluator(t)
        hit = np.nonzero(np.isclose(self.times, t, rtol=0.0, atol=1e-14))[0]
        if hit.size:
            return self.matrices[hit[0]]
        raise ValueError("no dense evaluator; t must be a stored sample")

    def to_frame(self) -> pd.DataFrame:
        return _matrix_frame(self.times, self.matrices, "Phi")

    @property
    def final(self) -> np.ndarray:
        return self.matrices[-1]

    def _block(self, rows: slice, cols: slice) -> np.ndarray:
        return self.matrices[:, rows, cols]

    @property
    def qq(self) -> np.ndarray:
        n = self.n
        return self._block(slice(0, n), slice(0, n))

    @property
    def qp(self) -> np.ndarray:
        n = self.n
        return self._block(slice(0, n), slice(n, 2 * n))

    @property
    def pq(self) -> np.ndarray:
        n = self.n
        return self._block(slice(n, 2 * n), slice(0, n))

    @property
    def pp(self) -> np.ndarray:
        n = self.n
        return self._block(slice(n, 2 * n), slice(n, 2 * n))


def stm(H: QuadraticHamiltonian, t0: float, t1: float, tol: float = DEFAULT_TOL,
        t_eval: Optional[Sequence[float]] = None) -> StateTransition:
    """Integrate ``Φ̇ = J M(t) Φ``, ``Φ(t0) = I``.

    积分状态转移矩阵。返回的路径带有稠密插值 ``at(t)``。
    """
    dim = 2 * H.n
    if t1 == t0:
        return StateTransition.single(np.eye(dim), t0)

    def rhs(t, y):
        return (H.flow_matrix(t) @ y.reshape(dim, dim)).ravel()

    sol = integrate(rhs, (t0, t1), np.eye(dim).ravel(), tol, dense_output=True,
                    t_eval=None if t_eval is None else np.asarray(t_eval, dtype=float))
    dense = sol.sol
    return StateTransition(sol.t, sol.y.T.reshape(-1, dim, dim),
                           evaluator=lambda t: dense(t).reshape(dim, dim), t0=t0)


def symplectic_defect(phi: np.ndarray) -> float:
    """``max |ΦᵀJΦ − J|``."""
    J = symplectic_matrix(phi.shape[0] // 2)
    return float(np.abs(phi.T @ J @ phi - J).max())


# ============================================================================
# 二次生成函数 / Quadratic Generating Functions
# ============================================================================
class QuadraticGF:
    """Path of quadratic generating-function matrices S(t) for one partition.

    某一划分下二次生成函数矩阵 S(t) 的路径。块记号::

        F11 = S[:n, :n]   F12 = S[:n, n:]
        F21 = S[n:, :n]   F22 = S[n:, n:]
    """

    def __init__(self, partition: BoundaryPartition, times: Sequence[float],
                 matrices: np.ndarray, evaluator: Optional[MatrixFunction] = None):
        self.partition = partition
        self.times = np.atleast_1d(np.asarray(times, dtype=float))
        self.matrices = np.asarray(matrices, dtype=float).reshape(self.times.size,
                                                                  *np.shape(matrices)[-2:])
        self.n = partition.n
        self._evaluator = evaluator

    def at(self, t: float) -> np.ndarray:
        if self._evaluator is not None:
            return self._evaluator(t)
        hit = np.nonzero(np.isclose(self.times, t, rtol=0.0, atol=1e-14))[0]
        if hit.size:
            return self.matrices[hit[0]]
        raise ValueError("no dense evaluator; t must be a stored sample")

    def to_frame(self) -> pd.DataFrame:
        """Matrix path as a table (columns ``t, S_11, S_12, ...``)."""
        return _matrix_frame(self.times, self.matrices, "S")

    @property
    def final(self) -> np.ndarray:
        return self.matrices[-1]

    @property
    def F11(self) -> np.ndarray:
        return self.matrices[:, : self.n, : self.n]

    @property
    def F12(self) -> np.ndarray:
        return self.matrices[:, : self.n, self.n:]

    @property
    def F21(self) -> np.ndarray:
        return self.matrices[:, self.n:, : self.n]

    @property
    def F22(self) -> np.ndarray:
        return self.matrices[:, self.n:, self.n:]

    def polynomial(self, t: float, max_degree: int = 2) -> TruncatedPolynomial:
        return TruncatedPolynomial.quadratic_form(self.at(t), max_degree)


def _dependent_map(phi: np.ndarray, partition: BoundaryPartition) -> np.ndarray:
    """``G`` with dependent values ``y = G x`` on the canonical relation ``z1 = Φ z0``."""
    n = partition.n
    dim = 2 * n
    constraint = np.hstack([np.eye(dim), -phi])
    fq, iq = partition.final_is_q, partition.initial_is_q
    x_idx = ([a if fq[a] else n + a for a in range(n)]
             + [dim + k if iq[k] else dim + n + k for k in range(n)])
    y_idx = ([n + a if fq[a] else a for a in range(n)]
             + [dim + n + k if iq[k] else dim + k for k in range(n)])
    return -np.linalg.solve(constraint[:, y_idx], constraint[:, x_idx])


def pivot_determinant(phi: np.ndarray, partition: BoundaryPartition) -> float:
    rows, cols = partition.pivot_indices()
    return float(np.linalg.det(phi[np.ix_(rows, cols)]))


def pivot_condition(phi: np.ndarray, partition: BoundaryPartition) -> float:
    """``‖Φ‖·‖B⁻¹‖`` for the pivot block B (inf when B is singular).

    Scaled by the whole STM, so a 1x1 block near zero still reads as singular.
    """
    rows, cols = partition.pivot_indices()
    try:
        inverse = np.linalg.inv(phi[np.ix_(rows, cols)])
    except np.linalg.LinAlgError:
        return np.inf
    return float(np.linalg.norm(phi, 2) * np.linalg.norm(inverse, 2))


def _gf_matrix(phi: np.ndarray, partition: BoundaryPartition, t: Optional[float] = None,
               limit: float = PIVOT_CONDITION_LIMIT) -> np.ndarray:
    cond = pivot_condition(phi, partition)
    if not np.isfinite(cond) or cond > limit:
        when = "" if t is None else f" at t={t:.10g}"
        raise SingularKindError(
            f"{partition.kind} is singular{when}: {partition.block_name} condition {cond:.3e}",
            kind=partition.kind, block=partition.block_name, time=t)
    S = partition.signs[:, None] * _dependent_map(phi, partition)
    return 0.5 * (S + S.T)


def gf_from_stm(phi: Union[StateTransition, np.ndarray], kind,
                limit: float = PIVOT_CONDITION_LIMIT) -> QuadraticGF:
    """Quadratic generating function of a given kind from an STM path.

    由状态转移矩阵求二次生成函数。

    Parameters 参数
    -------------
    phi : StateTransition or ndarray
        STM path (or a single 2n x 2n matrix).
    kind : BoundaryPartition or str
        Target partition (``"F1"`` .. ``"F4"`` or a general partition).
    limit : float
        Pivot condition number above which the kind is singular.
        主元块条件数上限。

    Returns 返回
    ----------
    QuadraticGF

    Raises 异常
    ---------
    SingularKindError
        The pivot block (``Φqp`` for F1, ``Φqq`` for F2, ``Φpp`` for F3,
        ``Φpq`` for F4) is singular at some sample.

    Notes 说明
    ---------
    For F2 the blocks are ``F11 = ΦpqΦqq⁻¹``, ``F12 = Φpp − ΦpqΦqq⁻¹Φqp``,
    ``F21 = Φqq⁻¹``, ``F22 = −Φqq⁻¹Φqp``; every kind follows from eliminating
    the dependent variables of ``z1 = Φ z0``.
    """
    if not isinstance(phi, StateTransition):
        phi = StateTransition.single(np.asarray(phi, dtype=float))
    partition = as_partition(kind, phi.n)
    mats = np.array([_gf_matrix(m, partition, t, limit) for t, m in zip(phi.times, phi.matrices)])
    evaluator = None
    if phi._evaluator is not None:
        evaluator = lambda t: _gf_matrix(phi.at(t), partition, t, limit)
    return QuadraticGF(partition, phi.times, mats, evaluator)


def _stm_matrix(S: np.ndarray, partition: BoundaryPartition) -> np.ndarray:
    n = partition.n
    dim = 2 * n
    y_of_x = partition.signs[:, None] * S
    fq, iq = partition.final_is_q, partition.initial_is_q
    eye = np.eye(dim)
    z1 = np.zeros((dim, dim))
    z0 = np.zeros((dim, dim))
    for a in range(n):
        indep, dep = eye[a], y_of_x[a]
        z1[a], z1[n + a] = (indep, dep) if fq[a] else (dep, indep)
    for k in range(n):
        indep, dep = eye[n + k], y_of_x[n + k]
        z0[k], z0[n + k] = (indep, dep) if iq[k] else (dep, indep)
    return z1 @ np.linalg.inv(z0)


def stm_from_gf(gf: Union[QuadraticGF, np.ndarray], kind=None) -> StateTransition:
    """Recover the STM path from a quadratic generating function.

    由二次生成函数恢复状态转移矩阵（任意划分）。
    """
    if not isinstance(gf, QuadraticGF):
        S = np.asarray(gf, dtype=float)
        if kind is None:
            raise ValueError("kind is required with a bare matrix")
        gf = QuadraticGF(as_partition(kind, S.shape[0] // 2), [0.0], S[None, :, :])
    partition = gf.partition
    mats = np.array([_stm_matrix(S, partition) for S in gf.matrices])
    evaluator = None
    if gf._evaluator is not None:
        evaluator = lambda t: _stm_matrix(gf.at(t), partition)
    return StateTransition(gf.times, mats, evaluator)


# ============================================================================
# 矩阵 Riccati 方程 / Matrix Riccati Equations
# ============================================================================
def state_map(S: np.ndarray, partition: BoundaryPartition) -> np.ndarray:
    """``L(S)`` with the final-endpoint state ``w = L x``."""
    n = partition.n
    L = np.zeros((2 * n, 2 * n))
    for a in range(n):
        if a in partition.I_p:
            L[a, a] = 1.0
            L[n + a] = S[a]
        else:
            L[n + a, a] = 1.0
            L[a] = -S[a]
    return L


def riccati_rhs(S: np.ndarray, M: np.ndarray, partition: BoundaryPartition) -> np.ndarray:
    """``Ṡ = −L(S)ᵀ M L(S)``, the Hamilton-Jacobi equation for quadratic F."""
    L = state_map(S, partition)
    return -L.T @ M @ L


def integrate_quadratic_gf(H: QuadraticHamiltonian, kind, t0: float, t1: float,
                           tol: float = DEFAULT_TOL,
                           initial: Optional[Tuple[float, np.ndarray]] = None,
                           t_eval: Optional[Sequence[float]] = None) -> QuadraticGF:
    """Integrate the matrix Riccati equation of a generating-function kind.

    积分某类生成函数的矩阵Riccati方程。

    Parameters 参数
    -------------
    H : QuadraticHamiltonian
    kind : BoundaryPartition or str
    t0, t1 : float
        Epoch of the identity transformation and final time.
        恒等变换的初始时刻与终止时刻。
    tol : float
    initial : (float, ndarray), optional
        Start time and matrix for kinds singular at ``t0`` (F1, F4, ...).
        对 t0 奇异的类型（F1、F4等）给出起始时刻与矩阵。
    t_eval : sequence of float, optional

    Returns 返回
    ----------
    QuadraticGF

    Raises 异常
    ---------
    SingularKindError
        The kind is singular at ``t0`` without ``initial``, or the solution
        blows up; the error carries a bracket of the singular time.
    """
    partition = as_partition(kind, H.n)
    dim = 2 * H.n
    if initial is None:
        if not partition.identity_admissible:
            raise SingularKindError(
                f"{partition.kind} is singular at t0={t0}; derive it with gf_from_stm "
                "after t0 or pass initial=(t_start, matrix)",
                kind=partition.kind, block=partition.block_name, time=t0)
        start, S0 = t0, _gf_matrix(np.eye(dim), partition)
    else:
        start, S0 = float(initial[0]), np.asarray(initial[1], dtype=float)
    iu = np.triu_indices(dim)

    def unpack(y):
        S = np.zeros((dim, dim))
        S[iu] = y
        return S + np.triu(S, 1).T

    def rhs(t, y):
        return riccati_rhs(unpack(y), H.matrix(t), partition)[iu]

    def blowup(t, y):
        return BLOWUP_NORM - np.abs(y).max()

    blowup.terminal = True
    if t1 == start:
        return QuadraticGF(partition, [start], S0[None, :, :])
    try:
        sol = integrate(rhs, (start, t1), S0[iu], tol, events=blowup, dense_output=True,
                        t_eval=None if t_eval is None else np.asarray(t_eval, dtype=float))
    except IntegrationError as exc:
        raise SingularKindError(f"{partition.kind} Riccati integration failed: {exc}",
                                kind=partition.kind, block=partition.block_name) from exc
    if sol.status == 1:
        t_hit = float(sol.t_events[0][0])
        y_hit = sol.y_events[0][0]
        rate = np.abs(rhs(t_hit, y_hit)).max()
        gap = 2.0 * np.abs(y_hit).max() / rate if rate > 0 else 0.0
        bracket = (t_hit, t_hit + np.sign(t1 - start) * gap)
        raise SingularKindError(
            f"{partition.kind} blows up near t={t_hit:.10g}, bracket {describe_bracket(bracket)}",
            kind=partition.kind, block=partition.block_name, time=t_hit, bracket=bracket)
    dense = sol.sol
    mats = np.array([unpack(y) for y in sol.y.T])
    return QuadraticGF(partition, sol.t, mats, evaluator=lambda t: unpack(dense(t)))


# ============================================================================
# 奇异性 / Singularities
# ============================================================================
@dataclass
class PerturbationMatrices:
    """``C = ΦppΦqp⁻¹`` and ``C̃ = ΦpqΦqq⁻¹`` with their symmetry defects.

    摄动矩阵及其对称性缺陷（不可逆处为 NaN）。
    """

    C: np.ndarray
    C_tilde: np.ndarray
    C_defect: np.ndarray
    C_tilde_defect: np.ndarray


def _right_divide(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(B.T, A.T).T
    except np.linalg.LinAlgError:
        return np.full_like(A, np.nan)


def perturbation_matrices(phi: StateTransition) -> PerturbationMatrices:
    C = np.array([_right_divide(pp, qp) for pp, qp in zip(phi.pp, phi.qp)])
    Ct = np.array([_right_divide(pq, qq) for pq, qq in zip(phi.pq, phi.qq)])
    defect = lambda X: np.abs(X - np.swapaxes(X, -1, -2)).max(axis=(-2, -1))
    return PerturbationMatrices(C, Ct, defect(C), defect(Ct))


def detect_singularity(phi: StateTransition, kind, t0: Optional[float] = None,
                       t1: Optional[float] = None,
                       density: int = SINGULAR_GRID_DENSITY) -> List[float]:
    """Times in ``(t0, t1]`` where the kind's pivot block is singular.

    检测某类生成函数的奇异时间：在网格上寻找主元行列式的变号并用 brentq 精化。

    Parameters 参数
    -------------
    phi : StateTransition
        STM path with a dense evaluator.
    kind : BoundaryPartition or str
    t0, t1 : float, optional
        Search window (defaults to the path span).
    density : int
        Grid samples per unit time.
        每单位时间的网格点数。
    """
    partition = as_partition(kind, phi.n)
    t0 = float(phi.times[0] if t0 is None else t0)
    t1 = float(phi.times[-1] if t1 is None else t1)
    f = lambda t: pivot_determinant(phi.at(t), partition)
    count = max(int(np.ceil(abs(t1 - t0) * density)) + 1, 3)
    grid = np.linspace(t0, t1, count)
    values = np.array([f(t) for t in grid])
    scale = max(np.abs(values).max(), 1e-300)
    roots: List[float] = []
    for i in range(count - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = values[i], values[i + 1]
        if fb == 0.0 and i + 1 < count - 1:
            roots.append(float(b))
        elif fa * fb < 0.0:
            roots.append(float(brentq(f, a, b, xtol=SINGULAR_TIME_XTOL)))
    if abs(values[-1]) <= 1e-9 * scale:
        roots.append(t1)
    out: List[float] = []
    for r in sorted(roots, key=lambda r: abs(r - t0)):
        if abs(r - t0) > 1e-12 and all(abs(r - s) > 1e-9 for s in out):
            out.append(r)
    logger.debug("%s singular times in [%g, %g]: %s", partition.kind, t0, t1, out)
    return out


__all__ = [
    "QuadraticHamiltonian",
    "StateTransition",
    "stm",
    "symplectic_defect",
    "QuadraticGF",
    "gf_from_stm",
    "stm_from_gf",
    "pivot_determinant",
    "pivot_condition",
    "state_map",
    "riccati_rhs",
    "integrate_quadratic_gf",
    "PerturbationMatrices",
    "perturbation_matrices",
    "detect_singularity",
]
