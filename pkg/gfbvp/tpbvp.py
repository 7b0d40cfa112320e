"""
两点边值问题模块 / Two-Point Boundary Value Module
================================================

给定两端 4n 个坐标中按划分选出的 2n 个（相对参考轨迹），由生成函数梯度求出
其余 2n 个；在焦散（类型奇异）附近枚举多个解。
Given the 2n of the 4n endpoint coordinates selected by a partition (relative
to the reference), the other 2n follow from generating-function gradients;
near caustics (singular kinds) every local solution is enumerated.

求解一次生成函数后，m 个边值问题只需 m 次多项式求值，不再积分。
After one generating-function solve, m boundary value problems cost m
polynomial evaluations and no further integration.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence

import numpy as np
import pandas as pd

from .constants import CAUSTIC_RTOL, FLOW_RESIDUAL_THRESHOLD, PIVOT_CONDITION_LIMIT
from .dynamics import PhaseState, flow
from .errors import DimensionError, FlowResidualWarning, SingularKindError
from .hj import GeneratingFunction, eval_gradients, gradients_of, swap_system
from .lineargf import pivot_condition
from .partition import BoundaryPartition, as_partition
from .poly import invert_series

logger = logging.getLogger(__name__)


@dataclass
class BVPSpec:
    """Boundary value problem posed on a generating function.

    边值问题：划分、2n 个已知自变量（相对值，按槽位排列）与传输时间。

    Parameters 参数
    -------------
    partition : BoundaryPartition or str
    known : array_like, shape (2n,)
        Independent values ``(x_final, x_initial)`` relative to the reference.
        相对参考轨迹的自变量。
    T : float
        Transfer duration measured from ``gf.t0``.
        自 ``gf.t0`` 起算的传输时间。
    gf : GeneratingFunction, optional
    """

    partition: object
    known: np.ndarray
    T: float
    gf: Optional[GeneratingFunction] = None

    def __post_init__(self):
        self.known = np.asarray(self.known, dtype=float)
        if self.gf is not None:
            self.partition = as_partition(self.partition, self.gf.n)
            self.check(self.gf)
        elif not isinstance(self.partition, BoundaryPartition):
            self.partition = as_partition(self.partition, self.known.size // 2)
        if self.known.shape != (2 * self.partition.n,):
            raise DimensionError(f"known values need shape ({2 * self.partition.n},)")

    def check(self, gf: GeneratingFunction) -> None:
        if gf.n != self.partition.n:
            raise DimensionError(f"partition for n={self.partition.n} on a GF with n={gf.n}")
        t = gf.t0 + self.T
        if not gf.covers(t):
            raise ValueError(f"T={self.T} outside generating-function span {gf.span}")


@dataclass
class BVPSolution:
    """Both endpoint states of one solution, absolute and relative.

    一个解的两端状态（绝对值与相对值）及相流验证残差。
    """

    state0: PhaseState
    state1: PhaseState
    relative0: PhaseState
    relative1: PhaseState
    residual: float = float("nan")
    flagged: bool = False
    branch: int = 0


@dataclass
class LambertSolution:
    p0: np.ndarray
    p: np.ndarray
    residual: float
    state0: PhaseState
    state1: PhaseState


@dataclass
class EnumerationResult:
    """All local solutions near a caustic. / 焦散附近的全部局部解。"""

    outcome: str
    solutions: List[BVPSolution] = field(default_factory=list)
    leading_degree: Optional[int] = None

    def __iter__(self) -> Iterator[BVPSolution]:
        return iter(self.solutions)

    def __len__(self) -> int:
        return len(self.solutions)


# ============================================================================
# 内部工具 / Internal Helpers
# ============================================================================
def _reference_states(gf: GeneratingFunction, T: float):
    ref = gf.reference
    return ref.state_at(gf.t0).vector, ref.state_at(gf.t0 + T).vector


def _verify(gf: GeneratingFunction, solution: BVPSolution, T: float, tol: float,
            threshold: float) -> BVPSolution:
    end = flow(gf.model, solution.state0, gf.t0, gf.t0 + T, tol)
    solution.residual = float(np.linalg.norm(end.vector - solution.state1.vector))
    solution.flagged = solution.residual > threshold
    if solution.flagged:
        warnings.warn(f"flow residual {solution.residual:.3e} exceeds {threshold:.1e} "
                      f"(T={T})", FlowResidualWarning, stacklevel=3)
    return solution


def _build_solution(gf: GeneratingFunction, partition: BoundaryPartition, x: np.ndarray,
                    y: np.ndarray, T: float, branch: int = 0) -> BVPSolution:
    z1, z0 = partition.assemble(x, y)
    ref0, ref1 = _reference_states(gf, T)
    return BVPSolution(PhaseState.from_vector(ref0 + z0), PhaseState.from_vector(ref1 + z1),
                       PhaseState.from_vector(z0), PhaseState.from_vector(z1), branch=branch)


# ============================================================================
# 边值问题 / Boundary Value Problems
# ============================================================================
def solve_bvp(spec: BVPSpec, verify: bool = True, threshold: float = FLOW_RESIDUAL_THRESHOLD,
              tol: float = 1e-12) -> BVPSolution:
    """Recover the dependent endpoint coordinates from the known ones.

    由已知的 2n 个坐标求其余 2n 个，并以相流积分验证。

    Parameters 参数
    -------------
    spec : BVPSpec
        Problem with ``gf`` set.
    verify : bool
        Integrate ``state0`` over T and attach ``‖flow(state0) − state1‖``.
        是否进行相流验证。
    threshold : float
        Residual above which the solution is flagged (with a warning).
    tol : float
        Verification integrator tolerance.

    Returns 返回
    ----------
    BVPSolution

    Raises 异常
    ---------
    SingularKindError
        The requested kind is (nearly) singular at T; use
        :func:`enumerate_solutions` there.
    """
    gf = spec.gf
    if gf is None:
        raise ValueError("BVPSpec.gf must be set")
    part = spec.partition
    t = gf.t0 + spec.T
    cond = pivot_condition(gf.linear_stm(t), part)
    if not np.isfinite(cond) or cond > PIVOT_CONDITION_LIMIT:
        raise SingularKindError(
            f"{part.kind} is singular at T={spec.T:.10g} ({part.block_name} condition "
            f"{cond:.3e}); use enumerate_solutions", kind=part.kind, block=part.block_name,
            time=t)
    y = eval_gradients(gf.as_kind(part), spec.known, t)
    solution = _build_solution(gf, part, spec.known, y, spec.T)
    if verify:
        _verify(gf, solution, spec.T, tol, threshold)
    return solution


def solve_batch(gf: GeneratingFunction, partition, known_rows, T: float, verify: bool = False,
                threshold: float = FLOW_RESIDUAL_THRESHOLD) -> List[BVPSolution]:
    """Solve m problems sharing kind and T with one polynomial evaluation pass.

    批量求解：同一类型与时间的 m 个问题只需一次向量化多项式求值。
    """
    part = as_partition(partition, gf.n)
    rows = np.atleast_2d(np.asarray(known_rows, dtype=float))
    BVPSpec(part, rows[0], T, gf)
    t = gf.t0 + T
    y = eval_gradients(gf.as_kind(part), rows, t)
    out = [_build_solution(gf, part, x, yi, T) for x, yi in zip(rows, y)]
    if verify:
        for solution in out:
            _verify(gf, solution, T, 1e-12, threshold)
    logger.debug("solved %d %s problems at T=%g", len(out), part.kind, T)
    return out


def solve_lambert(gf: GeneratingFunction, q0, q, T: float, verify: bool = True,
                  threshold: float = FLOW_RESIDUAL_THRESHOLD) -> LambertSolution:
    """Momenta joining relative positions ``q0`` and ``q`` in time ``T`` (F1).

    Lambert 问题：由 F1 求连接两位置的初末动量（相对值）。

    Raises 异常
    ---------
    SingularKindError
        F1 is singular at T (e.g. ``T = kπ/ω`` for the harmonic oscillator).
    """
    part = BoundaryPartition.F1(gf.n)
    known = np.concatenate([np.atleast_1d(q), np.atleast_1d(q0)]).astype(float)
    sol = solve_bvp(BVPSpec(part, known, T, gf), verify=verify, threshold=threshold)
    return LambertSolution(sol.relative0.p, sol.relative1.p, sol.residual, sol.state0, sol.state1)


def enumerate_solutions(gf: GeneratingFunction, spec: BVPSpec, verify: bool = True,
                        threshold: float = FLOW_RESIDUAL_THRESHOLD,
                        rtol: float = CAUSTIC_RTOL) -> EnumerationResult:
    """Every local solution of a boundary value problem, including near caustics.

    枚举全部局部解：在覆盖 T 的图所用类型中，对被替换变量做级数反演；
    折叠处给出两支，秩亏 >= 2 时为无穷族。

    Parameters 参数
    -------------
    gf : GeneratingFunction
    spec : BVPSpec
    verify : bool
    threshold : float
    rtol : float
        Determinant tolerance of the singularity test.
        奇异判据相对容差。

    Returns 返回
    ----------
    EnumerationResult
        ``unique``, ``fold``, ``unclassified`` (with the real roots found) or
        ``infinite`` (no solutions listed).

    Raises 异常
    ---------
    ClassificationError
        The truncation order is too low to classify the singularity.
    """
    spec.check(gf)
    t = gf.t0 + spec.T
    source, poly = gf.chart_polynomial(t)
    target = spec.partition
    nv = 2 * gf.n
    if source == target:
        outcome, leading = "unique", None
        candidates = [spec.known.copy()]
    else:
        system, slots = swap_system(poly, source, target)
        result = invert_series(system, poly.max_degree, rtol)
        outcome, leading = result.outcome, result.leading_degree
        candidates = []
        for values in result.branches(spec.known) if outcome != "infinite" else []:
            x_src = spec.known.copy()
            x_src[slots] = values
            candidates.append(x_src)
    solutions = []
    for branch, x_src in enumerate(candidates):
        y_src = gradients_of(poly, source, x_src)
        solution = _build_solution(gf, source, x_src, y_src, spec.T, branch)
        if verify:
            _verify(gf, solution, spec.T, 1e-12, threshold)
        solutions.append(solution)
    logger.info("%s query at T=%g: %s outcome with %d solution(s)", target.kind, spec.T,
                outcome, len(solutions))
    return EnumerationResult(outcome, solutions, leading)


# ============================================================================
# 表格输入输出 / Tabular I/O
# ============================================================================
def solution_columns(n: int) -> List[str]:
    names = [f"q0_{i + 1}" for i in range(n)] + [f"p0_{i + 1}" for i in range(n)]
    names += [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
    return ["T", "branch"] + names + ["residual", "flagged"]


def solutions_frame(solutions: Sequence[BVPSolution], T: Sequence[float]) -> pd.DataFrame:
    """Absolute endpoint states, branch label and flow residual per row."""
    rows = []
    for sol, t in zip(solutions, T):
        rows.append([t, sol.branch, *sol.state0.vector, *sol.state1.vector,
                     sol.residual, int(sol.flagged)])
    n = solutions[0].state0.n if solutions else 0
    return pd.DataFrame(rows, columns=solution_columns(n))


__all__ = [
    "BVPSpec",
    "BVPSolution",
    "LambertSolution",
    "EnumerationResult",
    "solve_bvp",
    "solve_batch",
    "solve_lambert",
    "enumerate_solutions",
    "solution_columns",
    "solutions_frame",
]
