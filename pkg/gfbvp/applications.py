"""
应用模块 / Applications Module
==============================

基于生成函数的应用：
Applications built on generating functions:

1. 周期轨道搜索（时间扫描、位置扫描、F2 直接求解）
   Periodic-orbit search (time scan, position scan, direct F2 solve)
2. 线性二次最优控制与一般最优控制的哈密顿化
   Linear-quadratic optimal control and reduction of optimal control to a Hamiltonian
3. 双曲平衡点的不稳定流形传播
   Propagation along the unstable manifold of a hyperbolic equilibrium
4. 编队重构代价图
   Formation reconfiguration cost maps

单位 / Units
------------
Hill 问题的归一化单位：时间单位为恒星年/2π，长度单位为 AU·μ^(1/3)。
Normalized Hill units: time unit = sidereal year / 2π, length unit = AU·μ^(1/3).
"""

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp
from matplotlib.figure import Figure
from scipy.interpolate import interp1d
from scipy.optimize import least_squares, minimize_scalar

from .constants import (
    HILL_LENGTH_UNIT_KM,
    HILL_MOMENTUM_UNIT_MS,
    HILL_TIME_UNIT_DAYS,
    PERIODIC_ROOT_ACCEPT,
    PIVOT_CONDITION_LIMIT,
    POSITION_SCAN_GRID,
    TIME_SCAN_SAMPLES,
)
from .dynamics import (
    HamiltonianModel,
    PhaseState,
    flow,
    integrate,
    linear_eigen,
)
from .errors import (
    CausticError,
    DimensionError,
    IntegrationError,
    SingularKindError,
    TrustRadiusWarning,
)
from .hj import GeneratingFunction, gradients_of, propagate_state
from .lineargf import QuadraticHamiltonian, StateTransition, gf_from_stm, pivot_condition, stm
from .partition import BoundaryPartition
from .tpbvp import solve_batch

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
MatrixLike = Union[np.ndarray, Callable[[float], np.ndarray]]


# ============================================================================
# 单位换算 / Unit Conversions
# ============================================================================
def days_to_time(days: ArrayLike) -> ArrayLike:
    """Days to normalized Hill time. / 天数转换为归一化时间。"""
    return np.asarray(days) / HILL_TIME_UNIT_DAYS


def time_to_days(t: ArrayLike) -> ArrayLike:
    return np.asarray(t) * HILL_TIME_UNIT_DAYS


def km_to_length(km: ArrayLike) -> ArrayLike:
    """Kilometres to normalized Hill length (0.01 ≈ 21,660 km)."""
    return np.asarray(km) / HILL_LENGTH_UNIT_KM


def momentum_to_ms(p: ArrayLike) -> ArrayLike:
    """Normalized Hill momentum (velocity) to metres per second."""
    return np.asarray(p) * HILL_MOMENTUM_UNIT_MS


# ============================================================================
# 内部工具 / Internal Helpers
# ============================================================================
def _kind_polynomial(gf: GeneratingFunction, kind: str, t: float):
    """Polynomial of a named kind at ``t`` or None when unavailable there."""
    part = BoundaryPartition.named(kind, gf.n)
    if not gf.covers(t):
        return None
    cond = pivot_condition(gf.linear_stm(t), part)
    if not np.isfinite(cond) or cond > PIVOT_CONDITION_LIMIT:
        return None
    try:
        return gf.as_kind(part).polynomial(t)
    except CausticError:
        return None


def _warn_trust(gf: GeneratingFunction, amplitude: float, what: str) -> None:
    if gf.trust_radius is not None and amplitude > gf.trust_radius:
        warnings.warn(f"{what} of size {amplitude:.3g} exceeds the trust radius "
                      f"{gf.trust_radius:.3g}", TrustRadiusWarning, stacklevel=3)


def _periodicity_residual(gf: GeneratingFunction, rel0: np.ndarray, rel1: np.ndarray,
                          T: float, tol: float = 1e-12) -> float:
    ref = gf.reference
    start = PhaseState.from_vector(ref.state_at(gf.t0).vector + rel0)
    target = ref.state_at(gf.t0 + T).vector + rel1
    end = flow(gf.model, start, gf.t0, gf.t0 + T, tol)
    return float(np.linalg.norm(end.vector - target))


# ============================================================================
# 周期轨道：时间扫描 / Periodic Orbits: Time Scan
# ============================================================================
@dataclass
class PeriodicRoot:
    """Periodic orbit through a fixed position found by the time scan."""

    T: float
    q0: np.ndarray
    p0: np.ndarray
    p: np.ndarray
    momentum_gap: float
    residual: float
    flow_residual: float = float("nan")


@dataclass
class TimeScanResult:
    """Sampled residual curve and refined roots. / 残差曲线与根。"""

    times: np.ndarray
    residual: np.ndarray
    mask: np.ndarray
    roots: List[PeriodicRoot] = field(default_factory=list)

    @property
    def masked_times(self) -> np.ndarray:
        """Samples skipped because F1 is singular there or outside the span."""
        return self.times[self.mask]


def _f1_periodic_gradients(gf: GeneratingFunction, q0: np.ndarray, T: float):
    poly = _kind_polynomial(gf, "F1", gf.t0 + T)
    if poly is None:
        return None
    return poly.gradient(np.concatenate([q0, q0]))


def periodic_time_scan(gf: GeneratingFunction, q0, window: Tuple[float, float],
                       samples: int = TIME_SCAN_SAMPLES, accept: float = PERIODIC_ROOT_ACCEPT,
                       verify: bool = True) -> TimeScanResult:
    """Scan the period T for orbits returning to a fixed position ``q0``.

    时间扫描：在 ``q = q0`` 时，残差 ``‖∂F1/∂q + ∂F1/∂q0‖`` 为 T 的单变量函数，
    其零点给出经过 ``q0`` 的周期轨道。

    Parameters 参数
    -------------
    gf : GeneratingFunction
        Any kind; F1 is presented through Legendre transforms.
        任意类型，F1 经 Legendre 变换得到。
    q0 : array_like, shape (n,)
        Position relative to the reference.
    window : (float, float)
        Range of T (durations from ``gf.t0``; should avoid 0).
    samples : int
        Number of samples.
    accept : float
        Refined residual below which a minimum is accepted as a root.
        接受根的残差阈值。
    verify : bool
        Attach the flow periodicity residual to each root.

    Returns 返回
    ----------
    TimeScanResult
        Residual samples; ``mask`` marks samples where F1 is singular or the
        GF does not reach.

    Notes 说明
    ---------
    The residual is non-negative, so roots are located at strict local minima
    of the samples and refined with a bounded Brent search on its square.
    Both momentum formulas ``p = ∂F1/∂q`` and ``p0 = −∂F1/∂q0`` are reported;
    at a root they agree to within the residual.
    """
    q0 = np.atleast_1d(np.asarray(q0, dtype=float))
    n = gf.n
    if q0.shape != (n,):
        raise DimensionError(f"q0 needs {n} components")
    _warn_trust(gf, float(np.linalg.norm(q0)) * np.sqrt(2.0), "scan position")
    times = np.linspace(window[0], window[1], samples)
    residual = np.full(samples, np.nan)
    for i, T in enumerate(times):
        g = _f1_periodic_gradients(gf, q0, T)
        if g is not None:
            residual[i] = np.linalg.norm(g[:n] + g[n:])
    mask = ~np.isfinite(residual)
    if mask.any():
        logger.info("time scan: %d of %d samples masked (F1 singular or outside span)",
                    int(mask.sum()), samples)

    def objective(T):
        g = _f1_periodic_gradients(gf, q0, T)
        return np.inf if g is None else float(np.sum((g[:n] + g[n:]) ** 2))

    roots: List[PeriodicRoot] = []
    for i in range(1, samples - 1):
        r_prev, r, r_next = residual[i - 1], residual[i], residual[i + 1]
        if mask[i - 1:i + 2].any() or not (r < r_prev and r <= r_next):
            continue
        best = minimize_scalar(objective, bounds=(times[i - 1], times[i + 1]), method="bounded",
                               options={"xatol": 1e-12})
        T = float(best.x)
        g = _f1_periodic_gradients(gf, q0, T)
        if g is None:
            continue
        p, p0 = g[:n], -g[n:]
        res = float(np.linalg.norm(p - p0))
        if res >= accept:
            continue
        if roots and abs(roots[-1].T - T) < 1e-9:
            continue
        root = PeriodicRoot(T, q0.copy(), p0, p, res, res)
        if verify:
            root.flow_residual = _periodicity_residual(
                gf, np.concatenate([q0, p0]), np.concatenate([q0, p]), T)
        roots.append(root)
    logger.info("time scan over [%g, %g]: %d root(s)", window[0], window[1], len(roots))
    return TimeScanResult(times, residual, mask, roots)


# ============================================================================
# 周期轨道：位置扫描 / Periodic Orbits: Position Scan
# ============================================================================
@dataclass
class PositionScanResult:
    """Zero contours of the periodicity residual over a position grid.

    位置扫描结果：各分量的零等值线、交集曲线及精化点（附动量）。
    """

    T: float
    grid_x: np.ndarray
    grid_y: np.ndarray
    residual: np.ndarray
    contours: List[List[np.ndarray]]
    curves: List[np.ndarray]
    points: np.ndarray
    momenta: np.ndarray

    def closed_curves(self, tol: Optional[float] = None) -> List[np.ndarray]:
        """Closed curves assembled from the intersection pieces.

        由交集曲线段首尾拼接出的闭合曲线。

        Pieces whose end points lie within ``tol`` (default three grid
        spacings) are joined end to end; crossings of the component-0 zero set
        split one orbit into several pieces.
        """
        h = tol if tol is not None else 3.0 * abs(self.grid_x[1] - self.grid_x[0])
        pieces = [np.asarray(c) for c in self.curves if len(c) > 1]
        loops = []
        while pieces:
            found = _close_chain(pieces[0], pieces[1:], h)
            if found is None:
                pieces = pieces[1:]
                continue
            loop, pieces = found
            loops.append(loop)
        return loops


def _arc_length(curve: np.ndarray) -> float:
    return float(np.linalg.norm(np.diff(curve, axis=0), axis=1).sum())


def _close_chain(chain: np.ndarray, pieces: List[np.ndarray],
                 h: float) -> Optional[Tuple[np.ndarray, List[np.ndarray]]]:
    """Depth-first search for pieces that continue ``chain`` back to its start."""
    if np.linalg.norm(chain[0] - chain[-1]) <= h and _arc_length(chain) > 4.0 * h:
        return chain, pieces
    options = []
    for i, piece in enumerate(pieces):
        for oriented in (piece, piece[::-1]):
            gap = np.linalg.norm(oriented[0] - chain[-1])
            if gap <= h:
                options.append((gap, i, oriented))
    for _, i, oriented in sorted(options, key=lambda o: o[0]):
        found = _close_chain(np.vstack([chain, oriented]), pieces[:i] + pieces[i + 1:], h)
        if found is not None:
            return found
    return None


def _position_residual(poly, q0: np.ndarray) -> np.ndarray:
    n = q0.shape[-1]
    g = poly.gradient(np.concatenate([q0, q0], axis=-1))
    return g[..., :n] + g[..., n:]


def _position_jacobian(poly, q0: np.ndarray) -> np.ndarray:
    """``∂R/∂q`` of the position residual, shape ``(..., n, n)``."""
    n = q0.shape[-1]
    H = poly.hessian(np.concatenate([q0, q0], axis=-1))
    return H[..., :n, :n] + H[..., :n, n:] + H[..., n:, :n] + H[..., n:, n:]


def periodic_position_refine(gf: GeneratingFunction, T: float, guesses) -> Tuple[np.ndarray,
                                                                                 np.ndarray]:
    """Refine positions onto ``∂F1/∂q + ∂F1/∂q0 = 0`` at fixed T (any n).

    Returns the refined positions and the momenta ``p = ∂F1/∂q`` there.
    """
    poly = _kind_polynomial(gf, "F1", gf.t0 + T)
    if poly is None:
        raise SingularKindError(f"F1 is singular at T={T:.10g}", kind="F1", time=gf.t0 + T)
    n = gf.n
    points, momenta = [], []
    for guess in np.atleast_2d(guesses):
        sol = least_squares(lambda q: _position_residual(poly, q), guess, xtol=1e-15,
                            ftol=1e-15, gtol=1e-15)
        points.append(sol.x)
        momenta.append(poly.gradient(np.concatenate([sol.x, sol.x]))[:n])
    return np.array(points).reshape(-1, n), np.array(momenta).reshape(-1, n)


def _runs(flags: np.ndarray) -> List[Tuple[int, int]]:
    runs, start = [], None
    for i, flag in enumerate(flags):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(flags)))
    return runs


def periodic_position_scan(gf: GeneratingFunction, T: float, half_width: float = 0.03,
                           grid: int = POSITION_SCAN_GRID, center=(0.0, 0.0),
                           refine: bool = True, max_points: int = 64) -> PositionScanResult:
    """Zero contours of both periodicity residual components over the position plane.

    位置扫描：固定 T，在位置平面网格上计算残差两个分量的零等值线，并叠加求交。

    Parameters 参数
    -------------
    gf : GeneratingFunction
        Generating function of a two-degree-of-freedom problem.
    T : float
        Period.
    half_width : float
        Half side of the square grid (relative positions).
        网格半宽。
    grid : int
        Grid points per side.
    center : (float, float)
        Grid centre relative to the reference.
    refine : bool
        Refine sampled curve vertices with least squares.
    max_points : int
        Refined vertices per curve.

    Returns 返回
    ----------
    PositionScanResult

    Notes 说明
    ---------
    Contour lines come from ``matplotlib`` (marching squares, nothing is
    rendered). Periodic orbits come in one-parameter families, so the two
    components vanish together along curves; a contour of component 0 is kept
    where its distance to the zero set of component 1, estimated from the
    residual and its gradient, is within two grid steps.
    """
    if gf.n != 2:
        raise DimensionError("position contours need n = 2; use periodic_position_refine")
    poly = _kind_polynomial(gf, "F1", gf.t0 + T)
    if poly is None:
        raise SingularKindError(f"F1 is singular at T={T:.10g}", kind="F1", time=gf.t0 + T)
    _warn_trust(gf, np.sqrt(2.0) * (np.hypot(*center) + np.sqrt(2.0) * half_width),
                "scan grid")
    xs = np.linspace(center[0] - half_width, center[0] + half_width, grid)
    ys = np.linspace(center[1] - half_width, center[1] + half_width, grid)
    X, Y = np.meshgrid(xs, ys)
    R = _position_residual(poly, np.stack([X, Y], axis=-1))

    ax = Figure().subplots()
    contours = []
    for c in range(2):
        cs = ax.contour(X, Y, R[..., c], levels=[0.0])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DeprecationWarning)
            segments = cs.allsegs[0]
        contours.append([np.asarray(seg) for seg in segments if len(seg) > 1])

    h = max(xs[1] - xs[0], ys[1] - ys[0])
    curves = []
    for seg in contours[0]:
        # distance estimate to the component-1 zero set
        other = np.abs(_position_residual(poly, seg)[:, 1])
        slope = np.linalg.norm(_position_jacobian(poly, seg)[:, 1, :], axis=-1)
        near = other <= 2.0 * h * slope
        for a, b in _runs(near):
            if b - a >= 2:
                curves.append(seg[a:b])

    points = np.empty((0, 2))
    momenta = np.empty((0, 2))
    if refine and curves:
        picks = []
        for curve in curves:
            idx = np.unique(np.linspace(0, len(curve) - 1, min(max_points, len(curve))).astype(int))
            picks.append(curve[idx])
        points, momenta = periodic_position_refine(gf, T, np.vstack(picks))
    logger.info("position scan at T=%g: %d curve(s), %d refined point(s)", T, len(curves),
                len(points))
    return PositionScanResult(T, xs, ys, R, contours, curves, points, momenta)


def periodic_family_scan(gf: GeneratingFunction, periods: Sequence[float], jobs: int = 1,
                         **kwargs) -> List[PositionScanResult]:
    """Position scans for several periods (threads when ``jobs > 1``)."""
    if jobs <= 1:
        return [periodic_position_scan(gf, T, **kwargs) for T in periods]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(lambda T: periodic_position_scan(gf, T, **kwargs), periods))


def small_amplitude_period(model: HamiltonianModel, state: PhaseState, t: float = 0.0) -> float:
    """``2π/ν`` of the centre mode of the linearized flow (the slowest if several).

    线性化系统中心模态的周期。
    """
    eigvals, _ = linear_eigen(model, state, t)
    centre = [ev.imag for ev in eigvals
              if abs(ev.real) <= 1e-9 * max(1.0, abs(ev)) and ev.imag > 0]
    if not centre:
        raise ValueError("linearized flow has no centre mode")
    return float(2.0 * np.pi / min(centre))


# ============================================================================
# 周期轨道：F2 直接求解 / Periodic Orbits: Direct F2 Solve
# ============================================================================
@dataclass
class PeriodicOrbit:
    """Periodic orbit found from the F2 periodicity equations."""

    T: float
    q0: np.ndarray
    p0: np.ndarray
    residual: float
    converged: bool
    flow_residual: float = float("nan")
    guess: Optional[np.ndarray] = None


def periodic_f2_solve(gf: GeneratingFunction, guesses, T: Optional[float] = None,
                      fixed_q=None, T_guess: Optional[float] = None, verify: bool = True,
                      accept: float = 1e-9, dedup: float = 1e-7) -> List[PeriodicOrbit]:
    """Solve ``p0 = ∂F2/∂q`` and ``q = ∂F2/∂p0`` with ``q = q0``, ``p = p0`` imposed.

    F2 周期方程组的直接求解（2n 个方程、2n+1 个变量，需固定 T 或 n 个坐标）。

    Parameters 参数
    -------------
    gf : GeneratingFunction
    guesses : array_like
        With ``T`` fixed: rows ``(q, p0)`` of length 2n. With ``fixed_q``:
        rows ``p0`` of length n (the period starts at ``T_guess``).
        固定 T 时每行为 ``(q, p0)``；固定位置时每行为 ``p0``。
    T : float, optional
        Fixed period.
    fixed_q : array_like, optional
        Fixed position; the period becomes an unknown.
    T_guess : float, optional
        Initial period with ``fixed_q``.
    verify : bool
        Attach the flow periodicity residual.
    accept : float
        Residual norm below which a guess counts as converged.
    dedup : float
        Distance below which converged solutions are merged.

    Returns 返回
    ----------
    list of PeriodicOrbit
        One entry per distinct converged solution, then one per failed guess
        (``converged=False``).
        去重后的收敛解，以及每个未收敛猜测的记录。
    """
    n = gf.n
    rows = np.atleast_2d(np.asarray(guesses, dtype=float))
    fixed_T = T is not None
    if fixed_T == (fixed_q is not None):
        raise ValueError("fix exactly one of T or fixed_q")
    if fixed_T:
        if rows.shape[1] != 2 * n:
            raise DimensionError(f"guesses need {2 * n} columns (q, p0)")
        poly = _kind_polynomial(gf, "F2", gf.t0 + T)
        if poly is None:
            raise SingularKindError(f"F2 is singular at T={T:.10g}", kind="F2", time=gf.t0 + T)
        signs = BoundaryPartition.F2(n).signs
        swap = np.concatenate([np.arange(n, 2 * n), np.arange(n)])

        def residual(z):
            # dependent (p, q0) must equal (p0, q)
            return gradients_of(poly, BoundaryPartition.F2(n), z) - z[swap]

        def jacobian(z):
            return signs[:, None] * poly.hessian(z) - np.eye(2 * n)[swap]
    else:
        if T_guess is None:
            raise ValueError("T_guess is required with fixed_q")
        q_fixed = np.atleast_1d(np.asarray(fixed_q, dtype=float))
        if rows.shape[1] != n:
            raise DimensionError(f"guesses need {n} columns (p0)")
        rows = np.column_stack([rows, np.full(len(rows), float(T_guess))])

        def residual(z):
            poly_t = _kind_polynomial(gf, "F2", gf.t0 + z[-1])
            if poly_t is None:
                return np.full(2 * n, 1e6)
            x = np.concatenate([q_fixed, z[:n]])
            return gradients_of(poly_t, BoundaryPartition.F2(n), x) - np.concatenate([z[:n], q_fixed])

        jacobian = "2-point"

    found: List[PeriodicOrbit] = []
    failed: List[PeriodicOrbit] = []
    for guess in rows:
        sol = least_squares(residual, guess, jac=jacobian, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        res = float(np.linalg.norm(residual(sol.x)))
        if fixed_T:
            period, q, p0 = float(T), sol.x[:n], sol.x[n:]
        else:
            period, q, p0 = float(sol.x[-1]), q_fixed, sol.x[:n]
        orbit = PeriodicOrbit(period, q.copy(), p0.copy(), res, res < accept, guess=guess)
        if not orbit.converged:
            logger.warning("F2 periodic solve did not converge from %s (residual %.3e)",
                           np.array2string(guess, precision=4), res)
            failed.append(orbit)
            continue
        state = np.concatenate([q, p0, [period]])
        if any(np.linalg.norm(state - np.concatenate([o.q0, o.p0, [o.T]])) < dedup for o in found):
            continue
        if verify:
            rel = np.concatenate([q, p0])
            orbit.flow_residual = _periodicity_residual(gf, rel, rel, period)
        found.append(orbit)
    return found + failed


# ============================================================================
# 线性二次最优控制 / Linear-Quadratic Optimal Control
# ============================================================================
def _at(matrix: MatrixLike, t: float) -> np.ndarray:
    return np.atleast_2d(np.asarray(matrix(t) if callable(matrix) else matrix, dtype=float))


@dataclass
class LQProblem:
    """Linear dynamics with quadratic running and terminal costs.

    线性二次问题：``ẋ = A x + B u``，
    ``J = ½(Mx_f − m_f)ᵀQf(Mx_f − m_f) + ∫ ½xᵀQx + xᵀNu + ½uᵀRu dt``。

    Parameters 参数
    -------------
    A, B : ndarray or callable
        Dynamics matrices (constant or functions of t).
    Q, R : ndarray
        Running-cost weights (Q positive semi-definite, R positive definite).
    t0, tf : float
    x0 : array_like
        Initial state.
    N : ndarray, optional
        State-control cross weight (zero by default).
    Qf, M, m_f : optional
        Terminal cost (Qf positive definite; M defaults to I, m_f to 0).
    fixed_final : sequence of int
        Final-state components fixed to ``x_f``; the others have their final
        costate fixed to ``p_f`` or given by the terminal cost.
        终端固定的状态分量；其余分量的终端协态由 ``p_f`` 或终端代价给出。
    x_f, p_f : array_like, optional
    """

    A: MatrixLike
    B: MatrixLike
    Q: np.ndarray
    R: np.ndarray
    t0: float
    tf: float
    x0: np.ndarray
    N: Optional[np.ndarray] = None
    Qf: Optional[np.ndarray] = None
    M: Optional[np.ndarray] = None
    m_f: Optional[np.ndarray] = None
    fixed_final: Tuple[int, ...] = ()
    x_f: Optional[np.ndarray] = None
    p_f: Optional[np.ndarray] = None

    def __post_init__(self):
        self.x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        n = self.x0.size
        m = _at(self.B, self.t0).shape[1]
        self.Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        self.R = np.atleast_2d(np.asarray(self.R, dtype=float))
        self.N = np.zeros((n, m)) if self.N is None else np.atleast_2d(np.asarray(self.N, float))
        self.fixed_final = tuple(sorted(int(i) for i in self.fixed_final))
        self.x_f = np.zeros(n) if self.x_f is None else np.atleast_1d(np.asarray(self.x_f, float))
        self.p_f = np.zeros(n) if self.p_f is None else np.atleast_1d(np.asarray(self.p_f, float))
        if self.tf <= self.t0:
            raise ValueError("tf must be greater than t0")
        if _at(self.A, self.t0).shape != (n, n) or self.Q.shape != (n, n):
            raise DimensionError("A and Q must be n x n")
        if self.R.shape != (m, m) or self.N.shape != (n, m):
            raise DimensionError("R must be m x m and N n x m")
        if not np.allclose(self.Q, self.Q.T) or np.linalg.eigvalsh(self.Q).min() < -1e-12:
            raise ValueError("Q must be symmetric positive semi-definite")
        if not np.allclose(self.R, self.R.T) or np.linalg.eigvalsh(self.R).min() <= 0:
            raise ValueError("R must be symmetric positive definite")
        if any(not 0 <= i < n for i in self.fixed_final):
            raise DimensionError("fixed_final indices outside the state")
        if self.Qf is not None:
            self.Qf = np.atleast_2d(np.asarray(self.Qf, dtype=float))
            k = self.Qf.shape[0]
            self.M = np.eye(k, n) if self.M is None else np.atleast_2d(np.asarray(self.M, float))
            self.m_f = np.zeros(k) if self.m_f is None else np.atleast_1d(np.asarray(self.m_f, float))
            if not np.allclose(self.Qf, self.Qf.T) or np.linalg.eigvalsh(self.Qf).min() <= 0:
                raise ValueError("Qf must be symmetric positive definite")
            if self.M.shape != (k, n):
                raise DimensionError("M must be k x n")

    @property
    def n(self) -> int:
        return self.x0.size

    def control(self, x: np.ndarray, p: np.ndarray, t: float) -> np.ndarray:
        """``u = −R⁻¹(Bᵀp + Nᵀx)``."""
        B = _at(self.B, t)
        return -np.linalg.solve(self.R, B.T @ p + self.N.T @ x)

    def running_cost(self, x: np.ndarray, u: np.ndarray) -> float:
        return float(0.5 * x @ self.Q @ x + x @ self.N @ u + 0.5 * u @ self.R @ u)

    def terminal_cost(self, x: np.ndarray) -> float:
        if self.Qf is None:
            return 0.0
        e = self.M @ x - self.m_f
        return float(0.5 * e @ self.Qf @ e)


def lq_hamiltonian(prob: LQProblem) -> QuadraticHamiltonian:
    """Quadratic Hamiltonian of the optimal state/costate system.

    最优状态/协态系统的二次哈密顿量：
    ``Hxx = Q − NR⁻¹Nᵀ``，``Hxp = (A − BR⁻¹Nᵀ)ᵀ``，``Hpp = −BR⁻¹Bᵀ``。
    """

    def matrix(t: float) -> np.ndarray:
        A, B = _at(prob.A, t), _at(prob.B, t)
        R_inv = np.linalg.inv(prob.R)
        Hxx = prob.Q - prob.N @ R_inv @ prob.N.T
        Hxp = (A - B @ R_inv @ prob.N.T).T
        Hpp = -B @ R_inv @ B.T
        return np.block([[Hxx, Hxp], [Hxp.T, Hpp]])

    if callable(prob.A) or callable(prob.B):
        return QuadraticHamiltonian(matrix)
    return QuadraticHamiltonian(matrix(prob.t0))


@dataclass
class LQSolution:
    times: np.ndarray
    x: np.ndarray
    p: np.ndarray
    u: np.ndarray
    cost: float
    p0: np.ndarray
    partition: BoundaryPartition

    def control(self, t: float) -> np.ndarray:
        """Cubic interpolant of the sampled control."""
        return interp1d(self.times, self.u, axis=0, kind="cubic")(t)


def lq_solve(prob: LQProblem, samples: int = 201, tol: float = 1e-12) -> LQSolution:
    """Solve an LQ problem through its quadratic generating function.

    通过二次生成函数求解线性二次最优控制问题：按边界模式选择划分
    （终端固定状态为位置自变量、其余为协态自变量，初端为状态），
    求初始协态后积分状态、协态与代价。

    Parameters 参数
    -------------
    prob : LQProblem
    samples : int
        Output samples on ``[t0, tf]``.
    tol : float
        Integrator tolerance.

    Returns 返回
    ----------
    LQSolution

    Raises 异常
    ---------
    SingularKindError
        The kind selected by the boundary mode is singular at ``tf``
        (a conjugate point).
    """
    n = prob.n
    H = lq_hamiltonian(prob)
    part = BoundaryPartition(n, prob.fixed_final, tuple(range(n)))
    phi = stm(H, prob.t0, prob.tf, tol)
    S = gf_from_stm(StateTransition.single(phi.final, prob.tf), part).final
    signs = part.signs
    I, I_bar = list(part.I_p), list(part.I_bar)

    x = np.empty(2 * n)
    x[I] = prob.x_f[I]
    x[n:] = prob.x0
    if prob.Qf is not None and I_bar:
        # p_Ī = [W x_f − w]_Ī with x_Ī = −∂F/∂p_Ī linear in p_Ī
        W = prob.M.T @ prob.Qf @ prob.M
        w = prob.M.T @ prob.Qf @ prob.m_f
        G = signs[:, None] * S
        rows = G[I_bar]
        base = x.copy()
        base[I_bar] = 0.0
        lhs = np.eye(len(I_bar)) - W[np.ix_(I_bar, I_bar)] @ rows[:, I_bar]
        rhs = (W[np.ix_(I_bar, I)] @ prob.x_f[I] + W[np.ix_(I_bar, I_bar)] @ (rows @ base)
               - w[I_bar])
        x[I_bar] = np.linalg.solve(lhs, rhs)
    else:
        x[I_bar] = prob.p_f[I_bar]
    y = signs * (S @ x)
    p0 = y[n:]

    def rhs(t, z):
        xs, ps = z[:n], z[n:2 * n]
        u = prob.control(xs, ps, t)
        dz = H.flow_matrix(t) @ z[:2 * n]
        return np.concatenate([dz, [prob.running_cost(xs, u)]])

    times = np.linspace(prob.t0, prob.tf, samples)
    sol = integrate(rhs, (prob.t0, prob.tf), np.concatenate([prob.x0, p0, [0.0]]), tol,
                    t_eval=times)
    xs, ps = sol.y[:n].T, sol.y[n:2 * n].T
    us = np.array([prob.control(xi, pi, t) for xi, pi, t in zip(xs, ps, times)])
    cost = float(sol.y[-1, -1]) + prob.terminal_cost(xs[-1])
    logger.info("LQ solve on [%g, %g]: cost %.6g", prob.t0, prob.tf, cost)
    return LQSolution(times, xs, ps, us, cost, p0, part)


def lq_cost(prob: LQProblem, control: Callable[[float], np.ndarray], tol: float = 1e-12) -> float:
    """Cost of an arbitrary open-loop control (forward simulation).

    任意开环控制的代价（前向积分）。
    """
    n = prob.n

    def rhs(t, z):
        u = np.atleast_1d(control(t))
        xs = z[:n]
        dx = _at(prob.A, t) @ xs + _at(prob.B, t) @ u
        return np.concatenate([dx, [prob.running_cost(xs, u)]])

    sol = integrate(rhs, (prob.t0, prob.tf), np.concatenate([prob.x0, [0.0]]), tol)
    return float(sol.y[-1, -1]) + prob.terminal_cost(sol.y[:n, -1])


def optimal_control_reduce(f: Sequence[sp.Expr], L: sp.Expr, u_bar: Sequence[sp.Expr],
                           x_syms: Sequence[sp.Symbol], p_syms: Sequence[sp.Symbol],
                           u_syms: Sequence[sp.Symbol], t_sym: Optional[sp.Symbol] = None,
                           name: str = "optimal_control",
                           parameters: Optional[dict] = None) -> HamiltonianModel:
    """Hamiltonian ``H̄(x, p, t) = pᵀf(x, ū) + L(x, ū)`` of an optimal control problem.

    最优控制问题的哈密顿化：代入调用者给出的最优控制 ``ū(x, p, t)``。
    """
    if len(f) != len(x_syms) or len(p_syms) != len(x_syms):
        raise DimensionError("f, x_syms and p_syms must have the same length")
    if len(u_bar) != len(u_syms):
        raise DimensionError("u_bar and u_syms must have the same length")
    t_sym = sp.Symbol("t", real=True) if t_sym is None else t_sym
    H = sum(pi * fi for pi, fi in zip(p_syms, f)) + L
    H_bar = sp.expand(sp.sympify(H).subs(dict(zip(u_syms, u_bar)), simultaneous=True))
    return HamiltonianModel(name, H_bar, list(x_syms), list(p_syms), t_sym, parameters)


# ============================================================================
# 不稳定流形 / Unstable Manifolds
# ============================================================================
def hyperbolic_eigen(model: HamiltonianModel, state: PhaseState,
                     t: float = 0.0) -> Tuple[float, np.ndarray]:
    """Unstable exponent λ > 0 and unit eigenvector of the linearized flow.

    线性化系统的不稳定特征值与单位特征向量（首个非零分量取正）。
    """
    eigvals, eigvecs = linear_eigen(model, state, t)
    real = [(ev.real, i) for i, ev in enumerate(eigvals)
            if abs(ev.imag) <= 1e-9 * max(1.0, abs(ev)) and ev.real > 1e-12]
    if not real:
        raise ValueError("equilibrium is not hyperbolic (no real unstable eigenvalue)")
    lam, idx = max(real)
    v = np.real(eigvecs[:, idx])
    v /= np.linalg.norm(v)
    first = v[np.nonzero(np.abs(v) > 1e-12)[0][0]]
    return float(lam), v * np.sign(first)


@dataclass
class ManifoldTrajectory:
    times: np.ndarray
    states: np.ndarray
    relative: np.ndarray
    energy: np.ndarray
    truncated: bool = False


def manifold_propagate(gf: GeneratingFunction, lam: float, v: np.ndarray, alpha: float,
                       times: Sequence[float], branch: int = 1) -> ManifoldTrajectory:
    """Follow the unstable manifold from the seed ``branch·α·v̂`` with the generating function.

    沿不稳定流形传播：初始相对状态取 ``branch·α·v̂``（完整 2n 维特征向量），
    每个时刻用生成函数求解初值问题；Newton 失败或超出信赖半径时截断。

    Parameters 参数
    -------------
    gf : GeneratingFunction
        Built about an equilibrium.
    lam : float
        Unstable exponent (logged with the run).
    v : ndarray, shape (2n,)
        Unit eigenvector.
    alpha : float
        Seed offset.
    times : sequence of float
        Durations from ``gf.t0``.
    branch : {+1, -1}

    Returns 返回
    ----------
    ManifoldTrajectory
    """
    if not gf.reference.is_equilibrium:
        raise ValueError("manifold propagation needs an equilibrium reference")
    seed = branch * alpha * np.asarray(v, dtype=float)
    z_ref = gf.reference.states[0]
    out_t, out_rel = [], []
    truncated = False
    for T in np.asarray(times, dtype=float):
        t = gf.t0 + T
        if not gf.covers(t):
            truncated = True
            break
        try:
            rel = propagate_state(gf, seed, t).vector if T > 0 else seed.copy()
        except (IntegrationError, CausticError) as exc:
            logger.info("manifold propagation stopped at T=%g: %s", T, exc)
            truncated = True
            break
        if gf.trust_radius is not None and np.linalg.norm(rel) > gf.trust_radius:
            truncated = True
            break
        out_t.append(T)
        out_rel.append(rel)
    rel = np.array(out_rel).reshape(-1, 2 * gf.n)
    states = z_ref + rel
    energy = np.array([gf.model.energy(z, gf.t0 + T) for z, T in zip(states, out_t)])
    logger.debug("manifold (λ=%.6g, α=%.3g): %d samples, truncated=%s", lam, alpha,
                 len(out_t), truncated)
    return ManifoldTrajectory(np.array(out_t), states, rel, energy, truncated)


def growth_exponent(trajectory: ManifoldTrajectory) -> float:
    """Least-squares slope of ``log‖relative state‖`` against time."""
    norms = np.linalg.norm(trajectory.relative, axis=1)
    keep = norms > 0
    if keep.sum() < 2:
        raise ValueError("need at least two nonzero samples")
    return float(np.polyfit(trajectory.times[keep], np.log(norms[keep]), 1)[0])


# ============================================================================
# 编队重构 / Formation Reconfiguration
# ============================================================================
@dataclass
class FormationCostMap:
    """Impulse cost ``√(|Δp0|² + |Δp|²)`` per (period, angle).

    编队重构代价图；被屏蔽的周期（F1 奇异）为 NaN。
    """

    angles: np.ndarray
    periods: np.ndarray
    cost: np.ndarray
    mask: np.ndarray
    radius: float = 0.0

    def radial_points(self) -> np.ndarray:
        """Polar plot data ``cost·(cos θ, sin θ)``, shape (periods, angles, 2)."""
        unit = np.stack([np.cos(self.angles), np.sin(self.angles)], axis=-1)
        return self.cost[..., None] * unit[None, :, :]

    def best_angles(self) -> np.ndarray:
        """Angle of minimum cost per period (NaN for masked periods)."""
        out = np.full(len(self.periods), np.nan)
        for i, row in enumerate(self.cost):
            if np.isfinite(row).any():
                out[i] = self.angles[np.nanargmin(row)]
        return out


def formation_cost_map(gf: GeneratingFunction, radius: float, angles: Sequence[float],
                       periods: Sequence[float], rest: str = "momentum",
                       jobs: int = 1) -> FormationCostMap:
    """Reconfiguration cost from the reference point to a circle of given radius.

    编队重构代价：从参考点（相对位置 0）出发，经时间 T 到达半径为 ρ、方向为 θ
    的位置，两端均需从/到静止状态，代价为两次冲量范数的平方和开方。

    Parameters 参数
    -------------
    gf : GeneratingFunction
    radius : float
        Target circle radius ρ (normalized length).
    angles : sequence of float
        Directions θ in radians.
    periods : sequence of float
        Transfer durations.
    rest : {"momentum", "velocity"}
        Rest condition at both ends: zero relative momentum, or zero
        rotating-frame velocity ``p = (−q_y, q_x)``.
        静止条件：相对动量为零，或旋转系速度为零。
    jobs : int
        Worker threads over periods.

    Returns 返回
    ----------
    FormationCostMap
    """
    if gf.n != 2:
        raise DimensionError("formation maps are defined for planar problems (n = 2)")
    if rest not in ("momentum", "velocity"):
        raise ValueError("rest must be 'momentum' or 'velocity'")
    _warn_trust(gf, radius, "formation radius")
    angles = np.asarray(angles, dtype=float)
    periods = np.asarray(periods, dtype=float)
    q = radius * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    rows = np.hstack([q, np.zeros_like(q)])
    if rest == "velocity":
        rest_p1 = np.stack([-q[:, 1], q[:, 0]], axis=-1)
    else:
        rest_p1 = np.zeros_like(q)
    part = BoundaryPartition.F1(2)

    def row_cost(T: float) -> np.ndarray:
        if _kind_polynomial(gf, "F1", gf.t0 + T) is None:
            return np.full(len(angles), np.nan)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TrustRadiusWarning)
            sols = solve_batch(gf, part, rows, T)
        dp0 = np.array([s.relative0.p for s in sols])
        dp1 = np.array([s.relative1.p for s in sols]) - rest_p1
        return np.sqrt(np.sum(dp0 ** 2, axis=1) + np.sum(dp1 ** 2, axis=1))

    if jobs <= 1:
        cost = np.array([row_cost(T) for T in periods])
    else:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            cost = np.array(list(executor.map(row_cost, periods)))
    cost = cost.reshape(len(periods), len(angles))
    mask = ~np.isfinite(cost).all(axis=1)
    return FormationCostMap(angles, periods, cost, mask, radius)


def characteristic_time(model: HamiltonianModel, state: PhaseState) -> float:
    """``1/λ`` of the unstable exponent at an equilibrium."""
    lam, _ = hyperbolic_eigen(model, state)
    return 1.0 / lam


__all__ = [
    "days_to_time",
    "time_to_days",
    "km_to_length",
    "momentum_to_ms",
    "PeriodicRoot",
    "TimeScanResult",
    "periodic_time_scan",
    "PositionScanResult",
    "periodic_position_scan",
    "periodic_position_refine",
    "periodic_family_scan",
    "small_amplitude_period",
    "PeriodicOrbit",
    "periodic_f2_solve",
    "LQProblem",
    "LQSolution",
    "lq_hamiltonian",
    "lq_solve",
    "lq_cost",
    "optimal_control_reduce",
    "hyperbolic_eigen",
    "ManifoldTrajectory",
    "manifold_propagate",
    "growth_exponent",
    "FormationCostMap",
    "formation_cost_map",
    "characteristic_time",
]
