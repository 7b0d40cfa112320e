"""
Hamilton-Jacobi 级数求解模块 / Hamilton-Jacobi Series Solver Module
=================================================================

求解任意边界划分下生成函数的 Hamilton-Jacobi 方程：生成函数展开为截断多元
幂级数，系数满足常微分方程组，随时间积分后以三次 Hermite 插值给出任意时刻的
多项式。不同类型之间用 Legendre 变换（级数反演）相互转换。
Solves the Hamilton-Jacobi equation of a generating function of any boundary
partition. The generating function is a truncated multivariate power series
whose coefficients obey ODEs; after integration the polynomial at any time is
a cubic Hermite interpolant of the stored nodes. Kinds are converted into one
another with Legendre transforms (series inversion).

主要组件 / Main components
--------------------------
- GeneratingFunction: 一个或多个图（时间段），每段使用一种划分积分
  One or more charts (time segments), each integrated in one partition
- solve_gf: 积分 HJ 系数方程，可在接近奇异时自动换图
  Integrates the HJ coefficient ODEs, optionally switching kinds near singularities
- legendre_transform / legendre_polynomial: 类型转换 / kind conversion
- eval_gradients / propagate_state: 由生成函数求边界量与初值问题
  Boundary values and initial value problems from a generating function
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import root

from . import io
from .constants import (
    BLOWUP_NORM,
    CHART_SWITCH_NORM,
    DEFAULT_MAX_STEP,
    DEFAULT_TOL,
    DETERMINANT_RTOL,
    SINGULAR_GRID_DENSITY,
    TRUST_RADIUS_RTOL,
)
from .dynamics import (
    HamiltonianModel,
    PhaseState,
    ReferenceTrajectory,
    integrate,
    taylor_hamiltonian,
)
from .errors import (
    ArtifactError,
    CausticError,
    DimensionError,
    IntegrationError,
    SingularKindError,
    TrustRadiusWarning,
    describe_bracket,
)
from .lineargf import StateTransition, _gf_matrix, _stm_matrix, detect_singularity
from .partition import BoundaryPartition, as_partition
from .poly import (
    InversionResult,
    PolynomialSystem,
    TruncatedPolynomial,
    compose,
    invert_series,
    monomial_basis,
)

logger = logging.getLogger(__name__)

ARTIFACT_FORMAT = "gfbvp-generating-function/1"


# ============================================================================
# 图与生成函数 / Charts and Generating Functions
# ============================================================================
@dataclass
class Chart:
    """Time segment of a generating function integrated in one partition.

    生成函数的一个时间段（单一划分）：节点系数及其时间导数。
    """

    partition: BoundaryPartition
    order: int
    times: np.ndarray
    coeffs: np.ndarray
    derivs: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        self.derivs = np.atleast_2d(np.asarray(self.derivs, dtype=float))
        self._spline = None

    @property
    def nvars(self) -> int:
        return 2 * self.partition.n

    @property
    def span(self) -> Tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def covers(self, t: float, slack: float = 1e-12) -> bool:
        return self.times[0] - slack <= t <= self.times[-1] + slack

    def _coefficients(self, t: float, nu: int = 0) -> np.ndarray:
        if self.times.size == 1:
            return self.coeffs[0] if nu == 0 else self.derivs[0]
        if self._spline is None:
            self._spline = CubicHermiteSpline(self.times, self.coeffs, self.derivs, axis=0)
        t = float(np.clip(t, self.times[0], self.times[-1]))
        return self._spline(t, nu)

    def polynomial(self, t: float) -> TruncatedPolynomial:
        return TruncatedPolynomial(self.nvars, self.order, self._coefficients(t))

    def time_derivative(self, t: float) -> TruncatedPolynomial:
        return TruncatedPolynomial(self.nvars, self.order, self._coefficients(t, 1))


class GeneratingFunction:
    """Truncated-series generating function along a reference trajectory.

    截断级数生成函数。``polynomial(t)`` 给出本类型（``partition``）的多项式；
    若覆盖 ``t`` 的图使用其他类型，则经 Legendre 变换得到。

    Parameters 参数
    -------------
    partition : BoundaryPartition
        Kind presented by :meth:`polynomial`.
        ``polynomial`` 返回的类型。
    order : int
        Truncation order N.
    t0 : float
        Epoch of the identity transformation.
        恒等变换的时刻。
    reference : ReferenceTrajectory
    model : HamiltonianModel
    charts : list of Chart
        Consecutive time segments.
    trust_radius : float or None
        Amplitude beyond which the series is not trusted (None: unbounded).
        信赖半径（None 表示不限）。
    """

    def __init__(self, partition: BoundaryPartition, order: int, t0: float,
                 reference: ReferenceTrajectory, model: HamiltonianModel,
                 charts: List[Chart], trust_radius: Optional[float] = None):
        if not charts:
            raise ValueError("a generating function needs at least one chart")
        self.partition = partition
        self.order = int(order)
        self.t0 = float(t0)
        self.reference = reference
        self.model = model
        self.charts = charts
        self.trust_radius = trust_radius

    @property
    def n(self) -> int:
        return self.partition.n

    @property
    def nvars(self) -> int:
        return 2 * self.partition.n

    @property
    def span(self) -> Tuple[float, float]:
        return self.charts[0].span[0], self.charts[-1].span[1]

    def covers(self, t: float) -> bool:
        return any(c.covers(t) for c in self.charts)

    def chart_at(self, t: float) -> Chart:
        for chart in self.charts:
            if chart.covers(t):
                return chart
        raise ValueError(f"t={t} outside generating-function span {self.span}")

    def chart_polynomial(self, t: float) -> Tuple[BoundaryPartition, TruncatedPolynomial]:
        """Partition and polynomial of the chart covering ``t``."""
        chart = self.chart_at(t)
        return chart.partition, chart.polynomial(t)

    def polynomial(self, t: float) -> TruncatedPolynomial:
        """Polynomial of this generating function's kind at ``t``.

        Raises :class:`CausticError` when the kind is singular at ``t``.
        """
        part, poly = self.chart_polynomial(t)
        if part == self.partition:
            return poly
        return legendre_polynomial(poly, part, self.partition, t=t)

    def quadratic_matrix(self, t: float) -> np.ndarray:
        return self.polynomial(t).quadratic_matrix()

    def linear_stm(self, t: float) -> np.ndarray:
        """STM of the linearized flow recovered from the quadratic part."""
        chart = self.chart_at(t)
        return _stm_matrix(chart.polynomial(t).quadratic_matrix(), chart.partition)

    def as_kind(self, partition) -> "GeneratingFunction":
        """View presenting another kind through Legendre transforms (charts shared)."""
        return GeneratingFunction(as_partition(partition, self.n), self.order, self.t0,
                                  self.reference, self.model, self.charts, self.trust_radius)

    # ----- serialization -----
    def to_dict(self) -> dict:
        return {
            "format": ARTIFACT_FORMAT,
            "partition": _partition_dict(self.partition),
            "order": self.order,
            "t0": self.t0,
            "span": list(self.span),
            "trust_radius": self.trust_radius,
            "reference_id": self.reference.identifier,
            "model": {"name": self.model.name, "parameters": self.model.parameters,
                      "hash": self.model.model_hash},
            "reference": {"times": self.reference.times.tolist(),
                          "states": self.reference.states.tolist(),
                          "interpolation_order": self.reference.interpolation_order},
            "charts": [
                {"partition": _partition_dict(c.partition),
                 "nodes": [{"t": float(t),
                            "poly": TruncatedPolynomial(c.nvars, c.order, a).to_dict(),
                            "dpoly": TruncatedPolynomial(c.nvars, c.order, d).to_dict()}
                           for t, a, d in zip(c.times, c.coeffs, c.derivs)]}
                for c in self.charts
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, model: HamiltonianModel) -> "GeneratingFunction":
        if data.get("format") != ARTIFACT_FORMAT:
            raise ArtifactError(f"unknown artifact format {data.get('format')!r}")
        if data["model"]["hash"] != model.model_hash:
            raise ArtifactError(
                f"artifact built for model {data['model']['name']!r} "
                f"{data['model']['parameters']}; refusing {model!r}")
        ref = ReferenceTrajectory(model, data["reference"]["times"],
                                  np.asarray(data["reference"]["states"]),
                                  data["reference"]["interpolation_order"])
        if ref.identifier != data["reference_id"]:
            raise ArtifactError("reference samples do not match the recorded identifier")
        order = int(data["order"])
        charts = []
        for entry in data["charts"]:
            part = _partition_from_dict(entry["partition"])
            nodes = entry["nodes"]
            charts.append(Chart(
                part, order, [node["t"] for node in nodes],
                [TruncatedPolynomial.from_dict(node["poly"]).coeffs for node in nodes],
                [TruncatedPolynomial.from_dict(node["dpoly"]).coeffs for node in nodes]))
        return cls(_partition_from_dict(data["partition"]), order, data["t0"], ref, model,
                   charts, data.get("trust_radius"))


def _partition_dict(part: BoundaryPartition) -> dict:
    return {"n": part.n, "I_p": list(part.I_p), "K_r": list(part.K_r)}


def _partition_from_dict(data: dict) -> BoundaryPartition:
    return BoundaryPartition(int(data["n"]), tuple(data["I_p"]), tuple(data["K_r"]))


def save_gf(gf: GeneratingFunction, path) -> None:
    """Write a generating-function artifact (JSON)."""
    io.save_json(gf.to_dict(), path)
    logger.info("wrote generating function %s (order %d, %d charts) to %s",
                gf.partition.kind, gf.order, len(gf.charts), path)


def load_gf(path, model: HamiltonianModel) -> GeneratingFunction:
    """Read an artifact, refusing it when the model hash differs."""
    return GeneratingFunction.from_dict(io.load_json(path), model)


# ============================================================================
# HJ 右端项 / Hamilton-Jacobi Right-Hand Side
# ============================================================================
def hj_rhs_polynomial(model: HamiltonianModel, reference: ReferenceTrajectory,
                      partition: BoundaryPartition, poly: TruncatedPolynomial,
                      t: float) -> TruncatedPolynomial:
    """``∂F/∂t = −[H_h ∘ w(F)]`` truncated at the order of ``poly``."""
    n = partition.n
    H_h = taylor_hamiltonian(model, reference, poly.max_degree, t)
    subs: Dict[int, Union[int, TruncatedPolynomial]] = {}
    for a in range(n):
        grad = poly.differentiate(a)
        if a in partition.I_p:
            subs[a], subs[n + a] = a, grad
        else:
            subs[a], subs[n + a] = -grad, a
    result = -compose(H_h, subs, nvars=2 * n)
    return result.without_low_degrees(2)


def identity_polynomial(partition: BoundaryPartition, order: int) -> TruncatedPolynomial:
    """Generating function of the identity map for a kind regular at t0."""
    S = _gf_matrix(np.eye(2 * partition.n), partition)
    return TruncatedPolynomial.quadratic_form(S, order)


def _best_partition(poly: TruncatedPolynomial, current: BoundaryPartition) -> BoundaryPartition:
    """Partition with the smallest quadratic block at the current state."""
    phi = _stm_matrix(poly.quadratic_matrix(), current)
    best, best_norm = current, np.inf
    for cand in BoundaryPartition.all_partitions(current.n):
        try:
            norm = np.abs(_gf_matrix(phi, cand)).max()
        except (SingularKindError, np.linalg.LinAlgError):
            continue
        if norm < best_norm:
            best, best_norm = cand, norm
    return best


def _integrate_chart(model: HamiltonianModel, reference: ReferenceTrajectory,
                     partition: BoundaryPartition, poly0: TruncatedPolynomial,
                     t_start: float, t1: float, tol: float, max_step: float,
                     switch_norm: Optional[float]) -> Tuple[Chart, Optional[float]]:
    order = poly0.max_degree
    nv = 2 * partition.n
    quad = monomial_basis(nv, order).degrees == 2

    def rhs(t, c):
        poly = TruncatedPolynomial(nv, order, c)
        return hj_rhs_polynomial(model, reference, partition, poly, t).coeffs

    def blowup(t, c):
        return BLOWUP_NORM - np.abs(c[quad]).max()

    blowup.terminal = True
    events = [blowup]
    if switch_norm is not None:
        threshold = max(switch_norm, 2.0 * np.abs(poly0.coeffs[quad]).max())

        def switch(t, c):
            return threshold - np.abs(c[quad]).max()

        switch.terminal = True
        events.append(switch)

    logger.debug("integrating %s chart from t=%g towards %g", partition.kind, t_start, t1)
    try:
        sol = integrate(rhs, (t_start, t1), poly0.coeffs, tol, max_step=max_step, events=events)
    except IntegrationError as exc:
        raise SingularKindError(f"{partition.kind} HJ integration failed: {exc}",
                                kind=partition.kind, block=partition.block_name) from exc
    derivs = np.array([rhs(t, c) for t, c in zip(sol.t, sol.y.T)])
    chart = Chart(partition, order, sol.t, sol.y.T, derivs)
    if sol.status != 1:
        return chart, None
    if sol.t_events[0].size:
        t_hit = float(sol.t_events[0][0])
        rate = np.abs(derivs[-1][quad]).max()
        gap = 2.0 * np.abs(sol.y[quad, -1]).max() / rate if rate > 0 else 0.0
        bracket = (t_hit, t_hit + gap)
        raise SingularKindError(
            f"{partition.kind} Riccati blow-up near t={t_hit:.10g}, "
            f"bracket {describe_bracket(bracket)}",
            kind=partition.kind, block=partition.block_name, time=t_hit, bracket=bracket)
    return chart, float(sol.t_events[1][0])


def solve_gf(model: HamiltonianModel, reference: ReferenceTrajectory, partition, order: int,
             t0: float, t1: float, tol: float = DEFAULT_TOL, *,
             seed: Optional[GeneratingFunction] = None, t_start: Optional[float] = None,
             switch_kinds: bool = False, max_step: float = DEFAULT_MAX_STEP,
             estimate_trust: bool = True) -> GeneratingFunction:
    """Solve the Hamilton-Jacobi equation for a generating function of given kind.

    求解给定类型生成函数的 Hamilton-Jacobi 方程。

    Parameters 参数
    -------------
    model : HamiltonianModel
    reference : ReferenceTrajectory
    partition : BoundaryPartition or str
        Requested kind (``"F1"`` .. ``"F4"`` or a general partition).
        所需类型。
    order : int
        Truncation order N >= 2.
    t0, t1 : float
        Epoch of the identity transformation and final time (t1 >= t0;
        t1 == t0 gives the identity).  t1 = t0 时返回恒等生成函数。
    tol : float
    seed : GeneratingFunction, optional
        Generating function of another kind whose Legendre transform at
        ``t_start`` provides the initial polynomial.
        其他类型的生成函数，在 ``t_start`` 经 Legendre 变换给出初值。
    t_start : float, optional
        Start time when seeding (defaults to the end of the seed's span).
    switch_kinds : bool
        Continue in the best-conditioned kind whenever the current chart's
        quadratic block grows past ``CHART_SWITCH_NORM``.
        当前类型接近奇异时换用条件最好的类型继续积分。
    max_step : float
        Maximum integration step (spacing of the Hermite nodes).
    estimate_trust : bool
        Estimate the trust radius after integration.

    Returns 返回
    ----------
    GeneratingFunction

    Raises 异常
    ---------
    SingularKindError
        The kind is singular at t0 and neither ``seed`` nor ``switch_kinds``
        is given, or the order-2 subsystem blows up (with a bracket).

    Examples 示例
    -----------
    >>> from gfbvp import hill, libration_point, ReferenceTrajectory, solve_gf
    >>> model = hill()
    >>> ref = ReferenceTrajectory.equilibrium(model, libration_point(model, "L2"))
    >>> gf = solve_gf(model, ref, "F2", 4, 0.0, 0.5)  # doctest: +SKIP
    """
    n = model.n
    part = as_partition(partition, n)
    if order < 2:
        raise ValueError("order must be at least 2")
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    if seed is not None and t1 == t0:
        raise ValueError("seeding needs t1 > t0")
    if seed is not None:
        t_start = seed.span[1] if t_start is None else float(t_start)
        if not t0 <= t_start < t1:
            raise ValueError("t_start must lie in [t0, t1)")
        src, poly = seed.chart_polynomial(t_start)
        start_part = part
        poly0 = legendre_polynomial(poly.truncate(order), src, part, t=t_start)
    elif part.identity_admissible:
        start_part, t_start, poly0 = part, t0, identity_polynomial(part, order)
    elif switch_kinds:
        start_part = part.admissible_partner()
        t_start, poly0 = t0, identity_polynomial(start_part, order)
    else:
        raise SingularKindError(
            f"{part.kind} is singular at t0={t0}; seed it from another kind "
            "(seed=..., t_start=...) via legendre_transform or pass switch_kinds=True",
            kind=part.kind, block=part.block_name, time=t0)

    charts: List[Chart] = []
    current, t_now = start_part, t_start
    if t1 == t0:
        zero = np.zeros_like(poly0.coeffs)
        charts.append(Chart(current, order, [t0], poly0.coeffs[None, :], zero[None, :]))
    while t_now < t1:
        chart, t_switch = _integrate_chart(model, reference, current, poly0, t_now, t1, tol,
                                           max_step, CHART_SWITCH_NORM if switch_kinds else None)
        charts.append(chart)
        if t_switch is None:
            break
        end_poly = chart.polynomial(t_switch)
        target = _best_partition(end_poly, current)
        if target == current or len(charts) > 200:
            raise SingularKindError(f"no better-conditioned kind than {current.kind} at "
                                    f"t={t_switch:.10g}", kind=current.kind, time=t_switch)
        logger.info("switching chart %s -> %s at t=%.8g", current.kind, target.kind, t_switch)
        poly0 = legendre_polynomial(end_poly, current, target, t=t_switch)
        current, t_now = target, t_switch

    gf = GeneratingFunction(part, order, t0, reference, model, charts)
    if estimate_trust:
        gf.trust_radius = estimate_trust_radius(gf)
    logger.info("solved %s generating function of order %d on [%g, %g] with %d chart(s)",
                part.kind, order, t_start, t1, len(charts))
    return gf


# ============================================================================
# Legendre 变换 / Legendre Transforms
# ============================================================================
def _swapped_slots(source: BoundaryPartition, target: BoundaryPartition) -> List[int]:
    if source.n != target.n:
        raise DimensionError("partitions of different dimension")
    n = source.n
    slots = [a for a in range(n) if (a in source.I_p) != (a in target.I_p)]
    slots += [n + k for k in range(n) if (k in source.K_r) != (k in target.K_r)]
    return slots


def swap_system(poly: TruncatedPolynomial, source: BoundaryPartition,
                target: BoundaryPartition) -> Tuple[PolynomialSystem, List[int]]:
    """Polynomial system of a variable swap from ``source`` to ``target``.

    变量交换方程组：未知量为源类型中被替换的自变量（位于变量 ``2n..``），
    已知量为目标类型的自变量（变量 ``0..2n-1``）。
    """
    slots = _swapped_slots(source, target)
    nv = 2 * source.n
    total = nv + len(slots)
    renames: Dict[int, int] = {s: s for s in range(nv)}
    renames.update({s: nv + j for j, s in enumerate(slots)})
    signs = source.signs
    equations = []
    for j, s in enumerate(slots):
        grad = compose(poly.differentiate(s), renames, nvars=total)
        conj = TruncatedPolynomial.variable(s, total, poly.max_degree)
        equations.append(signs[s] * grad - conj)
    system = PolynomialSystem(equations, tuple(range(nv, total)), tuple(range(nv)))
    return system, slots


def legendre_polynomial(poly: TruncatedPolynomial, source, target, *, t: Optional[float] = None,
                        allow_caustic: bool = False,
                        rtol: float = DETERMINANT_RTOL) -> Union[TruncatedPolynomial,
                                                                  InversionResult]:
    """Convert a generating-function polynomial from one kind to another.

    Legendre 变换：(i) 级数反演求被替换变量，(ii) 代入，(iii) 加上双线性修正项。

    Parameters 参数
    -------------
    poly : TruncatedPolynomial
        Source polynomial (2n variables).
    source, target : BoundaryPartition or str
    t : float, optional
        Time, used in error messages only.
    allow_caustic : bool
        Return the :class:`InversionResult` instead of raising when the target
        kind is singular.
        目标类型奇异时返回反演结果而非抛出异常。
    rtol : float
        Determinant tolerance of the series inversion.

    Returns 返回
    ----------
    TruncatedPolynomial or InversionResult

    Raises 异常
    ---------
    CausticError
        The target kind is singular (multi-branch or infinite outcome).
    """
    n = poly.nvars // 2
    source = as_partition(source, n)
    target = as_partition(target, n)
    if source == target:
        return poly
    system, slots = swap_system(poly, source, target)
    result = invert_series(system, poly.max_degree, rtol)
    if not result.is_unique:
        if allow_caustic:
            return result
        when = "" if t is None else f" at t={t:.10g}"
        raise CausticError(
            f"{target.kind} is singular{when} ({result.outcome} inversion)",
            outcome=result, kind=target.kind, block=target.block_name, time=t)
    nv = 2 * n
    subs = {s: result.solutions[nv + j] for j, s in enumerate(slots)}
    out = compose(poly, subs, nvars=nv)
    signs = source.signs
    for j, s in enumerate(slots):
        own = TruncatedPolynomial.variable(s, nv, poly.max_degree)
        out = out - signs[s] * (own * result.solutions[nv + j])
    return out.without_low_degrees(2)


def legendre_transform(gf: GeneratingFunction, target, t: float, *, allow_caustic: bool = False,
                       rtol: float = DETERMINANT_RTOL):
    """Polynomial of another kind at time ``t`` from a solved generating function."""
    part, poly = gf.chart_polynomial(t)
    return legendre_polynomial(poly, part, as_partition(target, gf.n), t=t,
                               allow_caustic=allow_caustic, rtol=rtol)


# ============================================================================
# 梯度与信赖半径 / Gradients and Trust Radius
# ============================================================================
def gradients_of(poly: TruncatedPolynomial, partition: BoundaryPartition,
                 args: np.ndarray) -> np.ndarray:
    """Dependent values ``D ∇F(x)``."""
    return partition.signs * poly.gradient(args)


def eval_gradients(gf: GeneratingFunction, args, t: float) -> np.ndarray:
    """Dependent boundary values from independent ones.

    由自变量求因变量：终端槽位 a 为 ``p_a``（a∈I）或 ``q_a``，初端槽位 k 为
    ``p0_k``（k∈K）或 ``q0_k``。

    Parameters 参数
    -------------
    gf : GeneratingFunction
    args : array_like, shape (..., 2n)
        Independent values relative to the reference, ordered by slot.
        相对参考轨迹的自变量。
    t : float

    Returns 返回
    ----------
    np.ndarray, shape (..., 2n)
    """
    x = np.asarray(args, dtype=float)
    if x.shape[-1] != gf.nvars:
        raise DimensionError(f"arguments need {gf.nvars} components")
    if gf.trust_radius is not None:
        worst = float(np.linalg.norm(x, axis=-1).max(initial=0.0))
        if worst > gf.trust_radius:
            warnings.warn(f"arguments of norm {worst:.3g} exceed the trust radius "
                          f"{gf.trust_radius:.3g}", TrustRadiusWarning, stacklevel=2)
    return gradients_of(gf.polynomial(t), gf.partition, x)


def estimate_trust_radius(gf: GeneratingFunction, n_times: int = 5, n_directions: int = 16,
                          rtol: float = TRUST_RADIUS_RTOL, seed: int = 0,
                          amplitudes: Optional[np.ndarray] = None) -> Optional[float]:
    """Amplitude where order-N and order-(N−1) gradients differ by more than ``rtol``.

    信赖半径：N 阶与 N-1 阶梯度相对差超过 ``rtol`` 时的幅值（取各时刻最小值）。
    """
    if gf.order <= 2:
        return None
    amps = np.geomspace(1e-4, 1.0, 41) if amplitudes is None else np.asarray(amplitudes)
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n_directions, gf.nvars))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    points = amps[:, None, None] * dirs[None, :, :]
    radius = float(amps[-1])
    t_lo, t_hi = gf.span
    for t in np.linspace(t_lo, t_hi, n_times + 1)[1:]:
        _, poly = gf.chart_polynomial(t)
        full = np.linalg.norm(poly.gradient(points), axis=-1)
        top = np.linalg.norm(poly.degree_part(gf.order).gradient(points), axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(full > 0, top / full, 0.0).max(axis=1)
        bad = np.nonzero(rel > rtol)[0]
        if bad.size:
            radius = min(radius, float(amps[bad[0] - 1]) if bad[0] > 0 else float(amps[0]))
    return radius


def hj_residual(gf: GeneratingFunction, model: HamiltonianModel, args, t: float,
                extra: int = 2) -> np.ndarray:
    """``∂F/∂t + H(ref + w) − H(ref) − ∇H(ref)·w`` at independent values ``args``.

    HJ 方程残差；随幅值 a 按 a^(N+1) 缩放。

    Parameters 参数
    -------------
    gf : GeneratingFunction
    model : HamiltonianModel
    args : array_like, shape (..., 2n)
        Independent values relative to the reference.
    t : float
    extra : int
        Degrees beyond N through which ``H ∘ w`` is expanded.
        超出 N 的展开阶数。

    Notes 说明
    ---------
    ``∂F/∂t`` is the truncated right-hand side ``−[H ∘ w]≤N``, so the residual
    is the part of ``H ∘ w`` above degree N. It is evaluated as a polynomial
    through degree ``N + extra`` because subtracting energies of size O(1)
    loses every digit of an a^(N+1) residual.
    """
    poly = gf.polynomial(t)
    wide = poly.truncate(poly.max_degree + int(extra))
    tail = -hj_rhs_polynomial(model, gf.reference, gf.partition, wide, t)
    tail = tail.without_low_degrees(poly.max_degree + 1)
    x = np.asarray(args, dtype=float)
    if x.shape[-1] != gf.nvars:
        raise DimensionError(f"arguments need {gf.nvars} components")
    return tail(x)


# ============================================================================
# 初值问题与奇异性监测 / Initial Value Problems and Singularity Monitoring
# ============================================================================
def propagate_state(gf: GeneratingFunction, state0, t: float,
                    guess: Optional[np.ndarray] = None, tol: float = 1e-13) -> PhaseState:
    """Relative state at ``t`` of the trajectory starting from relative ``state0`` at t0.

    用生成函数求解初值问题：对终端自变量做 Newton 迭代，使初端梯度关系成立。
    """
    part, poly = gf.chart_polynomial(t)
    n = gf.n
    z0 = state0.vector if isinstance(state0, PhaseState) else np.asarray(state0, dtype=float)
    x0 = part.independent(np.zeros(2 * n), z0)[n:]
    y0 = part.dependent(np.zeros(2 * n), z0)[n:]
    signs = part.signs
    if guess is None:
        z1_lin = _stm_matrix(poly.quadratic_matrix(), part) @ z0
        guess = part.independent(z1_lin, z0)[:n]

    def equations(x1):
        x = np.concatenate([x1, x0])
        residual = signs[n:] * poly.gradient(x)[n:] - y0
        jac = signs[n:, None] * poly.hessian(x)[n:, :n]
        return residual, jac

    sol = root(equations, guess, jac=True, method="hybr", tol=tol)
    if not sol.success:
        raise IntegrationError(f"Newton iteration for the final state failed: {sol.message}")
    x = np.concatenate([sol.x, x0])
    z1, _ = part.assemble(x, gradients_of(poly, part, x))
    return PhaseState.from_vector(z1)


def monitor_singularity(gf: GeneratingFunction, kinds: Optional[Iterable] = None,
                        density: int = SINGULAR_GRID_DENSITY) -> List[Tuple[BoundaryPartition, float]]:
    """Singular times of other kinds along the generating function's span.

    监测其他类型在时间段内的奇异时刻（基于二次部分恢复的 STM）。
    """
    n = gf.n
    parts = ([BoundaryPartition.named(k, n) for k in ("F1", "F2", "F3", "F4")]
             if kinds is None else [as_partition(k, n) for k in kinds])
    t_lo, t_hi = gf.span
    path = StateTransition([t_lo, t_hi], np.array([gf.linear_stm(t_lo), gf.linear_stm(t_hi)]),
                           evaluator=gf.linear_stm)
    found = []
    for part in parts:
        for t in detect_singularity(path, part, t_lo, t_hi, density):
            found.append((part, t))
    found.sort(key=lambda item: item[1])
    return found


__all__ = [
    "BoundaryPartition",
    "Chart",
    "GeneratingFunction",
    "save_gf",
    "load_gf",
    "hj_rhs_polynomial",
    "identity_polynomial",
    "solve_gf",
    "swap_system",
    "legendre_polynomial",
    "legendre_transform",
    "gradients_of",
    "eval_gradients",
    "estimate_trust_radius",
    "hj_residual",
    "propagate_state",
    "monitor_singularity",
]
