"""
哈密顿动力学模块 / Hamiltonian Dynamics Module
==============================================

定义相空间状态、闭式哈密顿模型（谐振子、Hill问题、平面圆型限制性三体问题）、
相流积分、参考轨迹、平动点以及哈密顿量在参考状态附近的泰勒展开。
Phase-space states, closed-form Hamiltonian models (harmonic oscillator,
Hill's problem, planar circular restricted three-body problem), the flow,
reference trajectories, libration points and the Taylor expansion of a
Hamiltonian about a reference state.

哈密顿量以 ``sympy`` 表达式保存，可精确求任意阶偏导数。
Hamiltonians are kept as ``sympy`` expressions so every partial derivative is
exact.
"""

import hashlib
import json
import logging
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import sympy as sp
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline, interp1d
from scipy.optimize import brentq

from . import io
from .constants import (
    DEFAULT_TOL,
    DOMAIN_EXIT_DISTANCE,
    DOMAIN_SINGULAR_DISTANCE,
    ENERGY_DRIFT_FACTOR,
)
from .errors import ConfigError, DimensionError, DomainError, IntegrationError
from .poly import TruncatedPolynomial, function_series, power_series

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


# ============================================================================
# 相空间状态 / Phase-Space State
# ============================================================================
@dataclass(frozen=True)
class PhaseState:
    """Canonical state ``(q, p)`` of a system with n degrees of freedom.

    n 自由度系统的正则状态 ``(q, p)``。
    """

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        p = np.atleast_1d(np.asarray(self.p, dtype=float))
        if q.ndim != 1 or q.shape != p.shape:
            raise DimensionError(f"q and p must be vectors of equal length, got {q.shape}, {p.shape}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(p))):
            raise DomainError("phase state must be finite")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_vector(cls, vector: Sequence[float]) -> "PhaseState":
        z = np.asarray(vector, dtype=float)
        if z.ndim != 1 or z.size % 2:
            raise DimensionError("phase vector must have even length 2n")
        n = z.size // 2
        return cls(z[:n], z[n:])

    def __add__(self, other: "PhaseState") -> "PhaseState":
        return PhaseState.from_vector(self.vector + other.vector)

    def __sub__(self, other: "PhaseState") -> "PhaseState":
        return PhaseState.from_vector(self.vector - other.vector)


def _as_vector(state: Union[PhaseState, Sequence[float]]) -> np.ndarray:
    if isinstance(state, PhaseState):
        return state.vector
    return np.asarray(state, dtype=float)


# ============================================================================
# 哈密顿模型 / Hamiltonian Models
# ============================================================================
class HamiltonianModel:
    """Closed-form Hamiltonian ``H(q, p, t)`` with exact derivatives.

    闭式哈密顿量及其精确导数。

    Parameters 参数
    -------------
    name : str
        Model identifier (``"hill"``, ``"crtbp"``, ...).
        模型名称。
    expression : sympy.Expr
        Hamiltonian in the symbols ``q_symbols``, ``p_symbols`` and ``t_symbol``.
        以 ``q``、``p``、``t`` 符号表示的哈密顿量。
    q_symbols, p_symbols : sequence of sympy.Symbol
        Canonical coordinates and momenta.
        正则坐标与动量符号。
    t_symbol : sympy.Symbol
        Time symbol (absent from the expression for autonomous models).
        时间符号（自治模型中不出现）。
    parameters : dict, optional
        Parameter values keyed by symbol name, substituted at construction.
        参数值（按符号名），构造时代入。
    singular_points : sequence of array_like, optional
        Positions where the Hamiltonian is singular (gravitational centres).
        哈密顿量奇异的位置（引力中心）。
    """

    def __init__(self,
                 name: str,
                 expression: sp.Expr,
                 q_symbols: Sequence[sp.Symbol],
                 p_symbols: Sequence[sp.Symbol],
                 t_symbol: sp.Symbol,
                 parameters: Optional[Mapping[str, float]] = None,
                 singular_points: Sequence[Sequence[float]] = ()):
        if len(q_symbols) != len(p_symbols) or not q_symbols:
            raise DimensionError("need n >= 1 coordinates and as many momenta")
        self.name = name
        self.parameters = {k: float(v) for k, v in (parameters or {}).items()}
        self.q_symbols = tuple(q_symbols)
        self.p_symbols = tuple(p_symbols)
        self.t_symbol = t_symbol
        self.symbolic_expression = expression
        expression = sp.sympify(expression)
        subs = {s: self.parameters[s.name] for s in expression.free_symbols
                if s.name in self.parameters}
        self.expression = expression.subs(subs)
        allowed = set(self.q_symbols) | set(self.p_symbols) | {t_symbol}
        unknown = self.expression.free_symbols - allowed
        if unknown:
            raise ConfigError(f"unbound symbols in Hamiltonian: {sorted(map(str, unknown))}")
        self.singular_points = [np.asarray(s, dtype=float) for s in singular_points]

        args = (self.q_symbols, self.p_symbols, t_symbol)
        self._h = sp.lambdify(args, self.expression, "numpy")
        dq = [sp.diff(self.expression, s) for s in self.q_symbols]
        dp = [sp.diff(self.expression, s) for s in self.p_symbols]
        self._grad = [sp.lambdify(args, d, "numpy") for d in dq + dp]
        self._taylor_cache: Dict[Tuple, TruncatedPolynomial] = {}

    @property
    def n(self) -> int:
        return len(self.q_symbols)

    @property
    def autonomous(self) -> bool:
        return self.t_symbol not in self.expression.free_symbols

    @property
    def model_hash(self) -> str:
        payload = json.dumps({"name": self.name, "parameters": self.parameters,
                              "expression": sp.srepr(self.expression)}, sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def check_domain(self, q: np.ndarray) -> None:
        """Raise :class:`DomainError` when ``q`` sits on a singular point."""
        for point in self.singular_points:
            if np.linalg.norm(np.asarray(q) - point) <= DOMAIN_SINGULAR_DISTANCE:
                raise DomainError(f"state at gravitational singularity {point.tolist()}")

    def energy(self, z: np.ndarray, t: float) -> float:
        n = self.n
        return float(self._h(z[:n], z[n:], t))

    def gradient(self, z: np.ndarray, t: float) -> np.ndarray:
        n = self.n
        q, p = z[:n], z[n:]
        return np.array([float(g(q, p, t)) for g in self._grad])

    def __repr__(self) -> str:
        return f"HamiltonianModel(name={self.name!r}, n={self.n}, parameters={self.parameters})"


def _canonical_symbols(n: int) -> Tuple[List[sp.Symbol], List[sp.Symbol], sp.Symbol]:
    q = list(sp.symbols(f"q1:{n + 1}", real=True))
    p = list(sp.symbols(f"p1:{n + 1}", real=True))
    return q, p, sp.Symbol("t", real=True)


def harmonic_oscillator(omega: float = 1.0, n: int = 1) -> HamiltonianModel:
    """``H = Σ ½(p² + ω² q²)``. / 谐振子。"""
    n = int(n)
    q, p, t = _canonical_symbols(n)
    w = sp.Symbol("omega", positive=True)
    expr = sum(sp.Rational(1, 2) * (pi ** 2 + w ** 2 * qi ** 2) for qi, pi in zip(q, p))
    return HamiltonianModel("harmonic_oscillator", expr, q, p, t, {"omega": omega, "n": n})


def hill() -> HamiltonianModel:
    """Hill's problem in the rotating frame (Sun-Earth normalization).

    Hill问题（旋转坐标系，日地系统归一化）::

        H = ½(px² + py²) + qy·px − qx·py − 1/r + ½(qy² − 2qx²)
    """
    (qx, qy), (px, py), t = _canonical_symbols(2)
    r = sp.sqrt(qx ** 2 + qy ** 2)
    expr = (sp.Rational(1, 2) * (px ** 2 + py ** 2) + qy * px - qx * py - 1 / r
            + sp.Rational(1, 2) * (qy ** 2 - 2 * qx ** 2))
    return HamiltonianModel("hill", expr, [qx, qy], [px, py], t, {},
                            singular_points=[(0.0, 0.0)])


def crtbp(mu: float) -> HamiltonianModel:
    """Planar circular restricted three-body problem in the rotating frame.

    平面圆型限制性三体问题::

        H = ½(px² + py²) + px·qy − qx·py − (1−μ)/r1 − μ/r2
    """
    if not 0.0 < mu <= 0.5:
        raise ValueError("mu must lie in (0, 0.5]")
    (qx, qy), (px, py), t = _canonical_symbols(2)
    m = sp.Symbol("mu", positive=True)
    r1 = sp.sqrt((qx + m) ** 2 + qy ** 2)
    r2 = sp.sqrt((qx - 1 + m) ** 2 + qy ** 2)
    expr = (sp.Rational(1, 2) * (px ** 2 + py ** 2) + px * qy - qx * py
            - (1 - m) / r1 - m / r2)
    return HamiltonianModel("crtbp", expr, [qx, qy], [px, py], t, {"mu": mu},
                            singular_points=[(-mu, 0.0), (1.0 - mu, 0.0)])


def from_expression(name: str, expression: sp.Expr, q_symbols: Sequence[sp.Symbol],
                    p_symbols: Sequence[sp.Symbol], t_symbol: Optional[sp.Symbol] = None,
                    parameters: Optional[Mapping[str, float]] = None,
                    singular_points: Sequence[Sequence[float]] = ()) -> HamiltonianModel:
    """User-defined model from a sympy expression."""
    return HamiltonianModel(name, expression, q_symbols, p_symbols,
                            t_symbol if t_symbol is not None else sp.Symbol("t", real=True),
                            parameters, singular_points)


_MODELS: Dict[str, Callable[..., HamiltonianModel]] = {
    "harmonic_oscillator": harmonic_oscillator,
    "hill": hill,
    "crtbp": crtbp,
}


def get_model(name: str, parameters: Optional[Mapping[str, float]] = None) -> HamiltonianModel:
    """Build a registered model by name (used by the command line)."""
    if name not in _MODELS:
        raise ConfigError(f"unknown model {name!r}; choose from {sorted(_MODELS)}")
    try:
        return _MODELS[name](**dict(parameters or {}))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for model {name!r}: {exc}") from exc


# ============================================================================
# 哈密顿量求值与相流 / Evaluation and Flow
# ============================================================================
def eval_hamiltonian(model: HamiltonianModel, state: Union[PhaseState, Sequence[float]],
                     t: float = 0.0) -> float:
    """Evaluate H at a state; singular states raise :class:`DomainError`.

    计算哈密顿量；奇点处抛出 DomainError。
    """
    z = _as_vector(state)
    model.check_domain(z[: model.n])
    with np.errstate(divide="raise", invalid="raise"):
        try:
            value = model.energy(z, t)
        except FloatingPointError as exc:
            raise DomainError(f"Hamiltonian undefined at {z.tolist()}") from exc
    if not np.isfinite(value):
        raise DomainError(f"Hamiltonian undefined at {z.tolist()}")
    return value


def hamilton_rhs(model: HamiltonianModel, state: Union[PhaseState, Sequence[float]],
                 t: float = 0.0) -> np.ndarray:
    """Hamilton's equations ``(q̇, ṗ) = (∂H/∂p, −∂H/∂q)`` as a 2n vector."""
    z = _as_vector(state)
    model.check_domain(z[: model.n])
    grad = model.gradient(z, t)
    n = model.n
    return np.concatenate([grad[n:], -grad[:n]])


class IntegrationCounter:
    """Counts calls of the shared adaptive integrator. / 积分器调用计数。"""

    def __init__(self):
        self.calls = 0
        self._lock = threading.Lock()

    def reset(self) -> None:
        with self._lock:
            self.calls = 0

    def increment(self) -> None:
        with self._lock:
            self.calls += 1

    @contextmanager
    def counting(self) -> Iterator["IntegrationCounter"]:
        """Reset on entry; ``calls`` then counts the integrations inside the block."""
        self.reset()
        yield self


integration_counter = IntegrationCounter()


def integrate(fun: Callable, t_span: Tuple[float, float], y0: np.ndarray,
              tol: float = DEFAULT_TOL, *, max_step: float = np.inf, events=None,
              dense_output: bool = False, t_eval: Optional[np.ndarray] = None):
    """Shared adaptive integrator (``solve_ivp`` DOP853, rtol = atol = tol).

    共享的自适应积分器；步长下溢时抛出 IntegrationError。
    """
    integration_counter.increment()
    sol = solve_ivp(fun, t_span, np.asarray(y0, dtype=float), method="DOP853",
                    rtol=tol, atol=tol, max_step=max_step, events=events,
                    dense_output=dense_output, t_eval=t_eval)
    if sol.status == -1:
        raise IntegrationError(f"integration failed near t={sol.t[-1]:.10g}: {sol.message}")
    return sol


def _domain_events(model: HamiltonianModel) -> List[Callable]:
    events = []
    n = model.n
    for point in model.singular_points:
        def event(t, z, point=point):
            return np.linalg.norm(z[:n] - point) - DOMAIN_EXIT_DISTANCE
        event.terminal = True
        events.append(event)
    return events


def flow(model: HamiltonianModel, state0: PhaseState, t0: float, t1: float,
         tol: float = DEFAULT_TOL) -> PhaseState:
    """Propagate ``state0`` from ``t0`` to ``t1`` along the Hamiltonian flow.

    沿哈密顿相流从 t0 积分到 t1。

    Raises 异常
    ---------
    DomainError
        The trajectory reaches a gravitational singularity.
    IntegrationError
        Step-size underflow.
    """
    if t1 == t0:
        return state0
    model.check_domain(state0.q)
    sol = integrate(lambda t, z: hamilton_rhs(model, z, t), (t0, t1), state0.vector, tol,
                    events=_domain_events(model) or None)
    if sol.status == 1:
        raise DomainError(f"trajectory reached a singular point at t={sol.t[-1]:.10g}")
    return PhaseState.from_vector(sol.y[:, -1])


def flow_path(model: HamiltonianModel, state0: PhaseState, t0: float, t1: float,
              samples: int = 201, tol: float = DEFAULT_TOL) -> "ReferenceTrajectory":
    """Sampled flow as a :class:`ReferenceTrajectory`."""
    times = np.linspace(t0, t1, samples)
    model.check_domain(state0.q)
    sol = integrate(lambda t, z: hamilton_rhs(model, z, t), (t0, t1), state0.vector, tol,
                    events=_domain_events(model) or None, t_eval=times)
    if sol.status == 1:
        raise DomainError(f"trajectory reached a singular point at t={sol.t[-1]:.10g}")
    if model.autonomous:
        energy = np.array([model.energy(z, t) for t, z in zip(sol.t, sol.y.T)])
        drift = float(np.abs(energy - energy[0]).max())
        bound = ENERGY_DRIFT_FACTOR * tol * max(1.0, abs(energy[0]))
        if drift > bound:
            logger.warning("energy drift %.3e exceeds %.3e along the sampled flow", drift, bound)
    return ReferenceTrajectory(model, sol.t, sol.y.T)


# ============================================================================
# 参考轨迹 / Reference Trajectories
# ============================================================================
class ReferenceTrajectory:
    """Sampled solution of Hamilton's equations about which problems are expanded.

    参考轨迹：哈密顿方程的采样解，平衡点为其特例。

    Parameters 参数
    -------------
    model : HamiltonianModel
        Dynamics the samples satisfy.
    times : array_like
        Strictly increasing sample times.
        严格递增的采样时间。
    states : array_like, shape (k, 2n)
        Samples ``(q, p)``.
    interpolation_order : {1, 3}
        Linear or cubic Hermite (derivatives from Hamilton's equations).
        线性或三次Hermite插值。
    """

    def __init__(self, model: HamiltonianModel, times: Sequence[float],
                 states: np.ndarray, interpolation_order: int = 3):
        self.model = model
        self.times = np.atleast_1d(np.asarray(times, dtype=float))
        self.states = np.atleast_2d(np.asarray(states, dtype=float))
        if self.states.shape != (self.times.size, 2 * model.n):
            raise DimensionError(f"states must have shape ({self.times.size}, {2 * model.n})")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("reference sample times must be strictly increasing")
        if interpolation_order not in (1, 3):
            raise ValueError("interpolation_order must be 1 or 3")
        self.interpolation_order = interpolation_order
        self._interp = None

    @classmethod
    def equilibrium(cls, model: HamiltonianModel, state: PhaseState, t0: float = 0.0,
                    tol: float = 1e-8) -> "ReferenceTrajectory":
        """Constant reference at an equilibrium (checked against Hamilton's equations)."""
        residual = np.linalg.norm(hamilton_rhs(model, state, t0))
        if residual > tol:
            raise ValueError(f"state is not an equilibrium (|rhs| = {residual:.3e})")
        return cls(model, [t0], state.vector[None, :])

    @classmethod
    def from_flow(cls, model: HamiltonianModel, state0: PhaseState, t0: float, t1: float,
                  samples: int = 201, tol: float = DEFAULT_TOL) -> "ReferenceTrajectory":
        return flow_path(model, state0, t0, t1, samples, tol)

    @property
    def is_equilibrium(self) -> bool:
        return bool(np.all(self.states == self.states[0]))

    @property
    def span(self) -> Tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def state_at(self, t: float) -> PhaseState:
        if self.is_equilibrium:
            return PhaseState.from_vector(self.states[0])
        if not self.times[0] - 1e-12 <= t <= self.times[-1] + 1e-12:
            raise ValueError(f"t={t} outside reference span {self.span}")
        if self._interp is None:
            if self.interpolation_order == 3:
                derivs = np.array([hamilton_rhs(self.model, z, t)
                                   for t, z in zip(self.times, self.states)])
                self._interp = CubicHermiteSpline(self.times, self.states, derivs, axis=0)
            else:
                self._interp = interp1d(self.times, self.states, axis=0)
        return PhaseState.from_vector(self._interp(np.clip(t, *self.span)))

    def max_residual(self) -> float:
        """Largest mismatch between the interpolant's derivative and Hamilton's equations."""
        if self.is_equilibrium:
            return float(np.linalg.norm(hamilton_rhs(self.model, self.states[0], self.times[0])))
        self.state_at(self.times[0])
        mids = 0.5 * (self.times[1:] + self.times[:-1])
        worst = 0.0
        for t in mids:
            z = self._interp(t)
            dz = (self._interp.derivative()(t) if self.interpolation_order == 3
                  else (self._interp(t + 1e-6) - self._interp(t - 1e-6)) / 2e-6)
            worst = max(worst, float(np.linalg.norm(dz - hamilton_rhs(self.model, z, t))))
        return worst

    @property
    def identifier(self) -> str:
        digest = hashlib.sha256()
        digest.update(self.model.name.encode("utf-8"))
        digest.update(self.times.tobytes())
        digest.update(self.states.tobytes())
        return digest.hexdigest()[:16]

    def to_frame(self) -> pd.DataFrame:
        n = self.model.n
        columns = ["t"] + [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
        return pd.DataFrame(np.column_stack([self.times, self.states]), columns=columns)

    def to_csv(self, path) -> None:
        io.write_csv(self.to_frame(), path)

    @classmethod
    def from_csv(cls, path, model: HamiltonianModel,
                 interpolation_order: int = 3) -> "ReferenceTrajectory":
        n = model.n
        columns = ["t"] + [f"q{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(n)]
        frame = io.read_csv(path, columns)
        values = frame[columns].to_numpy(dtype=float)
        return cls(model, values[:, 0], values[:, 1:], interpolation_order)


# ============================================================================
# 泰勒展开 / Taylor Expansion
# ============================================================================
def _expand(expr: sp.Expr, env: Mapping[sp.Symbol, TruncatedPolynomial],
            nvars: int, order: int) -> TruncatedPolynomial:
    if expr in env:
        return env[expr]
    if expr.is_Number or not expr.free_symbols:
        return TruncatedPolynomial.constant(float(expr), nvars, order)
    if isinstance(expr, sp.Add):
        total = TruncatedPolynomial.zero(nvars, order)
        for arg in expr.args:
            total = total + _expand(arg, env, nvars, order)
        return total
    if isinstance(expr, sp.Mul):
        product = TruncatedPolynomial.constant(1.0, nvars, order)
        for arg in expr.args:
            product = product * _expand(arg, env, nvars, order)
        return product
    if isinstance(expr, sp.Pow):
        base, exponent = expr.args
        if exponent.free_symbols:
            raise ValueError(f"symbolic exponent in {expr}")
        b = _expand(base, env, nvars, order)
        if exponent.is_Integer and int(exponent) >= 0:
            return b ** int(exponent)
        return power_series(b, float(exponent))
    for func, name in ((sp.exp, "exp"), (sp.log, "log"), (sp.sin, "sin"), (sp.cos, "cos")):
        if isinstance(expr, func):
            return function_series(_expand(expr.args[0], env, nvars, order), name)
    raise ValueError(f"unsupported expression in Taylor expansion: {expr}")


def taylor_hamiltonian(model: HamiltonianModel, reference: "ReferenceTrajectory",
                       order: int, t: Optional[float] = None) -> TruncatedPolynomial:
    """Taylor expansion of H about the reference state at time ``t``.

    哈密顿量在参考状态附近的泰勒展开（次数 2..N）。

    Parameters 参数
    -------------
    model : HamiltonianModel
    reference : ReferenceTrajectory
    order : int
        Truncation order N >= 2.
        截断阶数 N >= 2。
    t : float, optional
        Expansion time (defaults to the first reference sample).

    Returns 返回
    ----------
    TruncatedPolynomial
        Polynomial in ``(δq, δp)`` (2n variables) with degree-0 and degree-1
        terms removed.
        以 ``(δq, δp)`` 为变量、去掉0次和1次项的多项式。

    Notes 说明
    ---------
    Non-integer and negative powers (the gravity terms) are expanded with the
    binomial series about their value at the reference, so the expansion is
    exact through degree N.
    """
    if order < 2:
        raise ValueError("Taylor order must be at least 2")
    t = float(reference.times[0] if t is None else t)
    state = reference.state_at(t)
    model.check_domain(state.q)
    cacheable = model.autonomous and reference.is_equilibrium
    key = (tuple(state.vector), int(order))
    if cacheable and key in model._taylor_cache:
        return model._taylor_cache[key]
    n = model.n
    nv = 2 * n
    env = {}
    for i, sym in enumerate(model.q_symbols):
        env[sym] = TruncatedPolynomial.variable(i, nv, order) + float(state.q[i])
    for i, sym in enumerate(model.p_symbols):
        env[sym] = TruncatedPolynomial.variable(n + i, nv, order) + float(state.p[i])
    env[model.t_symbol] = TruncatedPolynomial.constant(t, nv, order)
    poly = _expand(model.expression, env, nv, order).without_low_degrees(2)
    if cacheable:
        model._taylor_cache[key] = poly
    return poly


def hessian_matrix(model: HamiltonianModel, state: PhaseState, t: float = 0.0) -> np.ndarray:
    """Full 2n x 2n Hessian of H at a state (ordering ``(q, p)``)."""
    ref = ReferenceTrajectory(model, [t], state.vector[None, :])
    return taylor_hamiltonian(model, ref, 2, t).quadratic_matrix()


def hessian_blocks(model: HamiltonianModel, state: PhaseState,
                   t: float = 0.0) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """``(Hqq, Hqp, Hpq, Hpp)`` with ``Hqp[i, j] = ∂²H/∂q_i∂p_j``."""
    M = hessian_matrix(model, state, t)
    n = model.n
    return M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:]


def symplectic_matrix(n: int) -> np.ndarray:
    """``J = [[0, I], [-I, 0]]``."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def linear_eigen(model: HamiltonianModel, state: PhaseState,
                 t: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of the linearized flow matrix ``J·∇²H``."""
    A = symplectic_matrix(model.n) @ hessian_matrix(model, state, t)
    return np.linalg.eig(A)


# ============================================================================
# 平动点 / Libration Points
# ============================================================================
_LIBRATION_NAMES = ("L1", "L2", "L3", "L4", "L5")


def _rotating_rest_state(x: float, y: float) -> PhaseState:
    # zero rotating-frame velocity: p = (-qy, qx)
    return PhaseState(np.array([x, y]), np.array([-y, x]))


def libration_points(model: HamiltonianModel) -> List[PhaseState]:
    """Equilibria of Hill's problem ``[L1, L2]`` or the CRTBP ``[L1, ..., L5]``.

    Hill问题或三体问题的平动点。

    Notes 说明
    ---------
    CRTBP collinear points are roots of
    ``x − (1−μ)(x+μ)/|x+μ|³ − μ(x−1+μ)/|x−1+μ|³`` found with ``brentq``;
    L1 lies between the primaries, L2 beyond the small primary, L3 beyond the
    large one; L4/L5 are ``(½−μ, ±√3/2)``.
    """
    if model.name == "hill":
        x = 3.0 ** (-1.0 / 3.0)
        return [_rotating_rest_state(-x, 0.0), _rotating_rest_state(x, 0.0)]
    if model.name == "crtbp":
        mu = model.parameters["mu"]

        def collinear(x: float) -> float:
            r1 = x + mu
            r2 = x - 1.0 + mu
            return x - (1.0 - mu) * r1 / abs(r1) ** 3 - mu * r2 / abs(r2) ** 3

        delta = 1e-6 * min(1.0, mu ** (1.0 / 3.0))
        l1 = brentq(collinear, -mu + delta, 1.0 - mu - delta, xtol=1e-15)
        l2 = brentq(collinear, 1.0 - mu + delta, 2.0, xtol=1e-15)
        l3 = brentq(collinear, -2.0, -mu - delta, xtol=1e-15)
        half = np.sqrt(3.0) / 2.0
        return [_rotating_rest_state(l1, 0.0), _rotating_rest_state(l2, 0.0),
                _rotating_rest_state(l3, 0.0), _rotating_rest_state(0.5 - mu, half),
                _rotating_rest_state(0.5 - mu, -half)]
    raise ValueError(f"no libration points known for model {model.name!r}")


def libration_point(model: HamiltonianModel, name: str) -> PhaseState:
    """Look up a libration point by name (``"L1"`` .. ``"L5"``)."""
    points = libration_points(model)
    label = name.upper()
    if label not in _LIBRATION_NAMES[: len(points)]:
        raise ValueError(f"{name!r} is not a libration point of {model.name!r}")
    return points[_LIBRATION_NAMES.index(label)]


__all__ = [
    "PhaseState",
    "HamiltonianModel",
    "harmonic_oscillator",
    "hill",
    "crtbp",
    "from_expression",
    "get_model",
    "eval_hamiltonian",
    "hamilton_rhs",
    "integration_counter",
    "integrate",
    "flow",
    "flow_path",
    "ReferenceTrajectory",
    "taylor_hamiltonian",
    "hessian_matrix",
    "hessian_blocks",
    "symplectic_matrix",
    "linear_eigen",
    "libration_points",
    "libration_point",
]
