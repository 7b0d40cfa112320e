"""
截断多元幂级数模块 / Truncated Multivariate Power Series Module
===============================================================

提供截断多项式的代数运算（加、乘、复合、求导、求值）以及多项式方程组的
级数反演，是生成函数求解的代数核心。
Truncated multivariate polynomials with the algebra the generating-function
solvers need (sum, truncated product, composition, differentiation,
evaluation) and series inversion of polynomial systems.

系数按分级字典序存储：先按总次数，再按字典序（x² 在 xy 之前）。
Coefficients are stored in graded-lex order: by total degree, then
lexicographically with higher powers of earlier variables first.
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .constants import DETERMINANT_RTOL
from .errors import ClassificationError, DimensionError, DomainError

ArrayLike = Union[float, np.ndarray]


# ============================================================================
# 单项式基 / Monomial Bases
# ============================================================================
class MonomialBasis:
    """Graded-lex monomial table for ``nvars`` variables up to ``max_degree``.

    单项式表：指数、次数、索引，以及惰性构造的乘法与求导索引。
    """

    def __init__(self, nvars: int, max_degree: int):
        if nvars < 0 or max_degree < 0:
            raise DimensionError("nvars and max_degree must be non-negative")
        self.nvars = nvars
        self.max_degree = max_degree
        rows = []
        for d in range(max_degree + 1):
            for combo in itertools.combinations_with_replacement(range(nvars), d):
                rows.append(np.bincount(np.asarray(combo, dtype=int), minlength=nvars)
                            if nvars else np.zeros(0, dtype=int))
        self.exponents = np.asarray(rows, dtype=np.int64).reshape(len(rows), nvars)
        self.degrees = self.exponents.sum(axis=1)
        self.size = len(rows)
        self._radix = (max_degree + 1) ** np.arange(nvars, dtype=np.int64)
        codes = self.exponents @ self._radix
        self._order = np.argsort(codes)
        self._sorted_codes = codes[self._order]
        self._products = None
        self._derivatives: Dict[int, Tuple[np.ndarray, np.ndarray, np.ndarray]] = {}

    def lookup(self, exponents: np.ndarray) -> np.ndarray:
        """Indices of exponent rows (all of degree <= max_degree)."""
        codes = np.asarray(exponents, dtype=np.int64) @ self._radix
        pos = np.searchsorted(self._sorted_codes, codes)
        return self._order[pos]

    def index(self, exponents: Sequence[int]) -> int:
        exps = np.asarray(exponents, dtype=np.int64)
        if exps.shape != (self.nvars,) or exps.min(initial=0) < 0:
            raise DimensionError(f"bad exponent tuple {tuple(exponents)}")
        if exps.sum() > self.max_degree:
            raise DimensionError("exponent degree exceeds the truncation order")
        return int(self.lookup(exps[None, :])[0])

    @property
    def products(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Index triples ``(i, j, k)`` with monomial_i * monomial_j = monomial_k."""
        if self._products is None:
            left, right, target = [], [], []
            for i in range(self.size):
                partners = np.nonzero(self.degrees <= self.max_degree - self.degrees[i])[0]
                if partners.size == 0:
                    continue
                sums = self.exponents[i] + self.exponents[partners]
                left.append(np.full(partners.size, i))
                right.append(partners)
                target.append(self.lookup(sums))
            self._products = (np.concatenate(left), np.concatenate(right),
                              np.concatenate(target))
        return self._products

    def derivative(self, var: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(source, target, factor)`` arrays for d/dx_var."""
        if var not in self._derivatives:
            source = np.nonzero(self.exponents[:, var] > 0)[0]
            shifted = self.exponents[source].copy()
            factor = shifted[:, var].astype(float)
            shifted[:, var] -= 1
            self._derivatives[var] = (source, self.lookup(shifted), factor)
        return self._derivatives[var]


@lru_cache(maxsize=None)
def monomial_basis(nvars: int, max_degree: int) -> MonomialBasis:
    """Shared monomial basis per ``(nvars, max_degree)``."""
    return MonomialBasis(nvars, max_degree)


# ============================================================================
# 截断多项式 / Truncated Polynomials
# ============================================================================
class TruncatedPolynomial:
    """Polynomial in ``nvars`` variables truncated at total degree ``max_degree``.

    截断多元多项式，系数为分级字典序的一维数组。

    Parameters 参数
    -------------
    nvars : int
        Number of variables.
        变量个数。
    max_degree : int
        Truncation order N; every product discards terms of degree > N.
        截断阶数 N，乘积舍去次数大于 N 的项。
    coeffs : array_like, optional
        Coefficients in graded-lex order (zeros by default).
        分级字典序系数（默认全零）。
    """

    # numpy scalars defer to __rmul__ / __radd__
    __array_ufunc__ = None

    def __init__(self, nvars: int, max_degree: int, coeffs: Optional[np.ndarray] = None):
        self.nvars = int(nvars)
        self.max_degree = int(max_degree)
        self.basis = monomial_basis(self.nvars, self.max_degree)
        if coeffs is None:
            self.coeffs = np.zeros(self.basis.size)
        else:
            coeffs = np.asarray(coeffs, dtype=float)
            if coeffs.shape != (self.basis.size,):
                raise DimensionError(
                    f"expected {self.basis.size} coefficients, got {coeffs.shape}")
            self.coeffs = coeffs
        self._gradient_cache: Optional[List["TruncatedPolynomial"]] = None

    # ----- constructors -----
    @classmethod
    def zero(cls, nvars: int, max_degree: int) -> "TruncatedPolynomial":
        return cls(nvars, max_degree)

    @classmethod
    def constant(cls, value: float, nvars: int, max_degree: int) -> "TruncatedPolynomial":
        poly = cls(nvars, max_degree)
        poly.coeffs[0] = value
        return poly

    @classmethod
    def variable(cls, var: int, nvars: int, max_degree: int) -> "TruncatedPolynomial":
        if not 0 <= var < nvars:
            raise DimensionError(f"variable {var} outside 0..{nvars - 1}")
        poly = cls(nvars, max_degree)
        if max_degree >= 1:
            exps = np.zeros(nvars, dtype=int)
            exps[var] = 1
            poly.coeffs[poly.basis.index(exps)] = 1.0
        return poly

    @classmethod
    def from_terms(cls, terms: Mapping[Tuple[int, ...], float], nvars: int,
                   max_degree: int) -> "TruncatedPolynomial":
        """Build from ``{exponent tuple: coefficient}``; terms above N are dropped."""
        poly = cls(nvars, max_degree)
        for exps, coef in terms.items():
            if sum(exps) <= max_degree:
                poly.coeffs[poly.basis.index(exps)] += coef
        return poly

    @classmethod
    def quadratic_form(cls, matrix: np.ndarray, max_degree: int = 2) -> "TruncatedPolynomial":
        """Polynomial ``½ xᵀ S x`` of a symmetric matrix S."""
        S = np.asarray(matrix, dtype=float)
        S = 0.5 * (S + S.T)
        n = S.shape[0]
        poly = cls(n, max_degree)
        for i in range(n):
            for j in range(i, n):
                exps = np.zeros(n, dtype=int)
                exps[i] += 1
                exps[j] += 1
                poly.coeffs[poly.basis.index(exps)] = 0.5 * S[i, i] if i == j else S[i, j]
        return poly

    # ----- inspection -----
    def _check_compatible(self, other: "TruncatedPolynomial") -> None:
        if other.nvars != self.nvars or other.max_degree != self.max_degree:
            raise DimensionError(
                f"incompatible polynomials ({self.nvars}, {self.max_degree}) vs "
                f"({other.nvars}, {other.max_degree})")

    def copy(self) -> "TruncatedPolynomial":
        return TruncatedPolynomial(self.nvars, self.max_degree, self.coeffs.copy())

    @property
    def constant_term(self) -> float:
        return float(self.coeffs[0])

    def coefficient(self, exponents: Sequence[int]) -> float:
        return float(self.coeffs[self.basis.index(exponents)])

    def terms(self):
        """Iterate ``(exponent tuple, coefficient)`` over nonzero terms."""
        for k in np.nonzero(self.coeffs)[0]:
            yield tuple(int(e) for e in self.basis.exponents[k]), float(self.coeffs[k])

    def degree_part(self, degree: int) -> "TruncatedPolynomial":
        out = TruncatedPolynomial.zero(self.nvars, self.max_degree)
        mask = self.basis.degrees == degree
        out.coeffs[mask] = self.coeffs[mask]
        return out

    def without_low_degrees(self, min_degree: int) -> "TruncatedPolynomial":
        out = self.copy()
        out.coeffs[self.basis.degrees < min_degree] = 0.0
        return out

    def truncate(self, max_degree: int) -> "TruncatedPolynomial":
        """Re-embed at another truncation order (lower drops terms, higher pads)."""
        target = monomial_basis(self.nvars, max_degree)
        out = TruncatedPolynomial.zero(self.nvars, max_degree)
        keep = self.basis.degrees <= max_degree
        out.coeffs[target.lookup(self.basis.exponents[keep])] = self.coeffs[keep]
        return out

    def quadratic_matrix(self) -> np.ndarray:
        """Hessian at the origin (the matrix S of the quadratic part ½xᵀSx)."""
        S = np.zeros((self.nvars, self.nvars))
        for k in np.nonzero(self.basis.degrees == 2)[0]:
            idx = np.nonzero(self.basis.exponents[k])[0]
            if idx.size == 1:
                S[idx[0], idx[0]] = 2.0 * self.coeffs[k]
            else:
                S[idx[0], idx[1]] = S[idx[1], idx[0]] = self.coeffs[k]
        return S

    def linear_coefficients(self) -> np.ndarray:
        out = np.zeros(self.nvars)
        for k in np.nonzero(self.basis.degrees == 1)[0]:
            out[np.argmax(self.basis.exponents[k])] = self.coeffs[k]
        return out

    def is_close(self, other: "TruncatedPolynomial", atol: float = 1e-12,
                 rtol: float = 1e-9) -> bool:
        self._check_compatible(other)
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=rtol))

    # ----- arithmetic -----
    def __add__(self, other):
        if isinstance(other, TruncatedPolynomial):
            self._check_compatible(other)
            return TruncatedPolynomial(self.nvars, self.max_degree, self.coeffs + other.coeffs)
        out = self.copy()
        out.coeffs[0] += float(other)
        return out

    __radd__ = __add__

    def __neg__(self):
        return TruncatedPolynomial(self.nvars, self.max_degree, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, TruncatedPolynomial):
            return multiply(self, other)
        return TruncatedPolynomial(self.nvars, self.max_degree, self.coeffs * float(other))

    __rmul__ = __mul__

    def __truediv__(self, other: float):
        return TruncatedPolynomial(self.nvars, self.max_degree, self.coeffs / float(other))

    def __pow__(self, exponent: int):
        if int(exponent) != exponent or exponent < 0:
            return power_series(self, exponent)
        result = TruncatedPolynomial.constant(1.0, self.nvars, self.max_degree)
        base = self
        e = int(exponent)
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    # ----- calculus -----
    def differentiate(self, var: int) -> "TruncatedPolynomial":
        """Exact partial derivative; the result keeps the same truncation order."""
        if not 0 <= var < self.nvars:
            raise DimensionError(f"variable {var} outside 0..{self.nvars - 1}")
        source, target, factor = self.basis.derivative(var)
        out = TruncatedPolynomial.zero(self.nvars, self.max_degree)
        np.add.at(out.coeffs, target, self.coeffs[source] * factor)
        return out

    def gradient_polynomials(self) -> List["TruncatedPolynomial"]:
        if self._gradient_cache is None:
            self._gradient_cache = [self.differentiate(v) for v in range(self.nvars)]
        return self._gradient_cache

    def _monomials(self, points: np.ndarray) -> np.ndarray:
        x = np.asarray(points, dtype=float)
        if x.shape[-1] != self.nvars:
            raise DimensionError(f"points need {self.nvars} components, got {x.shape[-1]}")
        return np.prod(x[..., None, :] ** self.basis.exponents, axis=-1)

    def evaluate(self, points: ArrayLike) -> ArrayLike:
        """Evaluate at points of shape ``(..., nvars)``."""
        return self._monomials(points) @ self.coeffs

    __call__ = evaluate

    def gradient(self, points: ArrayLike) -> np.ndarray:
        """Gradient at points of shape ``(..., nvars)``; result ``(..., nvars)``."""
        mono = self._monomials(points)
        stacked = np.stack([g.coeffs for g in self.gradient_polynomials()], axis=1)
        return mono @ stacked

    def hessian(self, points: ArrayLike) -> np.ndarray:
        """Hessian at points of shape ``(..., nvars)``; result ``(..., nvars, nvars)``."""
        mono = self._monomials(points)
        rows = []
        for g in self.gradient_polynomials():
            stacked = np.stack([h.coeffs for h in g.gradient_polynomials()], axis=1)
            rows.append(mono @ stacked)
        return np.stack(rows, axis=-2)

    # ----- serialization -----
    def to_dict(self) -> dict:
        return {
            "nvars": self.nvars,
            "max_degree": self.max_degree,
            "terms": [{"exps": list(e), "coef": c} for e, c in self.terms()],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TruncatedPolynomial":
        return cls.from_terms({tuple(t["exps"]): float(t["coef"]) for t in data["terms"]},
                              int(data["nvars"]), int(data["max_degree"]))

    def __repr__(self) -> str:
        nz = int(np.count_nonzero(self.coeffs))
        return (f"TruncatedPolynomial(nvars={self.nvars}, max_degree={self.max_degree}, "
                f"nonzero={nz})")


# ============================================================================
# 代数运算 / Algebra
# ============================================================================
def multiply(a: TruncatedPolynomial, b: TruncatedPolynomial) -> TruncatedPolynomial:
    """Truncated product: all terms of degree <= N of ``a * b``.

    截断乘积，保留次数不超过 N 的项。
    """
    a._check_compatible(b)
    left, right, target = a.basis.products
    weights = a.coeffs[left] * b.coeffs[right]
    coeffs = np.bincount(target, weights=weights, minlength=a.basis.size)
    return TruncatedPolynomial(a.nvars, a.max_degree, coeffs)


def compose(f: TruncatedPolynomial,
            substitutions: Mapping[int, Union[int, TruncatedPolynomial]],
            nvars: Optional[int] = None) -> TruncatedPolynomial:
    """Substitute polynomials (or renamed variables) for variables of ``f``.

    复合：将 ``f`` 的变量替换为多项式或输出空间中的变量。

    Parameters 参数
    -------------
    f : TruncatedPolynomial
        Outer polynomial.
        外层多项式。
    substitutions : mapping
        ``var -> TruncatedPolynomial`` (all in one output space) or
        ``var -> int`` (rename into output variable). Unmentioned variables
        keep their index.
        变量到多项式或到输出变量编号的映射；未列出的变量保持编号不变。
    nvars : int, optional
        Output variable count when no polynomial substitution fixes it.
        无多项式替换时的输出变量数。

    Returns 返回
    ----------
    TruncatedPolynomial
        Degree <= N part of the exact composition.
        精确复合的次数不超过 N 的部分。

    Notes 说明
    ---------
    Terms are grouped by their exponents on the substituted variables; renamed
    variables are scattered directly, so the number of truncated products
    equals the number of distinct exponent patterns.
    """
    polys = {int(v): s for v, s in substitutions.items() if isinstance(s, TruncatedPolynomial)}
    renames = {int(v): int(s) for v, s in substitutions.items()
               if not isinstance(s, TruncatedPolynomial)}
    if polys:
        first = next(iter(polys.values()))
        out_nvars, out_degree = first.nvars, first.max_degree
        for s in polys.values():
            first._check_compatible(s)
        if nvars is not None and nvars != out_nvars:
            raise DimensionError("nvars disagrees with the substituted polynomials")
    else:
        out_nvars = f.nvars if nvars is None else int(nvars)
        out_degree = f.max_degree
    for v in range(f.nvars):
        if v not in polys and v not in renames:
            renames[v] = v
    for v, target in renames.items():
        if not 0 <= v < f.nvars or not 0 <= target < out_nvars:
            raise DimensionError(f"inconsistent variable sets: {v} -> {target}")

    out_basis = monomial_basis(out_nvars, out_degree)
    nz = np.nonzero(f.coeffs)[0]
    result = np.zeros(out_basis.size)
    if nz.size == 0:
        return TruncatedPolynomial(out_nvars, out_degree, result)
    exps = f.basis.exponents[nz]
    coefs = f.coeffs[nz]

    renamed = np.zeros((nz.size, out_nvars), dtype=np.int64)
    for v, target in renames.items():
        renamed[:, target] += exps[:, v]
    keep = renamed.sum(axis=1) <= out_degree
    sub_vars = sorted(polys)
    patterns = exps[:, sub_vars] if sub_vars else np.zeros((nz.size, 0), dtype=np.int64)

    powers: Dict[Tuple[int, int], TruncatedPolynomial] = {}

    def power(var: int, e: int) -> TruncatedPolynomial:
        if (var, e) not in powers:
            powers[(var, e)] = polys[var] if e == 1 else power(var, e - 1) * polys[var]
        return powers[(var, e)]

    if sub_vars:
        unique, inverse = np.unique(patterns, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
    else:
        unique = np.zeros((1, 0), dtype=np.int64)
        inverse = np.zeros(nz.size, dtype=np.int64)
    for g, pattern in enumerate(unique):
        members = np.nonzero((inverse == g) & keep)[0]
        if members.size == 0:
            continue
        part = np.zeros(out_basis.size)
        np.add.at(part, out_basis.lookup(renamed[members]), coefs[members])
        term = TruncatedPolynomial(out_nvars, out_degree, part)
        for var, e in zip(sub_vars, pattern):
            if e > 0:
                term = term * power(var, int(e))
        result += term.coeffs
    return TruncatedPolynomial(out_nvars, out_degree, result)


def power_series(p: TruncatedPolynomial, alpha: float) -> TruncatedPolynomial:
    """``p ** alpha`` by the binomial series about the constant term.

    以常数项为展开点的二项式级数 ``(c+u)^α = c^α Σ C(α,k)(u/c)^k``。
    """
    if float(alpha).is_integer() and alpha >= 0:
        return p ** int(alpha)
    c = p.constant_term
    if c == 0.0:
        raise DomainError("power series about a zero constant term")
    if c < 0.0 and not float(alpha).is_integer():
        raise DomainError("non-integer power of a negative constant term")
    u = (p - c) / c
    result = TruncatedPolynomial.constant(1.0, p.nvars, p.max_degree)
    term = TruncatedPolynomial.constant(1.0, p.nvars, p.max_degree)
    coef = 1.0
    for k in range(1, p.max_degree + 1):
        coef *= (alpha - k + 1) / k
        term = term * u
        result = result + term * coef
    return result * (c ** alpha)


def function_series(p: TruncatedPolynomial, name: str) -> TruncatedPolynomial:
    """Taylor series of ``exp``, ``log``, ``sin`` or ``cos`` applied to ``p``."""
    c = p.constant_term
    N = p.max_degree
    if name == "exp":
        derivs = [math.exp(c)] * (N + 1)
    elif name == "log":
        if c <= 0.0:
            raise DomainError("log of a non-positive constant term")
        derivs = [math.log(c)] + [(-1) ** (k + 1) * math.factorial(k - 1) / c ** k
                                  for k in range(1, N + 1)]
    elif name == "sin":
        cycle = [math.sin(c), math.cos(c), -math.sin(c), -math.cos(c)]
        derivs = [cycle[k % 4] for k in range(N + 1)]
    elif name == "cos":
        cycle = [math.cos(c), -math.sin(c), -math.cos(c), math.sin(c)]
        derivs = [cycle[k % 4] for k in range(N + 1)]
    else:
        raise ValueError(f"unsupported function {name!r}")
    u = p - c
    result = TruncatedPolynomial.constant(derivs[0], p.nvars, N)
    term = TruncatedPolynomial.constant(1.0, p.nvars, N)
    for k in range(1, N + 1):
        term = term * u
        result = result + term * (derivs[k] / math.factorial(k))
    return result


# ============================================================================
# 级数反演 / Series Inversion
# ============================================================================
@dataclass
class PolynomialSystem:
    """Equations ``E_j(z) = 0`` over one variable space, split into unknowns and knowns.

    多项式方程组：未知量与已知量划分变量空间。
    """

    equations: List[TruncatedPolynomial]
    unknowns: Tuple[int, ...]
    knowns: Tuple[int, ...]

    def __post_init__(self):
        self.unknowns = tuple(int(u) for u in self.unknowns)
        self.knowns = tuple(int(k) for k in self.knowns)
        if not self.equations:
            raise DimensionError("empty polynomial system")
        first = self.equations[0]
        for eq in self.equations[1:]:
            first._check_compatible(eq)
        if len(self.equations) != len(self.unknowns):
            raise DimensionError("number of equations must equal number of unknowns")
        if set(self.unknowns) & set(self.knowns):
            raise DimensionError("unknowns and knowns overlap")
        if sorted(self.unknowns + self.knowns) != list(range(first.nvars)):
            raise DimensionError("unknowns and knowns must cover every variable")

    @property
    def nvars(self) -> int:
        return self.equations[0].nvars

    @property
    def max_degree(self) -> int:
        return self.equations[0].max_degree

    def linear_part(self) -> np.ndarray:
        """Jacobian of the equations with respect to the unknowns at the origin."""
        lin = np.array([eq.linear_coefficients() for eq in self.equations])
        return lin[:, list(self.unknowns)]


@dataclass
class InversionResult:
    """Outcome of :func:`invert_series`.

    级数反演结果：唯一解、折叠（两支）、无穷族或未分类。
    """

    outcome: str
    n_solutions: Optional[float]
    knowns: Tuple[int, ...]
    unknowns: Tuple[int, ...]
    determinant: float
    solutions: Dict[int, TruncatedPolynomial] = field(default_factory=dict)
    eliminated: Dict[int, TruncatedPolynomial] = field(default_factory=dict)
    reduced: Optional[TruncatedPolynomial] = None
    free_unknown: Optional[int] = None
    leading_degree: Optional[int] = None

    @property
    def is_unique(self) -> bool:
        return self.outcome == "unique"

    def branches(self, known_values: ArrayLike) -> List[np.ndarray]:
        """Numeric unknown vectors (ordered as ``unknowns``) for given known values.

        For a fold these are the real roots of the reduced equation closest to
        the expansion point; there are two or none.
        """
        k = np.atleast_1d(np.asarray(known_values, dtype=float))
        if k.shape != (len(self.knowns),):
            raise DimensionError(f"expected {len(self.knowns)} known values")
        if self.outcome == "unique":
            return [np.array([float(self.solutions[u](k)) for u in self.unknowns])]
        if self.reduced is None:
            return []
        count = 2 if self.outcome == "fold" else int(self.leading_degree or 0)
        exps = self.reduced.basis.exponents
        weights = self.reduced.coeffs * np.prod(k[None, :] ** exps[:, 1:], axis=1)
        coefs = np.bincount(exps[:, 0], weights=weights, minlength=self.reduced.max_degree + 1)
        nz = np.nonzero(np.abs(coefs) > 0.0)[0]
        if nz.size == 0:
            return []
        roots = np.roots(coefs[: nz[-1] + 1][::-1])
        real = [r.real for r in roots if abs(r.imag) <= 1e-8 * max(1.0, abs(r))]
        real.sort(key=abs)
        out = []
        for u in real[:count]:
            point = np.concatenate([[u], k])
            vec = []
            for unknown in self.unknowns:
                if unknown == self.free_unknown:
                    vec.append(u)
                else:
                    vec.append(float(self.eliminated[unknown](point)))
            out.append(np.asarray(vec))
        return out


def cofactor_scale(A: np.ndarray) -> float:
    """Largest absolute cofactor of a square matrix (1 for 1x1)."""
    m = A.shape[0]
    if m <= 1:
        return 1.0
    best = 0.0
    for i in range(m):
        for j in range(m):
            minor = np.delete(np.delete(A, i, axis=0), j, axis=1)
            best = max(best, abs(np.linalg.det(minor)))
    return best


def is_singular(A: np.ndarray, rtol: float = DETERMINANT_RTOL) -> bool:
    """``|det A| <= rtol * max|cofactor|`` (always singular when every cofactor vanishes)."""
    if A.shape[0] == 0:
        return False
    scale = cofactor_scale(A)
    return abs(np.linalg.det(A)) <= rtol * scale or scale == 0.0


def _solve_regular(system: PolynomialSystem, N: int, A: np.ndarray) -> Dict[int, TruncatedPolynomial]:
    """Fixed-point iteration ``u <- -A⁻¹ R(u, k)`` gaining one degree per pass."""
    nk = len(system.knowns)
    A_inv = np.linalg.inv(A)
    remainders = []
    for eq in system.equations:
        lin = eq.linear_coefficients()
        rem = eq.copy()
        for u in system.unknowns:
            exps = np.zeros(eq.nvars, dtype=int)
            exps[u] = 1
            rem.coeffs[eq.basis.index(exps)] -= lin[u]
        remainders.append(rem.truncate(N) if rem.max_degree != N else rem)
    renames = {k: i for i, k in enumerate(system.knowns)}
    current = [TruncatedPolynomial.zero(nk, N) for _ in system.unknowns]
    for _ in range(N):
        subs = dict(renames)
        subs.update({u: current[j] for j, u in enumerate(system.unknowns)})
        values = np.stack([compose(r, subs, nvars=nk).coeffs for r in remainders])
        updated = -A_inv @ values
        current = [TruncatedPolynomial(nk, N, row) for row in updated]
    return {u: current[j] for j, u in enumerate(system.unknowns)}


def invert_series(system: PolynomialSystem, N: Optional[int] = None,
                  rtol: float = DETERMINANT_RTOL) -> InversionResult:
    """Solve ``E(u, k) = 0`` for the unknowns as truncated series in the knowns.

    级数反演：把未知量表示为已知量的截断级数；线性部分奇异时进行分类。

    Parameters 参数
    -------------
    system : PolynomialSystem
        Equations with zero constant terms at the expansion point.
        在展开点常数项为零的方程组。
    N : int, optional
        Truncation order of the solution (defaults to the system's).
        解的截断阶数（默认与方程组一致）。
    rtol : float
        Singularity test ``|det| <= rtol * max|cofactor|``.
        奇异判据的相对容差。

    Returns 返回
    ----------
    InversionResult
        ``unique`` (polynomial solutions), ``fold`` (two branches),
        ``infinite`` (corank >= 2) or ``unclassified`` (leading degree >= 3).

    Raises 异常
    ---------
    ClassificationError
        No pure term in the free unknown up to the truncation order.
    """
    N = system.max_degree if N is None else int(N)
    for eq in system.equations:
        if abs(eq.constant_term) > 1e-12 * max(1.0, np.abs(eq.coeffs).max()):
            raise DimensionError("equations must vanish at the expansion point")
    A = system.linear_part()
    det = float(np.linalg.det(A)) if A.size else 1.0
    if not is_singular(A, rtol):
        return InversionResult("unique", 1, system.knowns, system.unknowns, det,
                               solutions=_solve_regular(system, N, A))

    m = len(system.unknowns)
    s = np.linalg.svd(A, compute_uv=False)
    rank = int(np.sum(s > max(rtol, 1e-12) * s[0])) if s[0] > 0 else 0
    rank = min(rank, m - 1)
    if m - rank >= 2:
        return InversionResult("infinite", math.inf, system.knowns, system.unknowns, det)

    # corank one: eliminate m-1 unknowns through the largest first minor
    best, rows, cols = -1.0, (), ()
    for r in itertools.combinations(range(m), m - 1):
        for c in itertools.combinations(range(m), m - 1):
            value = abs(np.linalg.det(A[np.ix_(r, c)])) if m > 1 else 1.0
            if value > best:
                best, rows, cols = value, r, c
    free_col = next(c for c in range(m) if c not in cols)
    free = system.unknowns[free_col]
    last_row = next(r for r in range(m) if r not in rows)
    nk = len(system.knowns)
    reduced_vars = {free: 0}
    reduced_vars.update({k: i + 1 for i, k in enumerate(system.knowns)})
    eliminated: Dict[int, TruncatedPolynomial] = {}
    if m > 1:
        sub = PolynomialSystem([system.equations[r] for r in rows],
                               tuple(system.unknowns[c] for c in cols),
                               (free,) + system.knowns)
        inner = invert_series(sub, N, rtol)
        if not inner.is_unique:
            return InversionResult("infinite", math.inf, system.knowns, system.unknowns, det)
        eliminated = inner.solutions
    subs: Dict[int, Union[int, TruncatedPolynomial]] = dict(reduced_vars)
    subs.update(eliminated)
    eq = system.equations[last_row]
    reduced = compose(eq if eq.max_degree == N else eq.truncate(N), subs, nvars=nk + 1)

    exps = reduced.basis.exponents
    pure = (exps[:, 1:].sum(axis=1) == 0) & (exps[:, 0] >= 2)
    scale = max(1.0, float(np.abs(reduced.coeffs).max()))
    leading = None
    for k in np.nonzero(pure)[0]:
        if abs(reduced.coeffs[k]) > 1e-10 * scale:
            leading = int(exps[k, 0])
            break
    if leading is None:
        raise ClassificationError(
            f"no nonzero term in the free unknown up to order {N}; raise the order")
    outcome = "fold" if leading == 2 else "unclassified"
    return InversionResult(outcome, 2 if leading == 2 else None, system.knowns,
                           system.unknowns, det, eliminated=eliminated, reduced=reduced,
                           free_unknown=free, leading_degree=leading)


__all__ = [
    "MonomialBasis",
    "monomial_basis",
    "TruncatedPolynomial",
    "multiply",
    "compose",
    "power_series",
    "function_series",
    "PolynomialSystem",
    "InversionResult",
    "cofactor_scale",
    "is_singular",
    "invert_series",
]
