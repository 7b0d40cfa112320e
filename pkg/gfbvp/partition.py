"""
边界划分 / Boundary Partitions
==============================

生成函数的类型由两端哪些坐标为自变量决定：终端 ``I_p`` 中的位置与其余动量，
初端 ``K_r`` 中的位置与其余动量。F1..F4 为特例。
A generating-function kind is fixed by which coordinates are independent:
positions in ``I_p`` and momenta elsewhere at the final endpoint, positions in
``K_r`` and momenta elsewhere at the initial endpoint. F1..F4 are special
cases.

梯度符号约定 / Gradient sign convention::

    p_I  = +∂F/∂q_I      q_Ī  = −∂F/∂p_Ī
    p0_K = −∂F/∂q0_K     q0_K̄ = +∂F/∂p0_K̄

索引从 0 开始。/ Indices are 0-based.
"""

import itertools
import re
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import ConfigError, DimensionError

_NAMED = {
    "F1": (True, True),
    "F2": (True, False),
    "F3": (False, True),
    "F4": (False, False),
}

_BLOCKS = {"F1": "Phi_qp", "F2": "Phi_qq", "F3": "Phi_pp", "F4": "Phi_pq"}


@dataclass(frozen=True)
class BoundaryPartition:
    """Independent-variable choice of a generating function.

    生成函数的自变量划分。

    Parameters 参数
    -------------
    n : int
        Degrees of freedom.
    I_p : tuple of int
        Final-endpoint indices whose position is independent.
        终端以位置为自变量的分量。
    K_r : tuple of int
        Initial-endpoint indices whose position is independent.
        初端以位置为自变量的分量。
    """

    n: int
    I_p: Tuple[int, ...] = ()
    K_r: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError("partition needs n >= 1")
        for name in ("I_p", "K_r"):
            values = tuple(sorted(set(int(v) for v in getattr(self, name))))
            if any(not 0 <= v < self.n for v in values):
                raise DimensionError(f"{name} must be a subset of 0..{self.n - 1}")
            object.__setattr__(self, name, values)

    # ----- named kinds -----
    @classmethod
    def named(cls, kind: str, n: int) -> "BoundaryPartition":
        if kind not in _NAMED:
            raise ConfigError(f"unknown kind {kind!r}")
        final_q, initial_q = _NAMED[kind]
        everything = tuple(range(n))
        return cls(n, everything if final_q else (), everything if initial_q else ())

    @classmethod
    def F1(cls, n: int) -> "BoundaryPartition":
        return cls.named("F1", n)

    @classmethod
    def F2(cls, n: int) -> "BoundaryPartition":
        return cls.named("F2", n)

    @classmethod
    def F3(cls, n: int) -> "BoundaryPartition":
        return cls.named("F3", n)

    @classmethod
    def F4(cls, n: int) -> "BoundaryPartition":
        return cls.named("F4", n)

    @classmethod
    def parse(cls, text: str, n: int) -> "BoundaryPartition":
        """Parse ``"F2"`` or ``"I=1,2;K="`` (1-based, as written on the command line)."""
        text = text.strip()
        if text.upper() in _NAMED:
            return cls.named(text.upper(), n)
        match = re.fullmatch(r"\s*I\s*=\s*([\d,\s]*);\s*K\s*=\s*([\d,\s]*)", text)
        if not match:
            raise ConfigError(f"bad partition spec {text!r}; use F1..F4 or 'I=1,2;K='")

        def indices(group: str) -> Tuple[int, ...]:
            return tuple(int(v) - 1 for v in group.replace(" ", "").split(",") if v)

        try:
            return cls(n, indices(match.group(1)), indices(match.group(2)))
        except DimensionError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def all_partitions(cls, n: int) -> List["BoundaryPartition"]:
        subsets = [s for r in range(n + 1) for s in itertools.combinations(range(n), r)]
        return [cls(n, i, k) for i in subsets for k in subsets]

    # ----- properties -----
    @property
    def I_bar(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.I_p)

    @property
    def K_bar(self) -> Tuple[int, ...]:
        return tuple(k for k in range(self.n) if k not in self.K_r)

    @property
    def kind(self) -> str:
        """``"F1"``..``"F4"`` or the general ``"I=..;K=.."`` label (1-based)."""
        for name in _NAMED:
            if BoundaryPartition.named(name, self.n) == self:
                return name
        fmt = lambda s: ",".join(str(v + 1) for v in s)
        return f"I={fmt(self.I_p)};K={fmt(self.K_r)}"

    def __str__(self) -> str:
        return self.kind

    @property
    def identity_admissible(self) -> bool:
        """True when the kind is regular at t = t0 (``K_r`` equals the complement of ``I_p``)."""
        return set(self.K_r) == set(self.I_bar)

    def admissible_partner(self) -> "BoundaryPartition":
        """Regular-at-t0 partition sharing the final-endpoint choice."""
        return BoundaryPartition(self.n, self.I_p, self.I_bar)

    @property
    def block_name(self) -> str:
        kind = self.kind
        if kind in _BLOCKS:
            return _BLOCKS[kind]
        rows, cols = self.pivot_indices()
        return f"Phi[{rows};{cols}]"

    def pivot_indices(self) -> Tuple[List[int], List[int]]:
        """Rows and columns of the STM block whose inverse defines this kind."""
        n = self.n
        rows = list(self.I_p) + [n + a for a in self.I_bar]
        cols = list(self.K_bar) + [n + k for k in self.K_r]
        return sorted(rows), sorted(cols)

    # ----- variable bookkeeping -----
    @property
    def final_is_q(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(self.I_p)] = True
        return mask

    @property
    def initial_is_q(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(self.K_r)] = True
        return mask

    @property
    def signs(self) -> np.ndarray:
        """``D`` with dependent values ``y = D * ∇F(x)``."""
        return np.concatenate([np.where(self.final_is_q, 1.0, -1.0),
                               np.where(self.initial_is_q, -1.0, 1.0)])

    def independent(self, z1: np.ndarray, z0: np.ndarray) -> np.ndarray:
        """Independent values ``x`` from endpoint states ``(q, p)`` and ``(q0, p0)``."""
        n = self.n
        z1 = np.asarray(z1, dtype=float)
        z0 = np.asarray(z0, dtype=float)
        x1 = np.where(self.final_is_q, z1[..., :n], z1[..., n:])
        x0 = np.where(self.initial_is_q, z0[..., :n], z0[..., n:])
        return np.concatenate([x1, x0], axis=-1)

    def dependent(self, z1: np.ndarray, z0: np.ndarray) -> np.ndarray:
        n = self.n
        z1 = np.asarray(z1, dtype=float)
        z0 = np.asarray(z0, dtype=float)
        y1 = np.where(self.final_is_q, z1[..., n:], z1[..., :n])
        y0 = np.where(self.initial_is_q, z0[..., n:], z0[..., :n])
        return np.concatenate([y1, y0], axis=-1)

    def assemble(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Endpoint states ``(z1, z0)`` from independent ``x`` and dependent ``y``."""
        n = self.n
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        fq, iq = self.final_is_q, self.initial_is_q
        q1 = np.where(fq, x[..., :n], y[..., :n])
        p1 = np.where(fq, y[..., :n], x[..., :n])
        q0 = np.where(iq, x[..., n:], y[..., n:])
        p0 = np.where(iq, y[..., n:], x[..., n:])
        return np.concatenate([q1, p1], axis=-1), np.concatenate([q0, p0], axis=-1)

    def variable_names(self) -> Tuple[List[str], List[str]]:
        """Column names of the independent and dependent variables (1-based)."""
        indep, dep = [], []
        for a in range(self.n):
            q, p = f"q{a + 1}", f"p{a + 1}"
            indep.append(q if a in self.I_p else p)
            dep.append(p if a in self.I_p else q)
        for k in range(self.n):
            q, p = f"q0_{k + 1}", f"p0_{k + 1}"
            indep.append(q if k in self.K_r else p)
            dep.append(p if k in self.K_r else q)
        return indep, dep


def as_partition(kind, n: int) -> BoundaryPartition:
    """Accept a partition, a kind label or a spec string."""
    if isinstance(kind, BoundaryPartition):
        if kind.n != n:
            raise DimensionError(f"partition for n={kind.n} used with n={n}")
        return kind
    return BoundaryPartition.parse(str(kind), n)


__all__ = ["BoundaryPartition", "as_partition"]
