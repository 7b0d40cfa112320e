"""
异常与警告模块 / Exceptions and Warnings Module
===============================================

gfbvp 使用的异常层次。每个类同时继承一个内建异常
（输入错误为 ``ValueError``，数值失败为 ``RuntimeError``）。
Exception hierarchy used across gfbvp. Every class also derives from the
builtin a caller would expect (``ValueError`` for bad input, ``RuntimeError``
for numerical failure).
"""

from typing import Optional, Sequence, Tuple


class GFBVPError(Exception):
    """Root of all gfbvp errors. / 所有gfbvp异常的基类。"""


class DomainError(GFBVPError, ValueError):
    """State at or too close to a gravitational singularity.

    状态位于或过于接近引力奇点。
    """


class DimensionError(GFBVPError, ValueError):
    """Inconsistent dimensions, variable counts or truncation orders.

    维度、变量数目或截断阶数不一致。
    """


class IntegrationError(GFBVPError, RuntimeError):
    """The adaptive integrator failed (step-size underflow, solver failure).

    自适应积分器失败（步长下溢等）。
    """


class SingularKindError(GFBVPError, RuntimeError):
    """A generating-function kind is singular (pivot block or Riccati blow-up).

    生成函数类型奇异（主元块奇异或Riccati方程爆破）。

    Attributes 属性
    -------------
    kind : str or None
        Partition label of the singular kind.
    block : str or None
        Name of the singular STM block, e.g. ``"Phi_qp"``.
    time : float or None
        Time at which the singularity was met.
    bracket : tuple of float or None
        Interval known to contain the singular time.
    """

    def __init__(self,
                 message: str,
                 kind: Optional[str] = None,
                 block: Optional[str] = None,
                 time: Optional[float] = None,
                 bracket: Optional[Tuple[float, float]] = None):
        super().__init__(message)
        self.kind = kind
        self.block = block
        self.time = time
        self.bracket = bracket


class CausticError(SingularKindError):
    """Legendre transform onto a kind that is singular at the requested time.

    Legendre变换目标类型在该时刻奇异。``outcome`` 保存级数反演的分类结果。
    """

    def __init__(self, message: str, outcome=None, **kwargs):
        super().__init__(message, **kwargs)
        self.outcome = outcome


class ClassificationError(GFBVPError, RuntimeError):
    """Truncation order too low to classify a singular series inversion.

    截断阶数过低，无法对奇异级数反演进行分类。
    """


class ConfigError(GFBVPError, ValueError):
    """Invalid configuration or command-line usage. / 配置或命令行用法错误。"""


class ArtifactError(GFBVPError, ValueError):
    """Malformed artifact or artifact built for another model.

    文件格式错误，或文件对应的模型不匹配。
    """


class TrustRadiusWarning(UserWarning):
    """Evaluation outside the estimated trust radius of a truncated series."""


class FlowResidualWarning(UserWarning):
    """A boundary-value solution failed its flow-residual check."""


def describe_bracket(bracket: Optional[Sequence[float]]) -> str:
    """Format a time bracket for error messages."""
    if bracket is None:
        return "unknown"
    return f"[{bracket[0]:.10g}, {bracket[1]:.10g}]"
