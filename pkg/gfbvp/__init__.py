"""
GFBVP: 生成函数边值问题库 / Generating-Function Boundary Value Problems
======================================================================

一个用生成函数求解哈密顿系统两点边值问题的 Python 库：沿参考轨迹求解一次
Hamilton-Jacobi 方程（截断幂级数），此后任意边界条件组合的边值问题只需多项式
求值。
A Python library solving two-point boundary value problems of Hamiltonian
systems with generating functions: the Hamilton-Jacobi equation is solved once
along a reference trajectory as a truncated power series, after which any
boundary value problem costs a polynomial evaluation.

本包提供的方法 / This package provides
--------------------------------------

**线性理论 / Linear theory**
    状态转移矩阵、二次生成函数（F1..F4 及一般划分）、矩阵 Riccati 方程、
    奇异时间检测
    State transition matrices, quadratic generating functions of any
    partition, matrix Riccati equations, singular-time detection

**非线性理论 / Nonlinear theory**
    截断级数 Hamilton-Jacobi 求解、Legendre 变换、级数反演与焦散分类
    Truncated-series Hamilton-Jacobi solver, Legendre transforms, series
    inversion with caustic classification

**应用 / Applications**
    周期轨道搜索、线性二次最优控制、不稳定流形、编队重构代价图
    Periodic-orbit search, linear-quadratic optimal control, unstable
    manifolds, formation reconfiguration cost maps

模块 / Modules
--------------
- **dynamics**: 哈密顿模型、相流、参考轨迹 / Hamiltonian models, flow, references
- **poly**: 截断多元多项式与级数反演 / Truncated polynomials and series inversion
- **partition**: 边界划分 / Boundary partitions
- **lineargf**: 线性化生成函数 / Linearized generating functions
- **hj**: Hamilton-Jacobi 级数求解 / Hamilton-Jacobi series solver
- **tpbvp**: 两点边值问题 / Two-point boundary value problems
- **applications**: 应用 / Applications
- **config**, **cli**: 场景配置与命令行 / Scenario configuration and command line

快速开始 / Quick Start
----------------------

**示例: Hill 问题 L2 附近的 Lambert 问题 / Example: Lambert problem near Hill L2**::

    import gfbvp

    model = gfbvp.hill()
    ref = gfbvp.ReferenceTrajectory.equilibrium(model, gfbvp.libration_point(model, "L2"))
    gf = gfbvp.solve_gf(model, ref, "F2", 6, 0.0, 3.5, switch_kinds=True)
    sol = gfbvp.solve_lambert(gf, q0=[0.01, 0.0], q=[0.01, 0.0], T=3.03353)
    print(sol.p0, sol.p)

作者 / Authors: GFBVP Contributors
许可证 / License: MIT
版本 / Version: 0.1.0
"""

__version__ = "0.1.0"

# ============================================================================
# 常量与异常 / Constants and Errors
# ============================================================================
from .errors import (
    GFBVPError,
    DomainError,
    DimensionError,
    IntegrationError,
    SingularKindError,
    CausticError,
    ClassificationError,
    ConfigError,
    ArtifactError,
    TrustRadiusWarning,
    FlowResidualWarning,
)

# ============================================================================
# 动力学 / Dynamics
# ============================================================================
from .dynamics import (
    PhaseState,
    HamiltonianModel,
    harmonic_oscillator,
    hill,
    crtbp,
    from_expression,
    get_model,
    eval_hamiltonian,
    hamilton_rhs,
    integration_counter,
    flow,
    ReferenceTrajectory,
    taylor_hamiltonian,
    hessian_blocks,
    linear_eigen,
    libration_points,
    libration_point,
)

# ============================================================================
# 多项式代数 / Polynomial Algebra
# ============================================================================
from .poly import (
    TruncatedPolynomial,
    compose,
    PolynomialSystem,
    InversionResult,
    invert_series,
)

# ============================================================================
# 线性理论 / Linear Theory
# ============================================================================
from .partition import BoundaryPartition
from .lineargf import (
    QuadraticHamiltonian,
    StateTransition,
    stm,
    QuadraticGF,
    gf_from_stm,
    stm_from_gf,
    integrate_quadratic_gf,
    perturbation_matrices,
    detect_singularity,
)

# ============================================================================
# 非线性理论 / Nonlinear Theory
# ============================================================================
from .hj import (
    GeneratingFunction,
    solve_gf,
    eval_gradients,
    legendre_transform,
    legendre_polynomial,
    estimate_trust_radius,
    hj_residual,
    propagate_state,
    monitor_singularity,
    save_gf,
    load_gf,
)

# ============================================================================
# 边值问题 / Boundary Value Problems
# ============================================================================
from .tpbvp import (
    BVPSpec,
    BVPSolution,
    solve_bvp,
    solve_batch,
    solve_lambert,
    enumerate_solutions,
)

# ============================================================================
# 应用 / Applications
# ============================================================================
from .applications import (
    periodic_time_scan,
    periodic_position_scan,
    periodic_family_scan,
    periodic_f2_solve,
    small_amplitude_period,
    LQProblem,
    lq_solve,
    optimal_control_reduce,
    hyperbolic_eigen,
    manifold_propagate,
    growth_exponent,
    formation_cost_map,
    characteristic_time,
    days_to_time,
    time_to_days,
    km_to_length,
    momentum_to_ms,
)

# ============================================================================
# 公共API / Public API
# ============================================================================
__all__ = [
    # 版本 / Version
    '__version__',

    # 常量与异常 / Constants and Errors
    'GFBVPError',
    'DomainError',
    'DimensionError',
    'IntegrationError',
    'SingularKindError',
    'CausticError',
    'ClassificationError',
    'ConfigError',
    'ArtifactError',
    'TrustRadiusWarning',
    'FlowResidualWarning',

    # 动力学 / Dynamics
    'PhaseState',
    'HamiltonianModel',
    'harmonic_oscillator',
    'hill',
    'crtbp',
    'from_expression',
    'get_model',
    'eval_hamiltonian',
    'hamilton_rhs',
    'integration_counter',
    'flow',
    'ReferenceTrajectory',
    'taylor_hamiltonian',
    'hessian_blocks',
    'linear_eigen',
    'libration_points',
    'libration_point',

    # 多项式代数 / Polynomial Algebra
    'TruncatedPolynomial',
    'compose',
    'PolynomialSystem',
    'InversionResult',
    'invert_series',

    # 线性理论 / Linear Theory
    'BoundaryPartition',
    'QuadraticHamiltonian',
    'StateTransition',
    'stm',
    'QuadraticGF',
    'gf_from_stm',
    'stm_from_gf',
    'integrate_quadratic_gf',
    'perturbation_matrices',
    'detect_singularity',

    # 非线性理论 / Nonlinear Theory
    'GeneratingFunction',
    'solve_gf',
    'eval_gradients',
    'legendre_transform',
    'legendre_polynomial',
    'estimate_trust_radius',
    'hj_residual',
    'propagate_state',
    'monitor_singularity',
    'save_gf',
    'load_gf',

    # 边值问题 / Boundary Value Problems
    'BVPSpec',
    'BVPSolution',
    'solve_bvp',
    'solve_batch',
    'solve_lambert',
    'enumerate_solutions',

    # 应用 / Applications
    'periodic_time_scan',
    'periodic_position_scan',
    'periodic_family_scan',
    'periodic_f2_solve',
    'small_amplitude_period',
    'LQProblem',
    'lq_solve',
    'optimal_control_reduce',
    'hyperbolic_eigen',
    'manifold_propagate',
    'growth_exponent',
    'formation_cost_map',
    'characteristic_time',
    'days_to_time',
    'time_to_days',
    'km_to_length',
    'momentum_to_ms',
]
