"""
常数模块 / Constants Module
===========================

本模块集中定义 gfbvp 使用的单位换算与数值默认值，确保一致性和可维护性。
This module centralizes the unit conversions and numerical defaults used by
gfbvp to keep every solver consistent.

Hill 问题的无量纲单位取日地系统：时间单位为 1/n（n 为地球公转角速度），
长度单位为 μ^(1/3) 个天文单位。
Hill's problem is non-dimensionalized with the Sun-Earth system: the time unit
is 1/n (n the Earth's mean motion), the length unit μ^(1/3) AU.
"""

import numpy as np

# ============================================================================
# 日地系统 / Sun-Earth System
# ============================================================================
SUN_EARTH_MU = 3.03591e-6
"""日地系统质量比 / Sun-Earth(+Moon) mass ratio μ"""

SIDEREAL_YEAR_DAYS = 365.25636  # days
"""恒星年 / Sidereal year [days]"""

HILL_TIME_UNIT_DAYS = SIDEREAL_YEAR_DAYS / (2.0 * np.pi)  # ≈ 58.13 days
"""Hill 问题时间单位 / Hill time unit [days]

Formula / 公式: 1/n with n = 2π / sidereal year.
"""

ASTRONOMICAL_UNIT_KM = 1.495978707e8  # km
"""天文单位 / Astronomical unit [km]"""

HILL_LENGTH_UNIT_KM = ASTRONOMICAL_UNIT_KM * SUN_EARTH_MU ** (1.0 / 3.0)
"""Hill 问题长度单位 / Hill length unit [km]

≈ 2.166e6 km, so 0.01 units is roughly 21,660 km.
约 2.166e6 km，0.01 单位约为 21,660 km。
"""

HILL_MOMENTUM_UNIT_MS = HILL_LENGTH_UNIT_KM * 1e3 / (HILL_TIME_UNIT_DAYS * 86400.0)
"""Hill 问题动量（速度）单位 / Hill momentum unit [m/s]

Length unit divided by time unit; 1 unit is roughly 431 m/s.
长度单位除以时间单位，约 431 m/s。
"""

# ============================================================================
# 积分器默认值 / Integrator Defaults
# ============================================================================
DEFAULT_TOL = 1e-10
"""默认相对/绝对容差 / Default relative and absolute integration tolerance"""

DEFAULT_MAX_STEP = 0.01
"""HJ 积分最大步长 / Maximum step for the Hamilton-Jacobi integration

Bounds the spacing of the stored nodes used by cubic Hermite interpolation.
限制存储节点的间距（用于三次Hermite插值）。
"""

ENERGY_DRIFT_FACTOR = 100.0
"""能量漂移允许倍数 / Allowed energy drift as a multiple of the tolerance"""

DOMAIN_EXIT_DISTANCE = 1e-9
"""流积分中止距离 / Distance to a singular point that terminates a flow"""

DOMAIN_SINGULAR_DISTANCE = 1e-12
"""奇点判定距离 / Distance at which a state is rejected as singular"""

# ============================================================================
# 奇异性 / Singularities
# ============================================================================
PIVOT_CONDITION_LIMIT = 1e8
"""主元块条件数上限 / Scaled pivot condition ‖Φ‖·‖B⁻¹‖ above which a kind is singular"""

SINGULAR_GRID_DENSITY = 200
"""奇异时间搜索网格密度 / Samples per unit time when scanning for singular times"""

SINGULAR_TIME_XTOL = 1e-12
"""奇异时间求根精度 / Root-finder tolerance on singular times"""

BLOWUP_NORM = 1e8
"""Riccati 爆破阈值 / Coefficient norm treated as a Riccati blow-up"""

CHART_SWITCH_NORM = 50.0
"""换图阈值 / Quadratic-block norm that triggers a switch of kind"""

# ============================================================================
# 级数反演 / Series Inversion
# ============================================================================
DETERMINANT_RTOL = 1e-9
"""行列式奇异判据 / |det| <= rtol * max|cofactor| marks a singular linear part"""

CAUSTIC_RTOL = 1e-6
"""焦散附近判据 / Looser determinant tolerance used at detected singular times

Singular times are only known to the root-finder accuracy, so the linear
part there is small but not exactly zero.
奇异时间只精确到求根精度，因此该处线性部分很小但不严格为零。
"""

# ============================================================================
# 边值问题 / Boundary Value Problems
# ============================================================================
FLOW_RESIDUAL_THRESHOLD = 1e-6
"""流残差阈值 / Flow-residual threshold above which a solution is flagged"""

TRUST_RADIUS_RTOL = 0.01
"""信赖半径判据 / Relative gap between order N and N-1 gradients"""

# ============================================================================
# 应用 / Applications
# ============================================================================
PERIODIC_ROOT_ACCEPT = 1e-4
"""周期根接受阈值 / Residual below which a refined periodic root is accepted"""

POSITION_SCAN_GRID = 201
"""位置扫描网格 / Grid points per axis of the periodic position scan"""

TIME_SCAN_SAMPLES = 400
"""时间扫描采样数 / Default number of samples of the periodic time scan"""


__all__ = [
    "SUN_EARTH_MU",
    "SIDEREAL_YEAR_DAYS",
    "HILL_TIME_UNIT_DAYS",
    "ASTRONOMICAL_UNIT_KM",
    "HILL_LENGTH_UNIT_KM",
    "HILL_MOMENTUM_UNIT_MS",
    "DEFAULT_TOL",
    "DEFAULT_MAX_STEP",
    "ENERGY_DRIFT_FACTOR",
    "DOMAIN_EXIT_DISTANCE",
    "DOMAIN_SINGULAR_DISTANCE",
    "PIVOT_CONDITION_LIMIT",
    "SINGULAR_GRID_DENSITY",
    "SINGULAR_TIME_XTOL",
    "BLOWUP_NORM",
    "CHART_SWITCH_NORM",
    "DETERMINANT_RTOL",
    "CAUSTIC_RTOL",
    "FLOW_RESIDUAL_THRESHOLD",
    "TRUST_RADIUS_RTOL",
    "PERIODIC_ROOT_ACCEPT",
    "POSITION_SCAN_GRID",
    "TIME_SCAN_SAMPLES",
]
