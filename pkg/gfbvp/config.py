"""
场景配置 / Scenario Configuration
=================================

命令行运行的全部参数：JSON 文件覆盖默认值，环境变量覆盖文件，命令行参数
覆盖环境变量。未知键一律报错。
Every parameter of a command-line run: a JSON file overrides the defaults,
environment variables override the file and flags override the environment.
Unknown keys are rejected.

环境变量 / Environment variables
--------------------------------
- ``GFBVP_TOL``: solver.tol
- ``GFBVP_JOBS``: solver.jobs
- ``GFBVP_MAX_STEP``: gf.max_step
"""

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional

from . import io
from .constants import (
    DEFAULT_MAX_STEP,
    DEFAULT_TOL,
    FLOW_RESIDUAL_THRESHOLD,
    PERIODIC_ROOT_ACCEPT,
    POSITION_SCAN_GRID,
    TIME_SCAN_SAMPLES,
)
from .errors import ArtifactError, ConfigError


@dataclass
class ModelConfig:
    name: str = "hill"
    parameters: Dict[str, float] = field(default_factory=dict)


@dataclass
class ReferenceConfig:
    """Equilibrium name (``"L2"``) or a CSV trajectory file."""

    equilibrium: Optional[str] = "L2"
    file: Optional[str] = None
    interpolation_order: int = 3


@dataclass
class GFConfig:
    order: int = 6
    kind: str = "F2"
    tspan: List[float] = field(default_factory=lambda: [0.0, 4.0])
    switch_kinds: bool = True
    max_step: float = DEFAULT_MAX_STEP


@dataclass
class SolverConfig:
    tol: float = DEFAULT_TOL
    jobs: int = 1
    flow_threshold: float = FLOW_RESIDUAL_THRESHOLD


@dataclass
class PeriodicConfig:
    mode: str = "time-scan"
    q0: List[float] = field(default_factory=lambda: [0.01, 0.0])
    window: List[float] = field(default_factory=lambda: [2.9, 3.15])
    samples: int = TIME_SCAN_SAMPLES
    accept: float = PERIODIC_ROOT_ACCEPT
    T: float = 3.0345
    periods: List[float] = field(default_factory=list)
    half_width: float = 0.03
    grid: int = POSITION_SCAN_GRID
    guesses: List[List[float]] = field(default_factory=list)


@dataclass
class LQConfig:
    A: List[List[float]] = field(default_factory=lambda: [[0.0]])
    B: List[List[float]] = field(default_factory=lambda: [[1.0]])
    Q: List[List[float]] = field(default_factory=lambda: [[0.0]])
    R: List[List[float]] = field(default_factory=lambda: [[1.0]])
    N: Optional[List[List[float]]] = None
    Qf: Optional[List[List[float]]] = None
    M: Optional[List[List[float]]] = None
    m_f: Optional[List[float]] = None
    t0: float = 0.0
    tf: float = 1.0
    x0: List[float] = field(default_factory=lambda: [1.0])
    fixed_final: List[int] = field(default_factory=lambda: [0])
    x_f: Optional[List[float]] = None
    p_f: Optional[List[float]] = None
    samples: int = 201


@dataclass
class ManifoldConfig:
    equilibrium: str = "L2"
    alpha: float = 1e-5
    branch: int = 1
    t_end: float = 2.0
    samples: int = 101


@dataclass
class FormationConfig:
    radius_km: float = 108000.0
    n_angles: int = 72
    periods_days: List[float] = field(default_factory=lambda: [20.0, 47.0, 88.0])
    rest: str = "momentum"


@dataclass
class ScenarioConfig:
    """Resolved configuration of one run. / 一次运行的完整配置。"""

    model: ModelConfig = field(default_factory=ModelConfig)
    reference: ReferenceConfig = field(default_factory=ReferenceConfig)
    gf: GFConfig = field(default_factory=GFConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    periodic: PeriodicConfig = field(default_factory=PeriodicConfig)
    lq: LQConfig = field(default_factory=LQConfig)
    manifold: ManifoldConfig = field(default_factory=ManifoldConfig)
    formation: FormationConfig = field(default_factory=FormationConfig)

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


# ============================================================================
# 解析与验证 / Parsing and Validation
# ============================================================================
def _coerce(value: Any, default: Any, where: str) -> Any:
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if isinstance(default, list) and not isinstance(value, list):
        raise ConfigError(f"{where}: expected a list, got {value!r}")
    if isinstance(default, dict) and not isinstance(value, dict):
        raise ConfigError(f"{where}: expected an object, got {value!r}")
    return value


def _merge(instance: Any, data: Mapping[str, Any], where: str) -> Any:
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where}: expected an object")
    names = {f.name for f in dataclasses.fields(instance)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {unknown}")
    for key, value in data.items():
        current = getattr(instance, key)
        path = f"{where}.{key}" if where else key
        if dataclasses.is_dataclass(current):
            _merge(current, value, path)
        else:
            setattr(instance, key, _coerce(value, current, path))
    return instance


def validate(config: ScenarioConfig) -> ScenarioConfig:
    """Range checks across the tree."""
    if config.gf.order < 2:
        raise ConfigError("gf.order must be at least 2")
    if len(config.gf.tspan) != 2 or config.gf.tspan[1] <= config.gf.tspan[0]:
        raise ConfigError("gf.tspan must be [t0, t1] with t1 > t0")
    if config.gf.max_step <= 0:
        raise ConfigError("gf.max_step must be positive")
    if config.solver.tol <= 0:
        raise ConfigError("solver.tol must be positive")
    if config.solver.jobs < 1:
        raise ConfigError("solver.jobs must be at least 1")
    if config.reference.interpolation_order not in (1, 3):
        raise ConfigError("reference.interpolation_order must be 1 or 3")
    if config.reference.equilibrium is None and config.reference.file is None:
        raise ConfigError("reference needs an equilibrium name or a file")
    if config.periodic.mode not in ("time-scan", "position-scan", "f2-solve"):
        raise ConfigError("periodic.mode must be time-scan, position-scan or f2-solve")
    if len(config.periodic.window) != 2:
        raise ConfigError("periodic.window must be [T_min, T_max]")
    if config.formation.rest not in ("momentum", "velocity"):
        raise ConfigError("formation.rest must be 'momentum' or 'velocity'")
    if config.manifold.branch not in (1, -1):
        raise ConfigError("manifold.branch must be 1 or -1")
    return config


def config_from_dict(data: Mapping[str, Any]) -> ScenarioConfig:
    return validate(_merge(ScenarioConfig(), data, ""))


def load_config(path: Optional[str] = None, environ: Optional[Mapping[str, str]] = None
                ) -> ScenarioConfig:
    """Defaults, then the JSON file (if any), then environment overrides."""
    config = ScenarioConfig()
    if path is not None:
        try:
            data = io.load_json(path)
        except (OSError, ArtifactError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        _merge(config, data, "")
    apply_environment(config, os.environ if environ is None else environ)
    return validate(config)


_ENVIRONMENT = {
    "GFBVP_TOL": ("solver", "tol", float),
    "GFBVP_JOBS": ("solver", "jobs", int),
    "GFBVP_MAX_STEP": ("gf", "max_step", float),
}


def apply_environment(config: ScenarioConfig, environ: Mapping[str, str]) -> ScenarioConfig:
    for var, (section, key, kind) in _ENVIRONMENT.items():
        if var in environ:
            try:
                value = kind(environ[var])
            except ValueError as exc:
                raise ConfigError(f"{var}={environ[var]!r} is not a valid {kind.__name__}") from exc
            setattr(getattr(config, section), key, value)
    return config


__all__ = [
    "ModelConfig",
    "ReferenceConfig",
    "GFConfig",
    "SolverConfig",
    "PeriodicConfig",
    "LQConfig",
    "ManifoldConfig",
    "FormationConfig",
    "ScenarioConfig",
    "config_from_dict",
    "load_config",
    "apply_environment",
    "validate",
]
