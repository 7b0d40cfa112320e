"""
Tests for scenario configuration

Run from project root: pytest tests/test_config.py -v
"""

import json
import sys
from pathlib import Path

import pytest

try:
    import gfbvp  # noqa: F401
except ImportError:
    # Fallback for running directly without installation
    sys.path.insert(0, str(Path(__file__).parent.parent))

from gfbvp.config import ScenarioConfig, apply_environment, config_from_dict, load_config
from gfbvp.constants import DEFAULT_TOL
from gfbvp.errors import ConfigError


def test_defaults():
    """Defaults describe the Hill L2 scenario."""
    config = ScenarioConfig()
    assert config.model.name == "hill"
    assert config.reference.equilibrium == "L2"
    assert config.gf.order == 6
    assert config.gf.kind == "F2"
    assert config.solver.tol == DEFAULT_TOL
    assert config.formation.radius_km == 108000.0
    assert config.to_dict()["gf"]["switch_kinds"] is True


def test_nested_override():
    config = config_from_dict({"gf": {"order": 4, "tspan": [0, 2]},
                               "model": {"name": "crtbp", "parameters": {"mu": 0.01215}}})
    assert config.gf.order == 4
    assert config.gf.tspan == [0, 2]
    assert config.model.parameters == {"mu": 0.01215}
    assert config.gf.kind == "F2", "untouched keys keep their defaults"
    assert config_from_dict({"solver": {"tol": 1}}).solver.tol == 1.0


@pytest.mark.parametrize("data", [
    {"gf": {"ordr": 4}},
    {"plotting": {}},
    {"gf": {"order": "six"}},
    {"gf": {"order": 4.5}},
    {"gf": {"switch_kinds": 1}},
    {"gf": {"tspan": 4.0}},
    {"gf": "F2"},
    {"gf": {"order": 1}},
    {"gf": {"tspan": [2.0, 1.0]}},
    {"solver": {"jobs": 0}},
    {"periodic": {"mode": "grid"}},
    {"formation": {"rest": "speed"}},
    {"manifold": {"branch": 2}},
])
def test_rejected_values(data):
    """Unknown keys, wrong types and out-of-range values are configuration errors."""
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_load_file_and_environment(tmp_path):
    """The file overrides defaults and the environment overrides the file."""
    print("Testing configuration layering...")
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"solver": {"tol": 1e-10, "jobs": 2}, "gf": {"order": 4}}))
    config = load_config(str(path), environ={})
    assert config.solver.tol == 1e-10 and config.solver.jobs == 2

    env = {"GFBVP_TOL": "1e-9", "GFBVP_JOBS": "3", "GFBVP_MAX_STEP": "0.05"}
    config = load_config(str(path), environ=env)
    assert config.solver.tol == 1e-9
    assert config.solver.jobs == 3
    assert config.gf.max_step == 0.05
    assert config.gf.order == 4
    print("✓ Configuration layering test passed")


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"), environ={})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad), environ={})
    with pytest.raises(ConfigError):
        load_config(None, environ={"GFBVP_JOBS": "many"})
    with pytest.raises(ConfigError):
        load_config(None, environ={"GFBVP_TOL": "-1"})


def test_environment_only_touches_named_variables():
    config = apply_environment(ScenarioConfig(), {"HOME": "/root", "GFBVP_JOBS": "4"})
    assert config.solver.jobs == 4
    assert config.solver.tol == DEFAULT_TOL


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
