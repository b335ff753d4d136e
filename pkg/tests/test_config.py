import json

import pytest

from parbo.config import (
    ConfigError,
    config_from_dict,
    config_to_dict,
    default_config_dict,
    load_config,
)


def test_default_config_roundtrips():
    raw = default_config_dict(3)
    cfg = config_from_dict(raw)
    assert config_to_dict(cfg) == raw


def test_every_chooser_parameter_present_with_default():
    raw = default_config_dict()
    chooser = raw["chooser"]
    for key in ("n_cand", "n_poll", "l_poll", "rho", "sem_min", "z", "x_atol",
                "t_mcmc", "improvement_epsilon", "exclude_edge_points", "prior"):
        assert key in chooser
    for key in ("v_noise_fraction", "v_noise_floor", "a2", "alpha_length", "lambda_length"):
        assert key in chooser["prior"]


def test_unknown_top_level_key_rejected():
    raw = default_config_dict()
    raw["parallelism"] = 4
    with pytest.raises(ConfigError, match="parallelism"):
        config_from_dict(raw)


def test_unknown_nested_key_rejected():
    raw = default_config_dict()
    raw["chooser"]["n_candidates"] = 5
    with pytest.raises(ConfigError, match="n_candidates"):
        config_from_dict(raw)
    raw = default_config_dict()
    raw["chooser"]["prior"]["vnoise"] = 0.1
    with pytest.raises(ConfigError, match="vnoise"):
        config_from_dict(raw)


def test_missing_key_rejected():
    raw = default_config_dict()
    del raw["seed"]
    with pytest.raises(ConfigError, match="seed"):
        config_from_dict(raw)


def test_budget_required():
    raw = default_config_dict()
    raw["budget"] = {"max_evals": None, "max_time": None}
    with pytest.raises(ConfigError, match="budget"):
        config_from_dict(raw)


def test_unknown_algorithm_rejected():
    raw = default_config_dict()
    raw["algorithm"] = "annealing"
    with pytest.raises(ConfigError, match="algorithm"):
        config_from_dict(raw)


def test_subprocess_executor_needs_command():
    raw = default_config_dict()
    raw["executor"]["kind"] = "subprocess"
    with pytest.raises(ConfigError, match="command"):
        config_from_dict(raw)


def test_simulated_executor_needs_objective():
    raw = default_config_dict()
    raw["objective"] = None
    with pytest.raises(ConfigError, match="objective"):
        config_from_dict(raw)


def test_load_config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(default_config_dict()))
    cfg = load_config(path)
    assert cfg.m == 4 and cfg.algorithm == "bop"


def test_load_invalid_json_reports_position(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(path)


def test_invalid_chooser_values_rejected():
    raw = default_config_dict()
    raw["chooser"]["n_cand"] = 0
    with pytest.raises(ConfigError):
        config_from_dict(raw)
