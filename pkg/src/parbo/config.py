"""Run configuration: the schema, defaults, file loading, and validation.

The configuration file is JSON mirroring :class:`RunConfig`.  Every tunable
of the selection algorithms appears with its default; unknown keys anywhere
in the tree are errors so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .chooser import ChooserConfig
from .hypers import PriorScales
from .space import ParameterSpace

ALGORITHMS = ("bop", "fubar", "random")


class ConfigError(ValueError):
    """The configuration file is malformed or inconsistent."""


@dataclass(frozen=True)
class ExecutorConfig:
    kind: str = "simulated"  # simulated | subprocess
    duration_median: float = 1.0
    duration_sigma_log: float = 0.5
    command: list[str] | None = None

    def __post_init__(self):
        if self.kind not in ("simulated", "subprocess"):
            raise ConfigError(f"unknown executor kind {self.kind!r}")
        if self.kind == "subprocess" and not self.command:
            raise ConfigError("subprocess executor needs a command")
        if self.duration_median <= 0 or self.duration_sigma_log < 0:
            raise ConfigError("duration law parameters must be positive")


@dataclass(frozen=True)
class ObjectiveConfig:
    id: str
    noise_sd: float = 0.0

    def __post_init__(self):
        if self.noise_sd < 0:
            raise ConfigError("noise_sd must be nonnegative")


@dataclass(frozen=True)
class InitConfig:
    """Initial-design policy: a low-discrepancy batch, or a deliberate cluster."""

    kind: str = "sobol"  # sobol | cluster
    center: list[float] | None = None
    radius: float = 0.05

    def __post_init__(self):
        if self.kind not in ("sobol", "cluster"):
            raise ConfigError(f"unknown init kind {self.kind!r}")
        if self.kind == "cluster":
            if self.center is None:
                raise ConfigError("cluster init needs a center")
            if self.radius <= 0:
                raise ConfigError("cluster radius must be positive")


@dataclass(frozen=True)
class RunConfig:
    space: ParameterSpace
    m: int
    max_evals: int | None
    max_time: float | None
    algorithm: str
    seed: int
    chooser: ChooserConfig = field(default_factory=ChooserConfig)
    executor: ExecutorConfig = field(default_factory=ExecutorConfig)
    objective: ObjectiveConfig | None = None
    init: InitConfig = field(default_factory=InitConfig)

    def __post_init__(self):
        if self.m < 1:
            raise ConfigError("m must be at least 1")
        if self.max_evals is None and self.max_time is None:
            raise ConfigError("at least one budget (max_evals or max_time) is required")
        if self.max_evals is not None and self.max_evals < 0:
            raise ConfigError("max_evals must be nonnegative")
        if self.max_time is not None and self.max_time <= 0:
            raise ConfigError("max_time must be positive")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.executor.kind == "simulated" and self.objective is None:
            raise ConfigError("simulated executor needs a built-in objective")
        if self.init.kind == "cluster" and len(self.init.center) != self.space.dim:
            raise ConfigError("cluster init center must match the space dimension")


def default_config_dict(dim: int = 2) -> dict:
    """A complete configuration dictionary with every parameter present."""
    return {
        "space": {"lower": [0.0] * dim, "upper": [1.0] * dim},
        "m": 4,
        "budget": {"max_evals": 32, "max_time": None},
        "algorithm": "bop",
        "seed": 0,
        "objective": {"id": "sphere", "noise_sd": 0.0},
        "executor": {
            "kind": "simulated",
            "duration_median": 1.0,
            "duration_sigma_log": 0.5,
            "command": None,
        },
        "init": {"kind": "sobol", "center": None, "radius": 0.05},
        "chooser": {
            "n_cand": 10,
            "n_poll": 10,
            "l_poll": 0.5,
            "rho": 0.1,
            "sem_min": 1e-3,
            "z": 10.0,
            "x_atol": 1e-3,
            "t_mcmc": 10,
            "improvement_epsilon": 0.0,
            "exclude_edge_points": True,
            "prior": {
                "v_noise_fraction": 0.01,
                "v_noise_floor": 1e-6,
                "a2": 5.0,
                "alpha_length": 2.0,
                "lambda_length": 0.5,
            },
        },
    }


_SCHEMA = {
    "space": {"lower", "upper"},
    "budget": {"max_evals", "max_time"},
    "objective": {"id", "noise_sd"},
    "executor": {"kind", "duration_median", "duration_sigma_log", "command"},
    "init": {"kind", "center", "radius"},
    "chooser": {
        "n_cand", "n_poll", "l_poll", "rho", "sem_min", "z", "x_atol",
        "t_mcmc", "improvement_epsilon", "exclude_edge_points", "prior",
    },
    "prior": {"v_noise_fraction", "v_noise_floor", "a2", "alpha_length", "lambda_length"},
}


def _check_keys(section: str, d: dict, allowed: set) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {sorted(unknown)}")


def config_from_dict(raw: dict) -> RunConfig:
    top = {"space", "m", "budget", "algorithm", "seed", "objective", "executor", "init", "chooser"}
    _check_keys("config", raw, top)
    missing = top - set(raw)
    if missing:
        raise ConfigError(f"missing key(s) in config: {sorted(missing)}")
    for section in ("space", "budget", "executor", "init", "chooser"):
        _check_keys(section, raw[section], _SCHEMA[section])
    if raw["objective"] is not None:
        _check_keys("objective", raw["objective"], _SCHEMA["objective"])
    _check_keys("chooser.prior", raw["chooser"]["prior"], _SCHEMA["prior"])

    try:
        space = ParameterSpace(np.array(raw["space"]["lower"]), np.array(raw["space"]["upper"]))
        prior = PriorScales(**raw["chooser"]["prior"])
        chooser = ChooserConfig(**{**raw["chooser"], "prior": prior})
        executor = ExecutorConfig(**raw["executor"])
        objective = None if raw["objective"] is None else ObjectiveConfig(**raw["objective"])
        init = InitConfig(**raw["init"])
        return RunConfig(
            space=space,
            m=raw["m"],
            max_evals=raw["budget"]["max_evals"],
            max_time=raw["budget"]["max_time"],
            algorithm=raw["algorithm"],
            seed=raw["seed"],
            chooser=chooser,
            executor=executor,
            objective=objective,
            init=init,
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def config_to_dict(cfg: RunConfig) -> dict:
    return {
        "space": {
            "lower": [float(v) for v in cfg.space.lower],
            "upper": [float(v) for v in cfg.space.upper],
        },
        "m": cfg.m,
        "budget": {"max_evals": cfg.max_evals, "max_time": cfg.max_time},
        "algorithm": cfg.algorithm,
        "seed": cfg.seed,
        "objective": None
        if cfg.objective is None
        else {"id": cfg.objective.id, "noise_sd": cfg.objective.noise_sd},
        "executor": {
            "kind": cfg.executor.kind,
            "duration_median": cfg.executor.duration_median,
            "duration_sigma_log": cfg.executor.duration_sigma_log,
            "command": cfg.executor.command,
        },
        "init": {"kind": cfg.init.kind, "center": cfg.init.center, "radius": cfg.init.radius},
        "chooser": {
            "n_cand": cfg.chooser.n_cand,
            "n_poll": cfg.chooser.n_poll,
            "l_poll": cfg.chooser.l_poll,
            "rho": cfg.chooser.rho,
            "sem_min": cfg.chooser.sem_min,
            "z": cfg.chooser.z,
            "x_atol": cfg.chooser.x_atol,
            "t_mcmc": cfg.chooser.t_mcmc,
            "improvement_epsilon": cfg.chooser.improvement_epsilon,
            "exclude_edge_points": cfg.chooser.exclude_edge_points,
            "prior": {
                "v_noise_fraction": cfg.chooser.prior.v_noise_fraction,
                "v_noise_floor": cfg.chooser.prior.v_noise_floor,
                "a2": cfg.chooser.prior.a2,
                "alpha_length": cfg.chooser.prior.alpha_length,
                "lambda_length": cfg.chooser.prior.lambda_length,
            },
        },
    }


def load_config(path) -> RunConfig:
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc.msg}, line {exc.lineno})") from None
    return config_from_dict(raw)
