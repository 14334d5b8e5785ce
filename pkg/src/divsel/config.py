"""Run configuration: one strict-schema JSON object per selection run.

Unknown keys are rejected everywhere so a config file replays exactly or
fails loudly; see docs/formats.md for the schema and defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

from .errors import ConfigError
from .manifest import STRATEGIES
from .metric import DistanceTermConfig
from .selector import BudgetSchedule, CostModel

SPATIAL_MODES = ("manifold", "euclidean")
INIT_MODES = ("cold", "warm")


def _require_keys(d: Mapping, allowed: set[str], where: str) -> None:
    unknown = sorted(set(d.keys()) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {unknown}")


def _number(d: Mapping, key: str, default, where: str):
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    return v


@dataclass(frozen=True)
class RunConfig:
    """Every knob of one selection run; defaults follow the reference setup
    (c_f=0.12, c_b=0.04, K=8, budgets 600/1200/2400/4800)."""

    strategy: str = "diversity"
    metric: DistanceTermConfig = field(default_factory=DistanceTermConfig)
    spatial_mode: str = "manifold"
    knn_k: int = 8
    large_constant: float = 1e9
    cost: CostModel = field(default_factory=CostModel)
    schedule: BudgetSchedule = field(default_factory=BudgetSchedule)
    seed: int = 0
    init_mode: str = "cold"
    pool_factor: float = 10.0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.spatial_mode not in SPATIAL_MODES:
            raise ConfigError(f"spatial_mode must be one of {SPATIAL_MODES}, got {self.spatial_mode!r}")
        if self.init_mode not in INIT_MODES:
            raise ConfigError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")
        if not isinstance(self.knn_k, int) or self.knn_k < 1:
            raise ConfigError(f"knn_k must be an integer >= 1, got {self.knn_k!r}")
        if not (self.large_constant > 0.0):
            raise ConfigError(f"large_constant must be positive, got {self.large_constant!r}")
        if not (self.pool_factor > 0.0):
            raise ConfigError(f"pool_factor must be positive, got {self.pool_factor!r}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")

    @classmethod
    def from_dict(cls, d: Mapping) -> "RunConfig":
        if not isinstance(d, Mapping):
            raise ConfigError(f"config must be a JSON object, got {type(d).__name__}")
        _require_keys(
            d,
            {
                "strategy", "metric", "spatial_mode", "knn_k", "large_constant",
                "cost", "checkpoints", "seed", "init_mode", "pool_factor",
            },
            "config",
        )
        m = d.get("metric", {})
        if not isinstance(m, Mapping):
            raise ConfigError("config.metric must be an object")
        _require_keys(
            m,
            {"lambda_s", "lambda_t", "lambda_f", "lp_order", "normalization",
             "aggregation", "feature_enable_budget"},
            "config.metric",
        )
        metric = DistanceTermConfig(
            lambda_s=float(_number(m, "lambda_s", 1.0, "metric")),
            lambda_t=float(_number(m, "lambda_t", 1.0, "metric")),
            lambda_f=float(_number(m, "lambda_f", 0.0, "metric")),
            lp_order=float(_number(m, "lp_order", 2.0, "metric")),
            normalization=m.get("normalization", "rbf"),
            aggregation=m.get("aggregation", "sum"),
            feature_enable_budget=float(_number(m, "feature_enable_budget", 0.0, "metric")),
        )
        c = d.get("cost", {})
        if not isinstance(c, Mapping):
            raise ConfigError("config.cost must be an object")
        _require_keys(c, {"c_f", "c_b"}, "config.cost")
        cost = CostModel(
            c_f=float(_number(c, "c_f", 0.12, "cost")),
            c_b=float(_number(c, "c_b", 0.04, "cost")),
        )
        checkpoints = d.get("checkpoints", [600.0, 1200.0, 2400.0, 4800.0])
        if not isinstance(checkpoints, (list, tuple)) or not all(
            isinstance(b, (int, float)) and not isinstance(b, bool) for b in checkpoints
        ):
            raise ConfigError("checkpoints must be a list of numbers")
        seed = d.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError(f"seed must be an integer, got {seed!r}")
        knn_k = d.get("knn_k", 8)
        if isinstance(knn_k, bool) or not isinstance(knn_k, int):
            raise ConfigError(f"knn_k must be an integer, got {knn_k!r}")
        return cls(
            strategy=d.get("strategy", "diversity"),
            metric=metric,
            spatial_mode=d.get("spatial_mode", "manifold"),
            knn_k=knn_k,
            large_constant=float(_number(d, "large_constant", 1e9, "config")),
            cost=cost,
            schedule=BudgetSchedule(checkpoints=tuple(checkpoints)),
            seed=seed,
            init_mode=d.get("init_mode", "cold"),
            pool_factor=float(_number(d, "pool_factor", 10.0, "config")),
        )

    @classmethod
    def from_json_file(cls, path: str | Path) -> "RunConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "metric": {
                "lambda_s": self.metric.lambda_s,
                "lambda_t": self.metric.lambda_t,
                "lambda_f": self.metric.lambda_f,
                "lp_order": self.metric.lp_order,
                "normalization": self.metric.normalization,
                "aggregation": self.metric.aggregation,
                "feature_enable_budget": self.metric.feature_enable_budget,
            },
            "spatial_mode": self.spatial_mode,
            "knn_k": self.knn_k,
            "large_constant": self.large_constant,
            "cost": {"c_f": self.cost.c_f, "c_b": self.cost.c_b},
            "checkpoints": list(self.schedule.checkpoints),
            "seed": self.seed,
            "init_mode": self.init_mode,
            "pool_factor": self.pool_factor,
        }

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=seed)
