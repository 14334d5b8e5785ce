"""Budget-constrained selection: greedy k-Center loop, cost model, baselines.

The diversity strategy repeatedly labels the unlabeled sample farthest
(in aggregated distance) from everything labeled so far, spending an
annotation budget of `c_f` per frame plus `c_b` per box. A per-sample
cached minimum distance (`SelectionState.min_dist`) makes each pick one
argmax plus one single-source spatial query instead of a full pairwise
recomputation.

Budget semantics: selection cycles use a post-add check (keep picking
while the batch is still under budget, so the final pick may overshoot by
at most one sample), while initialization never exceeds its budget -
candidates that would push past it are skipped. The asymmetry is
deliberate: the initial labeled set must cost at most b_0.

Picks are strictly ordered and all ties break toward the lower manifest
index, so runs are deterministic for a fixed (manifest, config, seed).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .errors import BudgetTooSmallError, ConfigError, MissingFieldError
from .geo_graph import EuclideanSpatialIndex, build_knn_graph
from .manifest import DatasetManifest, SampleRecord, validate_for_strategy
from .metric import (
    DistanceTermConfig,
    TermScales,
    aggregate,
    estimate_scales,
    feature_distance_row,
    normalize,
    temporal_distance_row,
)

if TYPE_CHECKING:
    from .config import RunConfig


@dataclass(frozen=True)
class CostModel:
    """Annotation cost: c_f per selected frame plus c_b per contained box."""

    c_f: float = 0.12
    c_b: float = 0.04

    def __post_init__(self):
        if not (self.c_f >= 0.0) or not (self.c_b >= 0.0):
            raise ConfigError(f"cost constants must be non-negative, got c_f={self.c_f!r}, c_b={self.c_b!r}")
        if self.c_f + self.c_b <= 0.0:
            raise ConfigError("at least one of c_f/c_b must be positive")

    def sample_costs(self, manifest: DatasetManifest) -> np.ndarray:
        return self.c_f + self.c_b * manifest.num_boxes.astype(np.float64)


def annotation_cost(batch: Iterable[SampleRecord], model: CostModel) -> float:
    """c_f * n_frames + c_b * n_boxes for a batch of samples."""
    records = list(batch)
    n_boxes = sum(rec.num_boxes for rec in records)
    return model.c_f * len(records) + model.c_b * n_boxes


@dataclass(frozen=True)
class BudgetSchedule:
    """Strictly increasing cumulative budget checkpoints [b_0, ..., b_{T-1}]."""

    checkpoints: tuple[float, ...] = (600.0, 1200.0, 2400.0, 4800.0)

    def __post_init__(self):
        cps = tuple(float(c) for c in self.checkpoints)
        object.__setattr__(self, "checkpoints", cps)
        if not cps:
            raise ConfigError("checkpoints must be non-empty")
        if cps[0] <= 0.0 or any(b <= a for a, b in zip(cps, cps[1:])):
            raise ConfigError(f"checkpoints must be positive and strictly increasing, got {list(cps)}")


@dataclass
class SelectionState:
    """Mutable selection state: labeled order, spend, and the min-distance cache.

    `min_dist[i]` is the minimum aggregated distance from unlabeled sample
    i to the labeled set; labeled entries are pinned to -inf so the argmax
    never revisits them. `metric_key` records which effective metric the
    cache was computed under, so a feature-term gate flip between cycles
    triggers a from-scratch rebuild.
    """

    labeled: list[int]
    labeled_mask: np.ndarray
    spent: float = 0.0
    min_dist: np.ndarray | None = None
    metric_key: tuple | None = None
    warnings: list[str] = field(default_factory=list)

    @classmethod
    def fresh(cls, n: int) -> "SelectionState":
        return cls(labeled=[], labeled_mask=np.zeros(n, dtype=bool))

    @property
    def n(self) -> int:
        return int(self.labeled_mask.size)

    def unlabeled_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.labeled_mask)

    def add(self, index: int, cost: float) -> None:
        if self.labeled_mask[index]:
            raise ValueError(f"sample {index} is already labeled")
        self.labeled.append(int(index))
        self.labeled_mask[index] = True
        self.spent += float(cost)
        if self.min_dist is not None:
            self.min_dist[index] = -np.inf


class AggregatedMetric:
    """Vectorized aggregated distance rows d(., j) over one manifest.

    Bundles the term weights, the per-run normalization scales and the
    spatial backend (KNN graph or Euclidean index). `distance_row(j, b)`
    returns the aggregated distance from sample j to every sample, with
    the feature term gated by spent budget b.
    """

    def __init__(
        self,
        manifest: DatasetManifest,
        config: DistanceTermConfig,
        scales: TermScales,
        spatial=None,
    ):
        if config.lambda_s > 0.0:
            if spatial is None:
                raise ValueError("lambda_s > 0 requires a spatial backend")
            if scales.spatial is None:
                raise ValueError("lambda_s > 0 requires a spatial scale")
        if config.lambda_t > 0.0 and scales.temporal is None:
            raise ValueError("lambda_t > 0 requires a temporal scale")
        if config.lambda_f > 0.0:
            if manifest.features is None:
                raise MissingFieldError("feature", manifest.samples[0].id)
            if scales.feature is None:
                raise ValueError("lambda_f > 0 requires a feature scale")
        self._config = config
        self._scales = scales
        self._spatial = spatial
        self._timestamps = manifest.timestamps
        self._stream_ids = manifest.stream_ids
        self._features = manifest.features
        self.n = len(manifest)

    @property
    def config(self) -> DistanceTermConfig:
        return self._config

    def feature_term_enabled(self, spent_budget: float) -> bool:
        return self._config.lambda_f > 0.0 and spent_budget >= self._config.feature_enable_budget

    def cache_key(self, spent_budget: float) -> tuple:
        """Identity of the effective metric; equal keys mean equal rows."""
        cfg = self._config
        lam_f = cfg.lambda_f if self.feature_term_enabled(spent_budget) else 0.0
        return (cfg.lambda_s, cfg.lambda_t, lam_f, cfg.lp_order, cfg.normalization, cfg.aggregation)

    def distance_row(self, j: int, spent_budget: float) -> np.ndarray:
        cfg = self._config
        s = t = f = None
        if cfg.lambda_s > 0.0:
            s = normalize(self._spatial.distances_from(j), cfg.normalization, self._scales.spatial)
        if cfg.lambda_t > 0.0:
            raw = temporal_distance_row(self._timestamps, self._stream_ids, j)
            t = normalize(raw, cfg.normalization, self._scales.temporal)
        if self.feature_term_enabled(spent_budget):
            raw = feature_distance_row(self._features, j, cfg.lp_order)
            f = normalize(raw, cfg.normalization, self._scales.feature)
        return aggregate(s, t, f, cfg, spent_budget)


def refresh_min_dist(state: SelectionState, metric: AggregatedMetric, spent_budget: float) -> None:
    """(Re)build the min-distance cache if the effective metric changed."""
    key = metric.cache_key(spent_budget)
    if state.min_dist is not None and state.metric_key == key:
        return
    if not state.labeled:
        raise ValueError("cannot build min_dist with an empty labeled set")
    md = np.full(state.n, np.inf)
    for j in state.labeled:
        md = np.minimum(md, metric.distance_row(j, spent_budget))
    md[state.labeled_mask] = -np.inf
    state.min_dist = md
    state.metric_key = key


def greedy_select_cycle(
    state: SelectionState,
    metric: AggregatedMetric,
    costs: np.ndarray,
    cycle_budget: float,
    *,
    spent_budget: float,
    spend_cap: float | None = None,
) -> list[int]:
    """One greedy k-Center cycle: repeatedly label the farthest unlabeled sample.

    Keeps picking while the batch is under `cycle_budget` (post-add check,
    so the last pick may overshoot). With `spend_cap` set, candidates that
    would push `state.spent` past the cap are excluded instead and the
    cycle stops when none remain (initialization semantics).

    `spent_budget` is the cumulative spend at cycle start; it gates the
    feature term and stays fixed for the whole cycle.
    """
    refresh_min_dist(state, metric, spent_budget)
    batch: list[int] = []
    batch_cost = 0.0
    while batch_cost < cycle_budget:
        if spend_cap is not None:
            cand = np.where(state.spent + costs <= spend_cap, state.min_dist, -np.inf)
        else:
            cand = state.min_dist
        pick = int(np.argmax(cand))
        if cand[pick] == -np.inf:
            if spend_cap is None:
                state.warnings.append("pool exhausted before cycle budget met")
            break
        state.add(pick, costs[pick])
        batch.append(pick)
        batch_cost += float(costs[pick])
        row = metric.distance_row(pick, spent_budget)
        state.min_dist = np.minimum(state.min_dist, row)
        state.min_dist[pick] = -np.inf
    return batch


def initialize_labeled(
    manifest: DatasetManifest,
    costs: np.ndarray,
    b0: float,
    mode: str,
    rng: np.random.Generator,
    metric: AggregatedMetric | None = None,
) -> SelectionState:
    """Build the initial labeled set with cost at most b0.

    cold: walk a seeded permutation, adding every sample that still fits.
    warm: draw the first sample uniformly among those affordable, then run
    the model-free greedy fill (feature term excluded by the caller's
    metric) under the same never-exceed rule.
    """
    if mode not in ("cold", "warm"):
        raise ConfigError(f"init mode must be 'cold' or 'warm', got {mode!r}")
    if not (b0 > 0.0):
        raise ConfigError(f"initial budget must be positive, got {b0!r}")
    n = len(manifest)
    state = SelectionState.fresh(n)
    if float(costs.min()) > b0:
        raise BudgetTooSmallError(
            f"no single sample affordable: cheapest costs {float(costs.min())}, b0={b0}"
        )
    if mode == "cold":
        for idx in rng.permutation(n):
            if state.spent + costs[idx] <= b0:
                state.add(int(idx), costs[idx])
    else:
        if metric is None:
            raise ValueError("warm initialization requires a metric")
        affordable = np.flatnonzero(costs <= b0)
        first = int(rng.choice(affordable))
        state.add(first, costs[first])
        greedy_select_cycle(state, metric, costs, math.inf, spent_budget=0.0, spend_cap=b0)
    return state


def random_select_cycle(
    state: SelectionState,
    costs: np.ndarray,
    cycle_budget: float,
    rng: np.random.Generator,
) -> list[int]:
    """Seeded uniform selection without replacement, post-add budget check."""
    batch: list[int] = []
    batch_cost = 0.0
    for idx in rng.permutation(state.unlabeled_indices()):
        if batch_cost >= cycle_budget:
            return batch
        state.add(int(idx), costs[idx])
        batch.append(int(idx))
        batch_cost += float(costs[idx])
    if batch_cost < cycle_budget:
        state.warnings.append("pool exhausted before cycle budget met")
    return batch


def entropy_select_cycle(
    state: SelectionState,
    manifest: DatasetManifest,
    costs: np.ndarray,
    cycle_budget: float,
    pool_factor: float,
    cost_model: CostModel,
    rng: np.random.Generator,
) -> list[int]:
    """Uncertainty baseline: random pool first, then take the most uncertain.

    The pool holds pool_factor times the number of frames the cycle budget
    is expected to buy (frame cost estimated from the unlabeled pool's
    mean box count). The pool is sorted by uncertainty descending, ties
    toward the lower manifest index, and consumed with the usual post-add
    budget check.
    """
    u = manifest.uncertainties
    if np.isnan(u).any():
        first = manifest.samples[int(np.flatnonzero(np.isnan(u))[0])].id
        raise MissingFieldError("uncertainty", first)
    if cycle_budget <= 0.0:
        return []
    unlabeled = state.unlabeled_indices()
    if unlabeled.size == 0:
        state.warnings.append("pool exhausted before cycle budget met")
        return []
    mean_boxes = float(manifest.num_boxes[unlabeled].mean())
    per_frame = cost_model.c_f + cost_model.c_b * mean_boxes
    if per_frame > 0.0:
        expected_frames = cycle_budget / per_frame
        pool_size = min(unlabeled.size, int(math.ceil(pool_factor * expected_frames)))
    else:
        pool_size = unlabeled.size
    pool = rng.choice(unlabeled, size=max(pool_size, 1), replace=False)
    ranked = pool[np.lexsort((pool, -u[pool]))]
    batch: list[int] = []
    batch_cost = 0.0
    for idx in ranked:
        if batch_cost >= cycle_budget:
            return batch
        state.add(int(idx), costs[idx])
        batch.append(int(idx))
        batch_cost += float(costs[idx])
    if batch_cost < cycle_budget:
        state.warnings.append("pool exhausted before cycle budget met")
    return batch


@dataclass(frozen=True)
class CycleRecord:
    """One selection batch (index 0 is initialization)."""

    index: int
    phase: str
    checkpoint: float
    cycle_budget: float
    ids: tuple[str, ...]
    frames: int
    boxes: int
    cost: float
    cumulative_cost: float
    retrain_point: bool

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "phase": self.phase,
            "checkpoint": self.checkpoint,
            "cycle_budget": self.cycle_budget,
            "ids": list(self.ids),
            "frames": self.frames,
            "boxes": self.boxes,
            "cost": self.cost,
            "cumulative_cost": self.cumulative_cost,
            "retrain_point": self.retrain_point,
        }


@dataclass(frozen=True)
class SelectionReport:
    """Full record of one selection run, sufficient for exact replay."""

    strategy: str
    seed: int
    config: dict
    scales: dict | None
    source_manifest: str
    num_samples: int
    cycles: tuple[CycleRecord, ...]
    total_cost: float
    warnings: tuple[str, ...]

    @property
    def batches(self) -> list[list[str]]:
        return [list(c.ids) for c in self.cycles]

    @property
    def selected_ids(self) -> list[str]:
        return [sid for c in self.cycles for sid in c.ids]

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "seed": self.seed,
            "config": self.config,
            "scales": self.scales,
            "source_manifest": self.source_manifest,
            "num_samples": self.num_samples,
            "cycles": [c.to_dict() for c in self.cycles],
            "total_cost": self.total_cost,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    def write_ids_csv(self, path: str | Path) -> None:
        lines = ["cycle,sample_id"]
        lines += [f"{c.index},{sid}" for c in self.cycles for sid in c.ids]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _batch_record(
    manifest: DatasetManifest,
    batch: Sequence[int],
    index: int,
    phase: str,
    checkpoint: float,
    cycle_budget: float,
    costs: np.ndarray,
    prev_cumulative: float,
) -> CycleRecord:
    batch_cost = 0.0
    boxes = 0
    for i in batch:
        batch_cost += float(costs[i])
        boxes += int(manifest.num_boxes[i])
    return CycleRecord(
        index=index,
        phase=phase,
        checkpoint=float(checkpoint),
        cycle_budget=float(cycle_budget),
        ids=tuple(manifest.ids[i] for i in batch),
        frames=len(batch),
        boxes=boxes,
        cost=batch_cost,
        cumulative_cost=prev_cumulative + batch_cost,
        retrain_point=True,
    )


def run_schedule(manifest: DatasetManifest, config: "RunConfig") -> SelectionReport:
    """Run initialization plus one selection cycle per remaining checkpoint.

    Checkpoints are cumulative: cycle t gets budget checkpoint_t minus the
    spend so far. Detector retraining is out of scope; each cycle record
    carries `retrain_point` marking where it would happen.
    """
    strategy = config.strategy
    validate_for_strategy(manifest, strategy, config.metric.lambda_f)
    checkpoints = config.schedule.checkpoints
    costs = config.cost.sample_costs(manifest)

    root = np.random.SeedSequence(config.seed)
    ss_scales, ss_init, ss_cycles = root.spawn(3)

    spatial = None
    scales = None
    metric_main = None
    metric_init = None
    needs_metric = strategy == "diversity" or config.init_mode == "warm"
    if needs_metric:
        mcfg = config.metric
        if config.init_mode == "warm" and mcfg.lambda_s + mcfg.lambda_t <= 0.0:
            raise ConfigError("warm initialization needs lambda_s + lambda_t > 0 (model-free terms)")
        if mcfg.lambda_s > 0.0:
            if config.spatial_mode == "manifold":
                spatial = build_knn_graph(manifest, config.knn_k, config.large_constant)
            else:
                spatial = EuclideanSpatialIndex(manifest, config.large_constant)
        scales = estimate_scales(manifest, mcfg, spatial, ss_scales)
        metric_main = AggregatedMetric(manifest, mcfg, scales, spatial)
        if config.init_mode == "warm":
            metric_init = AggregatedMetric(manifest, mcfg.without_feature_term(), scales, spatial)

    rng_init = np.random.default_rng(ss_init)
    state = initialize_labeled(manifest, costs, checkpoints[0], config.init_mode, rng_init, metric=metric_init)

    records = [
        _batch_record(manifest, state.labeled, 0, "init", checkpoints[0], checkpoints[0], costs, 0.0)
    ]
    cycle_seeds = ss_cycles.spawn(len(checkpoints) - 1) if len(checkpoints) > 1 else []
    for t in range(1, len(checkpoints)):
        cycle_budget = checkpoints[t] - state.spent
        spent_at_start = state.spent
        rng_t = np.random.default_rng(cycle_seeds[t - 1])
        if strategy == "diversity":
            batch = greedy_select_cycle(
                state, metric_main, costs, cycle_budget, spent_budget=spent_at_start
            )
        elif strategy == "random":
            batch = random_select_cycle(state, costs, cycle_budget, rng_t)
        else:
            batch = entropy_select_cycle(
                state, manifest, costs, cycle_budget, config.pool_factor, config.cost, rng_t
            )
        records.append(
            _batch_record(
                manifest, batch, t, "select", checkpoints[t], cycle_budget, costs,
                records[-1].cumulative_cost,
            )
        )

    resolved = config.to_dict()
    resolved["seed"] = config.seed
    return SelectionReport(
        strategy=strategy,
        seed=config.seed,
        config=resolved,
        scales=scales.to_dict() if scales is not None else None,
        source_manifest=manifest.source_path,
        num_samples=len(manifest),
        cycles=tuple(records),
        total_cost=records[-1].cumulative_cost,
        warnings=tuple(state.warnings),
    )
