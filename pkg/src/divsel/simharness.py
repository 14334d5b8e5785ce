"""Synthetic AV-trajectory manifests and selection coverage reports.

The generator reproduces the density mechanism that makes uncertainty
sampling struggle on driving data: the recording rate is fixed, so where
traffic slows the vehicle down, samples bunch up spatially, and those
busy spots also contain more objects. Hotspots encode exactly that
coupling (slowdown factor -> sample density, box boost -> object count),
and synthetic uncertainty rises with local box count.

Everything is deterministic per seed; streams draw from independent
child seeds so they could be generated in parallel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, UnknownIdError
from .manifest import DatasetManifest, SampleRecord

UNCERTAINTY_NOISE_SIGMA = 0.05
FEATURE_NOISE_SIGMA = 0.05
AREA_SEPARATION_FACTOR = 3.0  # coordinate offset between areas, in extents


@dataclass(frozen=True)
class Hotspot:
    """A slow, busy region: denser sampling and boosted box counts inside."""

    center: tuple[float, float]
    radius: float
    slowdown: float = 2.0
    box_boost: float = 2.0

    def __post_init__(self):
        if not (self.radius > 0.0):
            raise ConfigError(f"hotspot radius must be positive, got {self.radius!r}")
        if not (self.slowdown >= 1.0):
            raise ConfigError(f"hotspot slowdown must be >= 1, got {self.slowdown!r}")
        if not (self.box_boost >= 1.0):
            raise ConfigError(f"hotspot box_boost must be >= 1, got {self.box_boost!r}")

    def contains(self, x: float, y: float) -> bool:
        return (x - self.center[0]) ** 2 + (y - self.center[1]) ** 2 <= self.radius**2


@dataclass(frozen=True)
class TrajectoryConfig:
    """Knobs for the synthetic trajectory generator."""

    num_streams: int = 6
    duration_s: float = 300.0
    rate_hz: float = 2.0
    extent_m: float = 2000.0
    base_speed_mps: float = 10.0
    revisit_probability: float = 0.2
    hotspots: tuple[Hotspot, ...] = ()
    base_box_mean: float = 4.0
    num_categories: int = 10
    num_areas: int = 1
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.num_streams, int) or self.num_streams < 1:
            raise ConfigError(f"num_streams must be an integer >= 1, got {self.num_streams!r}")
        for name in ("duration_s", "rate_hz", "extent_m", "base_speed_mps", "base_box_mean"):
            if not (getattr(self, name) > 0.0):
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not (0.0 <= self.revisit_probability <= 1.0):
            raise ConfigError(f"revisit_probability must be in [0, 1], got {self.revisit_probability!r}")
        if not isinstance(self.num_categories, int) or self.num_categories < 1:
            raise ConfigError(f"num_categories must be an integer >= 1, got {self.num_categories!r}")
        if not isinstance(self.num_areas, int) or not (1 <= self.num_areas <= self.num_streams):
            raise ConfigError(
                f"num_areas must be an integer in [1, num_streams], got {self.num_areas!r}"
            )
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrajectoryConfig":
        if not isinstance(d, Mapping):
            raise ConfigError(f"scenario must be a JSON object, got {type(d).__name__}")
        allowed = {
            "num_streams", "duration_s", "rate_hz", "extent_m", "base_speed_mps",
            "revisit_probability", "hotspots", "base_box_mean", "num_categories",
            "num_areas", "seed",
        }
        unknown = sorted(set(d.keys()) - allowed)
        if unknown:
            raise ConfigError(f"unknown key(s) in scenario: {unknown}")
        hotspots = []
        for h in d.get("hotspots", []):
            if not isinstance(h, Mapping):
                raise ConfigError("each hotspot must be an object")
            h_unknown = sorted(set(h.keys()) - {"center", "radius", "slowdown", "box_boost"})
            if h_unknown:
                raise ConfigError(f"unknown key(s) in hotspot: {h_unknown}")
            center = h.get("center")
            if not isinstance(center, (list, tuple)) or len(center) != 2:
                raise ConfigError(f"hotspot center must be [x, y], got {center!r}")
            hotspots.append(
                Hotspot(
                    center=(float(center[0]), float(center[1])),
                    radius=float(h.get("radius", 0.0)),
                    slowdown=float(h.get("slowdown", 2.0)),
                    box_boost=float(h.get("box_boost", 2.0)),
                )
            )
        kwargs = {k: d[k] for k in allowed - {"hotspots"} if k in d}
        return cls(hotspots=tuple(hotspots), **kwargs)

    @classmethod
    def from_json_file(cls, path: str | Path) -> "TrajectoryConfig":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "num_streams": self.num_streams,
            "duration_s": self.duration_s,
            "rate_hz": self.rate_hz,
            "extent_m": self.extent_m,
            "base_speed_mps": self.base_speed_mps,
            "revisit_probability": self.revisit_probability,
            "hotspots": [
                {"center": list(h.center), "radius": h.radius,
                 "slowdown": h.slowdown, "box_boost": h.box_boost}
                for h in self.hotspots
            ],
            "base_box_mean": self.base_box_mean,
            "num_categories": self.num_categories,
            "num_areas": self.num_areas,
            "seed": self.seed,
        }


def _category_mixtures(num_categories: int) -> tuple[np.ndarray, np.ndarray]:
    """Background favors low-index categories, hotspots high-index ones."""
    decay = 0.7 ** np.arange(num_categories)
    background = decay / decay.sum()
    hotspot = decay[::-1] / decay.sum()
    return background, hotspot


def _slowdown_and_boost(hotspots: Sequence[Hotspot], x: float, y: float) -> tuple[float, float]:
    slowdown = 1.0
    boost = 1.0
    for h in hotspots:
        if h.contains(x, y):
            slowdown = max(slowdown, h.slowdown)
            boost = max(boost, h.box_boost)
    return slowdown, boost


def _new_waypoint(rng: np.random.Generator, pos: np.ndarray, extent: float) -> np.ndarray:
    lo, hi = 0.05 * extent, 0.95 * extent
    for _ in range(16):
        cand = rng.uniform(lo, hi, size=2)
        if np.hypot(*(cand - pos)) > 0.05 * extent:
            return cand
    return cand


def _generate_stream(
    cfg: TrajectoryConfig, stream: int, area: int, seed: np.random.SeedSequence
) -> list[SampleRecord]:
    rng = np.random.default_rng(seed)
    n_samples = int(round(cfg.duration_s * cfg.rate_hz))
    extent = cfg.extent_m
    offset_x = area * AREA_SEPARATION_FACTOR * extent
    bg_mix, hot_mix = _category_mixtures(cfg.num_categories)
    cat_names = [f"c{i:02d}" for i in range(cfg.num_categories)]

    pos = rng.uniform(0.2 * extent, 0.8 * extent, size=2)
    waypoints = [pos.copy()]
    target = _new_waypoint(rng, pos, extent)

    records = []
    for k in range(n_samples):
        slowdown, boost = _slowdown_and_boost(cfg.hotspots, pos[0], pos[1])
        boxes = int(rng.poisson(cfg.base_box_mean * boost))
        mix = hot_mix if boost > 1.0 else bg_mix
        counts = rng.multinomial(boxes, mix) if boxes > 0 else np.zeros(cfg.num_categories, dtype=int)
        uncertainty = 1.0 - math.exp(-boxes / 10.0) + rng.normal(0.0, UNCERTAINTY_NOISE_SIGMA)
        uncertainty = min(max(uncertainty, 0.0), 1.0)
        feature = (
            pos[0] / extent + rng.normal(0.0, FEATURE_NOISE_SIGMA),
            pos[1] / extent + rng.normal(0.0, FEATURE_NOISE_SIGMA),
            boxes / 10.0 + rng.normal(0.0, FEATURE_NOISE_SIGMA),
        )
        records.append(
            SampleRecord(
                id=f"s{stream:03d}f{k:05d}",
                stream_id=stream,
                timestamp=k / cfg.rate_hz,
                location=(pos[0] + offset_x, pos[1]),
                area_id=area,
                num_boxes=boxes,
                feature=feature,
                uncertainty=uncertainty,
                category_histogram={n: int(c) for n, c in zip(cat_names, counts)},
            )
        )
        # advance one sampling interval at the local (slowed) speed;
        # the slowdown is held constant over the step
        remaining = cfg.base_speed_mps / slowdown / cfg.rate_hz
        while remaining > 0.0:
            seg = target - pos
            seg_len = float(np.hypot(seg[0], seg[1]))
            if seg_len <= remaining:
                pos = target.copy()
                remaining -= seg_len
                waypoints.append(target.copy())
                if len(waypoints) >= 3 and rng.random() < cfg.revisit_probability:
                    previous = waypoints[int(rng.integers(0, len(waypoints) - 1))]
                    target = previous.copy()
                    if np.hypot(*(target - pos)) < 1e-9:
                        target = _new_waypoint(rng, pos, extent)
                else:
                    target = _new_waypoint(rng, pos, extent)
            else:
                pos = pos + seg * (remaining / seg_len)
                remaining = 0.0
    return records


def generate_trajectories(config: TrajectoryConfig) -> DatasetManifest:
    """Generate a synthetic manifest of piecewise-linear vehicle trajectories.

    Within hotspots the inter-sample spacing shrinks by the slowdown
    factor (fixed recording rate, lower speed) and box counts are boosted;
    uncertainty grows monotonically with box count plus seeded noise.
    """
    seeds = np.random.SeedSequence(config.seed).spawn(config.num_streams)
    records: list[SampleRecord] = []
    for stream in range(config.num_streams):
        area = stream % config.num_areas
        records.extend(_generate_stream(config, stream, area, seeds[stream]))
    return DatasetManifest.from_records(records, source_path="<synthetic>")


@dataclass(frozen=True)
class CoverageReport:
    """How a selected batch covers the dataset (serves the strategy plots)."""

    frames: int
    boxes: int
    category_histogram: dict[str, int]
    dispersion_m: float
    stream_coverage: float

    def to_dict(self) -> dict:
        return {
            "frames": self.frames,
            "boxes": self.boxes,
            "category_histogram": dict(sorted(self.category_histogram.items())),
            "dispersion_m": self.dispersion_m,
            "stream_coverage": self.stream_coverage,
        }


def evaluate_selection(manifest: DatasetManifest, ids: Sequence[str]) -> CoverageReport:
    """Coverage metrics for a batch: counts, category mix, dispersion, streams.

    Dispersion is the mean Euclidean distance from each selected sample to
    its nearest other selected sample (0 for batches smaller than 2).
    """
    indices = []
    for sid in ids:
        idx = manifest.index_of.get(sid)
        if idx is None:
            raise UnknownIdError(f"unknown sample id {sid!r}")
        indices.append(idx)
    idx = np.asarray(indices, dtype=np.intp)
    frames = len(idx)
    boxes = int(manifest.num_boxes[idx].sum()) if frames else 0
    histogram: dict[str, int] = {}
    for i in idx:
        hist = manifest.samples[i].category_histogram
        if hist:
            for name, count in hist.items():
                histogram[name] = histogram.get(name, 0) + int(count)
    if frames >= 2:
        locs = manifest.locations[idx]
        d, _ = cKDTree(locs).query(locs, k=2)
        dispersion = float(d[:, 1].mean())
    else:
        dispersion = 0.0
    total_streams = len(np.unique(manifest.stream_ids))
    touched = len(np.unique(manifest.stream_ids[idx])) if frames else 0
    return CoverageReport(
        frames=frames,
        boxes=boxes,
        category_histogram=histogram,
        dispersion_m=dispersion,
        stream_coverage=touched / total_streams,
    )


def standard_hotspot_scenario(seed: int = 0) -> TrajectoryConfig:
    """The fixed hotspot scenario used by the qualitative reproduction tests."""
    return TrajectoryConfig(
        num_streams=4,
        duration_s=450.0,
        rate_hz=4.0,
        extent_m=2500.0,
        base_speed_mps=10.0,
        revisit_probability=0.2,
        hotspots=(
            Hotspot(center=(625.0, 625.0), radius=375.0, slowdown=6.0, box_boost=4.0),
            Hotspot(center=(1875.0, 1875.0), radius=375.0, slowdown=4.5, box_boost=3.0),
        ),
        base_box_mean=4.0,
        num_categories=10,
        num_areas=1,
        seed=seed,
    )
