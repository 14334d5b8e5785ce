"""Distance terms, [0,1] normalization, and weighted aggregation.

Three per-pair terms feed the selector: spatial (from geo_graph), temporal
(|Δts| within a stream, infinite across streams) and feature (Lp norm on
embedding vectors). Raw values live on wildly different scales, so each
term is squashed to [0,1] before the weighted combination. Normalized
distances are plain floats (or arrays); the [0,1] bound is a documented
contract, not a wrapper type.

Every function here is pure and accepts scalars or numpy arrays
interchangeably; selection hot loops use the array form.

Scale estimation samples pairs with a seeded generator and is
single-threaded so runs are reproducible; the resulting scales are echoed
into the selection report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigError,
    DimensionMismatchError,
    NoActiveTermError,
    NonPositiveScaleError,
)
from .manifest import DatasetManifest, SampleRecord

NORMALIZATIONS = ("rbf", "linear")
AGGREGATIONS = ("sum", "min", "max")

SCALE_SAMPLE_PAIRS = 10_000
MANIFOLD_SCALE_SOURCES = 100


@dataclass(frozen=True)
class DistanceTermConfig:
    """Weights and modes for combining the spatial/temporal/feature terms.

    `feature_enable_budget` gates the feature term: it only participates
    once cumulative spend (at cycle start) has reached this many cost
    units. 0 means always on.
    """

    lambda_s: float = 1.0
    lambda_t: float = 1.0
    lambda_f: float = 0.0
    lp_order: float = 2.0
    normalization: str = "rbf"
    aggregation: str = "sum"
    feature_enable_budget: float = 0.0

    def __post_init__(self):
        for name in ("lambda_s", "lambda_t", "lambda_f"):
            v = getattr(self, name)
            if not (v >= 0.0) or not math.isfinite(v):
                raise ConfigError(f"{name} must be a finite non-negative number, got {v!r}")
        if self.lambda_s + self.lambda_t + self.lambda_f <= 0.0:
            raise ConfigError("at least one of lambda_s/lambda_t/lambda_f must be positive")
        if not (self.lp_order >= 1.0):
            raise ConfigError(f"lp_order must be >= 1, got {self.lp_order!r}")
        if self.normalization not in NORMALIZATIONS:
            raise ConfigError(f"normalization must be one of {NORMALIZATIONS}, got {self.normalization!r}")
        if self.aggregation not in AGGREGATIONS:
            raise ConfigError(f"aggregation must be one of {AGGREGATIONS}, got {self.aggregation!r}")
        if not (self.feature_enable_budget >= 0.0):
            raise ConfigError(f"feature_enable_budget must be >= 0, got {self.feature_enable_budget!r}")

    def without_feature_term(self) -> "DistanceTermConfig":
        """Model-free variant used for warm initialization."""
        return DistanceTermConfig(
            lambda_s=self.lambda_s,
            lambda_t=self.lambda_t,
            lambda_f=0.0,
            lp_order=self.lp_order,
            normalization=self.normalization,
            aggregation=self.aggregation,
            feature_enable_budget=self.feature_enable_budget,
        )


@dataclass(frozen=True)
class TermScales:
    """Per-term normalization scales derived once per run (None = term unused)."""

    spatial: float | None = None
    temporal: float | None = None
    feature: float | None = None

    def __post_init__(self):
        for name in ("spatial", "temporal", "feature"):
            v = getattr(self, name)
            if v is not None and (not math.isfinite(v) or v <= 0.0):
                raise NonPositiveScaleError(f"{name} scale must be positive and finite, got {v!r}")

    def to_dict(self) -> dict:
        return {"spatial": self.spatial, "temporal": self.temporal, "feature": self.feature}


def feature_distance(a, b, p: float = 2.0) -> float:
    """Lp distance between two feature vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"feature dimensions differ: {a.shape} vs {b.shape}")
    if not (p >= 1.0):
        raise ConfigError(f"lp order must be >= 1, got {p!r}")
    return float(np.linalg.norm(a - b, ord=p))


def feature_distance_row(features: np.ndarray, j: int, p: float = 2.0) -> np.ndarray:
    """Lp distances from sample j's feature vector to every row of `features`."""
    diff = features - features[j]
    if p == 2.0:
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if math.isinf(p):
        return np.abs(diff).max(axis=1)
    return (np.abs(diff) ** p).sum(axis=1) ** (1.0 / p)


def temporal_distance(a: SampleRecord, b: SampleRecord) -> float:
    """|Δtimestamp| within one stream; +inf across streams."""
    if a.stream_id != b.stream_id:
        return math.inf
    return abs(a.timestamp - b.timestamp)


def temporal_distance_row(timestamps: np.ndarray, stream_ids: np.ndarray, j: int) -> np.ndarray:
    return np.where(stream_ids == stream_ids[j], np.abs(timestamps - timestamps[j]), np.inf)


def normalize(d, mode: str, scale: float):
    """Squash a non-negative raw distance into [0, 1].

    rbf: 1 - exp(-d/scale); linear: min(d/scale, 1). Infinite input maps
    to exactly 1.0 in both modes. Monotone non-decreasing in d.
    """
    if not (scale > 0.0) or not math.isfinite(scale):
        raise NonPositiveScaleError(f"scale must be positive and finite, got {scale!r}")
    if mode == "rbf":
        out = 1.0 - np.exp(-np.divide(d, scale))
    elif mode == "linear":
        out = np.minimum(np.divide(d, scale), 1.0)
    else:
        raise ConfigError(f"unknown normalization mode {mode!r}")
    if isinstance(d, np.ndarray):
        return out
    return float(out)


def aggregate(spatial, temporal, feature, config: DistanceTermConfig, spent_budget: float):
    """Combine normalized per-term distances into the selection metric.

    sum: lambda-weighted sum over enabled terms. min/max: extreme over the
    enabled terms, ignoring lambda magnitudes beyond on/off. The feature
    term is enabled only once `spent_budget` has reached
    `config.feature_enable_budget`.
    """
    feature_on = config.lambda_f > 0.0 and spent_budget >= config.feature_enable_budget
    terms = []
    if config.lambda_s > 0.0:
        if spatial is None:
            raise ValueError("spatial term required (lambda_s > 0) but not provided")
        terms.append((config.lambda_s, spatial))
    if config.lambda_t > 0.0:
        if temporal is None:
            raise ValueError("temporal term required (lambda_t > 0) but not provided")
        terms.append((config.lambda_t, temporal))
    if feature_on:
        if feature is None:
            raise ValueError("feature term required (lambda_f > 0 and enabled) but not provided")
        terms.append((config.lambda_f, feature))
    if not terms:
        raise NoActiveTermError("all distance terms are disabled")

    if config.aggregation == "sum":
        out = terms[0][0] * np.asarray(terms[0][1], dtype=np.float64)
        for lam, val in terms[1:]:
            out = out + lam * np.asarray(val, dtype=np.float64)
    else:
        reducer = np.minimum if config.aggregation == "min" else np.maximum
        out = np.asarray(terms[0][1], dtype=np.float64)
        for _, val in terms[1:]:
            out = reducer(out, val)
    scalar_in = not any(isinstance(v, np.ndarray) for v in (spatial, temporal, feature))
    return float(out) if scalar_in else out


def _pick_scale(values: np.ndarray, mode: str) -> float:
    """Median (rbf) or max (linear) of the finite sampled raw distances."""
    if values.size == 0:
        return 1.0
    stat = float(np.median(values)) if mode == "rbf" else float(np.max(values))
    if stat > 0.0:
        return stat
    positive = values[values > 0.0]
    return float(positive.min()) if positive.size else 1.0


def _sample_pairs(rng: np.random.Generator, n: int, n_pairs: int) -> tuple[np.ndarray, np.ndarray]:
    i = rng.integers(0, n, size=n_pairs)
    j = rng.integers(0, n - 1, size=n_pairs)
    j = j + (j >= i)
    return i, j


def estimate_scales(
    manifest: DatasetManifest,
    config: DistanceTermConfig,
    spatial_backend=None,
    seed=0,
    n_pairs: int = SCALE_SAMPLE_PAIRS,
    spatial_sources: int = MANIFOLD_SCALE_SOURCES,
) -> TermScales:
    """Estimate one normalization scale per active term from sampled pairs.

    rbf mode uses the median finite raw distance, linear mode the maximum;
    infinities and cross-area large-constant sentinels are excluded in both
    modes (one sentinel would otherwise collapse all finite distances
    toward 0). Spatial distances are sampled as source batches x random
    targets so the whole estimate costs a bounded number of single-source
    queries.
    """
    n = len(manifest)
    rng = np.random.default_rng(seed)
    mode = config.normalization

    spatial_scale = temporal_scale = feature_scale = None

    if config.lambda_s > 0.0:
        if spatial_backend is None:
            raise ValueError("spatial backend required to estimate the spatial scale")
        if n < 2:
            spatial_scale = 1.0
        else:
            n_sources = min(spatial_sources, n)
            per_source = max(1, math.ceil(n_pairs / n_sources))
            sources = rng.choice(n, size=n_sources, replace=False)
            chunks = []
            for s in sources:
                row = spatial_backend.distances_from(int(s))
                t = rng.integers(0, n - 1, size=per_source)
                t = t + (t >= s)
                vals = row[t]
                chunks.append(vals[np.isfinite(vals) & (vals < spatial_backend.large_constant)])
            spatial_scale = _pick_scale(np.concatenate(chunks), mode)

    if config.lambda_t > 0.0:
        if n < 2:
            temporal_scale = 1.0
        else:
            i, j = _sample_pairs(rng, n, n_pairs)
            same = manifest.stream_ids[i] == manifest.stream_ids[j]
            vals = np.abs(manifest.timestamps[i] - manifest.timestamps[j])[same]
            temporal_scale = _pick_scale(vals, mode)

    if config.lambda_f > 0.0:
        feats = manifest.features
        if feats is None:
            raise ValueError("manifest has no features; cannot estimate the feature scale")
        if n < 2:
            feature_scale = 1.0
        else:
            i, j = _sample_pairs(rng, n, n_pairs)
            diff = feats[i] - feats[j]
            p = config.lp_order
            if p == 2.0:
                vals = np.sqrt(np.einsum("ij,ij->i", diff, diff))
            elif math.isinf(p):
                vals = np.abs(diff).max(axis=1)
            else:
                vals = (np.abs(diff) ** p).sum(axis=1) ** (1.0 / p)
            feature_scale = _pick_scale(vals, mode)

    return TermScales(spatial=spatial_scale, temporal=temporal_scale, feature=feature_scale)
