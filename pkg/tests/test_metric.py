import math

import numpy as np
import pytest

from divsel import (
    AggregatedMetric,
    ConfigError,
    DimensionMismatchError,
    DistanceTermConfig,
    EuclideanSpatialIndex,
    NoActiveTermError,
    NonPositiveScaleError,
    SampleRecord,
    TermScales,
    aggregate,
    estimate_scales,
    feature_distance,
    normalize,
    temporal_distance,
)
from divsel.metric import feature_distance_row, temporal_distance_row

from conftest import make_manifest
from oracles import lp_distance_oracle


def rec(sid, stream=0, ts=0.0, loc=(0.0, 0.0), area=0, boxes=0, **kw):
    return SampleRecord(sid, stream, ts, loc, area, boxes, **kw)


class TestFeatureDistance:
    def test_three_four_five(self):
        assert feature_distance((0.0, 0.0), (3.0, 4.0), p=2.0) == 5.0

    def test_identity(self):
        v = (0.3, -1.2, 7.0)
        assert feature_distance(v, v) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            feature_distance((1.0, 2.0), (1.0, 2.0, 3.0))

    @pytest.mark.parametrize("p", [1.0, 2.0, 2.5, 4.0])
    def test_matches_summation_oracle(self, p):
        rng = np.random.default_rng(42)
        for _ in range(50):
            a, b = rng.normal(size=8), rng.normal(size=8)
            assert feature_distance(a, b, p) == pytest.approx(lp_distance_oracle(a, b, p), abs=1e-12)
            assert feature_distance(a, b, p) == feature_distance(b, a, p)

    @pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
    def test_row_matches_scalar(self, p):
        rng = np.random.default_rng(7)
        feats = rng.normal(size=(20, 5))
        row = feature_distance_row(feats, 4, p)
        for i in range(20):
            assert row[i] == pytest.approx(feature_distance(feats[i], feats[4], p), rel=1e-12)
        assert row[4] == 0.0


class TestTemporalDistance:
    def test_same_stream(self):
        assert temporal_distance(rec("a", ts=5.0), rec("b", ts=7.5)) == 2.5

    def test_identity(self):
        a = rec("a", ts=3.0)
        assert temporal_distance(a, a) == 0.0

    def test_cross_stream_infinite(self):
        assert temporal_distance(rec("a", stream=1, ts=0.0), rec("b", stream=2, ts=0.0)) == math.inf

    def test_symmetric(self):
        a, b = rec("a", ts=1.0), rec("b", ts=9.0)
        assert temporal_distance(a, b) == temporal_distance(b, a)

    def test_row_matches_scalar(self):
        m = make_manifest(30, seed=2)
        row = temporal_distance_row(m.timestamps, m.stream_ids, 3)
        for i in range(30):
            assert row[i] == temporal_distance(m.samples[i], m.samples[3])


class TestNormalize:
    def test_rbf_zero(self):
        assert normalize(0.0, "rbf", 1.0) == 0.0

    def test_rbf_halfway(self):
        scale = 3.7
        assert normalize(scale * math.log(2.0), "rbf", scale) == pytest.approx(0.5, abs=1e-12)

    def test_linear_clamps(self):
        assert normalize(2.0 * 5.0, "linear", 5.0) == 1.0

    @pytest.mark.parametrize("mode", ["rbf", "linear"])
    def test_infinity_maps_to_exactly_one(self, mode):
        assert normalize(math.inf, mode, 2.0) == 1.0

    @pytest.mark.parametrize("mode", ["rbf", "linear"])
    def test_monotone_and_bounded(self, mode):
        rng = np.random.default_rng(0)
        d = np.sort(rng.exponential(scale=10.0, size=500))
        out = normalize(d, mode, 4.0)
        assert np.all(np.diff(out) >= 0.0)
        assert np.all((out >= 0.0) & (out <= 1.0))

    def test_bad_scale(self):
        for bad in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(NonPositiveScaleError):
                normalize(1.0, "rbf", bad)


class TestAggregate:
    def test_sum(self):
        cfg = DistanceTermConfig(lambda_s=1.0, lambda_t=1.0, lambda_f=0.0)
        assert aggregate(0.5, 0.25, None, cfg, spent_budget=0.0) == 0.75

    def test_feature_gated_off(self):
        cfg = DistanceTermConfig(lambda_s=1.0, lambda_t=1.0, lambda_f=1.0, feature_enable_budget=1200.0)
        assert aggregate(0.5, 0.25, 0.9, cfg, spent_budget=600.0) == 0.75

    def test_feature_gated_on(self):
        cfg = DistanceTermConfig(lambda_s=1.0, lambda_t=1.0, lambda_f=1.0, feature_enable_budget=1200.0)
        assert aggregate(0.5, 0.25, 0.9, cfg, spent_budget=1200.0) == pytest.approx(1.65)

    def test_max_ignores_lambda_magnitude(self):
        cfg = DistanceTermConfig(lambda_s=5.0, lambda_t=1.0, lambda_f=0.0, aggregation="max")
        assert aggregate(0.5, 0.25, None, cfg, spent_budget=0.0) == 0.5

    def test_min(self):
        cfg = DistanceTermConfig(lambda_s=1.0, lambda_t=1.0, lambda_f=0.0, aggregation="min")
        assert aggregate(0.5, 0.25, None, cfg, spent_budget=0.0) == 0.25

    def test_no_active_term(self):
        cfg = DistanceTermConfig(lambda_s=0.0, lambda_t=0.0, lambda_f=1.0, feature_enable_budget=100.0)
        with pytest.raises(NoActiveTermError):
            aggregate(None, None, 0.5, cfg, spent_budget=0.0)

    def test_reduces_to_spatial_only(self):
        cfg = DistanceTermConfig(lambda_s=1.0, lambda_t=0.0, lambda_f=0.0)
        rng = np.random.default_rng(5)
        d = rng.uniform(size=100)
        assert np.array_equal(aggregate(d, None, None, cfg, 0.0), d)

    def test_uniform_lambda_scaling_doubles_values(self):
        # doubling every weight is exact in floating point, so the argmax
        # ordering in the selector cannot move
        rng = np.random.default_rng(9)
        s, t, f = rng.uniform(size=(3, 50))
        one = DistanceTermConfig(lambda_s=1.0, lambda_t=1.0, lambda_f=1.0)
        two = DistanceTermConfig(lambda_s=2.0, lambda_t=2.0, lambda_f=2.0)
        v1 = aggregate(s, t, f, one, 0.0)
        v2 = aggregate(s, t, f, two, 0.0)
        assert np.array_equal(v2, 2.0 * v1)
        assert np.argmax(v1) == np.argmax(v2)


class TestDistanceTermConfig:
    def test_all_zero_lambdas_rejected(self):
        with pytest.raises(ConfigError):
            DistanceTermConfig(lambda_s=0.0, lambda_t=0.0, lambda_f=0.0)

    def test_p_below_one_rejected(self):
        with pytest.raises(ConfigError):
            DistanceTermConfig(lp_order=0.5)

    def test_bad_enum_rejected(self):
        with pytest.raises(ConfigError):
            DistanceTermConfig(normalization="sigmoid")
        with pytest.raises(ConfigError):
            DistanceTermConfig(aggregation="mean")


class TestAggregatedSymmetry:
    def test_rows_symmetric_and_zero_diagonal(self):
        m = make_manifest(25, seed=8, with_features=True)
        cfg = DistanceTermConfig(lambda_s=1.0, lambda_t=1.0, lambda_f=1.0)
        spatial = EuclideanSpatialIndex(m, large_constant=1e9)
        scales = estimate_scales(m, cfg, spatial, seed=0)
        metric = AggregatedMetric(m, cfg, scales, spatial)
        rows = [metric.distance_row(j, 0.0) for j in range(len(m))]
        for i in range(len(m)):
            assert rows[i][i] == 0.0
            for j in range(len(m)):
                assert rows[i][j] == pytest.approx(rows[j][i], rel=1e-12)


class TestEstimateScales:
    def test_deterministic(self):
        m = make_manifest(60, seed=4, with_features=True)
        cfg = DistanceTermConfig(lambda_s=1.0, lambda_t=1.0, lambda_f=1.0)
        spatial = EuclideanSpatialIndex(m, large_constant=1e9)
        s1 = estimate_scales(m, cfg, spatial, seed=123)
        s2 = estimate_scales(m, cfg, spatial, seed=123)
        assert s1 == s2
        s3 = estimate_scales(m, cfg, spatial, seed=124)
        assert s1 != s3

    def test_inactive_terms_have_no_scale(self):
        m = make_manifest(30, seed=4)
        cfg = DistanceTermConfig(lambda_s=0.0, lambda_t=1.0, lambda_f=0.0)
        scales = estimate_scales(m, cfg, None, seed=0)
        assert scales.spatial is None and scales.feature is None
        assert scales.temporal > 0.0

    @pytest.mark.parametrize("mode", ["rbf", "linear"])
    def test_sentinels_excluded(self, mode):
        # two far-apart areas: cross-area rows carry the large constant,
        # which must not leak into the scale
        m = make_manifest(40, seed=6, n_streams=4, n_areas=2, extent=50.0)
        cfg = DistanceTermConfig(lambda_s=1.0, lambda_t=0.0, lambda_f=0.0, normalization=mode)
        spatial = EuclideanSpatialIndex(m, large_constant=1e9)
        scales = estimate_scales(m, cfg, spatial, seed=1)
        assert scales.spatial < 1e6

    def test_temporal_all_cross_stream_falls_back(self):
        m = make_manifest(10, seed=2, n_streams=10)
        # with 10 streams over 10 samples most pairs are cross-stream; force
        # the degenerate single-sample-per-stream case
        recs = [
            SampleRecord(f"x{i}", i, float(i), (float(i), 0.0), 0, 1) for i in range(10)
        ]
        from divsel import DatasetManifest

        solo = DatasetManifest.from_records(recs)
        cfg = DistanceTermConfig(lambda_s=0.0, lambda_t=1.0, lambda_f=0.0)
        scales = estimate_scales(solo, cfg, None, seed=0)
        assert scales.temporal == 1.0


class TestScaleInvarianceOfSelection:
    def test_term_scales_reported_types(self):
        s = TermScales(spatial=2.0, temporal=3.0, feature=None)
        assert s.to_dict() == {"spatial": 2.0, "temporal": 3.0, "feature": None}
        with pytest.raises(NonPositiveScaleError):
            TermScales(spatial=-1.0)
