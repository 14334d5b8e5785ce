"""Acceptance suite: one test per criterion, one [PASS]/[FAIL] line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as the
criteria execute.
"""

import json
import subprocess
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from divsel import (
    AggregatedMetric,
    CostModel,
    DistanceTermConfig,
    RunConfig,
    SampleRecord,
    annotation_cost,
    build_knn_graph,
    estimate_scales,
    evaluate_selection,
    generate_trajectories,
    greedy_select_cycle,
    initialize_labeled,
    manifold_distances_from,
    normalize,
    run_schedule,
    standard_hotspot_scenario,
    write_manifest,
)
from divsel.cli import main as cli_main

from conftest import make_manifest
from oracles import (
    covering_radius,
    floyd_warshall,
    graph_edge_dict,
    naive_greedy,
    optimal_kcenter_radius,
    pairwise_matrix,
)
from test_selector import build_metric, seeded_state


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}", flush=True)
        raise
    print(f"[PASS] {name}", flush=True)


def test_shortest_path_oracle():
    with criterion("shortest-path oracle: Dijkstra == Floyd-Warshall on 100 graphs, <5s"):
        start = time.perf_counter()
        rng = np.random.default_rng(2024)
        for trial in range(100):
            n = int(rng.integers(10, 41))
            k = int(rng.integers(2, min(5, n)))
            m = make_manifest(n, seed=trial, extent=100.0)
            graph = build_knn_graph(m, k=k)
            fw = floyd_warshall(n, graph_edge_dict(graph), graph.large_constant)
            for s in range(n):
                np.testing.assert_allclose(
                    manifold_distances_from(graph, s), fw[s], atol=1e-9, rtol=0.0
                )
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"took {elapsed:.2f}s"


def test_greedy_oracle():
    with criterion("greedy oracle: incremental == from-scratch reference on 50 instances"):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(40, 201))
            with_features = bool(rng.integers(0, 2))
            m = make_manifest(
                n, seed=seed + 1000,
                n_streams=int(rng.integers(1, 5)),
                with_features=with_features,
            )
            cfg = DistanceTermConfig(
                lambda_s=float(rng.uniform(0.2, 2.0)),
                lambda_t=float(rng.uniform(0.0, 2.0)),
                lambda_f=float(rng.uniform(0.5, 2.0)) if with_features else 0.0,
                aggregation=str(rng.choice(["sum", "min", "max"])),
                normalization=str(rng.choice(["rbf", "linear"])),
            )
            mode = str(rng.choice(["euclidean", "manifold"]))
            metric = build_metric(m, cfg, spatial_mode=mode, k=3, seed=seed)
            costs = CostModel(c_f=0.12, c_b=0.04).sample_costs(m)
            labeled = sorted(int(i) for i in rng.choice(n, size=3, replace=False))
            budget = float(rng.uniform(1.0, 3.0))
            state = seeded_state(m, costs, labeled)
            batch = greedy_select_cycle(state, metric, costs, budget, spent_budget=0.0)
            reference = naive_greedy(pairwise_matrix(metric, n, 0.0), labeled, costs, budget)
            assert batch == reference, f"instance {seed}: {batch} != {reference}"


def test_two_approximation():
    with criterion("2-approximation: greedy radius <= 2x brute-force optimum, 50 instances"):
        for seed in range(50):
            rng = np.random.default_rng(seed + 7)
            n = int(rng.integers(8, 16))
            k = int(rng.integers(2, 4))
            m = make_manifest(n, seed=seed + 300, n_streams=1)
            cfg = DistanceTermConfig(lambda_s=1.0, lambda_t=0.0, lambda_f=0.0)
            metric = build_metric(m, cfg, seed=seed)
            costs = CostModel(c_f=1.0, c_b=0.0).sample_costs(m)
            state = initialize_labeled(m, costs, 1.0, "cold", np.random.default_rng(seed))
            greedy_select_cycle(state, metric, costs, float(k - 1), spent_budget=0.0)
            assert len(state.labeled) == k
            D = pairwise_matrix(metric, n, 0.0)
            greedy_radius = covering_radius(D, state.labeled)
            optimal = optimal_kcenter_radius(D, k)
            assert greedy_radius <= 2.0 * optimal + 1e-12, (
                f"instance {seed}: {greedy_radius} > 2 * {optimal}"
            )


def test_budget_soundness_fuzz():
    with criterion("budget soundness: 1,000 fuzzed schedules, zero violations"):
        rng = np.random.default_rng(99)
        for trial in range(1000):
            n = int(rng.integers(15, 50))
            m = make_manifest(
                n, seed=trial, with_uncertainty=True, with_features=False,
                n_streams=int(rng.integers(1, 4)), max_boxes=int(rng.integers(0, 12)),
            )
            strategy = str(rng.choice(["diversity", "random", "entropy"]))
            c_f = float(rng.uniform(0.0, 1.0))
            c_b = float(rng.uniform(0.0, 0.3))
            if c_f + c_b == 0.0:
                c_f = 0.12
            costs = CostModel(c_f=c_f, c_b=c_b).sample_costs(m)
            b0 = float(costs.max()) * float(rng.uniform(1.2, 3.0))
            checkpoints = [b0]
            for _ in range(int(rng.integers(1, 4))):
                checkpoints.append(checkpoints[-1] + float(rng.uniform(0.5, 3.0)))
            config = RunConfig.from_dict({
                "strategy": strategy,
                "spatial_mode": "manifold" if trial % 5 == 0 else "euclidean",
                "knn_k": 2,
                "cost": {"c_f": c_f, "c_b": c_b},
                "checkpoints": checkpoints,
                "seed": trial,
                "init_mode": str(rng.choice(["cold", "warm"])),
                "metric": {"lambda_s": 1.0, "lambda_t": 1.0, "lambda_f": 0.0},
            })
            report = run_schedule(m, config)
            init = report.cycles[0]
            assert init.cost <= checkpoints[0], f"trial {trial}: init overshoot"
            for c in report.cycles[1:]:
                batch_costs = [float(costs[m.index_of[i]]) for i in c.ids]
                if batch_costs:
                    assert sum(batch_costs[:-1]) < c.cycle_budget, (
                        f"trial {trial} cycle {c.index}: pre-final cost "
                        f"{sum(batch_costs[:-1])} >= budget {c.cycle_budget}"
                    )


def test_normalization_properties():
    with criterion("normalization: monotone, [0,1]-bounded, RBF(inf) == 1.0 exactly"):
        rng = np.random.default_rng(5)
        draws = np.sort(rng.exponential(scale=25.0, size=10_000))
        for mode in ("rbf", "linear"):
            for scale in (0.5, 7.0, 3000.0):
                out = normalize(draws, mode, scale)
                assert np.all(np.diff(out) >= 0.0), f"{mode}/{scale}: not monotone"
                assert np.all((out >= 0.0) & (out <= 1.0)), f"{mode}/{scale}: out of range"
                assert normalize(np.inf, mode, scale) == 1.0
                assert normalize(float(np.inf), mode, scale) == 1.0
        assert normalize(0.0, "rbf", 3.0) == 0.0


def test_cost_model_paper_constants():
    with criterion("cost model: c_f=0.12, c_b=0.04 fixtures match hand arithmetic exactly"):
        model = CostModel(c_f=0.12, c_b=0.04)
        two_frames = [
            SampleRecord("a", 0, 0.0, (0.0, 0.0), 0, 5),
            SampleRecord("b", 0, 1.0, (1.0, 0.0), 0, 7),
        ]
        assert annotation_cost(two_frames, model) == 0.12 * 2 + 0.04 * 12
        assert annotation_cost(two_frames, model) == 0.72
        box_only = CostModel(c_f=0.0, c_b=0.04)
        assert annotation_cost(two_frames, box_only) == 0.04 * 12
        frame_only = CostModel(c_f=0.6, c_b=0.0)
        assert annotation_cost(two_frames, frame_only) == 0.6 * 2
        assert annotation_cost([], model) == 0.0
        single = [SampleRecord("c", 0, 0.0, (0.0, 0.0), 0, 31)]
        assert annotation_cost(single, model) == 0.12 + 0.04 * 31


HOTSPOT_CHECKPOINTS = [8.0, 30.0, 60.0, 120.0]

STRATEGY_CONFIGS = {
    "random": {"strategy": "random"},
    "entropy": {"strategy": "entropy"},
    "spatial": {"strategy": "diversity",
                "metric": {"lambda_s": 1.0, "lambda_t": 0.0, "lambda_f": 0.0}},
    "spa_temp": {"strategy": "diversity",
                 "metric": {"lambda_s": 1.0, "lambda_t": 1.0, "lambda_f": 0.0}},
}


@pytest.fixture(scope="module")
def hotspot_runs():
    """Coverage per (seed, strategy) on the standard hotspot scenario."""
    start = time.perf_counter()
    runs = {}
    for seed in (1, 2, 3):
        manifest = generate_trajectories(standard_hotspot_scenario(seed=seed))
        per_strategy = {}
        for name, overrides in STRATEGY_CONFIGS.items():
            config = RunConfig.from_dict({
                **overrides, "seed": seed, "checkpoints": HOTSPOT_CHECKPOINTS,
            })
            report = run_schedule(manifest, config)
            per_strategy[name] = evaluate_selection(manifest, report.selected_ids)
        runs[seed] = per_strategy
    return runs, time.perf_counter() - start


def test_qualitative_frame_box_ordering(hotspot_runs):
    with criterion("qualitative reproduction: frame/box orderings hold on seeds 1-3, <2min"):
        runs, elapsed = hotspot_runs
        for seed, cov in runs.items():
            frames = {k: v.frames for k, v in cov.items()}
            boxes = {k: v.boxes for k, v in cov.items()}
            assert frames["entropy"] < frames["random"] < frames["spatial"], (
                f"seed {seed}: frames {frames}"
            )
            assert boxes["spatial"] < boxes["random"] < boxes["entropy"], (
                f"seed {seed}: boxes {boxes}"
            )
        assert elapsed < 120.0, f"took {elapsed:.1f}s"


def test_dispersion_reproduction(hotspot_runs):
    with criterion("dispersion reproduction: spatial+temporal >= 1.5x random on seeds 1-3"):
        runs, _ = hotspot_runs
        for seed, cov in runs.items():
            ratio = cov["spa_temp"].dispersion_m / cov["random"].dispersion_m
            print(f"  seed {seed}: dispersion ratio {ratio:.2f}", flush=True)
            assert ratio >= 1.5, f"seed {seed}: ratio {ratio:.3f} < 1.5"


def test_cli_determinism(tmp_path):
    with criterion("determinism: cmd_select twice -> byte-identical reports"):
        manifest = make_manifest(120, seed=31, with_features=True, with_uncertainty=True)
        manifest_path = tmp_path / "m.csv"
        write_manifest(manifest, manifest_path)
        config_path = tmp_path / "c.json"
        config_path.write_text(json.dumps({
            "strategy": "diversity",
            "spatial_mode": "manifold",
            "knn_k": 4,
            "cost": {"c_f": 0.12, "c_b": 0.04},
            "checkpoints": [3.0, 6.0, 12.0],
            "seed": 17,
            "metric": {"lambda_s": 1.0, "lambda_t": 1.0, "lambda_f": 1.0,
                       "feature_enable_budget": 6.0},
        }))
        outputs = []
        for name in ("r1.json", "r2.json"):
            out = tmp_path / name
            code = cli_main(["select", "--manifest", str(manifest_path),
                             "--config", str(config_path), "--out", str(out), "--quiet"])
            assert code == 0
            outputs.append((out.read_bytes(), out.with_suffix(".ids.csv").read_bytes()))
        assert outputs[0][0] == outputs[1][0]
        assert outputs[0][1] == outputs[1][1]


SCALE_SCRIPT = """
import json, resource, sys, time
from divsel import (RunConfig, TrajectoryConfig, Hotspot, generate_trajectories,
                    run_schedule)

scenario = TrajectoryConfig(
    num_streams=10, duration_s=1500.0, rate_hz=2.0, extent_m=3000.0,
    base_speed_mps=12.0, revisit_probability=0.2,
    hotspots=(Hotspot(center=(750.0, 750.0), radius=450.0, slowdown=4.0, box_boost=2.0),
              Hotspot(center=(2250.0, 2250.0), radius=450.0, slowdown=3.0, box_boost=2.0)),
    base_box_mean=40.0, num_categories=10, num_areas=1, seed=0,
)
manifest = generate_trajectories(scenario)
assert len(manifest) == 30000, len(manifest)
config = RunConfig.from_dict({
    "strategy": "diversity",
    "spatial_mode": "manifold",
    "knn_k": 8,
    "cost": {"c_f": 0.12, "c_b": 0.04},
    "checkpoints": [600.0, 1200.0, 2400.0, 4800.0],
    "seed": 0,
    "metric": {"lambda_s": 1.0, "lambda_t": 1.0, "lambda_f": 0.0},
})
start = time.perf_counter()
report = run_schedule(manifest, config)
elapsed = time.perf_counter() - start
peak_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024.0
print(json.dumps({
    "elapsed_s": elapsed,
    "peak_rss_mb": peak_mb,
    "frames": sum(c.frames for c in report.cycles),
    "total_cost": report.total_cost,
}))
"""


def test_scale_30k_samples():
    with criterion("scale: 30,000 samples, budgets 600/1200/2400/4800, <5min, <2GB"):
        proc = subprocess.run(
            [sys.executable, "-c", SCALE_SCRIPT],
            capture_output=True, text=True, timeout=540,
        )
        assert proc.returncode == 0, proc.stderr[-2000:]
        stats = json.loads(proc.stdout.strip().splitlines()[-1])
        print(f"  selection: {stats['elapsed_s']:.1f}s, peak {stats['peak_rss_mb']:.0f} MB, "
              f"{stats['frames']} frames", flush=True)
        assert stats["elapsed_s"] < 300.0
        assert stats["peak_rss_mb"] < 2048.0
        assert stats["frames"] > 1000
