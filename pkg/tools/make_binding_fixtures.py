#!/usr/bin/env python3
"""Regenerate the bindings parity fixtures.

Produces three (manifest, config, golden report) triples under
bindings/fixtures/ by simulating small scenarios and running the CLI on
them. Everything is seeded, so reruns are byte-identical.
"""

import json
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "bindings" / "fixtures"

SCENARIOS = {
    "spa_temp": {
        "num_streams": 3, "duration_s": 40.0, "rate_hz": 2.0, "extent_m": 600.0,
        "base_speed_mps": 10.0, "revisit_probability": 0.2,
        "hotspots": [{"center": [150.0, 150.0], "radius": 90.0,
                      "slowdown": 3.0, "box_boost": 3.0}],
        "base_box_mean": 4.0, "num_categories": 5, "num_areas": 1, "seed": 101,
    },
    "entropy": {
        "num_streams": 2, "duration_s": 50.0, "rate_hz": 2.0, "extent_m": 500.0,
        "base_speed_mps": 10.0, "revisit_probability": 0.1,
        "hotspots": [{"center": [250.0, 250.0], "radius": 120.0,
                      "slowdown": 2.0, "box_boost": 4.0}],
        "base_box_mean": 3.0, "num_categories": 5, "num_areas": 1, "seed": 202,
    },
    "warm_feat": {
        "num_streams": 3, "duration_s": 40.0, "rate_hz": 2.0, "extent_m": 600.0,
        "base_speed_mps": 10.0, "revisit_probability": 0.3,
        "hotspots": [], "base_box_mean": 5.0, "num_categories": 5,
        "num_areas": 1, "seed": 303,
    },
}

CONFIGS = {
    "spa_temp": {
        "strategy": "diversity",
        "spatial_mode": "manifold",
        "knn_k": 4,
        "cost": {"c_f": 0.12, "c_b": 0.04},
        "checkpoints": [3.0, 6.0, 12.0],
        "seed": 7,
        "metric": {"lambda_s": 1.0, "lambda_t": 1.0, "lambda_f": 0.0},
    },
    "entropy": {
        "strategy": "entropy",
        "cost": {"c_f": 0.12, "c_b": 0.04},
        "checkpoints": [2.0, 4.0, 8.0],
        "seed": 7,
        "pool_factor": 5.0,
    },
    "warm_feat": {
        "strategy": "diversity",
        "spatial_mode": "euclidean",
        "init_mode": "warm",
        "cost": {"c_f": 0.12, "c_b": 0.04},
        "checkpoints": [2.0, 5.0, 10.0],
        "seed": 7,
        "metric": {"lambda_s": 1.0, "lambda_t": 1.0, "lambda_f": 1.0,
                   "feature_enable_budget": 5.0},
    },
}

MANIFEST_FORMATS = {"spa_temp": "jsonl", "entropy": "csv", "warm_feat": "jsonl"}


def cli(*args):
    subprocess.run([sys.executable, "-m", "divsel", *map(str, args)], check=True)


def main():
    FIXTURES.mkdir(parents=True, exist_ok=True)
    for name, scenario in SCENARIOS.items():
        scenario_path = FIXTURES / f"{name}.scenario.json"
        scenario_path.write_text(json.dumps(scenario, indent=2) + "\n")
        manifest_path = FIXTURES / f"{name}.manifest.{MANIFEST_FORMATS[name]}"
        cli("simulate", "--scenario", scenario_path, "--out", manifest_path, "--quiet")
        config_path = FIXTURES / f"{name}.config.json"
        config_path.write_text(json.dumps(CONFIGS[name], indent=2) + "\n")
        golden_path = FIXTURES / f"{name}.golden.json"
        cli("select", "--manifest", manifest_path, "--config", config_path,
            "--out", golden_path, "--quiet")
        print(f"wrote {name}: {manifest_path.name}, {config_path.name}, {golden_path.name}")


if __name__ == "__main__":
    main()
