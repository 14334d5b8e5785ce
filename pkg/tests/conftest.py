import numpy as np
import pytest

from divsel import DatasetManifest, SampleRecord


def make_manifest(
    n: int,
    seed: int = 0,
    *,
    n_streams: int = 3,
    n_areas: int = 1,
    extent: float = 100.0,
    with_features: bool = False,
    feature_dim: int = 3,
    with_uncertainty: bool = False,
    max_boxes: int = 6,
) -> DatasetManifest:
    """Small random manifest for unit tests; deterministic per seed."""
    rng = np.random.default_rng(seed)
    streams = rng.integers(0, n_streams, size=n)
    records = []
    for i in range(n):
        stream = int(streams[i])
        records.append(
            SampleRecord(
                id=f"r{i:04d}",
                stream_id=stream,
                timestamp=float(rng.uniform(0, 1000)),
                location=(
                    float(rng.uniform(0, extent) + (stream % n_areas) * 10 * extent),
                    float(rng.uniform(0, extent)),
                ),
                area_id=stream % n_areas,
                num_boxes=int(rng.integers(0, max_boxes + 1)),
                feature=tuple(rng.normal(size=feature_dim)) if with_features else None,
                uncertainty=float(rng.uniform(0, 1)) if with_uncertainty else None,
            )
        )
    return DatasetManifest.from_records(records)


@pytest.fixture
def small_manifest():
    return make_manifest(40, seed=11, with_features=True, with_uncertainty=True)
