"""KNN graph over sample locations and spatial distances.

The spatial term treats the data as lying on the road network: build a
K-nearest-neighbor graph per geographic area with squared-Euclidean edge
weights, then measure distance between two samples as the shortest path
on that graph. Pairs in different areas (or disconnected within one) get
`large_constant`, which normalizes to ~1, i.e. maximally diverse.

The N x N distance matrix is never materialized: callers issue one
single-source query per newly labeled sample (`distances_from`), keeping
memory at O(N + E). Queries on the immutable graph are independent and
may run concurrently. Shortest paths are solved by Dijkstra's algorithm
via scipy's compiled csgraph routine; the test suite checks it against a
hand-written Floyd-Warshall oracle.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra
from scipy.spatial import cKDTree

from .errors import TooFewSamplesError
from .manifest import DatasetManifest, SampleRecord

DEFAULT_K = 8
DEFAULT_LARGE_CONSTANT = 1e9


@dataclass(frozen=True)
class KnnGraph:
    """Symmetrized same-area KNN graph; edge weights are squared meters."""

    node_count: int
    adjacency: sparse.csr_matrix
    area_of: np.ndarray
    large_constant: float

    def distances_from(self, source: int) -> np.ndarray:
        return manifold_distances_from(self, source)

    def edges(self):
        """Yield each undirected edge once as (i, j, weight) with i < j."""
        coo = self.adjacency.tocoo()
        for i, j, w in zip(coo.row, coo.col, coo.data):
            if i < j:
                yield int(i), int(j), float(w)


def _knn_neighbors(points: np.ndarray, k: int) -> list[np.ndarray]:
    """Exact K nearest neighbors per point, ties broken by lower index.

    Candidates come from a kd-tree ball query wide enough to include every
    point tied with the K-th neighbor; the final ranking sorts by
    (squared distance, index) so the result is deterministic and matches a
    brute-force full sort.
    """
    n = len(points)
    tree = cKDTree(points)
    dist, _ = tree.query(points, k=k + 1)
    radius = dist[:, -1] * (1.0 + 1e-12) + 1e-300
    candidate_lists = tree.query_ball_point(points, radius)
    out = []
    for i in range(n):
        cand = np.asarray(candidate_lists[i], dtype=np.intp)
        cand = cand[cand != i]
        diff = points[cand] - points[i]
        d2 = np.einsum("ij,ij->i", diff, diff)
        order = np.lexsort((cand, d2))
        out.append(cand[order[:k]])
    return out


def build_knn_graph(
    manifest: DatasetManifest,
    k: int = DEFAULT_K,
    large_constant: float = DEFAULT_LARGE_CONSTANT,
) -> KnnGraph:
    """Build the symmetrized same-area KNN graph over sample locations.

    Each node gets edges to its exact K nearest same-area neighbors
    (ties -> lower manifest index), then the edge set is symmetrized by
    union. Edge weight is the squared Euclidean distance.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not (large_constant > 0.0):
        raise ValueError(f"large_constant must be positive, got {large_constant}")
    n = len(manifest)
    locations = manifest.locations
    areas = manifest.area_ids

    rows_parts, cols_parts = [], []
    for area in np.unique(areas):
        idx = np.flatnonzero(areas == area)
        if len(idx) <= k:
            raise TooFewSamplesError(
                f"area {area} has {len(idx)} samples but k={k} neighbors were requested"
            )
        neighbors = _knn_neighbors(locations[idx], k)
        for local_i, local_js in enumerate(neighbors):
            rows_parts.append(np.full(len(local_js), idx[local_i], dtype=np.intp))
            cols_parts.append(idx[local_js])

    rows = np.concatenate(rows_parts)
    cols = np.concatenate(cols_parts)
    # symmetrize by union, then drop duplicate directed edges
    rows, cols = np.concatenate([rows, cols]), np.concatenate([cols, rows])
    key = rows.astype(np.int64) * n + cols
    _, keep = np.unique(key, return_index=True)
    rows, cols = rows[keep], cols[keep]
    diff = locations[rows] - locations[cols]
    weights = np.einsum("ij,ij->i", diff, diff)

    adjacency = sparse.csr_matrix((weights, (rows, cols)), shape=(n, n))
    adjacency.sort_indices()
    return KnnGraph(node_count=n, adjacency=adjacency, area_of=areas, large_constant=large_constant)


def manifold_distances_from(graph: KnnGraph, source: int) -> np.ndarray:
    """Single-source shortest-path distances, summing squared edge lengths.

    Unreachable same-area nodes and all cross-area nodes get
    `graph.large_constant`; the source's own entry is 0.
    """
    if not (0 <= source < graph.node_count):
        raise IndexError(f"source {source} out of range for {graph.node_count} nodes")
    dist = dijkstra(graph.adjacency, directed=True, indices=source)
    dist[~np.isfinite(dist)] = graph.large_constant
    return dist


def euclidean_spatial_distance(
    a: SampleRecord, b: SampleRecord, large_constant: float = DEFAULT_LARGE_CONSTANT
) -> float:
    """Plain Euclidean distance for same-area pairs; large_constant across areas."""
    if a.area_id != b.area_id:
        return large_constant
    return math.hypot(a.location[0] - b.location[0], a.location[1] - b.location[1])


class EuclideanSpatialIndex:
    """Vectorized Euclidean spatial rows, mirroring KnnGraph.distances_from."""

    def __init__(self, manifest: DatasetManifest, large_constant: float = DEFAULT_LARGE_CONSTANT):
        self._locations = manifest.locations
        self._areas = manifest.area_ids
        self.node_count = len(manifest)
        self.large_constant = float(large_constant)

    def distances_from(self, source: int) -> np.ndarray:
        diff = self._locations - self._locations[source]
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        return np.where(self._areas == self._areas[source], d, self.large_constant)


def dump_edges(graph: KnnGraph, path: str | Path) -> None:
    """Write the undirected edge list as CSV rows (i, j, w), i < j."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "w"])
        for i, j, w in graph.edges():
            writer.writerow([i, j, repr(w)])
