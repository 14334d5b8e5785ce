"""Dataset manifest: per-frame metadata records plus file I/O.

A manifest row describes one recorded frame: where it was taken, on which
recording stream, when, and how many annotated boxes it contains. Feature
vectors and uncertainty scores are optional inputs produced elsewhere (a
detector's embedding / confidence); the manifest just carries them.

File formats (see docs/formats.md): CSV with a header row, or JSON lines
with one object per sample using the same flat field names as the CSV
columns. Manifests are immutable once constructed and safe to share
across threads.
"""

from __future__ import annotations

import csv
import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateIdError,
    InconsistentFeatureDimError,
    MissingFieldError,
    ParseError,
    SchemaError,
)

REQUIRED_COLUMNS = ("id", "stream_id", "timestamp", "loc_x", "loc_y", "area_id", "num_boxes")
_FEATURE_RE = re.compile(r"^feature_(\d+)$")
_CATEGORY_PREFIX = "cat_"

STRATEGIES = ("random", "entropy", "diversity")


@dataclass(frozen=True)
class SampleRecord:
    """One frame: identity, stream, timestamp (s), 2-D location (m), area, boxes."""

    id: str
    stream_id: int
    timestamp: float
    location: tuple[float, float]
    area_id: int
    num_boxes: int
    feature: tuple[float, ...] | None = None
    uncertainty: float | None = None
    category_histogram: Mapping[str, int] | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("id must be non-empty")
        if not math.isfinite(self.timestamp):
            raise ValueError(f"timestamp must be finite, got {self.timestamp!r}")
        if len(self.location) != 2 or not all(math.isfinite(c) for c in self.location):
            raise ValueError(f"location must be a finite (x, y) pair, got {self.location!r}")
        if self.num_boxes < 0:
            raise ValueError(f"num_boxes must be >= 0, got {self.num_boxes}")
        if self.uncertainty is not None and not (self.uncertainty >= 0.0):
            raise ValueError(f"uncertainty must be >= 0, got {self.uncertainty!r}")


@dataclass(frozen=True)
class DatasetManifest:
    """Immutable, validated collection of SampleRecords.

    Index order is the canonical tie-breaking order for every deterministic
    operation downstream, so the record tuple preserves file order exactly.
    """

    samples: tuple[SampleRecord, ...]
    feature_dim: int | None = None
    source_path: str = ""

    def __post_init__(self):
        if not self.samples:
            raise SchemaError("manifest must contain at least one sample")
        seen: set[str] = set()
        for rec in self.samples:
            if rec.id in seen:
                raise DuplicateIdError(f"duplicate sample id {rec.id!r}")
            seen.add(rec.id)
        dims = {len(rec.feature) for rec in self.samples if rec.feature is not None}
        if len(dims) > 1:
            raise InconsistentFeatureDimError(
                f"feature vectors have inconsistent dimensions: {sorted(dims)}"
            )
        if dims:
            if len(dims) == 1 and any(rec.feature is None for rec in self.samples):
                first = next(r.id for r in self.samples if r.feature is None)
                raise InconsistentFeatureDimError(
                    f"sample {first!r} has no feature vector while others do"
                )
            expected = dims.pop()
            if self.feature_dim is None:
                object.__setattr__(self, "feature_dim", expected)
            elif self.feature_dim != expected:
                raise InconsistentFeatureDimError(
                    f"declared feature_dim={self.feature_dim} but vectors have length {expected}"
                )
        elif self.feature_dim is not None:
            raise InconsistentFeatureDimError(
                f"declared feature_dim={self.feature_dim} but no sample carries features"
            )

    @classmethod
    def from_records(cls, records: Iterable[SampleRecord], source_path: str = "") -> "DatasetManifest":
        return cls(samples=tuple(records), source_path=source_path)

    def __len__(self) -> int:
        return len(self.samples)

    def __getitem__(self, index: int) -> SampleRecord:
        return self.samples[index]

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(rec.id for rec in self.samples)

    @cached_property
    def index_of(self) -> dict[str, int]:
        return {rec.id: i for i, rec in enumerate(self.samples)}

    @cached_property
    def locations(self) -> np.ndarray:
        arr = np.array([rec.location for rec in self.samples], dtype=np.float64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def timestamps(self) -> np.ndarray:
        arr = np.array([rec.timestamp for rec in self.samples], dtype=np.float64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def stream_ids(self) -> np.ndarray:
        arr = np.array([rec.stream_id for rec in self.samples], dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def area_ids(self) -> np.ndarray:
        arr = np.array([rec.area_id for rec in self.samples], dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def num_boxes(self) -> np.ndarray:
        arr = np.array([rec.num_boxes for rec in self.samples], dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def features(self) -> np.ndarray | None:
        if self.feature_dim is None:
            return None
        arr = np.array([rec.feature for rec in self.samples], dtype=np.float64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def uncertainties(self) -> np.ndarray:
        """Per-sample uncertainty with NaN marking absent values."""
        arr = np.array(
            [math.nan if rec.uncertainty is None else rec.uncertainty for rec in self.samples],
            dtype=np.float64,
        )
        arr.setflags(write=False)
        return arr

    def subset(self, ids: Sequence[str]) -> "DatasetManifest":
        """Manifest restricted to `ids`, keeping original index order."""
        keep = set(ids)
        missing = keep - set(self.ids)
        if missing:
            from .errors import UnknownIdError

            raise UnknownIdError(f"unknown sample ids: {sorted(missing)[:5]}")
        records = tuple(rec for rec in self.samples if rec.id in keep)
        return DatasetManifest(samples=records, source_path=self.source_path)


def _infer_format(path: str | Path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in ("csv", "jsonl"):
            raise SchemaError(f"unknown manifest format {fmt!r} (expected 'csv' or 'jsonl')")
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix in (".jsonl", ".ndjson"):
        return "jsonl"
    raise SchemaError(f"cannot infer manifest format from {path!r}; pass format='csv' or 'jsonl'")


def _check_field_names(names: Sequence[str], path: str, allow_loc_z: bool) -> tuple[list[int], bool, bool, list[str]]:
    """Validate the column/key set; return (feature indices, has_uncertainty,
    uses_microseconds, category names)."""
    present = set(names)
    if len(present) != len(list(names)):
        dupes = sorted({n for n in names if list(names).count(n) > 1})
        raise SchemaError(f"{path}: duplicate columns {dupes}")

    uses_us = "timestamp_us" in present
    if uses_us and "timestamp" in present:
        raise SchemaError(f"{path}: provide either 'timestamp' or 'timestamp_us', not both")
    required = set(REQUIRED_COLUMNS)
    if uses_us:
        required = (required - {"timestamp"}) | {"timestamp_us"}
    missing = sorted(required - present)
    if missing:
        raise SchemaError(f"{path}: missing required column(s) {missing}")

    feature_idx: list[int] = []
    categories: list[str] = []
    for name in names:
        if name in required:
            continue
        if name == "uncertainty":
            continue
        if name == "loc_z":
            if not allow_loc_z:
                raise SchemaError(
                    f"{path}: column 'loc_z' present; pass allow_loc_z=True to accept (and ignore) it"
                )
            continue
        m = _FEATURE_RE.match(name)
        if m:
            feature_idx.append(int(m.group(1)))
            continue
        if name.startswith(_CATEGORY_PREFIX) and len(name) > len(_CATEGORY_PREFIX):
            categories.append(name[len(_CATEGORY_PREFIX):])
            continue
        raise SchemaError(f"{path}: unknown column {name!r}")

    if feature_idx and sorted(feature_idx) != list(range(len(feature_idx))):
        raise SchemaError(
            f"{path}: feature columns must be contiguous feature_0..feature_{{F-1}}, got {sorted(feature_idx)}"
        )
    return feature_idx, "uncertainty" in present, uses_us, categories


def _record_from_fields(
    fields: Mapping[str, object],
    feature_count: int,
    has_uncertainty: bool,
    uses_us: bool,
    categories: Sequence[str],
    path: str,
    line: int,
) -> SampleRecord:
    def _get(name):
        v = fields.get(name)
        if v is None or v == "":
            raise ParseError(f"empty value for {name!r}", path, line)
        return v

    try:
        if uses_us:
            ts = int(_get("timestamp_us")) / 1e6
        else:
            ts = float(_get("timestamp"))
        feature = None
        if feature_count:
            vals = []
            missing = False
            for k in range(feature_count):
                v = fields.get(f"feature_{k}")
                if v is None or v == "":
                    missing = True
                    break
                vals.append(float(v))
            if missing:
                raise InconsistentFeatureDimError(
                    f"{path}:{line}: sample {fields.get('id')!r} has incomplete feature columns"
                )
            feature = tuple(vals)
        uncertainty = None
        if has_uncertainty:
            v = fields.get("uncertainty")
            if v is not None and v != "":
                uncertainty = float(v)
        histogram = None
        if categories:
            histogram = {}
            for name in categories:
                v = fields.get(_CATEGORY_PREFIX + name)
                histogram[name] = int(v) if v not in (None, "") else 0
        return SampleRecord(
            id=str(_get("id")),
            stream_id=int(_get("stream_id")),
            timestamp=ts,
            location=(float(_get("loc_x")), float(_get("loc_y"))),
            area_id=int(_get("area_id")),
            num_boxes=int(_get("num_boxes")),
            feature=feature,
            uncertainty=uncertainty,
            category_histogram=histogram,
        )
    except (ValueError, TypeError) as exc:
        raise ParseError(str(exc), path, line) from exc


def load_manifest(path: str | Path, format: str | None = None, allow_loc_z: bool = False) -> DatasetManifest:
    """Load and validate a manifest file, preserving file order exactly.

    `format` is inferred from the extension when omitted. Timestamps may
    be given as seconds (`timestamp`) or integer microseconds
    (`timestamp_us`); the latter are converted to seconds at load.
    """
    fmt = _infer_format(path, format)
    path = Path(path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")
    records: list[SampleRecord] = []
    if fmt == "csv":
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise SchemaError(f"{path}: empty file") from None
            feature_idx, has_unc, uses_us, cats = _check_field_names(header, str(path), allow_loc_z)
            for line_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise ParseError(
                        f"expected {len(header)} fields, got {len(row)}", str(path), line_no
                    )
                fields = dict(zip(header, row))
                records.append(
                    _record_from_fields(fields, len(feature_idx), has_unc, uses_us, cats, str(path), line_no)
                )
    else:
        with path.open(encoding="utf-8") as fh:
            first_keys: list[str] | None = None
            meta = None
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"invalid JSON: {exc}", str(path), line_no) from exc
                if not isinstance(obj, dict):
                    raise ParseError("each line must be a JSON object", str(path), line_no)
                # uncertainty is per-record optional; all other keys must agree
                keys = sorted(set(obj.keys()) - {"uncertainty"})
                if first_keys is None:
                    first_keys = keys
                    meta = _check_field_names(keys + ["uncertainty"], str(path), allow_loc_z)
                elif keys != first_keys:
                    raise SchemaError(
                        f"{path}:{line_no}: field set differs from first record "
                        f"({sorted(set(keys) ^ set(first_keys))})"
                    )
                feature_idx, _, uses_us, cats = meta
                records.append(
                    _record_from_fields(obj, len(feature_idx), True, uses_us, cats, str(path), line_no)
                )
    if not records:
        raise SchemaError(f"{path}: no samples")
    return DatasetManifest(samples=tuple(records), source_path=str(path))


def _format_value(v: float) -> str:
    return repr(float(v))


def write_manifest(manifest: DatasetManifest, path: str | Path, format: str | None = None) -> None:
    """Write a manifest so that loading it back yields an equal manifest."""
    fmt = _infer_format(path, format)
    path = Path(path)
    f_dim = manifest.feature_dim or 0
    has_unc = any(rec.uncertainty is not None for rec in manifest.samples)
    cat_names = sorted({name for rec in manifest.samples if rec.category_histogram for name in rec.category_histogram})
    columns = list(REQUIRED_COLUMNS)
    columns += [f"feature_{k}" for k in range(f_dim)]
    if has_unc:
        columns.append("uncertainty")
    columns += [_CATEGORY_PREFIX + n for n in cat_names]

    def fields_of(rec: SampleRecord) -> dict[str, object]:
        out: dict[str, object] = {
            "id": rec.id,
            "stream_id": rec.stream_id,
            "timestamp": _format_value(rec.timestamp),
            "loc_x": _format_value(rec.location[0]),
            "loc_y": _format_value(rec.location[1]),
            "area_id": rec.area_id,
            "num_boxes": rec.num_boxes,
        }
        for k in range(f_dim):
            out[f"feature_{k}"] = _format_value(rec.feature[k])
        if has_unc:
            out["uncertainty"] = "" if rec.uncertainty is None else _format_value(rec.uncertainty)
        hist = rec.category_histogram or {}
        for name in cat_names:
            out[_CATEGORY_PREFIX + name] = int(hist.get(name, 0))
        return out

    if fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=columns)
            writer.writeheader()
            for rec in manifest.samples:
                writer.writerow(fields_of(rec))
    else:
        with path.open("w", encoding="utf-8") as fh:
            for rec in manifest.samples:
                fields = fields_of(rec)
                obj = {}
                for name in columns:
                    v = fields[name]
                    if name == "uncertainty" and v == "":
                        continue  # absent, not a sentinel
                    obj[name] = float(v) if isinstance(v, str) and name != "id" else v
                fh.write(json.dumps(obj, sort_keys=True) + "\n")


def validate_for_strategy(manifest: DatasetManifest, strategy: str, lambda_f: float = 0.0) -> None:
    """Check that the manifest carries the fields the strategy needs.

    Entropy needs an uncertainty score on every sample; any strategy with a
    positive feature weight needs a feature vector on every sample.
    """
    if strategy not in STRATEGIES:
        from .errors import ConfigError

        raise ConfigError(f"unknown strategy {strategy!r} (expected one of {STRATEGIES})")
    if strategy == "entropy":
        for rec in manifest.samples:
            if rec.uncertainty is None:
                raise MissingFieldError("uncertainty", rec.id)
    if lambda_f > 0.0:
        if manifest.feature_dim is None:
            raise MissingFieldError("feature", manifest.samples[0].id)
