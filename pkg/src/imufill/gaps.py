"""Locating missing samples and classifying captures by how much is missing."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np

from .capture import Capture, RowState, SensorKind
from .exceptions import GridConflictError, OverCompleteCaptureError

DEFAULT_GAP_THRESHOLD = 1.5


class SpanKind(enum.Enum):
    INTERNAL = "internal"
    TRAILING = "trailing"


class Bucket(enum.Enum):
    NONE = "none"
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


@dataclass(frozen=True)
class GapSpan:
    kind: SpanKind
    insert_after_index: int
    count: int
    timestamps: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "insert_after_index": self.insert_after_index,
            "count": self.count,
            "first_timestamp_ms": self.timestamps[0],
            "last_timestamp_ms": self.timestamps[-1],
        }


@dataclass(frozen=True)
class GapReport:
    expected_count: int
    observed_count: int
    missing_count: int
    spans: tuple[GapSpan, ...]
    bucket: Bucket
    warnings: tuple[str, ...] = field(default=())

    @property
    def placeholder_count(self) -> int:
        return sum(s.count for s in self.spans)

    def to_dict(self) -> dict:
        return {
            "expected": self.expected_count,
            "observed": self.observed_count,
            "missing": self.missing_count,
            "bucket": self.bucket.value,
            "spans": [s.to_dict() for s in self.spans],
            "warnings": list(self.warnings),
        }


class Classification(NamedTuple):
    bucket: Bucket
    discard: bool


def expected_sample_count(sensor: Union[SensorKind, str], duration_s: int) -> int:
    if duration_s < 0:
        raise ValueError(f"duration_s must be >= 0, got {duration_s}")
    return int(duration_s) * SensorKind.parse(sensor).nominal_rate_hz


def bucket_for(missing: int, sensor: Union[SensorKind, str]) -> Bucket:
    sensor = SensorKind.parse(sensor)
    quota, limit = sensor.fill_quota, sensor.window_size
    if missing <= 0:
        return Bucket.NONE
    if missing <= quota:
        return Bucket.SMALL
    if missing <= limit:
        return Bucket.MEDIUM
    return Bucket.LARGE


def classify_capture(report: Union[GapReport, int], sensor: Union[SensorKind, str]) -> Classification:
    """Bucket a capture by its missing count; large captures are discarded.

    The limits scale with the sensor rate: one second of samples is the
    discard threshold and a tenth of that is the small/medium boundary.
    """
    missing = report.missing_count if isinstance(report, GapReport) else int(report)
    bucket = bucket_for(missing, sensor)
    return Classification(bucket, bucket is Bucket.LARGE)


def _grid(start: int, period: int, count: int) -> tuple[int, ...]:
    return tuple(start + i * period for i in range(1, count + 1))


def detect_gaps(capture: Capture, gap_threshold: float = DEFAULT_GAP_THRESHOLD) -> GapReport:
    """Count the samples a capture is short of and work out where they belong.

    Consecutive timestamps further apart than ``gap_threshold`` nominal
    periods mark an internal gap. Whatever part of the shortfall those do not
    account for is placed after the last sample. Imputed rows count as present.
    """
    if gap_threshold <= 1:
        raise ValueError(f"gap_threshold must be > 1, got {gap_threshold}")
    if capture.n_missing:
        raise ValueError("detect_gaps expects a capture without placeholder rows")
    sensor = capture.sensor
    period = sensor.nominal_period_ms
    expected = expected_sample_count(sensor, capture.duration_s)
    n = len(capture)
    if n > expected:
        raise OverCompleteCaptureError(
            f"capture has {n} samples but {expected} are expected for "
            f"{capture.duration_s} s of {sensor.value}"
        )
    missing = expected - n

    ts = capture.timestamps
    deltas = np.diff(ts)
    spans: list[GapSpan] = []
    for i in np.flatnonzero(deltas > gap_threshold * period):
        count = math.floor(deltas[i] / period + 0.5) - 1
        if count >= 1:
            spans.append(GapSpan(SpanKind.INTERNAL, int(i), count, _grid(int(ts[i]), period, count)))

    warnings = []
    trailing = missing - sum(s.count for s in spans)
    if trailing < 0:
        warnings.append(
            f"timestamp gaps imply {missing - trailing} missing rows but only "
            f"{missing} are short; keeping internal gaps, no trailing rows"
        )
        trailing = 0
    if trailing:
        spans.append(
            GapSpan(SpanKind.TRAILING, n - 1, trailing, _grid(int(ts[-1]), period, trailing))
        )
    return GapReport(
        expected_count=expected,
        observed_count=n,
        missing_count=missing,
        spans=tuple(spans),
        bucket=bucket_for(missing, sensor),
        warnings=tuple(warnings),
    )


def insert_placeholders(capture: Capture, report: GapReport) -> Capture:
    """Return a copy of ``capture`` with an all-missing row at every span timestamp."""
    if report.observed_count != len(capture):
        raise ValueError("report was not produced from this capture")
    if not report.spans:
        return capture
    positions = []
    new_ts = []
    for span in report.spans:
        positions.extend([span.insert_after_index + 1] * span.count)
        new_ts.extend(span.timestamps)
    ts = np.insert(capture.timestamps, positions, new_ts)
    bad = np.flatnonzero(np.diff(ts) <= 0)
    if bad.size:
        i = int(bad[0])
        raise GridConflictError(
            f"placeholder grid conflicts with observed timestamps near {ts[i]} -> {ts[i + 1]}"
        )
    nan_rows = np.full((len(new_ts), 3), np.nan)
    values = np.insert(capture.values, positions, nan_rows, axis=0)
    states = np.insert(capture.states, positions, int(RowState.MISSING))
    return capture.replace_rows(ts, values, states)
