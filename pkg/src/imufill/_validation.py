"""Input checks shared by the estimator and the CLI."""

from __future__ import annotations

import numbers

import numpy as np

from .capture import Capture, SensorKind


def check_positive_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_capture_array(X, sensor, duration_s: int) -> Capture:
    """Coerce an ``(n, 4)`` array of ``timestamp_ms, x, y, z`` rows into a Capture."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError(f"expected an array of shape (n_samples, 4), got {arr.shape}")
    if arr.shape[0] == 0:
        raise ValueError("found array with 0 samples")
    if not np.isfinite(arr).all():
        raise ValueError("input contains NaN or infinity")
    ts = arr[:, 0]
    if not np.array_equal(ts, np.round(ts)):
        raise ValueError("timestamps must be whole milliseconds")
    return Capture.observed(
        ts.astype(np.int64), arr[:, 1:], sensor=SensorKind.parse(sensor), duration_s=duration_s
    )


def capture_to_array(capture: Capture) -> np.ndarray:
    return np.column_stack([capture.timestamps.astype(np.float64), capture.values])
