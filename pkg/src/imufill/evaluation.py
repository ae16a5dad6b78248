"""Scoring imputation against rows deliberately removed from complete captures."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

import numpy as np

from .capture import Capture, RowState
from .exceptions import GapSpecError, ScoreError
from .knn import ImputationConfig
from .pipeline import fill_missing

AXES = ("x", "y", "z")


class GapMode(enum.Enum):
    TRAILING = "trailing"
    INTERNAL_AT = "internal_at"
    RANDOM = "random"

    @classmethod
    def parse(cls, value: Union[str, "GapMode"]) -> "GapMode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("-", "_"))
        except ValueError:
            raise GapSpecError(
                f"unknown gap mode {value!r}; expected trailing, internal_at or random"
            ) from None


@dataclass(frozen=True)
class GapSpec:
    mode: GapMode
    count: int
    position: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "mode", GapMode.parse(self.mode))
        if self.count < 1:
            raise GapSpecError(f"gap count must be >= 1, got {self.count}")
        if self.mode is GapMode.INTERNAL_AT and self.position is None:
            raise GapSpecError("internal_at gaps need a position")


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Rows removed by ``inject_gaps``, with their original positions."""

    indices: np.ndarray
    timestamps: np.ndarray
    values: np.ndarray
    states: np.ndarray

    def __len__(self) -> int:
        return len(self.indices)


def inject_gaps(capture: Capture, spec: GapSpec) -> tuple[Capture, GroundTruth]:
    """Remove one contiguous block of rows.

    ``random`` picks the block start uniformly from the seeded generator.
    """
    if capture.n_missing:
        raise GapSpecError("gaps can only be injected into a complete capture")
    n = len(capture)
    if spec.count > n - 1:
        raise GapSpecError(f"cannot remove {spec.count} of {n} rows; at least one must remain")
    if spec.mode is GapMode.TRAILING:
        start = n - spec.count
    elif spec.mode is GapMode.INTERNAL_AT:
        start = spec.position
        if start < 0 or start + spec.count > n:
            raise GapSpecError(
                f"gap of {spec.count} rows at position {start} does not fit in {n} rows"
            )
    else:
        rng = np.random.default_rng(spec.seed)
        start = int(rng.integers(0, n - spec.count + 1))
    removed = np.arange(start, start + spec.count)
    keep = np.ones(n, dtype=bool)
    keep[removed] = False
    degraded = capture.replace_rows(
        capture.timestamps[keep], capture.values[keep], capture.states[keep]
    )
    truth = GroundTruth(
        removed,
        capture.timestamps[removed].copy(),
        capture.values[removed].copy(),
        capture.states[removed].copy(),
    )
    return degraded, truth


def _insert_positions(truth: GroundTruth) -> np.ndarray:
    # position in the degraded capture before which each removed row goes
    return truth.indices - np.arange(len(truth))


def restore(degraded: Capture, truth: GroundTruth) -> Capture:
    """Put the removed rows back unchanged."""
    pos = _insert_positions(truth)
    return degraded.replace_rows(
        np.insert(degraded.timestamps, pos, truth.timestamps),
        np.insert(degraded.values, pos, truth.values, axis=0),
        np.insert(degraded.states, pos, truth.states),
    )


def with_placeholders(degraded: Capture, truth: GroundTruth) -> Capture:
    """Re-insert the removed rows as missing, at their true timestamps."""
    pos = _insert_positions(truth)
    return degraded.replace_rows(
        np.insert(degraded.timestamps, pos, truth.timestamps),
        np.insert(degraded.values, pos, np.full((len(truth), 3), np.nan), axis=0),
        np.insert(degraded.states, pos, int(RowState.MISSING)),
    )


def _mark_filled(capture: Capture, values: np.ndarray) -> Capture:
    missing = capture.missing_mask
    states = capture.states.copy()
    states[missing] = RowState.IMPUTED
    out = capture.values.copy()
    out[missing] = values[missing]
    return capture.replace_rows(values=out, states=states)


def fill_knn(capture: Capture, config: ImputationConfig) -> Capture:
    return fill_missing(capture, config)[0]


def fill_linear(capture: Capture, config: ImputationConfig = None) -> Capture:
    """Linear interpolation in time; edges hold the nearest known value."""
    known = ~capture.missing_mask
    t = capture.timestamps.astype(np.float64)
    vals = np.column_stack(
        [np.interp(t, t[known], capture.values[known, a]) for a in range(3)]
    )
    return _mark_filled(capture, vals)


def fill_locf(capture: Capture, config: ImputationConfig = None) -> Capture:
    """Carry the last known row forward; a leading gap takes the first known row."""
    known = ~capture.missing_mask
    idx = np.where(known, np.arange(len(capture)), -1)
    idx = np.maximum.accumulate(idx)
    idx[idx < 0] = np.flatnonzero(known)[0]
    return _mark_filled(capture, capture.values[idx])


def fill_global_mean(capture: Capture, config: ImputationConfig = None) -> Capture:
    known_vals = capture.values[~capture.missing_mask]
    mean = np.clip(known_vals.mean(axis=0), known_vals.min(axis=0), known_vals.max(axis=0))
    return _mark_filled(capture, np.broadcast_to(mean, capture.values.shape))


METHODS: dict[str, Callable[[Capture, ImputationConfig], Capture]] = {
    "knn": fill_knn,
    "linear_interpolation": fill_linear,
    "last_observation_carried_forward": fill_locf,
    "global_mean": fill_global_mean,
}


@dataclass(frozen=True)
class ScoreReport:
    rmse: tuple[float, float, float]
    mae: tuple[float, float, float]
    amplitude_ratio: tuple[Optional[float], Optional[float], Optional[float]]
    n_scored: int


def score(imputed: Capture, truth: GroundTruth) -> ScoreReport:
    """Per-axis error of the imputed rows against the removed originals.

    ``amplitude_ratio`` is the peak-to-peak of the imputed rows over that of
    the originals; None where the originals are flat.
    """
    pos = np.searchsorted(imputed.timestamps, truth.timestamps)
    if np.any(pos >= len(imputed)) or not np.array_equal(imputed.timestamps[pos], truth.timestamps):
        raise ScoreError("imputed capture lacks rows at the ground-truth timestamps")
    if not np.all(imputed.states[pos] == RowState.IMPUTED):
        raise ScoreError("rows at the ground-truth timestamps are not imputed")
    est = imputed.values[pos]
    err = est - truth.values
    rmse = np.sqrt(np.mean(err**2, axis=0))
    mae = np.mean(np.abs(err), axis=0)
    truth_ptp = np.ptp(truth.values, axis=0)
    est_ptp = np.ptp(est, axis=0)
    ratio = tuple(
        float(e / t) if t > 0 else None for e, t in zip(est_ptp, truth_ptp)
    )
    return ScoreReport(
        tuple(float(v) for v in rmse), tuple(float(v) for v in mae), ratio, len(truth)
    )


def compare_baselines(
    capture: Capture, spec: GapSpec, config: ImputationConfig = ImputationConfig()
) -> dict[str, ScoreReport]:
    """Score KNN and the baseline fillers on one shared injected gap."""
    degraded, truth = inject_gaps(capture, spec)
    holed = with_placeholders(degraded, truth)
    return {name: score(fill(holed, config), truth) for name, fill in METHODS.items()}


def trial_specs(spec: GapSpec, n_trials: int) -> list[GapSpec]:
    """Per-trial specs for repeated random gaps: trial i uses seed + i."""
    base = spec.seed or 0
    return [replace(spec, seed=base + i) for i in range(n_trials)]


def _fmt(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "undefined"
    return repr(float(value))


METRICS_HEADER = "capture,method,axis,rmse,mae,amplitude_ratio,n_scored"


def format_metrics(table: dict[str, ScoreReport], capture_label: str = "") -> list[str]:
    """CSV lines (no header) for one capture's comparison table."""
    lines = []
    for method, rep in table.items():
        for a, axis in enumerate(AXES):
            lines.append(
                ",".join(
                    [
                        capture_label,
                        method,
                        axis,
                        _fmt(rep.rmse[a]),
                        _fmt(rep.mae[a]),
                        _fmt(rep.amplitude_ratio[a]),
                        str(rep.n_scored),
                    ]
                )
            )
    return lines
