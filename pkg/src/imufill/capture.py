"""Capture data model and the delimited text format it is stored in.

A capture is one fixed-duration recording of one three-axis sensor. Rows are
held column-wise in numpy arrays; missing rows carry NaN in all three axes.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Optional, Union

import numpy as np

from .exceptions import CaptureFormatError, SerializationError


class SensorKind(enum.Enum):
    ACCELEROMETER = "accelerometer"
    GYROSCOPE = "gyroscope"
    MAGNETOMETER = "magnetometer"

    @property
    def nominal_rate_hz(self) -> int:
        return _RATES_HZ[self]

    @property
    def nominal_period_ms(self) -> int:
        return 1000 // self.nominal_rate_hz

    @property
    def window_size(self) -> int:
        """Rows in one second of data; also the discard threshold."""
        return self.nominal_rate_hz

    @property
    def fill_quota(self) -> int:
        """Maximum number of rows imputed in one pass."""
        return self.window_size // 10

    @classmethod
    def parse(cls, value: Union[str, "SensorKind"]) -> "SensorKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown sensor {value!r}; expected one of {choices}") from None


_RATES_HZ = {
    SensorKind.ACCELEROMETER: 100,
    SensorKind.GYROSCOPE: 100,
    SensorKind.MAGNETOMETER: 10,
}


class Activity(enum.Enum):
    WALKING = "walking"
    RUNNING = "running"
    STANDING = "standing"
    MOVING_UPSTAIRS = "moving_upstairs"
    MOVING_DOWNSTAIRS = "moving_downstairs"

    @classmethod
    def parse(cls, value: Union[str, "Activity"]) -> "Activity":
        if isinstance(value, cls):
            return value
        key = re.sub(r"[\s\-]+", "_", str(value).strip().lower())
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(a.value for a in cls)
            raise ValueError(f"unknown activity {value!r}; expected one of {choices}") from None


class RowState(enum.IntEnum):
    OBSERVED = 0
    MISSING = 1
    IMPUTED = 2


class Sample(NamedTuple):
    timestamp_ms: int
    state: RowState
    x: Optional[float]
    y: Optional[float]
    z: Optional[float]


@dataclass(frozen=True, eq=False)
class Capture:
    """An ordered, immutable set of timestamped three-axis rows.

    ``values`` is ``(n, 3)`` float64 with NaN rows exactly where ``states`` is
    ``RowState.MISSING``. Arrays are copied on construction and made read-only.
    """

    timestamps: np.ndarray
    values: np.ndarray
    states: np.ndarray
    sensor: SensorKind = SensorKind.ACCELEROMETER
    activity: Optional[Activity] = None
    duration_s: int = 5

    def __post_init__(self):
        ts = np.array(self.timestamps, dtype=np.int64).reshape(-1)
        vals = np.array(self.values, dtype=np.float64)
        states = np.array(self.states, dtype=np.int8).reshape(-1)
        if vals.ndim != 2 or vals.shape[1] != 3:
            raise ValueError(f"values must have shape (n, 3), got {vals.shape}")
        if not (len(ts) == len(vals) == len(states)):
            raise ValueError("timestamps, values and states differ in length")
        if len(ts) == 0:
            raise ValueError("a capture needs at least one sample")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        if states.min() < min(RowState) or states.max() > max(RowState):
            raise ValueError("unknown row state")
        missing = states == RowState.MISSING
        if not np.isnan(vals[missing]).all():
            raise ValueError("missing rows must not carry values")
        if not np.isfinite(vals[~missing]).all():
            raise ValueError("present rows must carry finite values")
        duration = int(self.duration_s)
        if duration != self.duration_s or duration <= 0:
            raise ValueError(f"duration_s must be a positive integer, got {self.duration_s!r}")
        for arr in (ts, vals, states):
            arr.setflags(write=False)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "sensor", SensorKind.parse(self.sensor))
        if self.activity is not None:
            object.__setattr__(self, "activity", Activity.parse(self.activity))
        object.__setattr__(self, "duration_s", duration)

    @classmethod
    def from_samples(
        cls,
        samples: Iterable[Sample],
        sensor: SensorKind = SensorKind.ACCELEROMETER,
        activity: Optional[Activity] = None,
        duration_s: int = 5,
    ) -> "Capture":
        rows = list(samples)
        if not rows:
            raise ValueError("a capture needs at least one sample")
        ts = [s.timestamp_ms for s in rows]
        vals = [[np.nan if v is None else v for v in (s.x, s.y, s.z)] for s in rows]
        states = [int(s.state) for s in rows]
        return cls(ts, vals, states, sensor=sensor, activity=activity, duration_s=duration_s)

    @classmethod
    def observed(cls, timestamps, values, **kwargs) -> "Capture":
        """Build an all-observed capture from timestamps and an (n, 3) array."""
        n = len(timestamps)
        return cls(timestamps, values, np.zeros(n, dtype=np.int8), **kwargs)

    def __len__(self) -> int:
        return len(self.timestamps)

    def __eq__(self, other):
        if not isinstance(other, Capture):
            return NotImplemented
        return (
            self.sensor is other.sensor
            and self.activity is other.activity
            and self.duration_s == other.duration_s
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.states, other.states)
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None

    def sample(self, i: int) -> Sample:
        state = RowState(int(self.states[i]))
        if state is RowState.MISSING:
            x = y = z = None
        else:
            x, y, z = (float(v) for v in self.values[i])
        return Sample(int(self.timestamps[i]), state, x, y, z)

    @property
    def samples(self) -> tuple[Sample, ...]:
        return tuple(self.sample(i) for i in range(len(self)))

    @property
    def missing_mask(self) -> np.ndarray:
        return self.states == RowState.MISSING

    @property
    def n_missing(self) -> int:
        return int(np.count_nonzero(self.missing_mask))

    @property
    def expected_count(self) -> int:
        return self.duration_s * self.sensor.nominal_rate_hz

    def replace_rows(self, timestamps=None, values=None, states=None) -> "Capture":
        """Return a copy with some of the row arrays swapped out."""
        return Capture(
            self.timestamps if timestamps is None else timestamps,
            self.values if values is None else values,
            self.states if states is None else states,
            sensor=self.sensor,
            activity=self.activity,
            duration_s=self.duration_s,
        )


_INT_RE = re.compile(r"^[+-]?\d+$")
_NULL_TOKENS = {"", "null", "none"}
_PROVENANCE = {"observed": RowState.OBSERVED, "imputed": RowState.IMPUTED, "missing": RowState.MISSING}


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _parse_axis(token: str, lineno: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise CaptureFormatError(f"line {lineno}: non-numeric axis value {token!r}") from None
    if not np.isfinite(value):
        raise CaptureFormatError(f"line {lineno}: non-finite axis value {token!r}")
    return value


def parse_capture(
    text: Union[bytes, str],
    sensor: Union[SensorKind, str] = SensorKind.ACCELEROMETER,
    activity: Union[Activity, str, None] = None,
    duration_s: int = 5,
) -> Capture:
    """Parse delimited capture text.

    Rows are ``[seq,]timestamp_ms,x,y,z[,provenance]`` separated by commas or
    tabs; one optional header line is skipped. A leading sequence column is
    ignored. Axis tokens ``Null`` (in all three axes at once) denote a missing
    row; a provenance column of ``imputed`` restores the imputed state.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise CaptureFormatError(f"input is not UTF-8: {exc}") from None
    lines = [(i, ln.rstrip("\r")) for i, ln in enumerate(text.split("\n"), start=1)]
    lines = [(i, ln) for i, ln in lines if ln.strip()]
    if not lines:
        raise CaptureFormatError("empty input")

    delimiter = "\t" if "\t" in lines[0][1] else ","
    first = [f.strip() for f in lines[0][1].split(delimiter)]
    if not any(_is_number(f) for f in first):
        lines = lines[1:]
        if not lines:
            raise CaptureFormatError("empty input (header only)")

    ncols = None
    ts: list[int] = []
    vals: list[list[float]] = []
    states: list[int] = []
    for lineno, line in lines:
        fields = [f.strip() for f in line.split(delimiter)]
        if ncols is None:
            ncols = len(fields)
        elif len(fields) != ncols:
            raise CaptureFormatError(
                f"line {lineno}: expected {ncols} fields, found {len(fields)}"
            )
        prov = None
        if len(fields) == 6:
            fields, prov = fields[1:5], fields[5]
        elif len(fields) == 5:
            if fields[4].lower() in _PROVENANCE:
                fields, prov = fields[:4], fields[4]
            else:
                fields = fields[1:]
        elif len(fields) != 4:
            raise CaptureFormatError(
                f"line {lineno}: expected 4 to 6 fields, found {len(fields)}"
            )

        ts_tok = fields[0]
        if not _INT_RE.match(ts_tok):
            raise CaptureFormatError(
                f"line {lineno}: timestamp {ts_tok!r} is not integer milliseconds"
            )
        nulls = [tok.lower() in _NULL_TOKENS for tok in fields[1:]]
        if all(nulls):
            state = RowState.MISSING
            row = [np.nan, np.nan, np.nan]
        elif any(nulls):
            raise CaptureFormatError(f"line {lineno}: partially missing row")
        else:
            state = RowState.OBSERVED
            row = [_parse_axis(tok, lineno) for tok in fields[1:]]
        if prov is not None:
            declared = _PROVENANCE.get(prov.lower())
            if declared is None:
                raise CaptureFormatError(f"line {lineno}: unknown provenance {prov!r}")
            if (declared is RowState.MISSING) != (state is RowState.MISSING):
                raise CaptureFormatError(
                    f"line {lineno}: provenance {prov!r} disagrees with row content"
                )
            state = declared
        t = int(ts_tok)
        if ts and t <= ts[-1]:
            raise CaptureFormatError(
                f"line {lineno}: non-increasing timestamp {t} after {ts[-1]}"
            )
        ts.append(t)
        vals.append(row)
        states.append(int(state))

    return Capture(ts, vals, states, sensor=sensor, activity=activity, duration_s=duration_s)


def _fmt(value: float) -> str:
    # repr gives the shortest string that round-trips to the same double
    return repr(float(value))


def serialize_capture(
    capture: Capture, include_provenance: bool = False, allow_missing: bool = False
) -> bytes:
    """Render a capture as comma-separated rows with a header line.

    Missing rows are written as ``Null`` only when ``allow_missing`` is set
    (debug output); otherwise they raise ``SerializationError``.
    """
    if capture.n_missing and not allow_missing:
        raise SerializationError(
            f"capture has {capture.n_missing} missing rows; pass allow_missing=True to dump them"
        )
    header = "seq,timestamp_ms,x,y,z"
    if include_provenance:
        header += ",provenance"
    names = {int(st): st.name.lower() for st in RowState}
    out = [header]
    rows = zip(capture.timestamps.tolist(), capture.values.tolist(), capture.states.tolist())
    for i, (t, vals, state) in enumerate(rows, start=1):
        if state == RowState.MISSING:
            axes = "Null,Null,Null"
        else:
            axes = ",".join(map(_fmt, vals))
        line = f"{i},{t},{axes}"
        if include_provenance:
            line += "," + names[state]
        out.append(line)
    return ("\n".join(out) + "\n").encode("utf-8")


def read_capture(path, sensor, activity=None, duration_s: int = 5) -> Capture:
    return parse_capture(Path(path).read_bytes(), sensor, activity, duration_s)


def write_capture(path, capture: Capture, include_provenance: bool = False) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(serialize_capture(capture, include_provenance))
