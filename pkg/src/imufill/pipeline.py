"""End-to-end processing: detect, insert placeholders, fill pass by pass.

Also aggregates per-activity bucket statistics and runs whole directories.
"""

from __future__ import annotations

import enum
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .capture import Activity, Capture, RowState, SensorKind, parse_capture, serialize_capture
from .gaps import Bucket, GapReport, classify_capture, detect_gaps, insert_placeholders
from .knn import ImputationConfig, impute_chunk
from .segmentation import next_chunk

logger = logging.getLogger(__name__)

CAPTURE_SUFFIXES = (".csv", ".tsv", ".txt")


class Status(enum.Enum):
    COMPLETE = "complete"
    DISCARDED = "discarded"
    FAILED = "failed"


@dataclass(frozen=True)
class PassRecord:
    chunk_first: int
    chunk_last: int
    targets: tuple[int, ...]


@dataclass
class ImputationLog:
    status: Status
    config: ImputationConfig
    report: Optional[GapReport] = None
    records: list[PassRecord] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def passes(self) -> int:
        return len(self.records)

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "passes": self.passes,
            "config": self.config.to_dict(),
            "report": None if self.report is None else self.report.to_dict(),
            "records": [
                {"chunk": [r.chunk_first, r.chunk_last], "targets": list(r.targets)}
                for r in self.records
            ],
            "error": self.error,
        }


def fill_missing(
    capture: Capture, config: ImputationConfig = ImputationConfig()
) -> tuple[Capture, list[PassRecord]]:
    """Impute every placeholder row of ``capture``, one chunk per pass.

    Rows filled in a pass become known rows for later passes.
    """
    records = []
    while (chunk := next_chunk(capture)) is not None:
        rows = impute_chunk(chunk, config)
        idx = np.array([r.index for r in rows], dtype=np.intp)
        values = capture.values.copy()
        states = capture.states.copy()
        values[idx] = [(r.x, r.y, r.z) for r in rows]
        states[idx] = RowState.IMPUTED
        capture = capture.replace_rows(values=values, states=states)
        records.append(PassRecord(int(chunk.indices[0]), int(chunk.indices[-1]), tuple(idx.tolist())))
    return capture, records


def impute_capture(
    capture: Capture, config: ImputationConfig = ImputationConfig()
) -> tuple[Capture, ImputationLog]:
    """Run the whole per-capture workflow.

    Discarded and failed captures come back unchanged; the log says which.
    """
    log = ImputationLog(Status.FAILED, config)
    try:
        report = detect_gaps(capture, config.gap_threshold)
        log.report = report
        if classify_capture(report, capture.sensor).discard:
            log.status = Status.DISCARDED
            return capture, log
        working = insert_placeholders(capture, report)
        filled, log.records = fill_missing(working, config)
    except ValueError as exc:
        log.error = f"{type(exc).__name__}: {exc}"
        return capture, log
    log.status = Status.COMPLETE
    return filled, log


# --- dataset statistics -----------------------------------------------------


@dataclass
class BucketCounts:
    complete: int = 0
    small: int = 0
    medium: int = 0
    large: int = 0

    @property
    def total(self) -> int:
        return self.complete + self.small + self.medium + self.large

    def add(self, bucket: Bucket) -> None:
        name = "complete" if bucket is Bucket.NONE else bucket.value
        setattr(self, name, getattr(self, name) + 1)

    def __add__(self, other: "BucketCounts") -> "BucketCounts":
        return BucketCounts(
            self.complete + other.complete,
            self.small + other.small,
            self.medium + other.medium,
            self.large + other.large,
        )

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "complete": self.complete,
            "small": self.small,
            "medium": self.medium,
            "large": self.large,
        }


@dataclass
class DatasetStats:
    """Bucket counts keyed by ``(activity, sensor)`` plus failed files by path."""

    counts: dict[tuple[str, str], BucketCounts] = field(default_factory=dict)
    failed: dict[str, str] = field(default_factory=dict)

    def add(self, activity: str, sensor: str, bucket: Bucket) -> None:
        self.counts.setdefault((activity, sensor), BucketCounts()).add(bucket)

    def merge(self, other: "DatasetStats") -> "DatasetStats":
        counts = {key: BucketCounts() + c for key, c in self.counts.items()}
        for key, c in other.counts.items():
            counts[key] = counts.get(key, BucketCounts()) + c
        return DatasetStats(counts, {**self.failed, **other.failed})

    __add__ = merge

    @property
    def total_records(self) -> int:
        return sum(c.total for c in self.counts.values())

    def to_dict(self) -> dict:
        return {
            "counts": [
                {"activity": a, "sensor": s, **self.counts[(a, s)].to_dict()}
                for a, s in sorted(self.counts)
            ],
            "failed": dict(sorted(self.failed.items())),
        }

    def format_table(self) -> str:
        header = ("activity", "sensor", "total", "complete", "<=Q", ">Q&<=T", ">T")
        rows = [header]
        for a, s in sorted(self.counts):
            c = self.counts[(a, s)]
            rows.append((a, s, c.total, c.complete, c.small, c.medium, c.large))
        rows.append(("failed", "", len(self.failed), "", "", "", ""))
        widths = [max(len(str(r[i])) for r in rows) for i in range(len(header))]
        lines = ["  ".join(str(v).ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows]
        return "\n".join(lines)


def _label(value) -> str:
    if value is None:
        return "unlabeled"
    return value.value if isinstance(value, enum.Enum) else str(value)


def scan_dataset(
    captures: Iterable[tuple[str, object, object, Union[Capture, Exception]]],
    gap_threshold: float = ImputationConfig().gap_threshold,
) -> DatasetStats:
    """Classify every capture into a bucket.

    Items are ``(path, activity, sensor, capture)``; a capture slot holding an
    exception (a file that could not be read) is tallied as failed.
    """
    stats = DatasetStats()
    for path, activity, sensor, capture in captures:
        if isinstance(capture, Exception):
            stats.failed[str(path)] = f"{type(capture).__name__}: {capture}"
            continue
        try:
            report = detect_gaps(capture, gap_threshold)
        except ValueError as exc:
            stats.failed[str(path)] = f"{type(exc).__name__}: {exc}"
            continue
        bucket = classify_capture(report, capture.sensor).bucket
        stats.add(_label(activity), _label(sensor), bucket)
    return stats


# --- directory runs ---------------------------------------------------------


@dataclass(frozen=True)
class CaptureSource:
    path: Path
    relpath: Path
    activity: Optional[Activity]
    sensor: Optional[SensorKind]
    error: Optional[str] = None


def _from_ancestors(relpath: Path, parse):
    for part in reversed(relpath.parts[:-1]):
        try:
            return parse(part)
        except ValueError:
            continue
    return None


def discover_captures(
    root: Union[str, Path],
    sensor: Union[SensorKind, str, None] = None,
    activity: Union[Activity, str, None] = None,
) -> list[CaptureSource]:
    """Find capture files below ``root`` (or ``root`` itself), sorted by relative path.

    Sensor and activity default to the nearest ancestor directory carrying a
    recognised name (``<activity>/<sensor>/<id>.csv``); explicit arguments win.
    """
    root = Path(root)
    sensor = None if sensor is None else SensorKind.parse(sensor)
    activity = None if activity is None else Activity.parse(activity)
    if root.is_file():
        paths, base = [root], root.parent
    elif root.is_dir():
        paths = [
            p for p in sorted(root.rglob("*"))
            if p.is_file() and p.suffix.lower() in CAPTURE_SUFFIXES
        ]
        base = root
    else:
        raise FileNotFoundError(f"input path not found: {root}")
    sources = []
    for path in paths:
        rel = path.relative_to(base)
        # a single file may still sit inside an <activity>/<sensor>/ tree
        lookup = path.resolve() if root.is_file() else rel
        s = sensor or _from_ancestors(lookup, SensorKind.parse)
        a = activity or _from_ancestors(lookup, Activity.parse)
        error = None
        if s is None:
            error = "cannot determine sensor from path; pass it explicitly"
        elif a is None:
            error = "cannot determine activity from path; pass it explicitly"
        sources.append(CaptureSource(path, rel, a, s, error))
    return sources


def load_source(source: CaptureSource, duration_s: int = 5) -> Capture:
    if source.error:
        raise ValueError(source.error)
    return parse_capture(source.path.read_bytes(), source.sensor, source.activity, duration_s)


def scan_directory(
    root, sensor=None, activity=None, duration_s: int = 5, gap_threshold: float = 1.5
) -> tuple[DatasetStats, list[tuple[str, Optional[GapReport], Optional[str]]]]:
    """Scan a directory; also returns ``(relpath, report, error)`` per file."""
    items = []
    listing = []
    for src in discover_captures(root, sensor, activity):
        try:
            capture = load_source(src, duration_s)
        except (OSError, ValueError) as exc:
            capture = exc
        items.append((str(src.relpath), src.activity, src.sensor, capture))
    stats = scan_dataset(items, gap_threshold)
    for rel, _, _, capture in items:
        if rel in stats.failed:
            listing.append((rel, None, stats.failed[rel]))
        else:
            listing.append((rel, detect_gaps(capture, gap_threshold), None))
    return stats, listing


@dataclass(frozen=True)
class CaptureRecord:
    path: str
    status: Status
    missing_before: Optional[int]
    missing_after: Optional[int]
    passes: int
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "path": self.path,
            "status": self.status.value,
            "missing_before": self.missing_before,
            "missing_after": self.missing_after,
            "passes": self.passes,
            "error": self.error,
        }


@dataclass
class PipelineSummary:
    records: list[CaptureRecord]
    stats_before: DatasetStats
    stats_after: DatasetStats
    config: ImputationConfig

    @property
    def n_failed(self) -> int:
        return sum(r.status is Status.FAILED for r in self.records)

    @property
    def exit_code(self) -> int:
        return 1 if self.n_failed else 0

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "records": [r.to_dict() for r in self.records],
            "stats_before": self.stats_before.to_dict(),
            "stats_after": self.stats_after.to_dict(),
        }

    def format_text(self) -> str:
        lines = []
        for r in self.records:
            before = "-" if r.missing_before is None else r.missing_before
            after = "-" if r.missing_after is None else r.missing_after
            line = f"{r.path}\tstatus: {r.status.value}\tmissing: {before} -> {after}\tpasses: {r.passes}"
            if r.error:
                line += f"\terror: {r.error}"
            lines.append(line)
        lines += ["", "before:", self.stats_before.format_table()]
        lines += ["", "after:", self.stats_after.format_table()]
        n = len(self.records)
        done = sum(r.status is Status.COMPLETE for r in self.records)
        lines += ["", f"{n} captures: {done} written, {n - done - self.n_failed} discarded, {self.n_failed} failed"]
        return "\n".join(lines)


def _process_one(args) -> tuple[CaptureRecord, DatasetStats, DatasetStats]:
    src, out_root, config, duration_s, provenance = args
    rel = str(src.relpath)
    act, sen = _label(src.activity), _label(src.sensor)
    before, after = DatasetStats(), DatasetStats()
    try:
        capture = load_source(src, duration_s)
    except (OSError, ValueError) as exc:
        msg = f"{type(exc).__name__}: {exc}"
        before.failed[rel] = msg
        return CaptureRecord(rel, Status.FAILED, None, None, 0, msg), before, after

    filled, log = impute_capture(capture, config)
    if log.report is not None:
        before.add(act, sen, log.report.bucket)
    else:
        before.failed[rel] = log.error
    missing_before = None if log.report is None else log.report.missing_count
    if log.status is Status.FAILED:
        return CaptureRecord(rel, Status.FAILED, missing_before, None, log.passes, log.error), before, after
    if log.status is Status.DISCARDED:
        return CaptureRecord(rel, Status.DISCARDED, missing_before, missing_before, 0), before, after

    out_path = Path(out_root) / src.relpath
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_bytes(serialize_capture(filled, include_provenance=provenance))
        written = parse_capture(out_path.read_bytes(), src.sensor, src.activity, duration_s)
        report = detect_gaps(written, config.gap_threshold)
    except (OSError, ValueError) as exc:
        msg = f"{type(exc).__name__}: {exc}"
        after.failed[rel] = msg
        return CaptureRecord(rel, Status.FAILED, missing_before, None, log.passes, msg), before, after
    after.add(act, sen, report.bucket)
    return (
        CaptureRecord(rel, Status.COMPLETE, missing_before, report.missing_count, log.passes),
        before,
        after,
    )


def run_pipeline(
    input_dir: Union[str, Path],
    output_dir: Union[str, Path],
    config: ImputationConfig = ImputationConfig(),
    *,
    sensor=None,
    activity=None,
    duration_s: int = 5,
    provenance: bool = True,
    jobs: int = 1,
    write_summary: bool = True,
) -> PipelineSummary:
    """Impute every capture under ``input_dir`` into ``output_dir``.

    Output files mirror the input layout. Discarded and failed captures are
    not written; each appears in the summary. With ``write_summary`` a
    ``summary.json`` is written next to the outputs.
    """
    sources = discover_captures(input_dir, sensor, activity)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    work = [(src, output_dir, config, duration_s, provenance) for src in sources]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_process_one, work, chunksize=max(1, len(work) // (4 * jobs))))
    else:
        results = [_process_one(w) for w in work]

    records = []
    before, after = DatasetStats(), DatasetStats()
    for record, b, a in results:
        records.append(record)
        before = before.merge(b)
        after = after.merge(a)
        if record.status is Status.FAILED:
            logger.warning("%s failed: %s", record.path, record.error)
    records.sort(key=lambda r: r.path)
    summary = PipelineSummary(records, before, after, config)
    if write_summary:
        (output_dir / "summary.json").write_text(json.dumps(summary.to_dict(), indent=2) + "\n")
    return summary
