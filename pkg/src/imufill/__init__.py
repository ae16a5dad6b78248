"""Gap detection and chunked nearest-neighbour imputation for inertial sensor captures."""

from .capture import (
    Activity,
    Capture,
    RowState,
    Sample,
    SensorKind,
    parse_capture,
    read_capture,
    serialize_capture,
    write_capture,
)
from .estimator import CaptureImputer
from .evaluation import GapMode, GapSpec, ScoreReport, compare_baselines, inject_gaps, score
from .exceptions import (
    CaptureFormatError,
    GapSpecError,
    GridConflictError,
    ImputationError,
    NoNeighborsError,
    OverCompleteCaptureError,
    ScoreError,
    SerializationError,
)
from .gaps import (
    Bucket,
    GapReport,
    GapSpan,
    classify_capture,
    detect_gaps,
    expected_sample_count,
    insert_placeholders,
)
from .knn import ImputationConfig, Weighting, impute_chunk, knn_neighbors
from .pipeline import (
    DatasetStats,
    ImputationLog,
    Status,
    fill_missing,
    impute_capture,
    run_pipeline,
    scan_dataset,
)
from .segmentation import Chunk, next_chunk

__version__ = "0.1.0"
