"""scikit-learn compatible wrapper around the per-capture workflow."""

from __future__ import annotations

import warnings

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import capture_to_array, check_capture_array, check_positive_int
from .capture import Capture, SensorKind
from .exceptions import ImputationError
from .knn import ImputationConfig
from .pipeline import Status, impute_capture


class CaptureImputer(TransformerMixin, BaseEstimator):
    """Fill missing samples of fixed-duration captures by chunked KNN.

    The transform is stateless, so ``fit`` only validates parameters.
    ``transform`` accepts a :class:`Capture`, a list of them, or an array of
    ``timestamp_ms, x, y, z`` rows (returned in the same form). The output
    can have more rows than the input: it is padded up to
    ``duration_s * rate`` samples.

    Parameters
    ----------
    sensor : {"accelerometer", "gyroscope", "magnetometer"}
        Used for array input; captures carry their own sensor.
    duration_s : int
        Capture length in seconds, for array input.
    k : int
        Number of neighbours.
    weighting : {"uniform", "inverse_distance"}
    gap_threshold : float
        Deltas above this many nominal periods count as internal gaps.
    on_discard : {"passthrough", "raise"}
        What to do with captures missing more than one second of data.
    """

    def __init__(
        self,
        sensor="accelerometer",
        duration_s=5,
        k=5,
        weighting="uniform",
        gap_threshold=1.5,
        on_discard="passthrough",
    ):
        self.sensor = sensor
        self.duration_s = duration_s
        self.k = k
        self.weighting = weighting
        self.gap_threshold = gap_threshold
        self.on_discard = on_discard

    def fit(self, X=None, y=None):
        self.sensor_ = SensorKind.parse(self.sensor)
        self.duration_s_ = check_positive_int(self.duration_s, "duration_s")
        self.config_ = ImputationConfig(self.k, self.weighting, self.gap_threshold)
        if self.on_discard not in ("passthrough", "raise"):
            raise ValueError(f"on_discard must be 'passthrough' or 'raise', got {self.on_discard!r}")
        return self

    def _impute_one(self, capture: Capture) -> Capture:
        filled, log = impute_capture(capture, self.config_)
        if log.status is Status.FAILED:
            raise ImputationError(log.error)
        if log.status is Status.DISCARDED:
            msg = f"capture missing {log.report.missing_count} samples was discarded"
            if self.on_discard == "raise":
                raise ImputationError(msg)
            warnings.warn(msg, stacklevel=3)
        return filled

    def transform(self, X):
        check_is_fitted(self, "config_")
        if isinstance(X, Capture):
            return self._impute_one(X)
        if isinstance(X, (list, tuple)) and X and all(isinstance(c, Capture) for c in X):
            return [self._impute_one(c) for c in X]
        capture = check_capture_array(X, self.sensor_, self.duration_s_)
        return capture_to_array(self._impute_one(capture))
