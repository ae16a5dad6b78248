"""Nearest-in-time neighbour imputation for a single chunk."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .exceptions import NoNeighborsError
from .gaps import DEFAULT_GAP_THRESHOLD
from .segmentation import Chunk


class Weighting(enum.Enum):
    UNIFORM = "uniform"
    INVERSE_DISTANCE = "inverse_distance"

    @classmethod
    def parse(cls, value: Union[str, "Weighting"]) -> "Weighting":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower().replace("-", "_"))
        except ValueError:
            raise ValueError(
                f"unknown weighting {value!r}; expected uniform or inverse_distance"
            ) from None


@dataclass(frozen=True)
class ImputationConfig:
    k: int = 5
    weighting: Weighting = Weighting.UNIFORM
    gap_threshold: float = DEFAULT_GAP_THRESHOLD

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "weighting", Weighting.parse(self.weighting))
        if not float(self.gap_threshold) > 1:
            raise ValueError(f"gap_threshold must be > 1, got {self.gap_threshold!r}")
        object.__setattr__(self, "gap_threshold", float(self.gap_threshold))

    def to_dict(self) -> dict:
        return {"k": self.k, "weighting": self.weighting.value, "gap_threshold": self.gap_threshold}


class Neighbor(NamedTuple):
    index: int
    distance_ms: int


def _rank(target_ts: int, known_ts: np.ndarray) -> np.ndarray:
    # order by distance, then by timestamp
    dist = np.abs(known_ts - target_ts)
    return np.lexsort((known_ts, dist))


def knn_neighbors(
    target_timestamp: int, known: Sequence[tuple[int, int]], k: int
) -> list[Neighbor]:
    """The ``k`` known rows closest in time to ``target_timestamp``.

    ``known`` holds ``(index, timestamp_ms)`` pairs. Equal distances go to the
    earlier timestamp. Fewer than ``k`` rows are returned if fewer exist.
    """
    if len(known) == 0:
        raise NoNeighborsError("no known rows to draw neighbours from")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    arr = np.asarray(known, dtype=np.int64).reshape(-1, 2)
    order = _rank(int(target_timestamp), arr[:, 1])[:k]
    return [
        Neighbor(int(arr[j, 0]), int(abs(arr[j, 1] - target_timestamp))) for j in order
    ]


class ImputedRow(NamedTuple):
    index: int
    x: float
    y: float
    z: float


def impute_chunk(chunk: Chunk, config: ImputationConfig = ImputationConfig()) -> list[ImputedRow]:
    """Fill every target row of ``chunk`` from its nearest known rows.

    Rows targeted in the same pass never serve as neighbours for each other,
    so the result does not depend on the order targets are visited.
    """
    known = ~chunk.target_mask
    known_ts = chunk.timestamps[known]
    known_vals = chunk.values[known]
    if known_ts.size == 0:
        raise NoNeighborsError("chunk has no known rows")
    k = min(config.k, known_ts.size)
    inverse = config.weighting is Weighting.INVERSE_DISTANCE

    out = []
    for idx, t in zip(chunk.indices[chunk.target_mask], chunk.timestamps[chunk.target_mask]):
        order = _rank(int(t), known_ts)[:k]
        dist = np.abs(known_ts[order] - t)
        vals = known_vals[order]
        if not inverse:
            est = vals.mean(axis=0)
        elif dist[0] == 0:
            est = vals[0]
        else:
            w = 1.0 / dist
            est = (w[:, None] * vals).sum(axis=0) / w.sum()
        # rounding in the mean may step one ulp outside the neighbour range
        est = np.clip(est, vals.min(axis=0), vals.max(axis=0))
        out.append(ImputedRow(int(idx), float(est[0]), float(est[1]), float(est[2])))
    return out
