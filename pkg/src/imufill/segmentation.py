"""Per-pass imputation windows.

Each pass fills at most ``sensor.fill_quota`` rows using a window of at most
``sensor.window_size`` rows (100 and 10 for 100 Hz sensors).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .capture import Capture, RowState
from .exceptions import NoNeighborsError


@dataclass(frozen=True, eq=False)
class Chunk:
    """Rows of a capture selected for one imputation pass.

    ``indices`` are positions in the capture, ascending. ``target_mask`` marks
    the rows to fill; every other row is known (observed or imputed earlier).
    """

    indices: np.ndarray
    timestamps: np.ndarray
    values: np.ndarray
    target_mask: np.ndarray

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def capture_offset(self) -> int:
        return int(self.indices[0])

    @property
    def known_indices(self) -> np.ndarray:
        return self.indices[~self.target_mask]

    @property
    def target_indices(self) -> np.ndarray:
        return self.indices[self.target_mask]

    @classmethod
    def from_capture(cls, capture: Capture, indices, targets) -> "Chunk":
        indices = np.asarray(indices, dtype=np.intp)
        targets = np.asarray(targets, dtype=np.intp)
        pos = np.searchsorted(indices, targets)
        if np.any(pos >= len(indices)) or not np.array_equal(indices[pos], targets):
            raise ValueError("targets must be a subset of the chunk rows")
        target_mask = np.zeros(len(indices), dtype=bool)
        target_mask[pos] = True
        if not target_mask.any():
            raise ValueError("chunk has no target rows")
        if (~target_mask).sum() == 0:
            raise NoNeighborsError("chunk would contain no known rows")
        if np.any(capture.states[indices[~target_mask]] == RowState.MISSING):
            raise ValueError("known rows of a chunk must not be missing")
        return cls(
            indices=indices,
            timestamps=capture.timestamps[indices],
            values=capture.values[indices],
            target_mask=target_mask,
        )


def _first_block(missing: np.ndarray) -> tuple[int, int]:
    """Start and length of the first run of consecutive indices."""
    breaks = np.flatnonzero(np.diff(missing) != 1)
    length = int(breaks[0]) + 1 if breaks.size else len(missing)
    return int(missing[0]), length


def next_chunk(capture: Capture) -> Optional[Chunk]:
    """Choose the window for the next imputation pass, or None when nothing is missing.

    With more than one quota of rows still missing, the first quota of the
    earliest missing block is targeted, preceded by up to ``window - quota``
    known rows. When the rows before it run short, known rows after the block
    make up the difference. Once the remainder fits in a single quota and lies
    in the last window of the capture as one block, that whole last window is
    used instead.
    """
    missing = np.flatnonzero(capture.states == RowState.MISSING)
    m = len(missing)
    if m == 0:
        return None
    quota = capture.sensor.fill_quota
    window = capture.sensor.window_size
    n = len(capture)

    if m <= quota:
        start = max(0, n - window)
        contiguous = missing[-1] - missing[0] + 1 == m
        if missing[0] >= start and contiguous:
            return Chunk.from_capture(capture, np.arange(start, n), missing)

    block_start, block_len = _first_block(missing)
    n_targets = min(quota, block_len)
    targets = np.arange(block_start, block_start + n_targets)
    context = window - quota
    before = np.arange(max(0, block_start - context), block_start)
    deficit = context - len(before)
    after = np.empty(0, dtype=np.intp)
    if deficit > 0:
        # known rows directly after the whole missing block
        first_after = block_start + block_len
        stop = missing[block_len] if block_len < m else n
        after = np.arange(first_after, min(stop, first_after + deficit))
    indices = np.concatenate([before, targets, after])
    return Chunk.from_capture(capture, indices, targets)
