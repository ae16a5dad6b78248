"""Brute-force reference computations, deliberately written without numpy."""


def knn_mean(target_ts, known, k, weighting="uniform"):
    """``known`` is a list of (timestamp, (x, y, z)). Returns the imputed triple."""
    ranked = sorted(known, key=lambda row: (abs(row[0] - target_ts), row[0]))[:k]
    if weighting == "uniform":
        return tuple(sum(v[a] for _, v in ranked) / len(ranked) for a in range(3))
    for t, v in ranked:
        if t == target_ts:
            return tuple(v)
    weights = [1.0 / abs(t - target_ts) for t, _ in ranked]
    total = sum(weights)
    return tuple(sum(w * v[a] for w, (_, v) in zip(weights, ranked)) / total for a in range(3))


def grid_missing(timestamps, period, expected):
    """Timestamps on the nominal grid anchored at the first sample that were never seen."""
    seen = set(timestamps)
    grid = [timestamps[0] + i * period for i in range(expected)]
    return [t for t in grid if t not in seen]
