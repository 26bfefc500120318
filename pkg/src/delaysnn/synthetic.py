"""Synthetic delayed-coincidence task: a desk-scale stand-in for long
audio-classification training runs.

Each sample has two input channels. Channel 0 carries a handful of
reference spikes; channel 1 repeats them shifted by a class-specific lag.
The class is the lag, so solving the task requires aligning the two
channels in time, which is exactly what trainable synaptic delays provide.
Event counts and timing statistics are identical across classes, so total
activity carries no label information.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .model import ShapeError


def gen_synthetic(
    n: int,
    seed: int,
    lags: Sequence[int] = (2, 6, 10),
    num_timesteps: int = 32,
    events_low: int = 3,
    events_high: int = 5,
    min_gap: int = 2,
) -> list[tuple[np.ndarray, int]]:
    """Generate `n` labeled rasters [T, 2] (uint8), balanced over lag classes.

    Reference spike times are drawn in [0, T - max_lag) with a minimum gap so
    coincidence windows do not overlap. Deterministic in `seed`.
    """
    lags = tuple(int(l) for l in lags)
    T = int(num_timesteps)
    if max(lags) >= T:
        raise ShapeError(f"largest lag {max(lags)} does not fit in {T} timesteps")
    rng = np.random.default_rng(seed)
    k = len(lags)
    labels = [c for c in range(k) for _ in range(n // k + (1 if c < n % k else 0))]
    span = T - max(lags)
    dataset = []
    for y in labels:
        lag = lags[y]
        n_events = int(rng.integers(events_low, events_high + 1))
        # rejection-free spaced sampling: order statistics with gap removed
        slack = span - n_events * min_gap
        while slack < 0:
            n_events -= 1
            slack = span - n_events * min_gap
        offsets = np.sort(rng.choice(slack + 1, size=n_events, replace=False))
        times = offsets + min_gap * np.arange(n_events)
        raster = np.zeros((T, 2), dtype=np.uint8)
        raster[times, 0] = 1
        raster[times + lag, 1] = 1
        dataset.append((raster, y))
    order = rng.permutation(len(dataset))
    return [dataset[i] for i in order]
