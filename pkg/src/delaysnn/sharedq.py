"""Cascade Shared Delay Queue (TrueNorth-style axonal delays).

One FIFO per delay level, in a linear cascade: an event enters at the FIFO
matching its delay, shifts one FIFO per end-of-timestep, and is delivered
(once) when it reaches FIFO 0. Natively this supports only axonal delays,
one delay value per presynaptic neuron; the multi-copy extension enqueues
one event copy per useful (source, delay) pair to emulate per-synapse
delays.
"""
from __future__ import annotations

from collections import deque

import numpy as np

from .dense import accumulate_current, simulate
from .model import DelaySet, DelayWeightTensor, NetworkModel, SimTrace


class AxonalModelError(ValueError):
    """Connection has several delay levels per axon but multi-copy is off."""


class SharedQueueState:
    """FIFO cascade indexed by residual delay in timesteps."""

    def __init__(self, max_delay: int):
        self.fifos = [deque() for _ in range(max_delay + 1)]
        self.peak_occupancy = 0
        self.delivered_count = 0

    @property
    def occupancy(self) -> int:
        return sum(len(f) for f in self.fifos)

    def push(self, source: int, d: int):
        self.fifos[d].append((source, d))
        occ = self.occupancy
        if occ > self.peak_occupancy:
            self.peak_occupancy = occ

    def pop_due(self) -> list[tuple[int, int]]:
        """All events whose residual delay reached zero, in FIFO order."""
        due = list(self.fifos[0])
        self.delivered_count += len(due)
        self.fifos[0].clear()
        return due

    def shift(self):
        """End-of-timestep: every FIFO's events move one stage closer."""
        for d in range(1, len(self.fifos)):
            self.fifos[d - 1].extend(self.fifos[d])
            self.fifos[d].clear()


def axon_delay_levels(conn: DelayWeightTensor) -> list[np.ndarray]:
    """Per presynaptic neuron, the level indices holding any nonzero weight."""
    useful = (conn.weights != 0.0).any(axis=2)  # [lvl][i]
    return [np.flatnonzero(useful[:, i]) for i in range(conn.pre_width)]


class SharedQueueConnection:
    """Connection backend over the FIFO cascade."""

    def __init__(self, conn, delay_set: DelaySet, multi_copy: bool = False):
        self.weights = conn.weights
        self.levels = delay_set.levels
        self.axon_levels = axon_delay_levels(conn)
        if not multi_copy and any(len(lv) > 1 for lv in self.axon_levels):
            raise AxonalModelError(
                "connection is not axonal-delay-only; enable multi_copy to "
                "emulate per-synapse delays"
            )
        self.state = SharedQueueState(delay_set.max_delay)
        self.t = 0
        self.event_log: list[tuple[int, int, int]] = []

    @property
    def peak_occupancy(self) -> int:
        return self.state.peak_occupancy

    @property
    def delivered_count(self) -> int:
        return self.state.delivered_count

    def step(self, pre_spikes: np.ndarray) -> np.ndarray:
        for src in np.flatnonzero(pre_spikes):
            for lvl in self.axon_levels[src]:
                self.state.push(int(src), self.levels[lvl])
        deliveries = []
        for src, d in self.state.pop_due():
            deliveries.append((d, self.levels.index(d), src))
            self.event_log.append((self.t, src, d))
        self.state.shift()
        self.t += 1
        return accumulate_current(self.weights, deliveries)


def is_axonal_only(model: NetworkModel) -> bool:
    """True when every presynaptic neuron has at most one useful delay level
    on every connection."""
    return all(
        max((len(lv) for lv in axon_delay_levels(conn)), default=0) <= 1
        for conn in model.connections
    )


def forward_sharedq(
    model: NetworkModel,
    raster: np.ndarray,
    multi_copy: bool = False,
    record_events: bool = False,
) -> SimTrace:
    """Execute with one shared delay queue per connection.

    Raises AxonalModelError on non-axonal models unless multi_copy is set.
    The trace is bit-identical to forward_dense.
    """
    def make(conn, ds):
        return SharedQueueConnection(conn, ds, multi_copy=multi_copy)

    return simulate(model, raster, make, record_events=record_events)
