"""Shared Circular Delay Queue: two FIFOs (PRQ/POQ) swapped at end-of-timestep.

An event carries the presynaptic source id and an elapsed-delay counter
(incremented when re-enqueued; isomorphic to the hardware's decrementing
counter). It is delivered at every timestep whose elapsed delay is an
admissible level with a useful weight, and orbits PRQ -> POQ -> PRQ until
its maximum useful residency (from the WVU leading-zero rule) expires.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dense import accumulate_current, simulate
from .model import DelaySet, DelayWeightTensor, NetworkModel, SimTrace


class QueueOverflowError(RuntimeError):
    """Raised when a capped FIFO pair exceeds its capacity."""

    def __init__(self, capacity: int, occupancy: int):
        super().__init__(f"SCDQ overflow: {occupancy} events > capacity {capacity}")
        self.capacity = capacity
        self.peak_occupancy = occupancy


@dataclass(frozen=True)
class SpikeEvent:
    source: int
    counter: int  # elapsed delay, timesteps since emission


class WvuMatrix:
    """'Weight value useful' bits: bits[i][lvl] = 1 iff some w[lvl][i][j] != 0."""

    def __init__(self, bits: np.ndarray):
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim != 2:
            raise ValueError("WVU must be 2-D [presynaptic][delay level]")
        bits = bits.copy()
        bits.setflags(write=False)
        self.bits = bits

    @property
    def num_levels(self) -> int:
        return self.bits.shape[1]

    def clz(self, i: int) -> int:
        """Leading zeros of row i read with the highest delay level as MSB."""
        row = self.bits[i]
        nz = np.flatnonzero(row)
        if len(nz) == 0:
            return len(row)
        return len(row) - 1 - int(nz[-1])

    def max_residency(self, i: int) -> int:
        """Largest useful level index, D-1-clz; -1 for an all-zero row."""
        return self.num_levels - 1 - self.clz(i)

    @classmethod
    def all_ones(cls, pre_width: int, num_levels: int) -> "WvuMatrix":
        return cls(np.ones((pre_width, num_levels), dtype=bool))


def wvu_build(conn: DelayWeightTensor) -> WvuMatrix:
    """OR over postsynaptic neurons of weight non-zeroness."""
    return WvuMatrix((conn.weights != 0.0).any(axis=2).T)


def wvu_max_residency(wvu: WvuMatrix, i: int) -> int:
    return wvu.max_residency(i)


class ScdqState:
    """PRQ/POQ pair with the WVU pruning filter for one connection."""

    def __init__(
        self,
        wvu: WvuMatrix,
        delay_set: DelaySet,
        capacity: Optional[int] = None,
    ):
        if wvu.num_levels != len(delay_set):
            raise ValueError("WVU level count must match the DelaySet")
        self.wvu = wvu
        self.delay_set = delay_set
        # max useful residency in elapsed timesteps, per source
        self._max_delay_value = np.array(
            [
                -1 if wvu.max_residency(i) < 0 else delay_set.levels[wvu.max_residency(i)]
                for i in range(wvu.bits.shape[0])
            ]
        )
        self.prq: deque[SpikeEvent] = deque()
        self.poq: deque[SpikeEvent] = deque()
        self.capacity = capacity
        self.peak_occupancy = 0
        self.delivered_count = 0

    @property
    def occupancy(self) -> int:
        return len(self.prq) + len(self.poq)

    def _note_occupancy(self):
        occ = self.occupancy
        if occ > self.peak_occupancy:
            self.peak_occupancy = occ
        if self.capacity is not None and occ > self.capacity:
            raise QueueOverflowError(self.capacity, occ)

    def push(self, source: int):
        """Write-controller path: enqueue a fresh event; sources whose WVU row
        is all zero are dropped at the door."""
        if self._max_delay_value[source] < 0:
            return
        self.prq.append(SpikeEvent(source, 0))
        self._note_occupancy()

    def timestep(self, deliver: Callable[[int, int], None]):
        """Process the whole PRQ, then do the EOT buffer swap.

        Each event is delivered iff its elapsed delay is an admissible level
        with the WVU bit set, and is re-enqueued into the POQ (counter + 1)
        while still short of its maximum useful residency.
        """
        levels = self.delay_set.levels
        while self.prq:
            ev = self.prq.popleft()
            d = ev.counter
            if d in levels and self.wvu.bits[ev.source, levels.index(d)]:
                deliver(ev.source, d)
                self.delivered_count += 1
            if d < self._max_delay_value[ev.source]:
                self.poq.append(SpikeEvent(ev.source, d + 1))
                self._note_occupancy()
        self.prq, self.poq = self.poq, self.prq


def scdq_push(state: ScdqState, source: int) -> ScdqState:
    state.push(source)
    return state


def scdq_timestep(state: ScdqState, deliver: Callable[[int, int], None]) -> ScdqState:
    state.timestep(deliver)
    return state


class ScdqConnection:
    """Connection backend: push the timestep's presynaptic spikes, run one
    SCDQ timestep, and fold the delivered events into a current vector in
    the canonical accumulation order."""

    def __init__(self, conn, delay_set, capacity=None, use_wvu=True):
        self.weights = conn.weights
        self.levels = delay_set.levels
        wvu = wvu_build(conn) if use_wvu else WvuMatrix.all_ones(conn.pre_width, len(delay_set))
        self.state = ScdqState(wvu, delay_set, capacity=capacity)
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
            self.state.push(int(src))
        deliveries: list[tuple[int, int, int]] = []

        def deliver(source: int, d: int):
            deliveries.append((d, self.levels.index(d), source))
            self.event_log.append((self.t, source, d))

        self.state.timestep(deliver)
        self.t += 1
        return accumulate_current(self.weights, deliveries)


def forward_scdq(
    model: NetworkModel,
    raster: np.ndarray,
    capacity: Optional[int] = None,
    use_wvu: bool = True,
    record_events: bool = False,
) -> SimTrace:
    """Execute the network with one SCDQ per inter-layer connection.

    The resulting SimTrace is bit-identical to forward_dense; stats carry the
    peak queue occupancy and delivered-event count per connection.
    """
    def make(conn, ds):
        return ScdqConnection(conn, ds, capacity=capacity, use_wvu=use_wvu)

    return simulate(model, raster, make, record_events=record_events)
