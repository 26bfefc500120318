"""Per-postsynaptic-neuron ring buffers (Loihi/SpiNNaker-style delays).

A spike from presynaptic neuron i at time t accumulates w[d][i][:] into
slot (head + d) for every delay level d. At the end of the timestep the
head slot drains into the layer's input current, is zeroed, and the head
advances. Slot count is max_delay + 1 so a delay of d timesteps lands
exactly d drains later, also for strided delay sets.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .dense import simulate
from .model import NetworkModel, SimTrace


class RingConfigError(ValueError):
    """A delay value does not fit in the configured ring."""


class RingBufferState:
    """Circular accumulator bank: slots[s][j] holds current due s-head drains
    from now, for all postsynaptic neurons j of one connection."""

    def __init__(self, num_slots: int, post_width: int):
        if num_slots <= 0:
            raise RingConfigError("ring needs at least one slot")
        self.slots = np.zeros((num_slots, post_width), dtype=np.float64)
        self.head = 0

    @property
    def num_slots(self) -> int:
        return self.slots.shape[0]

    def add(self, d: int, row: np.ndarray):
        if d >= self.num_slots:
            raise RingConfigError(
                f"delay {d} exceeds ring size {self.num_slots}"
            )
        self.slots[(self.head + d) % self.num_slots] += row

    def drain(self) -> np.ndarray:
        """Return the head slot's accumulated current, zero it, advance."""
        out = self.slots[self.head].copy()
        self.slots[self.head] = 0.0
        self.head = (self.head + 1) % self.num_slots
        return out


class RingConnection:
    """Connection backend over a RingBufferState.

    Accumulation order per slot is: arrival timestep ascending (delay value
    descending), source ascending, one weight row at a time; this is the
    same float-addition sequence the dense executor performs.
    """

    def __init__(self, conn, delay_set, num_slots: Optional[int] = None):
        self.weights = conn.weights
        self.levels = delay_set.levels
        slots = delay_set.max_delay + 1 if num_slots is None else num_slots
        if delay_set.max_delay >= slots:
            raise RingConfigError(
                f"max delay {delay_set.max_delay} needs > {delay_set.max_delay} slots, got {slots}"
            )
        self.ring = RingBufferState(slots, conn.post_width)
        self.t = 0
        self.event_log: list[tuple[int, int, int]] = []

    def step(self, pre_spikes: np.ndarray) -> np.ndarray:
        sources = np.flatnonzero(pre_spikes)
        for lvl, d in enumerate(self.levels):
            for src in sources:
                self.ring.add(d, self.weights[lvl, src])
                self.event_log.append((self.t + d, int(src), d))
        self.t += 1
        return self.ring.drain()


def forward_ring(
    model: NetworkModel,
    raster: np.ndarray,
    record_events: bool = False,
) -> SimTrace:
    """Execute with one ring-buffer bank per connection; trace bit-identical
    to forward_dense."""
    return simulate(model, raster, RingConnection, record_events=record_events)
