"""Dense reference executor for delay-parameterized LIF networks.

This is the oracle every event-driven queue backend must reproduce
bit-exactly. To make that equality achievable in floating point, every
backend funnels its per-timestep synaptic contributions through
`accumulate_current`, which fixes one canonical summation order:
delay value descending (oldest source spike first), source index
ascending within a delay. A queue that delivers the same (source, delay)
multiset therefore performs the identical sequence of float additions.
"""
from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from .model import NetworkModel, NeuronParams, ShapeError, SimTrace


def lif_step(
    u: float | np.ndarray,
    theta_prev: float | np.ndarray,
    input_current: float | np.ndarray,
    params: NeuronParams,
):
    """One LIF update: u' = u * exp(-1/tau) * (1 - theta_prev) + I.

    Returns (u', theta') with theta' = 1 iff u' >= u_th. The (1 - theta_prev)
    gate zeroes the leak term after a spike, so the post-spike potential is
    exactly the incoming current.
    """
    u_new = u * params.decay * (1.0 - theta_prev) + input_current
    theta_new = (np.asarray(u_new) >= params.u_th).astype(np.float64)
    if np.isscalar(u_new):
        theta_new = float(theta_new)
    return u_new, theta_new


def layer_input_current(weights: np.ndarray, delayed_spikes: np.ndarray, j: int) -> float:
    """Eq.-style double sum: sum over delay levels and presynaptic neurons of
    w[d][i][j] * delayed_spikes[d][i].

    `delayed_spikes[d][i]` is the spike neuron i emitted d-levels back
    (0 for times before stimulus onset).
    """
    weights = np.asarray(weights, dtype=np.float64)
    delayed_spikes = np.asarray(delayed_spikes, dtype=np.float64)
    if delayed_spikes.shape != weights.shape[:2]:
        raise ShapeError(
            f"delayed spikes shape {delayed_spikes.shape} != {weights.shape[:2]}"
        )
    return float((weights[:, :, j] * delayed_spikes).sum())


def accumulate_current(
    weights: np.ndarray,
    deliveries: Iterable[tuple[int, int, int]],
) -> np.ndarray:
    """Sum weight rows for delivered (delay_value, level_index, source) events.

    Events are sorted by (-delay_value, source) and the rows are added
    sequentially; this fixed order is what makes all backends bit-identical.
    """
    current = np.zeros(weights.shape[2], dtype=np.float64)
    for _d, lvl, src in sorted(deliveries, key=lambda e: (-e[0], e[2])):
        current += weights[lvl, src]
    return current


class DenseConnection:
    """Spike-history backend: keeps the last max_delay+1 presynaptic spike
    vectors and replays the canonical double sum each timestep."""

    def __init__(self, conn, delay_set):
        self.weights = conn.weights
        self.levels = delay_set.levels
        depth = delay_set.max_delay + 1
        self.history = np.zeros((depth, conn.pre_width), dtype=bool)
        self.t = 0
        self.event_log: list[tuple[int, int, int]] = []

    def step(self, pre_spikes: np.ndarray) -> np.ndarray:
        depth = self.history.shape[0]
        self.history[self.t % depth] = pre_spikes
        deliveries = []
        for lvl, d in enumerate(self.levels):
            if d > self.t:
                continue
            row = self.history[(self.t - d) % depth]
            for src in np.flatnonzero(row):
                deliveries.append((d, lvl, int(src)))
        self.event_log.extend((self.t, src, d) for d, _lvl, src in deliveries)
        self.t += 1
        return accumulate_current(self.weights, deliveries)


def predict(spikes_out: np.ndarray, vmem_out: np.ndarray, readout: str) -> int:
    """Class decision from the output layer trace.

    spike_count: argmax of total output spikes, ties broken by the final
    membrane potential. max_membrane: argmax of the per-neuron maximum
    membrane potential over the window.
    """
    if readout == "max_membrane":
        return int(np.argmax(vmem_out.max(axis=0)))
    counts = spikes_out.sum(axis=0)
    best = counts.max()
    tied = np.flatnonzero(counts == best)
    if len(tied) == 1:
        return int(tied[0])
    final_v = vmem_out[-1]
    return int(tied[np.argmax(final_v[tied])])


def simulate(
    model: NetworkModel,
    raster: np.ndarray,
    make_connection: Callable,
    record_events: bool = False,
) -> SimTrace:
    """Shared timestep loop: per timestep, per layer in order, gather the
    connection's delivered current then LIF-step the layer."""
    raster = np.asarray(raster)
    T = model.num_timesteps
    if raster.shape != (T, model.widths[0]):
        raise ShapeError(
            f"raster shape {raster.shape} != ({T}, {model.widths[0]})"
        )
    raster = raster.astype(bool)
    backends = [
        make_connection(conn, ds)
        for conn, ds in zip(model.connections, model.delay_sets)
    ]
    u = [np.zeros(w, dtype=np.float64) for w in model.widths[1:]]
    theta = [np.zeros(w, dtype=np.float64) for w in model.widths[1:]]
    spikes = [np.zeros((T, w), dtype=np.uint8) for w in model.widths[1:]]
    vmem = [np.zeros((T, w), dtype=np.float64) for w in model.widths[1:]]

    for t in range(T):
        pre = raster[t]
        for l in range(model.num_layers):
            current = backends[l].step(pre)
            u[l], theta[l] = lif_step(u[l], theta[l], current, model.neuron_params[l])
            spikes[l][t] = theta[l].astype(np.uint8)
            vmem[l][t] = u[l]
            pre = theta[l].astype(bool)

    trace = SimTrace(
        spikes=spikes,
        vmem=vmem,
        prediction=predict(spikes[-1], vmem[-1], model.readout),
    )
    for c, b in enumerate(backends):
        if record_events and hasattr(b, "event_log"):
            trace.stats.setdefault("event_log", {})[c] = list(b.event_log)
        if hasattr(b, "peak_occupancy"):
            trace.stats.setdefault("peak_occupancy", {})[c] = b.peak_occupancy
        if hasattr(b, "delivered_count"):
            trace.stats.setdefault("delivered_events", {})[c] = b.delivered_count
    return trace


def forward_dense(model: NetworkModel, raster: np.ndarray, record_events: bool = False) -> SimTrace:
    """Reference execution with explicit spike-history buffers."""
    return simulate(model, raster, DenseConnection, record_events=record_events)
