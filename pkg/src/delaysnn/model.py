"""Core model types: neurons, delay sets, delay-extended weight tensors, networks.

All reference computation is in 64-bit floating point. Weight tensors are
frozen (read-only numpy arrays) so that masked-out synapses can never be
mutated back to a nonzero value after construction.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

READOUTS = ("spike_count", "max_membrane")


class ShapeError(ValueError):
    """Dimension mismatch between tensors, rasters, and layer widths."""


@dataclass(frozen=True)
class NeuronParams:
    """LIF parameters: leak time constant (timesteps) and firing threshold."""

    tau: float
    u_th: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be > 0, got {self.tau}")
        if not self.u_th > 0:
            raise ValueError(f"u_th must be > 0, got {self.u_th}")

    @property
    def decay(self) -> float:
        return float(np.exp(-1.0 / self.tau))


@dataclass(frozen=True)
class DelaySet:
    """Strictly increasing set of admissible delays, in timesteps."""

    levels: tuple[int, ...]

    def __post_init__(self):
        lv = tuple(int(d) for d in self.levels)
        if len(lv) == 0:
            raise ValueError("DelaySet must contain at least one level")
        if any(d < 0 for d in lv):
            raise ValueError("delay levels must be non-negative")
        if any(b <= a for a, b in zip(lv, lv[1:])):
            raise ValueError("delay levels must be strictly increasing")
        object.__setattr__(self, "levels", lv)

    @classmethod
    def from_max_stride(cls, d_max: int, stride: int) -> "DelaySet":
        """Levels {0, s, 2s, ...} below d_max, e.g. (60, 2) -> 0,2,...,58."""
        if d_max <= 0 or stride <= 0:
            raise ValueError("d_max and stride must be positive")
        return cls(tuple(range(0, d_max, stride)))

    @classmethod
    def zero(cls) -> "DelaySet":
        return cls((0,))

    @property
    def max_delay(self) -> int:
        return self.levels[-1]

    def __len__(self) -> int:
        return len(self.levels)

    def __contains__(self, d: int) -> bool:
        return d in self.levels

    def index(self, d: int) -> int:
        return self.levels.index(d)


@dataclass(frozen=True)
class DelayWeightTensor:
    """3-D weights w[d][i][j] over (delay level, presynaptic, postsynaptic).

    `mask` marks existing synapses; masked-out entries are forced to exactly
    zero and both arrays are made read-only.
    """

    weights: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        m = np.asarray(self.mask, dtype=bool)
        if w.ndim != 3:
            raise ShapeError(f"weights must be 3-D [d][i][j], got shape {w.shape}")
        if m.shape != w.shape:
            raise ShapeError(f"mask shape {m.shape} != weights shape {w.shape}")
        w = np.where(m, w, 0.0)
        w.setflags(write=False)
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "mask", m)

    @classmethod
    def dense(cls, weights: np.ndarray) -> "DelayWeightTensor":
        w = np.asarray(weights, dtype=np.float64)
        return cls(w, np.ones(w.shape, dtype=bool))

    @property
    def num_levels(self) -> int:
        return self.weights.shape[0]

    @property
    def pre_width(self) -> int:
        return self.weights.shape[1]

    @property
    def post_width(self) -> int:
        return self.weights.shape[2]

    @property
    def num_synapses(self) -> int:
        return int(self.mask.sum())

    def with_weights(self, weights: np.ndarray) -> "DelayWeightTensor":
        """New tensor with updated values under the same mask."""
        return DelayWeightTensor(weights, self.mask)

    def with_mask(self, mask: np.ndarray) -> "DelayWeightTensor":
        """New tensor with a (typically tighter) mask; newly masked entries zero."""
        return DelayWeightTensor(self.weights, mask)


@dataclass(frozen=True)
class QuantSpec:
    """Weight numeric scheme: float64 reference, bfloat16, or symmetric int-N."""

    scheme: str = "float64"

    _INT_BITS = {f"int{n}": n for n in (8, 7, 6, 5, 4, 3, 2)}

    def __post_init__(self):
        if self.scheme not in ("float64", "bfloat16", *self._INT_BITS):
            raise ValueError(f"unknown quantization scheme {self.scheme!r}")

    @property
    def is_integer(self) -> bool:
        return self.scheme in self._INT_BITS

    @property
    def bits(self) -> int:
        if self.scheme == "float64":
            return 64
        if self.scheme == "bfloat16":
            return 16
        return self._INT_BITS[self.scheme]

    @property
    def qmax(self) -> int:
        """Largest integer code, 2^(N-1)-1 for int-N schemes."""
        if not self.is_integer:
            raise ValueError(f"{self.scheme} has no integer range")
        return 2 ** (self.bits - 1) - 1


@dataclass(frozen=True)
class NetworkModel:
    """Feedforward delay-SNN: widths, per-connection delay weights, LIF params.

    The input -> first-hidden connection carries exactly one delay level, 0.
    """

    widths: tuple[int, ...]
    connections: tuple[DelayWeightTensor, ...]
    delay_sets: tuple[DelaySet, ...]
    neuron_params: tuple[NeuronParams, ...]
    num_timesteps: int
    readout: str = "spike_count"
    seed: Optional[int] = None
    quant: QuantSpec = field(default_factory=QuantSpec)
    quant_scales: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        widths = tuple(int(w) for w in self.widths)
        object.__setattr__(self, "widths", widths)
        if len(widths) < 2:
            raise ShapeError("network needs at least input and output layers")
        ncon = len(widths) - 1
        if len(self.connections) != ncon or len(self.delay_sets) != ncon:
            raise ShapeError("one connection + delay set per adjacent layer pair")
        if len(self.neuron_params) != ncon:
            raise ShapeError("one NeuronParams per non-input layer")
        if self.num_timesteps <= 0:
            raise ValueError("num_timesteps must be positive")
        if self.readout not in READOUTS:
            raise ValueError(f"readout must be one of {READOUTS}")
        if self.delay_sets[0].levels != (0,):
            raise ShapeError("input->first-hidden connection must use DelaySet {0}")
        for c, (conn, ds, pre, post) in enumerate(
            zip(self.connections, self.delay_sets, widths[:-1], widths[1:])
        ):
            if conn.weights.shape != (len(ds), pre, post):
                raise ShapeError(
                    f"connection {c}: shape {conn.weights.shape} != "
                    f"({len(ds)}, {pre}, {post})"
                )
        if self.quant.is_integer:
            if self.quant_scales is None or len(self.quant_scales) != ncon:
                raise ValueError("integer quantization requires one scale per connection")

    @property
    def num_layers(self) -> int:
        """Non-input layers."""
        return len(self.widths) - 1

    @property
    def num_parameters(self) -> int:
        return sum(c.num_synapses for c in self.connections)

    @property
    def max_delay(self) -> int:
        return max(ds.max_delay for ds in self.delay_sets)

    def with_connections(self, connections: Sequence[DelayWeightTensor]) -> "NetworkModel":
        return replace(self, connections=tuple(connections))


@dataclass
class SimTrace:
    """Per-layer spike/membrane records for one sample, plus the prediction.

    spikes[l] and vmem[l] have shape [T, widths[l+1]] (non-input layers only).
    """

    spikes: list[np.ndarray]
    vmem: list[np.ndarray]
    prediction: int
    stats: dict = field(default_factory=dict)

    def spike_counts(self) -> list[float]:
        """Total spikes per layer over the full window."""
        return [float(s.sum()) for s in self.spikes]


def traces_equal(a: SimTrace, b: SimTrace) -> bool:
    """Bit-exact equality of spikes, vmem, and prediction (stats excluded)."""
    if a.prediction != b.prediction:
        return False
    if len(a.spikes) != len(b.spikes):
        return False
    for sa, sb in zip(a.spikes, b.spikes):
        if not np.array_equal(sa, sb):
            return False
    for va, vb in zip(a.vmem, b.vmem):
        if not np.array_equal(va, vb):
            return False
    return True


def build_network(
    widths: Sequence[int],
    delay_set: DelaySet,
    num_timesteps: int,
    tau: float = 2.0,
    u_th: float = 1.0,
    readout: str = "spike_count",
    seed: int = 0,
    gain: float = 3.0,
) -> NetworkModel:
    """Random fully-connected delay network.

    Hidden->hidden and hidden->output connections use `delay_set`; the
    input connection uses delay level 0 only. Weights are uniform with a
    fan-in scale over (d, i): U(-g/sqrt(D*I), g/sqrt(D*I)).
    """
    rng = np.random.default_rng(seed)
    widths = tuple(int(w) for w in widths)
    conns = []
    dsets = []
    for c, (pre, post) in enumerate(zip(widths[:-1], widths[1:])):
        ds = DelaySet.zero() if c == 0 else delay_set
        bound = gain / np.sqrt(len(ds) * pre)
        w = rng.uniform(-bound, bound, size=(len(ds), pre, post))
        conns.append(DelayWeightTensor.dense(w))
        dsets.append(ds)
    params = tuple(NeuronParams(tau=tau, u_th=u_th) for _ in range(len(widths) - 1))
    return NetworkModel(
        widths=widths,
        connections=tuple(conns),
        delay_sets=tuple(dsets),
        neuron_params=params,
        num_timesteps=int(num_timesteps),
        readout=readout,
        seed=seed,
    )
