"""delaysnn: spiking networks with trainable per-synapse delays, plus
event-accurate software models of neuromorphic delay queue hardware."""

from .model import (
    DelaySet,
    DelayWeightTensor,
    NetworkModel,
    NeuronParams,
    QuantSpec,
    ShapeError,
    SimTrace,
    build_network,
    traces_equal,
)
from .dense import forward_dense, lif_step, layer_input_current, predict
from .scdq import (
    QueueOverflowError,
    ScdqState,
    SpikeEvent,
    WvuMatrix,
    forward_scdq,
    scdq_push,
    scdq_timestep,
    wvu_build,
    wvu_max_residency,
)
from .ringbuf import RingBufferState, RingConfigError, forward_ring
from .sharedq import AxonalModelError, SharedQueueState, forward_sharedq, is_axonal_only
from .training import (
    DivergenceError,
    TrainConfig,
    bptt_train,
    equal_budget_hidden_width,
    finetune,
    prune_delays,
    quantize,
    surrogate_grad,
)
from .costs import (
    CostReport,
    cost_report,
    crossover_alpha,
    mem_ring,
    mem_scdq,
    mem_sharedq,
    mem_sharedq_summation,
    scaling_sweep,
)
from .fidelity import FidelityReport, accuracy, compare_traces
from .synthetic import gen_synthetic
from .persist import (
    FileFormatError,
    load_dataset,
    load_model,
    load_raster,
    save_dataset,
    save_model,
    save_raster,
)

__version__ = "0.1.0"

__all__ = [
    "DelaySet", "DelayWeightTensor", "NetworkModel", "NeuronParams",
    "QuantSpec", "ShapeError", "SimTrace", "build_network", "traces_equal",
    "forward_dense", "lif_step", "layer_input_current", "predict",
    "QueueOverflowError", "ScdqState", "SpikeEvent", "WvuMatrix",
    "forward_scdq", "scdq_push", "scdq_timestep", "wvu_build",
    "wvu_max_residency",
    "RingBufferState", "RingConfigError", "forward_ring",
    "AxonalModelError", "SharedQueueState", "forward_sharedq", "is_axonal_only",
    "DivergenceError", "TrainConfig", "bptt_train",
    "equal_budget_hidden_width", "finetune", "prune_delays", "quantize",
    "surrogate_grad",
    "CostReport", "cost_report", "crossover_alpha", "mem_ring", "mem_scdq",
    "mem_sharedq", "mem_sharedq_summation", "scaling_sweep",
    "FidelityReport", "accuracy", "compare_traces",
    "gen_synthetic",
    "FileFormatError", "load_dataset", "load_model", "load_raster",
    "save_dataset", "save_model", "save_raster",
]
