"""Hardware-aware training: BPTT with a fast-sigmoid surrogate gradient over
the delay-extended network, magnitude pruning of delay synapses/axons,
fine-tuning on the surviving mask, and post-training quantization.

The forward graph is unrolled in torch (float64) and mirrors the dense
executor's timestep semantics; trained weights are exported back into the
numpy NetworkModel, which remains the single source of truth for inference.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import torch

from .model import (
    DelaySet,
    DelayWeightTensor,
    NetworkModel,
    QuantSpec,
)

VMEM_LOGIT_COEF = 0.01  # small final-membrane tiebreak added to spike-count logits


class DivergenceError(RuntimeError):
    """Training loss became NaN."""

    def __init__(self, epoch: int, batch_index: int):
        super().__init__(f"NaN loss at epoch {epoch}, batch {batch_index}")
        self.epoch = epoch
        self.batch_index = batch_index


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 60
    batch_size: int = 32
    lr: float = 1e-3
    beta: float = 10.0  # surrogate slope
    d_max: int = 12
    stride: int = 1
    prune_mode: str = "axonal"  # or "synapse"
    prune_target: float = 0.5  # levels to retain (axonal) or keep fraction (synapse)
    finetune_epochs: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 0 or self.finetune_epochs < 0:
            raise ValueError("epoch counts must be non-negative")
        if self.batch_size <= 0:
            raise ValueError("batch size must be positive")
        if self.beta <= 0:
            raise ValueError("surrogate slope must be positive")


def surrogate_grad(v, beta: float):
    """Fast-sigmoid derivative 1/(beta*|v|+1)^2, used in the backward pass
    in place of the spike function's true (zero-a.e.) derivative."""
    return 1.0 / (beta * np.abs(v) + 1.0) ** 2


class _SpikeFn(torch.autograd.Function):
    """Heaviside forward, fast-sigmoid surrogate backward."""

    @staticmethod
    def forward(ctx, v, beta):
        ctx.save_for_backward(v)
        ctx.beta = beta
        return (v >= 0.0).to(v.dtype)

    @staticmethod
    def backward(ctx, grad_out):
        (v,) = ctx.saved_tensors
        sg = 1.0 / (ctx.beta * v.abs() + 1.0) ** 2
        return grad_out * sg, None


def _soft_gate(v, beta):
    """Differentiable stand-in for the threshold used in gradient-check mode:
    0.5 * (1 + beta*v / (1 + beta*|v|)), a fast sigmoid squashed to (0, 1)."""
    return 0.5 * (1.0 + beta * v / (1.0 + beta * v.abs()))


def network_forward_torch(
    weights: Sequence[torch.Tensor],
    masks: Sequence[torch.Tensor],
    model: NetworkModel,
    rasters: torch.Tensor,
    beta: float,
    mode: str = "hard",
) -> torch.Tensor:
    """Unrolled forward pass; returns readout logits [batch, output width].

    `mode` is "hard" (spiking, surrogate-gradient backward) or "soft"
    (threshold replaced by the fast sigmoid, fully differentiable; used for
    finite-difference gradient checks).
    """
    if mode not in ("hard", "soft"):
        raise ValueError("mode must be 'hard' or 'soft'")
    B, T, _ = rasters.shape
    n_layers = model.num_layers
    w_eff = [w * m for w, m in zip(weights, masks)]
    decays = [p.decay for p in model.neuron_params]
    u_ths = [p.u_th for p in model.neuron_params]
    u = [rasters.new_zeros((B, w)) for w in model.widths[1:]]
    theta = [rasters.new_zeros((B, w)) for w in model.widths[1:]]
    hist: list[list[torch.Tensor]] = [[] for _ in range(n_layers)]
    spike_sum = rasters.new_zeros((B, model.widths[-1]))

    for t in range(T):
        pre = rasters[:, t, :]
        for l in range(n_layers):
            hist[l].append(pre)
            levels = model.delay_sets[l].levels
            current = rasters.new_zeros((B, model.widths[l + 1]))
            for lvl, d in enumerate(levels):
                if d <= t:
                    current = current + hist[l][t - d] @ w_eff[l][lvl]
            u[l] = u[l] * decays[l] * (1.0 - theta[l]) + current
            v = u[l] - u_ths[l]
            if mode == "hard":
                theta[l] = _SpikeFn.apply(v, beta)
            else:
                theta[l] = _soft_gate(v, beta)
            pre = theta[l]
        spike_sum = spike_sum + theta[-1]
    return spike_sum + VMEM_LOGIT_COEF * u[-1]


def _model_to_torch(model: NetworkModel):
    weights = [
        torch.tensor(c.weights, dtype=torch.float64, requires_grad=True)
        for c in model.connections
    ]
    masks = [torch.tensor(c.mask, dtype=torch.float64) for c in model.connections]
    return weights, masks


def _torch_to_model(model: NetworkModel, weights) -> NetworkModel:
    conns = [
        DelayWeightTensor(w.detach().numpy(), c.mask)
        for w, c in zip(weights, model.connections)
    ]
    return model.with_connections(conns)


def _dataset_tensors(dataset):
    rasters = torch.tensor(
        np.stack([r for r, _ in dataset]), dtype=torch.float64
    )
    labels = torch.tensor([y for _, y in dataset], dtype=torch.long)
    return rasters, labels


def bptt_train(
    model: NetworkModel,
    dataset: Sequence[tuple[np.ndarray, int]],
    cfg: TrainConfig,
    log: Optional[list] = None,
) -> tuple[NetworkModel, list[dict]]:
    """Train weights with BPTT + surrogate gradients; masked synapses receive
    zero gradient and stay exactly zero. Returns (model, loss curve)."""
    torch.set_num_threads(int(os.environ.get("DELAYSNN_THREADS", "1")))
    torch.manual_seed(cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    rasters, labels = _dataset_tensors(dataset)
    weights, masks = _model_to_torch(model)
    opt = torch.optim.Adam(weights, lr=cfg.lr, betas=(0.9, 0.999))
    history: list[dict] = []

    n = len(dataset)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        correct = 0
        for bi, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            logits = network_forward_torch(
                weights, masks, model, rasters[idx], cfg.beta, mode="hard"
            )
            loss = torch.nn.functional.cross_entropy(logits, labels[idx])
            if torch.isnan(loss):
                raise DivergenceError(epoch, bi)
            opt.zero_grad()
            loss.backward()
            opt.step()
            epoch_loss += float(loss.detach()) * len(idx)
            correct += int((logits.argmax(dim=1) == labels[idx]).sum())
        record = {
            "epoch": epoch,
            "loss": epoch_loss / n,
            "accuracy": 100.0 * correct / n,
        }
        history.append(record)
        if log is not None:
            log.append(record)
    # re-impose the mask so exported weights are exactly zero where pruned
    trained = [w.detach() * m for w, m in zip(weights, masks)]
    return _torch_to_model(model, trained), history


def finetune(
    model: NetworkModel,
    dataset: Sequence[tuple[np.ndarray, int]],
    cfg: TrainConfig,
) -> tuple[NetworkModel, list[dict]]:
    """Continue training on the surviving mask only (zero epochs = identity)."""
    if cfg.finetune_epochs == 0:
        return model, []
    return bptt_train(model, dataset, replace(cfg, epochs=cfg.finetune_epochs))


def prune_delays(
    model: NetworkModel,
    mode: str = "axonal",
    target: float | int = 0.5,
    scope: str = "layer",
    compact: bool = True,
) -> NetworkModel:
    """Magnitude pruning of delay synapses.

    mode "synapse": keep the largest-|w| fraction `target` of currently
    existing synapses, per connection. mode "axonal": rank (source, delay)
    axons by their L2 group norm and keep `target` delay levels -- per layer
    (scope "layer", whole levels dropped; the DelaySet is compacted when
    `compact`) or per presynaptic neuron (scope "neuron").

    Only delay connections (more than one level) are pruned; the input
    connection is left untouched. Pruning never resurrects a masked weight.
    """
    if mode not in ("synapse", "axonal"):
        raise ValueError("mode must be 'synapse' or 'axonal'")
    if scope not in ("layer", "neuron"):
        raise ValueError("scope must be 'layer' or 'neuron'")
    new_conns = []
    new_dsets = []
    for conn, ds in zip(model.connections, model.delay_sets):
        if len(ds) <= 1:
            new_conns.append(conn)
            new_dsets.append(ds)
            continue
        if mode == "synapse":
            if not (0.0 < target <= 1.0):
                raise ValueError("synapse mode target is a keep fraction in (0, 1]")
            alive = np.flatnonzero(conn.mask)
            keep = int(np.ceil(target * len(alive)))
            if keep == 0:
                raise ValueError("target prunes every synapse")
            mags = np.abs(conn.weights).ravel()[alive]
            order = np.argsort(-mags, kind="stable")
            new_mask = np.zeros(conn.mask.size, dtype=bool)
            new_mask[alive[order[:keep]]] = True
            new_conns.append(conn.with_mask(new_mask.reshape(conn.mask.shape)))
            new_dsets.append(ds)
            continue
        # axonal
        target_levels = int(target)
        if not (1 <= target_levels <= len(ds)):
            raise ValueError(
                f"axonal target must be in [1, {len(ds)}], got {target_levels}"
            )
        norms = np.sqrt((conn.weights**2).sum(axis=2))  # [lvl][i]
        if scope == "layer":
            level_norms = np.sqrt((norms**2).sum(axis=1))
            keep_lvls = np.sort(np.argsort(-level_norms, kind="stable")[:target_levels])
            if compact:
                new_dsets.append(DelaySet(tuple(ds.levels[l] for l in keep_lvls)))
                new_conns.append(
                    DelayWeightTensor(conn.weights[keep_lvls], conn.mask[keep_lvls])
                )
            else:
                new_mask = np.zeros_like(conn.mask)
                new_mask[keep_lvls] = conn.mask[keep_lvls]
                new_conns.append(conn.with_mask(new_mask))
                new_dsets.append(ds)
        else:
            new_mask = np.zeros_like(conn.mask)
            for i in range(conn.pre_width):
                keep_lvls = np.argsort(-norms[:, i], kind="stable")[:target_levels]
                new_mask[keep_lvls, i, :] = conn.mask[keep_lvls, i, :]
            new_conns.append(conn.with_mask(new_mask))
            new_dsets.append(ds)
    return replace(
        model, connections=tuple(new_conns), delay_sets=tuple(new_dsets)
    )


def quantize(model: NetworkModel, spec: QuantSpec) -> NetworkModel:
    """Post-training weight quantization.

    int-N: symmetric per-tensor scale max|w| / (2^(N-1)-1), round-to-nearest,
    clamp to [-(2^(N-1)-1), 2^(N-1)-1]; execution uses the dequantized
    values. bfloat16: round-to-nearest-even to 8-bit exponent / 7-bit
    mantissa. float64 returns the model unchanged (reference scheme).
    """
    if model.quant == spec and spec.scheme != "float64":
        return model  # already in this scheme; re-quantization is identity
    if spec.scheme == "float64":
        return replace(model, quant=spec, quant_scales=None)
    new_conns = []
    scales = []
    if spec.is_integer:
        for conn in model.connections:
            amax = float(np.abs(conn.weights).max())
            scale = amax / spec.qmax if amax > 0 else 1.0
            q = np.clip(np.round(conn.weights / scale), -spec.qmax, spec.qmax)
            new_conns.append(conn.with_weights(q * scale))
            scales.append(scale)
        return replace(
            model,
            connections=tuple(new_conns),
            quant=spec,
            quant_scales=tuple(scales),
        )
    # bfloat16
    for conn in model.connections:
        w = (
            torch.tensor(conn.weights, dtype=torch.float64)
            .to(torch.bfloat16)
            .to(torch.float64)
            .numpy()
        )
        new_conns.append(conn.with_weights(w))
    return replace(model, connections=tuple(new_conns), quant=spec, quant_scales=None)


def quantization_codes(model: NetworkModel) -> list[np.ndarray]:
    """Integer codes of a quantized model's weights (for serialization)."""
    if not model.quant.is_integer:
        raise ValueError("model is not integer-quantized")
    return [
        np.round(conn.weights / scale).astype(np.int32)
        for conn, scale in zip(model.connections, model.quant_scales)
    ]


def equal_budget_hidden_width(model: NetworkModel) -> int:
    """Hidden width of a delay-free network (all DelaySets {0}) with the same
    topology pattern and the closest parameter count to `model`."""
    target = model.num_parameters
    n_in, n_out = model.widths[0], model.widths[-1]
    n_hidden = len(model.widths) - 2
    best_h, best_diff = 1, None
    for h in range(1, 2048):
        params = n_in * h + (n_hidden - 1) * h * h + h * n_out
        diff = abs(params - target)
        if best_diff is None or diff < best_diff:
            best_h, best_diff = h, diff
        if params > target and diff > best_diff:
            break
    return best_h
