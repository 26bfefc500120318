"""Fidelity comparison between executors: accuracy, prediction consistency,
spike-count statistics, membrane-potential RMSE, confusion matrices."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

import numpy as np

from .model import SimTrace


@dataclass
class FidelityReport:
    num_samples: int
    consistency: float  # % of samples with identical prediction
    accuracy_ref: Optional[float]
    accuracy_test: Optional[float]
    avg_spike_counts_ref: list[float]  # per layer, averaged over samples
    avg_spike_counts_test: list[float]
    vmem_rmse: list[float]  # per layer
    confusion_ref: Optional[list[list[int]]] = None
    confusion_test: Optional[list[list[int]]] = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _confusion(labels, predictions, num_classes: int) -> list[list[int]]:
    m = np.zeros((num_classes, num_classes), dtype=int)
    for y, p in zip(labels, predictions):
        m[y, p] += 1
    return m.tolist()


def compare_traces(
    ref: Sequence[SimTrace],
    test: Sequence[SimTrace],
    labels: Optional[Sequence[int]] = None,
    num_classes: Optional[int] = None,
) -> FidelityReport:
    """Compare two trace sets recorded over the same samples in the same order."""
    if len(ref) != len(test):
        raise ValueError(f"trace set lengths differ: {len(ref)} vs {len(test)}")
    if len(ref) == 0:
        raise ValueError("empty trace sets")
    n = len(ref)
    same = sum(1 for a, b in zip(ref, test) if a.prediction == b.prediction)
    num_layers = len(ref[0].spikes)

    counts_ref = np.zeros(num_layers)
    counts_test = np.zeros(num_layers)
    sq_err = np.zeros(num_layers)
    n_vals = np.zeros(num_layers)
    for a, b in zip(ref, test):
        for l in range(num_layers):
            counts_ref[l] += a.spikes[l].sum()
            counts_test[l] += b.spikes[l].sum()
            diff = a.vmem[l] - b.vmem[l]
            sq_err[l] += float((diff * diff).sum())
            n_vals[l] += diff.size
    rmse = np.sqrt(sq_err / n_vals)

    acc_ref = acc_test = None
    conf_ref = conf_test = None
    if labels is not None:
        labels = list(labels)
        if len(labels) != n:
            raise ValueError("labels length must match trace sets")
        acc_ref = 100.0 * sum(1 for a, y in zip(ref, labels) if a.prediction == y) / n
        acc_test = 100.0 * sum(1 for b, y in zip(test, labels) if b.prediction == y) / n
        if num_classes is None:
            num_classes = max(max(labels), max(t.prediction for t in ref + list(test))) + 1
        conf_ref = _confusion(labels, [t.prediction for t in ref], num_classes)
        conf_test = _confusion(labels, [t.prediction for t in test], num_classes)

    return FidelityReport(
        num_samples=n,
        consistency=100.0 * same / n,
        accuracy_ref=acc_ref,
        accuracy_test=acc_test,
        avg_spike_counts_ref=(counts_ref / n).tolist(),
        avg_spike_counts_test=(counts_test / n).tolist(),
        vmem_rmse=rmse.tolist(),
        confusion_ref=conf_ref,
        confusion_test=conf_test,
    )


def accuracy(traces: Sequence[SimTrace], labels: Sequence[int]) -> float:
    """Percentage of samples whose readout prediction matches the label."""
    if len(traces) != len(labels) or len(traces) == 0:
        raise ValueError("traces and labels must be non-empty and equal length")
    hits = sum(1 for t, y in zip(traces, labels) if t.prediction == y)
    return 100.0 * hits / len(traces)
