"""Analytical memory-overhead model for the three delay structures.

Formulas:
  ring buffer       bits   = J * D * w_bits           (one ring per neuron)
  shared queue      events = 1/2 * alpha * I * (D^2 + D)
  shared circular   events = alpha * I * (2*D - 1)

The shared-queue closed form above is the printed one that reproduces the
reference worked numbers (e.g. 34816 events for alpha=1, I=256, D=16).
The per-FIFO summation sum_{d=1..D}(D-d) evaluates to I*D*(D-1)/2 instead;
both are computed and the discrepancy is surfaced, not silently resolved.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict

DEFAULT_EVENT_BITS = 16


@dataclass
class CostReport:
    """Memory overhead of the delay structures for one platform scenario."""

    preset: str
    alpha: float
    pre_width: int
    post_width: int
    num_levels: int
    weight_bits: int
    event_bits: int
    ring_bits: int
    sharedq_events: int
    sharedq_bits: int
    sharedq_events_summation: int
    scdq_events: int
    scdq_bits: int
    crossover_alpha: float
    crossover_alpha_reported: float
    closed_form_matches_summation: bool
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def mem_ring(post_width: int, num_levels: int, weight_bits: int) -> int:
    """Ring-buffer overhead in bits: J * D * w_bits."""
    if post_width < 0 or num_levels < 0 or weight_bits < 0:
        raise ValueError("arguments must be non-negative")
    return post_width * num_levels * weight_bits


def mem_sharedq(
    alpha: float, pre_width: int, num_levels: int, event_bits: int = DEFAULT_EVENT_BITS
) -> tuple[float, float]:
    """Cascade shared-queue overhead, printed closed form: (events, bits)."""
    events = 0.5 * alpha * pre_width * (num_levels**2 + num_levels)
    return events, events * event_bits


def mem_sharedq_summation(
    alpha: float, pre_width: int, num_levels: int, event_bits: int = DEFAULT_EVENT_BITS
) -> tuple[float, float]:
    """Cascade shared-queue overhead from the per-FIFO sum over d=1..D of (D-d)."""
    events = alpha * pre_width * sum(num_levels - d for d in range(1, num_levels + 1))
    return events, events * event_bits


def mem_scdq(
    alpha: float, pre_width: int, num_levels: int, event_bits: int = DEFAULT_EVENT_BITS
) -> tuple[float, float]:
    """Shared circular delay queue overhead: alpha * I * (2D - 1) events."""
    events = alpha * pre_width * (2 * num_levels - 1)
    return events, events * event_bits


def crossover_alpha(ring_bits: float, scdq_bits_at_alpha1: float) -> float:
    """Activation fraction below which the SCDQ beats a ring buffer."""
    if scdq_bits_at_alpha1 <= 0:
        raise ValueError("SCDQ cost at alpha=1 must be positive")
    return ring_bits / scdq_bits_at_alpha1


def reported_crossover(alpha_star: float) -> float:
    """Conservative headline value: alpha* floored to a multiple of 0.05."""
    return math.floor(alpha_star / 0.05 + 1e-12) * 0.05


# Platform scenarios: (alpha, presynaptic count, postsynaptic count used for
# the ring bank, delay levels, weight bits, event bits).
PRESETS = {
    "truenorth": dict(alpha=1.0, pre_width=256, post_width=256, num_levels=16,
                      weight_bits=16, event_bits=16),
    "loihi": dict(alpha=1.0, pre_width=48, post_width=48, num_levels=64,
                  weight_bits=8, event_bits=16),
    "spinnaker": dict(alpha=1.0, pre_width=256, post_width=256, num_levels=16,
                      weight_bits=16, event_bits=16),
}


def cost_report(
    preset: str = "custom",
    alpha: float = 1.0,
    pre_width: int = 0,
    post_width: int = 0,
    num_levels: int = 0,
    weight_bits: int = 8,
    event_bits: int = DEFAULT_EVENT_BITS,
) -> CostReport:
    if preset in PRESETS:
        p = PRESETS[preset]
        alpha, pre_width, post_width = p["alpha"], p["pre_width"], p["post_width"]
        num_levels, weight_bits, event_bits = p["num_levels"], p["weight_bits"], p["event_bits"]
    ring_bits = mem_ring(post_width, num_levels, weight_bits)
    sq_events, sq_bits = mem_sharedq(alpha, pre_width, num_levels, event_bits)
    sq_events_sum, _ = mem_sharedq_summation(alpha, pre_width, num_levels, event_bits)
    scdq_events, scdq_bits = mem_scdq(alpha, pre_width, num_levels, event_bits)
    _, scdq_bits_a1 = mem_scdq(1.0, pre_width, num_levels, event_bits)
    a_star = crossover_alpha(ring_bits, scdq_bits_a1)
    return CostReport(
        preset=preset,
        alpha=alpha,
        pre_width=pre_width,
        post_width=post_width,
        num_levels=num_levels,
        weight_bits=weight_bits,
        event_bits=event_bits,
        ring_bits=int(ring_bits),
        sharedq_events=int(sq_events),
        sharedq_bits=int(sq_bits),
        sharedq_events_summation=int(sq_events_sum),
        scdq_events=int(scdq_events),
        scdq_bits=int(scdq_bits),
        crossover_alpha=a_star,
        crossover_alpha_reported=reported_crossover(a_star),
        closed_form_matches_summation=sq_events == sq_events_sum,
        notes={
            "sharedq_form": "closed form (D^2+D)/2 drives the headline number; "
            "the per-FIFO summation disagrees and is reported alongside"
        },
    )


def scaling_sweep(
    level_counts,
    widths,
    alpha: float = 1.0,
    event_bits: int = DEFAULT_EVENT_BITS,
) -> list[dict]:
    """Worst-case (no pruning) capacity of shared queue vs SCDQ over a grid
    of delay-level counts and layer widths; rows suitable for CSV."""
    rows = []
    for d in level_counts:
        for n in widths:
            sq_events, sq_bits = mem_sharedq(alpha, n, d, event_bits)
            scdq_events, scdq_bits = mem_scdq(alpha, n, d, event_bits)
            rows.append(
                dict(
                    num_levels=d,
                    width=n,
                    alpha=alpha,
                    sharedq_events=sq_events,
                    sharedq_bits=sq_bits,
                    scdq_events=scdq_events,
                    scdq_bits=scdq_bits,
                )
            )
    return rows
