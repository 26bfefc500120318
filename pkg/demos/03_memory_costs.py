"""Analytical memory overhead of the three delay structures.

Compares, for three platform-inspired scenarios, the storage cost of
  * per-neuron ring buffers            J * D * w_bits
  * a cascade of shared delay FIFOs    1/2 * alpha * I * (D^2 + D) events
  * the shared circular delay queue    alpha * I * (2D - 1) events
where I/J are layer widths, D the number of delay levels, and alpha the
peak fraction of presynaptic neurons spiking in one timestep.

Also prints the crossover activation fraction alpha* below which the
circular queue is cheaper than ring buffers, and a scaling sweep grid.
"""
from delaysnn import cost_report, scaling_sweep

for preset in ("truenorth", "loihi", "spinnaker"):
    r = cost_report(preset)
    print(f"--- {preset} (alpha={r.alpha}, I={r.pre_width}, D={r.num_levels}, "
          f"w_bits={r.weight_bits}) ---")
    print(f"  ring buffers:   {r.ring_bits:>7} bits")
    print(f"  shared queue:   {r.sharedq_events:>7} events "
          f"({r.sharedq_bits} bits at {r.event_bits}-bit events)")
    print(f"  circular queue: {r.scdq_events:>7} events ({r.scdq_bits} bits)")
    print(f"  crossover alpha*: {r.crossover_alpha:.3f} "
          f"(reported as {r.crossover_alpha_reported:.2f})")
    if not r.closed_form_matches_summation:
        print(f"  note: per-FIFO summation gives {r.sharedq_events_summation} "
              f"events for the shared queue (closed form and summation disagree)")

print("\nworst-case event capacity, shared queue vs circular queue:")
print(f"{'D':>4} {'I':>5} {'sharedq':>10} {'scdq':>8}")
for row in scaling_sweep(level_counts=[4, 16, 64], widths=[48, 256]):
    print(f"{row['num_levels']:>4} {row['width']:>5} "
          f"{row['sharedq_events']:>10.0f} {row['scdq_events']:>8.0f}")
