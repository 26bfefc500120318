"""Command line pipeline: gen-data -> train -> prune -> finetune -> quantize
-> sim -> compare, plus the memory-overhead report.

Every run with identical inputs and seed produces byte-identical artifacts.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import costs
from .dense import forward_dense
from .fidelity import compare_traces
from .model import DelaySet, QuantSpec, SimTrace, build_network
from .persist import (
    load_dataset,
    load_model,
    save_dataset,
    save_model,
)
from .ringbuf import forward_ring
from .scdq import forward_scdq
from .sharedq import forward_sharedq
from .synthetic import gen_synthetic
from .training import TrainConfig, bptt_train, prune_delays, quantize

BACKENDS = {
    "dense": forward_dense,
    "scdq": forward_scdq,
    "ring": forward_ring,
    "sharedq": lambda m, r, **kw: forward_sharedq(m, r, multi_copy=True, **kw),
}


def _dump_json(obj, path):
    data = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path is None:
        sys.stdout.write(data)
    else:
        with open(path, "w") as f:
            f.write(data)


def _int_list(text):
    return [int(x) for x in text.split(",") if x]


def cmd_gen_data(args):
    dataset = gen_synthetic(
        args.n, args.seed, lags=_int_list(args.lags), num_timesteps=args.timesteps
    )
    save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} samples to {args.out}")


def cmd_train(args):
    dataset = load_dataset(args.data)
    if any(y is None for _, y in dataset):
        raise SystemExit("training data must carry labels")
    T = dataset[0][0].shape[0]
    widths = _int_list(args.widths)
    model = build_network(
        widths,
        DelaySet.from_max_stride(args.d_max, args.stride),
        num_timesteps=T,
        tau=args.tau,
        u_th=args.u_th,
        gain=args.gain,
        seed=args.seed,
    )
    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        beta=args.beta,
        seed=args.seed,
    )
    model, history = bptt_train(model, dataset, cfg)
    save_model(model, args.out)
    if args.log:
        with open(args.log, "w") as f:
            for rec in history:
                f.write(json.dumps(rec, sort_keys=True) + "\n")
    if history:
        last = history[-1]
        print(f"trained: loss={last['loss']:.4f} acc={last['accuracy']:.1f}%")
    print(f"wrote model to {args.out}")


def cmd_prune(args):
    model = load_model(args.model)
    model = prune_delays(
        model,
        mode=args.mode,
        target=args.target,
        scope=args.scope,
        compact=not args.no_compact,
    )
    save_model(model, args.out)
    print(f"pruned model: {model.num_parameters} parameters -> {args.out}")


def cmd_finetune(args):
    model = load_model(args.model)
    dataset = load_dataset(args.data)
    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        lr=args.lr,
        beta=args.beta,
        seed=args.seed,
    )
    model, history = bptt_train(model, dataset, cfg)
    save_model(model, args.out)
    if history:
        print(f"finetuned: acc={history[-1]['accuracy']:.1f}%")
    print(f"wrote model to {args.out}")


def cmd_quantize(args):
    model = load_model(args.model)
    model = quantize(model, QuantSpec(args.scheme))
    save_model(model, args.out)
    print(f"quantized to {args.scheme} -> {args.out}")


def cmd_sim(args):
    model = load_model(args.model)
    dataset = load_dataset(args.data)
    forward = BACKENDS[args.backend]
    record = args.trace is not None
    traces = []
    for raster, _ in dataset:
        traces.append(forward(model, raster, record_events=record))
    result = {
        "backend": args.backend,
        "predictions": [t.prediction for t in traces],
        "labels": [y for _, y in dataset],
        "avg_spike_counts": np.mean([t.spike_counts() for t in traces], axis=0).tolist(),
    }
    occ = [t.stats.get("peak_occupancy") for t in traces if t.stats.get("peak_occupancy")]
    if occ:
        result["peak_occupancy"] = {
            str(c): max(o[c] for o in occ) for c in occ[0]
        }
    if args.full:
        result["traces"] = [
            {
                "spikes": [s.tolist() for s in t.spikes],
                "vmem": [v.tolist() for v in t.vmem],
            }
            for t in traces
        ]
    if record:
        with open(args.trace, "w") as f:
            for si, t in enumerate(traces):
                for c, log in sorted(t.stats.get("event_log", {}).items()):
                    for ts, src, d in sorted(log):
                        if ts < model.num_timesteps:
                            f.write(f"{si} {c} {ts} {src} {d}\n")
    _dump_json(result, args.out)


def _traces_from_result(res):
    if "traces" not in res:
        return None
    out = []
    for t, pred in zip(res["traces"], res["predictions"]):
        out.append(
            SimTrace(
                spikes=[np.array(s, dtype=np.uint8) for s in t["spikes"]],
                vmem=[np.array(v, dtype=np.float64) for v in t["vmem"]],
                prediction=pred,
            )
        )
    return out


def cmd_compare(args):
    ref = json.load(open(args.ref))
    test = json.load(open(args.test))
    if len(ref["predictions"]) != len(test["predictions"]):
        raise SystemExit("result files cover different sample counts")
    labels = ref.get("labels")
    if labels and any(y is None for y in labels):
        labels = None
    ref_traces = _traces_from_result(ref)
    test_traces = _traces_from_result(test)
    if ref_traces and test_traces:
        report = compare_traces(ref_traces, test_traces, labels=labels).to_dict()
    else:
        n = len(ref["predictions"])
        same = sum(1 for a, b in zip(ref["predictions"], test["predictions"]) if a == b)
        report = {
            "num_samples": n,
            "consistency": 100.0 * same / n,
            "avg_spike_counts_ref": ref["avg_spike_counts"],
            "avg_spike_counts_test": test["avg_spike_counts"],
        }
        if labels:
            report["accuracy_ref"] = 100.0 * sum(
                1 for p, y in zip(ref["predictions"], labels) if p == y
            ) / n
            report["accuracy_test"] = 100.0 * sum(
                1 for p, y in zip(test["predictions"], labels) if p == y
            ) / n
    _dump_json(report, args.out)


def cmd_report(args):
    if not args.memory:
        raise SystemExit("only --memory reports are supported")
    presets = list(costs.PRESETS) if args.preset == "all" else [args.preset]
    reports = [costs.cost_report(p).to_dict() for p in presets]
    for r in reports:
        print(
            f"{r['preset']}: shared queue {r['sharedq_events']} events vs "
            f"SCDQ {r['scdq_events']} events; ring {r['ring_bits']} bits vs "
            f"SCDQ {r['scdq_bits']} bits (crossover alpha "
            f"{r['crossover_alpha']:.3f} -> {r['crossover_alpha_reported']:.2f})"
        )
    if args.out:
        _dump_json(reports, args.out)
    if args.sweep:
        rows = costs.scaling_sweep(
            level_counts=range(1, args.sweep_max_levels + 1),
            widths=_int_list(args.sweep_widths),
        )
        with open(args.sweep, "w", newline="") as f:
            writer = csv.DictWriter(f, fieldnames=list(rows[0]))
            writer.writeheader()
            writer.writerows(rows)
        print(f"wrote sweep CSV to {args.sweep}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="delaysnn")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="generate the synthetic delayed-coincidence dataset")
    g.add_argument("--out", required=True)
    g.add_argument("--n", type=int, default=300)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--lags", default="2,6,10")
    g.add_argument("--timesteps", type=int, default=32)
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train", help="train a delay network with BPTT")
    t.add_argument("--data", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--widths", default="2,8,8,3")
    t.add_argument("--epochs", type=int, default=60)
    t.add_argument("--batch-size", type=int, default=32)
    t.add_argument("--lr", type=float, default=1e-3)
    t.add_argument("--beta", type=float, default=10.0)
    t.add_argument("--d-max", type=int, default=12)
    t.add_argument("--stride", type=int, default=1)
    t.add_argument("--tau", type=float, default=2.0)
    t.add_argument("--u-th", type=float, default=1.0)
    t.add_argument("--gain", type=float, default=3.0)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--log")
    t.set_defaults(func=cmd_train)

    pr = sub.add_parser("prune", help="magnitude-prune delay synapses or axons")
    pr.add_argument("--model", required=True)
    pr.add_argument("--out", required=True)
    pr.add_argument("--mode", choices=("synapse", "axonal"), default="axonal")
    pr.add_argument("--target", type=float, required=True)
    pr.add_argument("--scope", choices=("layer", "neuron"), default="layer")
    pr.add_argument("--no-compact", action="store_true")
    pr.set_defaults(func=cmd_prune)

    ft = sub.add_parser("finetune", help="continue training on the pruned mask")
    ft.add_argument("--model", required=True)
    ft.add_argument("--data", required=True)
    ft.add_argument("--out", required=True)
    ft.add_argument("--epochs", type=int, default=20)
    ft.add_argument("--batch-size", type=int, default=32)
    ft.add_argument("--lr", type=float, default=1e-3)
    ft.add_argument("--beta", type=float, default=10.0)
    ft.add_argument("--seed", type=int, default=0)
    ft.set_defaults(func=cmd_finetune)

    q = sub.add_parser("quantize", help="post-training weight quantization")
    q.add_argument("--model", required=True)
    q.add_argument("--out", required=True)
    q.add_argument(
        "--scheme",
        choices=("float64", "bfloat16", "int8", "int7", "int6", "int5", "int4", "int3", "int2"),
        required=True,
    )
    q.set_defaults(func=cmd_quantize)

    s = sub.add_parser("sim", help="run inference with a chosen executor")
    s.add_argument("--model", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--backend", choices=tuple(BACKENDS), default="dense")
    s.add_argument("--out")
    s.add_argument("--trace", help="write a per-connection event log (t source d)")
    s.add_argument("--full", action="store_true", help="store full spike/vmem traces")
    s.set_defaults(func=cmd_sim)

    c = sub.add_parser("compare", help="fidelity report between two sim results")
    c.add_argument("--ref", required=True)
    c.add_argument("--test", required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_compare)

    r = sub.add_parser("report", help="memory-overhead arithmetic and sweeps")
    r.add_argument("--memory", action="store_true")
    r.add_argument("--preset", choices=("truenorth", "loihi", "spinnaker", "all"), default="all")
    r.add_argument("--out")
    r.add_argument("--sweep", help="write a shared-queue vs SCDQ scaling CSV here")
    r.add_argument("--sweep-max-levels", type=int, default=64)
    r.add_argument("--sweep-widths", default="16,32,64,128,256")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except SystemExit:
        raise
    except Exception as e:  # present domain errors as diagnostics, not tracebacks
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
