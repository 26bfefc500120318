"""Model and raster persistence.

Model container: magic + 8-byte little-endian header length + canonical
JSON header + concatenated binary blobs (per connection: weights, then the
mask as a packed bitset). Weights are row-major [d][i][j]; float64 LE for
the float64/bfloat16 schemes, int32 LE codes plus a per-tensor scale in
the header for integer schemes. Everything is fixed-endianness so files
round-trip bit-identically across platforms.

Rasters are canonical JSON: header fields plus an event list of (t,
channel) pairs sorted by t then channel. Datasets are JSON-lines of
rasters.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .model import (
    DelaySet,
    DelayWeightTensor,
    NetworkModel,
    NeuronParams,
    QuantSpec,
    ShapeError,
)

MODEL_MAGIC = b"DSNN"
MODEL_FORMAT_VERSION = 1
RASTER_FORMAT_VERSION = 1


class FileFormatError(ValueError):
    """Corrupt, truncated, or wrong-version file."""


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def save_model(model: NetworkModel, path) -> None:
    from .training import quantization_codes

    blobs = []
    conn_meta = []
    codes = quantization_codes(model) if model.quant.is_integer else None
    for c, conn in enumerate(model.connections):
        if codes is not None:
            wblob = codes[c].astype("<i4").tobytes()
            scale = model.quant_scales[c]
        else:
            wblob = conn.weights.astype("<f8").tobytes()
            scale = None
        mblob = np.packbits(conn.mask.ravel(), bitorder="big").tobytes()
        blobs.append(wblob)
        blobs.append(mblob)
        conn_meta.append(
            {
                "levels": list(model.delay_sets[c].levels),
                "scale": scale,
                "weights_bytes": len(wblob),
                "mask_bytes": len(mblob),
            }
        )
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "widths": list(model.widths),
        "num_timesteps": model.num_timesteps,
        "readout": model.readout,
        "seed": model.seed,
        "quant_scheme": model.quant.scheme,
        "neuron_params": [
            {"tau": p.tau, "u_th": p.u_th} for p in model.neuron_params
        ],
        "connections": conn_meta,
    }
    hbytes = _canonical_json(header)
    with open(path, "wb") as f:
        f.write(MODEL_MAGIC)
        f.write(len(hbytes).to_bytes(8, "little"))
        f.write(hbytes)
        for b in blobs:
            f.write(b)


def load_model(path) -> NetworkModel:
    data = Path(path).read_bytes()
    if data[:4] != MODEL_MAGIC:
        raise FileFormatError("not a delaysnn model file")
    hlen = int.from_bytes(data[4:12], "little")
    try:
        header = json.loads(data[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise FileFormatError(f"bad model header: {e}") from e
    if header.get("format_version") != MODEL_FORMAT_VERSION:
        raise FileFormatError(
            f"unsupported model format version {header.get('format_version')}"
        )
    widths = tuple(header["widths"])
    quant = QuantSpec(header["quant_scheme"])
    offset = 12 + hlen
    conns = []
    dsets = []
    scales = []
    for c, meta in enumerate(header["connections"]):
        ds = DelaySet(tuple(meta["levels"]))
        shape = (len(ds), widths[c], widths[c + 1])
        wb, mb = meta["weights_bytes"], meta["mask_bytes"]
        if offset + wb + mb > len(data):
            raise FileFormatError("truncated model file")
        wraw = data[offset : offset + wb]
        offset += wb
        mraw = data[offset : offset + mb]
        offset += mb
        size = int(np.prod(shape))
        mask_bits = np.unpackbits(
            np.frombuffer(mraw, dtype=np.uint8), bitorder="big"
        )[:size]
        mask = mask_bits.astype(bool).reshape(shape)
        if quant.is_integer:
            codes = np.frombuffer(wraw, dtype="<i4")
            if codes.size != size:
                raise FileFormatError(f"connection {c}: blob length != header shape")
            weights = codes.reshape(shape).astype(np.float64) * meta["scale"]
            scales.append(meta["scale"])
        else:
            weights = np.frombuffer(wraw, dtype="<f8")
            if weights.size != size:
                raise FileFormatError(f"connection {c}: blob length != header shape")
            weights = weights.reshape(shape).copy()
        conns.append(DelayWeightTensor(weights, mask))
        dsets.append(ds)
    if offset != len(data):
        raise FileFormatError("trailing bytes after model blobs")
    return NetworkModel(
        widths=widths,
        connections=tuple(conns),
        delay_sets=tuple(dsets),
        neuron_params=tuple(
            NeuronParams(p["tau"], p["u_th"]) for p in header["neuron_params"]
        ),
        num_timesteps=header["num_timesteps"],
        readout=header["readout"],
        seed=header["seed"],
        quant=quant,
        quant_scales=tuple(scales) if quant.is_integer else None,
    )


def raster_to_obj(raster: np.ndarray, label: Optional[int] = None) -> dict:
    raster = np.asarray(raster)
    if raster.ndim != 2:
        raise ShapeError("raster must be 2-D [T, channels]")
    t_idx, c_idx = np.nonzero(raster)
    events = sorted(zip(t_idx.tolist(), c_idx.tolist()))
    obj = {
        "format_version": RASTER_FORMAT_VERSION,
        "T": int(raster.shape[0]),
        "channels": int(raster.shape[1]),
        "events": [list(e) for e in events],
    }
    if label is not None:
        obj["label"] = int(label)
    return obj


def raster_from_obj(obj: dict) -> tuple[np.ndarray, Optional[int]]:
    if obj.get("format_version") != RASTER_FORMAT_VERSION:
        raise FileFormatError(
            f"unsupported raster format version {obj.get('format_version')}"
        )
    T, C = int(obj["T"]), int(obj["channels"])
    raster = np.zeros((T, C), dtype=np.uint8)
    prev = None
    for t, c in obj["events"]:
        if not (0 <= t < T and 0 <= c < C):
            raise FileFormatError(f"event ({t},{c}) out of range")
        if prev is not None and (t, c) <= prev:
            raise FileFormatError("events must be sorted and duplicate-free")
        prev = (t, c)
        raster[t, c] = 1
    return raster, obj.get("label")


def save_raster(raster: np.ndarray, path, label: Optional[int] = None) -> None:
    Path(path).write_bytes(_canonical_json(raster_to_obj(raster, label)) + b"\n")


def load_raster(path) -> tuple[np.ndarray, Optional[int]]:
    return raster_from_obj(json.loads(Path(path).read_text()))


def save_dataset(dataset, path) -> None:
    """JSON-lines file, one raster object per sample."""
    with open(path, "wb") as f:
        for raster, label in dataset:
            f.write(_canonical_json(raster_to_obj(raster, label)) + b"\n")


def load_dataset(path) -> list[tuple[np.ndarray, Optional[int]]]:
    out = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                out.append(raster_from_obj(json.loads(line)))
    return out
