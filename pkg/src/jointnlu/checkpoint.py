"""Checkpoint serialization: a plain-text manifest (one ``name shape dtype
byte-offset`` line per parameter) plus a binary payload of little-endian
32-bit floats in manifest order. Round-trips bit-exactly."""

from __future__ import annotations

import json
import os

import numpy as np

MAGIC = "jointnlu-checkpoint 1"
MANIFEST = "manifest"
PAYLOAD = "params.bin"


class CheckpointError(ValueError):
    pass


def _shape_str(shape):
    return "x".join(str(d) for d in shape) if shape else "scalar"


def _parse_shape(text):
    return () if text == "scalar" else tuple(int(d) for d in text.split("x"))


def save(path, kind, config, vocabs, arrays):
    """Write a checkpoint directory.

    ``vocabs`` maps vocab name -> list of labels; ``arrays`` maps parameter
    name -> numpy array (written as little-endian float32, manifest order).
    """
    os.makedirs(path, exist_ok=True)
    lines = [MAGIC, f"kind {kind}", "config " + json.dumps(config, sort_keys=True)]
    for name in sorted(vocabs):
        lines.append("vocab " + name + " " + "\t".join(vocabs[name]))
    lines.append("params")
    payload = bytearray()
    for name in arrays:
        # astype keeps 0-d shapes intact (ascontiguousarray would promote them)
        arr = np.asarray(arrays[name]).astype("<f4", order="C")
        lines.append(f"{name} {_shape_str(arr.shape)} f32 {len(payload)}")
        payload.extend(arr.tobytes())
    with open(os.path.join(path, MANIFEST), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(os.path.join(path, PAYLOAD), "wb") as fh:
        fh.write(bytes(payload))


def load(path):
    """Read a checkpoint directory; returns (kind, config, vocabs, arrays)
    with arrays as float32 numpy arrays in manifest order."""
    manifest_path = os.path.join(path, MANIFEST)
    if not os.path.exists(manifest_path):
        raise CheckpointError(f"no checkpoint manifest at {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != MAGIC:
        raise CheckpointError("bad checkpoint magic line")
    kind = None
    config = {}
    vocabs = {}
    i = 1
    while i < len(lines) and lines[i] != "params":
        line = lines[i]
        if line.startswith("kind "):
            kind = line[len("kind "):]
        elif line.startswith("config "):
            config = json.loads(line[len("config "):])
        elif line.startswith("vocab "):
            name, _, labels = line[len("vocab "):].partition(" ")
            vocabs[name] = labels.split("\t") if labels else []
        else:
            raise CheckpointError(f"unrecognized manifest line: {line!r}")
        i += 1
    if kind is None or i == len(lines):
        raise CheckpointError("manifest missing kind or params section")
    with open(os.path.join(path, PAYLOAD), "rb") as fh:
        payload = fh.read()
    arrays = {}
    for line in lines[i + 1:]:
        if not line:
            continue
        name, shape_s, dtype, offset_s = line.rsplit(" ", 3)
        if dtype != "f32":
            raise CheckpointError(f"unsupported dtype {dtype!r}")
        shape = _parse_shape(shape_s)
        count = int(np.prod(shape)) if shape else 1
        offset = int(offset_s)
        arr = np.frombuffer(payload, dtype="<f4", count=count, offset=offset)
        arrays[name] = arr.reshape(shape).copy()
    return kind, config, vocabs, arrays
