"""Checkpoint files: a JSON manifest plus base64 little-endian float64 payloads.

Saving and re-loading a checkpoint reproduces bit-identical predictions; the
manifest echoes the training and scenario configuration so evaluation,
explanation and serving can rebuild their environments.
"""

from __future__ import annotations

import base64
from pathlib import Path

import numpy as np

from .convnet import ConvApproximator
from .errors import CheckpointFormatError, CheckpointVersionError
from .jsonutil import read_json, write_json
from .qmaps import TabularApproximator
from .training import Checkpoint

CHECKPOINT_FORMAT_VERSION = 1


def _encode(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _decode(data: str, shape) -> np.ndarray:
    arr = np.frombuffer(base64.b64decode(data), dtype="<f8").reshape(tuple(shape))
    return arr.copy()


def checkpoint_to_doc(ckpt: Checkpoint) -> dict:
    approx = ckpt.approximator
    doc = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "kind": approx.kind,
        "mode": ckpt.mode,
        "k": approx.num_components,
        "component_names": list(approx.component_names),
        "weights": [float(w) for w in approx.weights],
        "training_step": ckpt.training_step,
        "config": ckpt.config,
        "metrics": ckpt.metrics,
    }
    if approx.kind == "conv":
        doc["num_channels"] = approx.num_channels
        doc["hidden"] = approx.hidden
        doc["learning_rate"] = approx.learning_rate
        doc["momentum"] = approx.momentum
        doc["layers"] = [
            {"name": name, "shape": list(arr.shape), "dtype": "<f8", "data": _encode(arr)}
            for name, arr in approx.get_params().items()
        ]
    elif approx.kind == "tabular":
        doc["learning_rate"] = approx.learning_rate
        doc["table"] = [
            {"digest": digest, "shape": list(arr.shape), "data": _encode(arr)}
            for digest, arr in approx.get_params().items()
        ]
    else:  # pragma: no cover - no other kinds exist
        raise CheckpointFormatError(f"cannot serialize approximator kind {approx.kind!r}")
    return doc


def checkpoint_from_doc(doc: dict) -> Checkpoint:
    if not isinstance(doc, dict):
        raise CheckpointFormatError("checkpoint document must be a JSON object")
    version = doc.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointVersionError(
            f"unsupported checkpoint format_version {version!r} "
            f"(expected {CHECKPOINT_FORMAT_VERSION})"
        )
    for key in ("kind", "mode", "component_names", "weights", "training_step"):
        if key not in doc:
            raise CheckpointFormatError(f"checkpoint missing key {key!r}")
    names = tuple(doc["component_names"])
    weights = np.asarray(doc["weights"], dtype=np.float64)
    kind = doc["kind"]
    if kind == "conv":
        approx = ConvApproximator(
            num_channels=int(doc["num_channels"]),
            component_names=names,
            weights=weights,
            hidden=int(doc["hidden"]),
            learning_rate=float(doc.get("learning_rate", 1e-3)),
            momentum=float(doc.get("momentum", 0.9)),
        )
        approx.set_params(
            {layer["name"]: _decode(layer["data"], layer["shape"]) for layer in doc["layers"]}
        )
    elif kind == "tabular":
        approx = TabularApproximator(
            names, weights, learning_rate=float(doc.get("learning_rate", 1.0))
        )
        approx.set_params(
            {entry["digest"]: _decode(entry["data"], entry["shape"]) for entry in doc["table"]}
        )
    else:
        raise CheckpointFormatError(f"unknown approximator kind {kind!r}")
    return Checkpoint(
        approximator=approx,
        mode=doc["mode"],
        training_step=int(doc["training_step"]),
        config=doc.get("config", {}),
        metrics=doc.get("metrics", []),
    )


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    write_json(path, checkpoint_to_doc(ckpt))


def load_checkpoint(path: str | Path) -> Checkpoint:
    return checkpoint_from_doc(read_json(path))
