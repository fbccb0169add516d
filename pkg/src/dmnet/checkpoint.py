"""Checkpoint container.

A checkpoint is an uncompressed numpy ``.npz`` (zip) archive:

``meta``
    uint8 array holding UTF-8 JSON: ``format`` ("dmnet.checkpoint"),
    ``version`` (1), ``dtype``, ``config`` (model config), ``vocab`` (tokens
    in id order), ``labels`` (output classes or null), ``params`` (name ->
    shape) and a free-form ``extra`` object.
``param/<name>``
    one array per model parameter, stored with its dtype and shape.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .data import Vocab
from .dmn import DmnConfig, DynamicMemoryNetwork
from .errors import ParseError
from . import tensor as T

FORMAT = "dmnet.checkpoint"
VERSION = 1


def save_checkpoint(path: str | os.PathLike, model: DynamicMemoryNetwork,
                    extra: dict | None = None) -> None:
    arrays = model.state_arrays()
    meta = {
        "format": FORMAT,
        "version": VERSION,
        "dtype": str(model.embedding.L.data.dtype),
        "config": model.cfg.to_dict(),
        "vocab": model.vocab.tokens(),
        "labels": model.labels,
        "params": {k: list(v.shape) for k, v in arrays.items()},
        "extra": extra or {},
    }
    payload = {"meta": np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)}
    payload.update({f"param/{k}": v for k, v in arrays.items()})
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def read_meta(path: str | os.PathLike) -> dict:
    with np.load(path, allow_pickle=False) as z:
        return _meta(z)


def _meta(z) -> dict:
    if "meta" not in z.files:
        raise ParseError("not a dmnet checkpoint (no meta entry)")
    meta = json.loads(z["meta"].tobytes().decode())
    if meta.get("format") != FORMAT:
        raise ParseError(f"unexpected checkpoint format {meta.get('format')!r}")
    if meta.get("version") != VERSION:
        raise ParseError(f"unsupported checkpoint version {meta.get('version')}")
    return meta


def load_checkpoint(path: str | os.PathLike) -> tuple[DynamicMemoryNetwork, dict]:
    """Rebuild the model; returns it with the checkpoint's ``extra`` dict."""
    with np.load(path, allow_pickle=False) as z:
        meta = _meta(z)
        arrays = {k[len("param/"):]: z[k] for k in z.files if k.startswith("param/")}
    vocab = Vocab(t for t in meta["vocab"] if t not in Vocab.RESERVED)
    if vocab.tokens() != meta["vocab"]:
        raise ParseError("checkpoint vocabulary is not in canonical order")
    with T.precision(meta["dtype"]):
        model = DynamicMemoryNetwork(DmnConfig(**meta["config"]), vocab, meta["labels"])
    model.load_arrays(arrays)
    return model, meta.get("extra", {})
