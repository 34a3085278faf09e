"""Versioned checkpoint container: parameters, optimizer moments, schedule
position and RNG states, round-tripping bit-exact through one .npz file."""

from __future__ import annotations

import json

import numpy as np

from .optim import AdamState
from .tensor import Tensor

FORMAT_VERSION = 1


def save_checkpoint(
    path,
    params: dict[str, Tensor],
    adam: AdamState,
    epoch: int,
    beta: float,
    rng_state: dict,
    extra: dict | None = None,
) -> None:
    arrays = {}
    for name, p in params.items():
        arrays[f"param::{name}"] = p.values
    for name, m in adam.m.items():
        arrays[f"adam_m::{name}"] = m
    for name, v in adam.v.items():
        arrays[f"adam_v::{name}"] = v
    meta = {
        "format_version": FORMAT_VERSION,
        "epoch": epoch,
        "beta": beta,
        "adam": {"lr": adam.lr, "beta1": adam.beta1, "beta2": adam.beta2, "eps": adam.eps, "t": adam.t},
        "rng_state": rng_state,
        "extra": extra or {},
    }
    arrays["meta"] = np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> dict:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta["format_version"] != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint format {meta['format_version']}")
        params = {}
        adam = AdamState(**{k: v for k, v in meta["adam"].items()})
        for key in data.files:
            if key.startswith("param::"):
                params[key[7:]] = Tensor(data[key].copy(), requires_grad=True)
            elif key.startswith("adam_m::"):
                adam.m[key[8:]] = data[key].copy()
            elif key.startswith("adam_v::"):
                adam.v[key[8:]] = data[key].copy()
    return {
        "params": params,
        "adam": adam,
        "epoch": meta["epoch"],
        "beta": meta["beta"],
        "rng_state": meta["rng_state"],
        "extra": meta["extra"],
    }
