"""Optimizer, initialization, clipping and the learning-rate schedule."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor


def xavier_normal_init(shape, rng: np.random.Generator) -> Tensor:
    """Weight tensor sampled from N(0, 2 / (fan_in + fan_out)); 2-D only."""
    if len(shape) != 2:
        raise ValueError(f"xavier init needs a 2-D shape, got {shape}")
    fan_in, fan_out = shape
    std = np.sqrt(2.0 / (fan_in + fan_out))
    return Tensor(rng.normal(0.0, std, size=shape), requires_grad=True)


def zeros_init(shape) -> Tensor:
    """Constant-zero initialization, used for every bias."""
    return Tensor(np.zeros(shape), requires_grad=True)


def clip_global_norm(grads: list[np.ndarray], max_norm: float = 50.0) -> tuple[list[np.ndarray], float]:
    """Scale all gradients so the global L2 norm is at most max_norm.

    Returns (grads, pre-clip norm); direction is preserved exactly.
    """
    total = 0.0
    for g in grads:
        total += float(np.sum(g * g))
    norm = float(np.sqrt(total))
    if norm > max_norm:
        factor = max_norm / norm
        for g in grads:
            g *= factor
    return grads, norm


@dataclass
class LrSchedule:
    """Exponential decay, stepped once per epoch."""

    base_lr: float = 1e-3
    decay: float = 0.9

    def lr(self, epoch: int) -> float:
        return self.base_lr * self.decay**epoch


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: dict[str, Tensor], grads: dict[str, np.ndarray], state: AdamState) -> None:
    """Standard bias-corrected Adam update, in place."""
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.t
    bc2 = 1.0 - b2**state.t
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.values.shape:
            raise ValueError(f"gradient shape {g.shape} != param {name} shape {p.values.shape}")
        m = state.m.setdefault(name, np.zeros_like(p.values))
        v = state.v.setdefault(name, np.zeros_like(p.values))
        m += (1.0 - b1) * (g - m)
        v += (1.0 - b2) * (g * g - v)
        m_hat = m / bc1
        v_hat = v / bc2
        p.values -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
