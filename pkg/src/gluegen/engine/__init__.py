"""Tensor autodiff engine with optimizer, init, clipping and checkpoints."""

from .tensor import (
    Tape,
    Tensor,
    add,
    apply_primitive,
    backward,
    binary_cross_entropy,
    concat,
    constant,
    exp,
    gather_rows,
    matmul,
    mean,
    mul,
    primitive_kinds,
    relu,
    scale,
    sigmoid,
    slice_,
    softmax,
    softmax_cross_entropy,
    sub,
    sum_,
    tanh,
    transpose,
)
from .optim import AdamState, LrSchedule, adam_step, clip_global_norm, xavier_normal_init, zeros_init
from .rng import RngBundle, substream
from .checkpoint import load_checkpoint, save_checkpoint
