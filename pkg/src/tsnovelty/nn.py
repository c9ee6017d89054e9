"""Feed-forward networks and causal sliding-window evaluation.

The encoder and decoder are MLPs applied to windows of the last m samples
(newest first), so causality holds by construction: nothing after time t can
reach the window ending at t.  Critics score length-n blocks with a linear
output head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import ComputationRecord, Tensor
from .errors import ContractViolationError

HIDDEN_SIZES = (100, 50, 25)

__all__ = [
    "MlpParams",
    "WindowSpec",
    "init_mlp",
    "build_encoder",
    "build_decoder",
    "build_critic",
    "mlp_forward",
    "mlp_forward_tape",
    "encode_window",
    "decode_window",
    "encode_block",
    "encode_series",
    "decode_series",
    "critic_score",
]


@dataclass
class MlpParams:
    """Ordered (weight, bias) pairs plus a per-layer activation tag."""

    layers: list[tuple[np.ndarray, np.ndarray]]
    activations: list[str]

    def __post_init__(self):
        if len(self.layers) != len(self.activations):
            raise ContractViolationError("one activation tag per layer required")
        for (w0, b0), (w1, _) in zip(self.layers, self.layers[1:]):
            if w0.shape[1] != w1.shape[0]:
                raise ContractViolationError("consecutive layer dimensions must chain")
        for w, b in self.layers:
            if b.shape != (w.shape[1],):
                raise ContractViolationError("bias length must match layer width")
        for a in self.activations:
            if a not in ("tanh", "linear"):
                raise ContractViolationError(f"unknown activation '{a}'")

    @property
    def in_dim(self) -> int:
        return self.layers[0][0].shape[0]

    @property
    def out_dim(self) -> int:
        return self.layers[-1][0].shape[1]

    def copy(self) -> "MlpParams":
        return MlpParams([(w.copy(), b.copy()) for w, b in self.layers],
                         list(self.activations))

    def flat_arrays(self):
        """Weights and biases interleaved, in layer order."""
        out = []
        for w, b in self.layers:
            out.append(w)
            out.append(b)
        return out


@dataclass
class WindowSpec:
    """m: encoder/decoder memory; n: critic block length."""

    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ContractViolationError("window lengths must be >= 1")


def init_mlp(sizes, output_activation: str, rng: np.random.Generator) -> MlpParams:
    """Glorot-uniform init, tanh hidden layers, chosen output activation."""
    layers = []
    acts = []
    for i, (d_in, d_out) in enumerate(zip(sizes, sizes[1:])):
        bound = np.sqrt(6.0 / (d_in + d_out))
        w = rng.uniform(-bound, bound, size=(d_in, d_out))
        b = np.zeros(d_out)
        layers.append((w, b))
        acts.append("tanh" if i < len(sizes) - 2 else output_activation)
    return MlpParams(layers, acts)


def build_encoder(m: int, rng: np.random.Generator) -> MlpParams:
    return init_mlp([m, *HIDDEN_SIZES, 1], "tanh", rng)


def build_decoder(m: int, rng: np.random.Generator) -> MlpParams:
    return init_mlp([m, *HIDDEN_SIZES, 1], "tanh", rng)


def build_critic(n: int, rng: np.random.Generator) -> MlpParams:
    return init_mlp([n, *HIDDEN_SIZES, 1], "linear", rng)


def mlp_forward(params: MlpParams, x: np.ndarray) -> np.ndarray:
    """Plain numpy forward pass; x has shape (batch, in_dim)."""
    h = x
    for (w, b), act in zip(params.layers, params.activations):
        h = h @ w + b
        if act == "tanh":
            h = np.tanh(h)
    return h

def mlp_forward_tape(x: Tensor, param_tensors, activations) -> Tensor:
    """Forward pass on a ComputationRecord; param_tensors is [(w, b), ...]."""
    h = x
    for (w, b), act in zip(param_tensors, activations):
        h = h.affine(w, b)
        if act == "tanh":
            h = h.tanh()
    return h


def params_on_tape(rec: ComputationRecord, params: MlpParams, trainable: bool):
    """Put every layer of an MLP on a record, as params or constants."""
    mk = rec.param if trainable else rec.constant
    return [(mk(w), mk(b)) for w, b in params.layers]


def _window_matrix(segment: np.ndarray, m: int) -> np.ndarray:
    """All length-m windows of a 1-D segment, newest sample first."""
    win = np.lib.stride_tricks.sliding_window_view(segment, m)
    return win[:, ::-1]


def encode_window(enc: MlpParams, window) -> float:
    """Innovation for one window ordered (x_t, ..., x_{t-m+1})."""
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (enc.in_dim,):
        raise ContractViolationError(
            f"window length {window.shape} != encoder memory {enc.in_dim}")
    return float(mlp_forward(enc, window[None, :])[0, 0])


def decode_window(dec: MlpParams, window) -> float:
    """Reconstruction for one window of innovations (nu_t, ..., nu_{t-m+1})."""
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (dec.in_dim,):
        raise ContractViolationError(
            f"window length {window.shape} != decoder memory {dec.in_dim}")
    return float(mlp_forward(dec, window[None, :])[0, 0])


def encode_block(enc: MlpParams, segment) -> np.ndarray:
    """Innovations for every window of a length-(m+n-1) segment.

    Output i comes from the window ending at position m-1+i; with segment
    length m+n-1 this yields exactly n values.
    """
    segment = np.asarray(segment, dtype=np.float64)
    m = enc.in_dim
    if segment.ndim != 1 or segment.size < m:
        raise ContractViolationError(
            f"segment must be 1-D with at least {m} samples, got {segment.shape}")
    return mlp_forward(enc, _window_matrix(segment, m))[:, 0]


def encode_series(enc: MlpParams, series) -> np.ndarray:
    """Alias of encode_block for arbitrary-length series (streaming encode)."""
    return encode_block(enc, series)


def decode_series(dec: MlpParams, innovations) -> np.ndarray:
    """Reconstruction samples from every full window of an innovations series."""
    innovations = np.asarray(innovations, dtype=np.float64)
    m = dec.in_dim
    if innovations.ndim != 1 or innovations.size < m:
        raise ContractViolationError(
            f"innovations must be 1-D with at least {m} samples, got {innovations.shape}")
    return mlp_forward(dec, _window_matrix(innovations, m))[:, 0]


def critic_score(critic: MlpParams, block) -> float:
    """Unbounded score for one length-n block."""
    block = np.asarray(block, dtype=np.float64)
    if block.shape != (critic.in_dim,):
        raise ContractViolationError(
            f"block length {block.shape} != critic dimension {critic.in_dim}")
    return float(mlp_forward(critic, block[None, :])[0, 0])
