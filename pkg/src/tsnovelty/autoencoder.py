"""Adversarial training of the causal innovations auto-encoder.

An encoder maps sliding windows of a normalized series to innovations in
(-1, 1); a decoder maps innovation windows back to the series.  Two critics
estimate Wasserstein distances via their score gaps: one between innovation
blocks and i.i.d. U[-1,1] blocks, one between reconstructed and real blocks.
Critics take n_critic ascent steps per auto-encoder step; all updates are
Adam.  Lipschitz control is a gradient penalty on the critic input at random
interpolates, with the input gradient estimated by central finite
differences so only first-order reverse mode is ever needed.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import nn
from .autodiff import AdamState, ComputationRecord, Tensor, adam_step, backward
from .errors import CheckpointError, ContractViolationError, DegenerateDataError
from .nn import MlpParams, WindowSpec

CHECKPOINT_VERSION = 1

GP_FINITE_DIFF = "finite-difference-penalty"
GP_WEIGHT_CLIP = "weight-clipping"

__all__ = [
    "TrainConfig",
    "Normalization",
    "WiaeModel",
    "normalize_fit",
    "normalize_apply",
    "denormalize",
    "gradient_penalty",
    "critic_update",
    "generator_update",
    "init_model",
    "train",
    "save_checkpoint",
    "load_checkpoint",
]


@dataclass
class TrainConfig:
    """All training hyperparameters."""

    m: int = 20                 # encoder/decoder memory (samples)
    n: int = 50                 # critic block length (samples)
    lr: float = 1e-4            # Adam learning rate
    beta1: float = 0.9
    beta2: float = 0.999
    lambda1: float = 1.0        # penalty coefficient, innovations critic
    lambda2: float = 1.0        # penalty coefficient, reconstruction critic
    mu: float = 1.0             # reconstruction weight in the generator loss
    batch_size: int = 60
    epochs: int = 100
    n_critic: int = 5           # critic steps per auto-encoder step
    seed: int = 0
    gp_mode: str = GP_FINITE_DIFF
    use_recon_critic_in_gen: bool = False
    fd_step: float = 1e-4       # finite-difference step for the penalty
    clip: float = 0.01          # weight bound in weight-clipping mode
    penalty_batch: int | None = None   # interpolates per critic step (None: all)
    lr_decay_epoch: int | None = None  # epoch to switch to lr_decayed
    lr_decayed: float = 2e-5
    gen_lr: float | None = None        # encoder/decoder lr (None: same as lr)

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ContractViolationError("m and n must be >= 1")
        if self.lr <= 0 or self.batch_size < 1 or self.n_critic < 1:
            raise ContractViolationError("lr, batch_size, n_critic must be positive")
        if self.epochs < 0:
            raise ContractViolationError("epochs must be >= 0")
        if self.gp_mode not in (GP_FINITE_DIFF, GP_WEIGHT_CLIP):
            raise ContractViolationError(f"unknown gp_mode '{self.gp_mode}'")
        if self.penalty_batch is not None and self.penalty_batch < 1:
            raise ContractViolationError("penalty_batch must be >= 1")
        if self.gen_lr is not None and self.gen_lr <= 0:
            raise ContractViolationError("gen_lr must be positive")

    @property
    def segment_len(self) -> int:
        """Training segment length: yields n innovations and n reconstructions."""
        return 2 * self.m + self.n - 2


@dataclass
class Normalization:
    """Affine map sending the training data range onto [-0.9, 0.9]."""

    scale: float
    offset: float

    def apply(self, x):
        return (np.asarray(x, dtype=np.float64) - self.offset) * self.scale

    def invert(self, y):
        return np.asarray(y, dtype=np.float64) / self.scale + self.offset


def normalize_fit(series) -> Normalization:
    x = np.asarray(series, dtype=np.float64)
    lo, hi = float(x.min()), float(x.max())
    if hi == lo:
        raise DegenerateDataError("constant series cannot be normalized")
    return Normalization(scale=1.8 / (hi - lo), offset=0.5 * (lo + hi))


def normalize_apply(series, norm: Normalization) -> np.ndarray:
    return norm.apply(series)


def denormalize(series, norm: Normalization) -> np.ndarray:
    return norm.invert(series)


@dataclass
class WiaeModel:
    encoder: MlpParams
    decoder: MlpParams
    critic_nu: MlpParams
    critic_x: MlpParams
    window: WindowSpec
    norm: Normalization
    train_log: list = field(default_factory=list)

    def encode(self, series, normalized: bool = False) -> np.ndarray:
        """Innovations of a raw series (normalizes with the stored map first)."""
        x = np.asarray(series, dtype=np.float64)
        if not normalized:
            x = self.norm.apply(x)
        return nn.encode_series(self.encoder, x)

    def reconstruct(self, series) -> np.ndarray:
        """Denormalized reconstruction; loses the first 2(m-1) samples."""
        nu = self.encode(series)
        y = nn.decode_series(self.decoder, nu)
        return self.norm.invert(y)


def init_model(config: TrainConfig, norm: Normalization,
               rng: np.random.Generator) -> WiaeModel:
    return WiaeModel(
        encoder=nn.build_encoder(config.m, rng),
        decoder=nn.build_decoder(config.m, rng),
        critic_nu=nn.build_critic(config.n, rng),
        critic_x=nn.build_critic(config.n, rng),
        window=WindowSpec(config.m, config.n),
        norm=norm,
    )


# ---------------------------------------------------------------------------
# Batched forward helpers (plain numpy; used where no gradient is needed)
# ---------------------------------------------------------------------------

def _batch_windows(segments: np.ndarray, m: int) -> np.ndarray:
    """(B, L) -> (B*(L-m+1), m) newest-first windows."""
    win = np.lib.stride_tricks.sliding_window_view(segments, m, axis=1)[:, :, ::-1]
    return win.reshape(-1, m)


def _encode_segments(enc: MlpParams, segments: np.ndarray) -> np.ndarray:
    b, length = segments.shape
    out = nn.mlp_forward(enc, _batch_windows(segments, enc.in_dim))
    return out.reshape(b, length - enc.in_dim + 1)


# ---------------------------------------------------------------------------
# Gradient penalty
# ---------------------------------------------------------------------------

def _penalty_on_tape(critic_ts, activations, interp: np.ndarray,
                     rec: ComputationRecord, h: float) -> Tensor:
    """Mean (|grad_input critic| - 1)^2 over a batch of interpolated blocks.

    The input gradient is estimated by central differences: all 2n perturbed
    copies go through the critic as one stacked constant, so the estimate is
    differentiable in the critic weights with a single reverse pass.
    """
    b, n = interp.shape
    stacked = np.tile(interp, (2 * n, 1))
    probes = stacked.reshape(2 * n, b, n)
    idx = np.arange(n)
    probes[idx, :, idx] += h
    probes[n + idx, :, idx] -= h
    scores = nn.mlp_forward_tape(rec.constant(stacked), critic_ts, activations)
    scores = scores.reshape(2 * n, b)
    g = scores.slice_rows(0, n).sub(scores.slice_rows(n, 2 * n))
    g = g.transpose().scale(1.0 / (2.0 * h))           # (b, n) input gradient
    return g.l2norm_rows().add(-1.0).square().mean()


def gradient_penalty(critic: MlpParams, real_block, fake_block,
                     rng: np.random.Generator, h: float = 1e-4) -> Tensor:
    """Penalty at a random interpolate of one real/fake block pair.

    Returns a scalar Tensor; its record has the critic weights as parameter
    leaves, so backward() yields the penalty gradient for the critic.
    """
    real = np.atleast_2d(np.asarray(real_block, dtype=np.float64))
    fake = np.atleast_2d(np.asarray(fake_block, dtype=np.float64))
    if real.shape != fake.shape or real.shape[1] != critic.in_dim:
        raise ContractViolationError("real/fake blocks must both be length n")
    eps = rng.uniform(size=(real.shape[0], 1))
    interp = eps * real + (1.0 - eps) * fake
    rec = ComputationRecord()
    critic_ts = nn.params_on_tape(rec, critic, trainable=True)
    return _penalty_on_tape(critic_ts, critic.activations, interp, rec, h)


# ---------------------------------------------------------------------------
# Updates
# ---------------------------------------------------------------------------

def _check_segments(segments, config) -> np.ndarray:
    segments = np.atleast_2d(np.asarray(segments, dtype=np.float64))
    if segments.shape[1] != config.segment_len:
        raise ContractViolationError(
            f"segments must have length {config.segment_len}, got {segments.shape[1]}")
    return segments


def _apply_params(params: MlpParams, rec, tensors, grads):
    """Collect tape gradients back into the flat array order of an MLP."""
    out = []
    for w_t, b_t in tensors:
        out.append(grads[w_t.nid])
        out.append(grads[b_t.nid])
    return out


def _critic_loss(critic: MlpParams, fake: np.ndarray, real: np.ndarray,
                 lam: float, config: TrainConfig, rng: np.random.Generator):
    """Build D(fake) - D(real) + lam * penalty on a fresh tape."""
    rec = ComputationRecord()
    critic_ts = nn.params_on_tape(rec, critic, trainable=True)
    acts = critic.activations
    d_fake = nn.mlp_forward_tape(rec.constant(fake), critic_ts, acts).mean()
    d_real = nn.mlp_forward_tape(rec.constant(real), critic_ts, acts).mean()
    loss = d_fake.sub(d_real)
    if config.gp_mode == GP_FINITE_DIFF and lam != 0.0:
        eps = rng.uniform(size=(fake.shape[0], 1))
        interp = eps * real + (1.0 - eps) * fake
        if config.penalty_batch is not None \
                and config.penalty_batch < interp.shape[0]:
            keep = rng.choice(interp.shape[0], size=config.penalty_batch,
                              replace=False)
            interp = interp[keep]
        loss = loss.add(_penalty_on_tape(critic_ts, acts, interp, rec,
                                         config.fd_step).scale(lam))
    return rec, critic_ts, loss


def _clip_weights(params: MlpParams, bound: float):
    for w, b in params.layers:
        np.clip(w, -bound, bound, out=w)
        np.clip(b, -bound, bound, out=b)


def critic_update(model: WiaeModel, segments, config: TrainConfig,
                  rng: np.random.Generator,
                  opt_nu: AdamState | None = None,
                  opt_x: AdamState | None = None):
    """One Adam step on each critic; encoder/decoder weights untouched.

    Returns (loss_nu, loss_x), the batch-mean critic losses before the step.
    """
    segments = _check_segments(segments, config)
    m, n = config.m, config.n
    opt_nu = opt_nu if opt_nu is not None else AdamState.for_params(model.critic_nu.flat_arrays())
    opt_x = opt_x if opt_x is not None else AdamState.for_params(model.critic_x.flat_arrays())

    nu_full = _encode_segments(model.encoder, segments)      # (B, m+n-1)
    nu_block = nu_full[:, -n:]
    x_hat = _encode_segments(model.decoder, nu_full)         # (B, n)
    x_block = segments[:, -n:]
    b = segments.shape[0]
    u = rng.uniform(-1.0, 1.0, size=(b, n))

    losses = []
    for critic, fake, real, lam, opt in (
        (model.critic_nu, nu_block, u, config.lambda1, opt_nu),
        (model.critic_x, x_hat, x_block, config.lambda2, opt_x),
    ):
        rec, critic_ts, loss = _critic_loss(critic, fake, real, lam, config, rng)
        grads = backward(rec, loss)
        flat = critic.flat_arrays()
        adam_step(flat, _apply_params(critic, rec, critic_ts, grads), opt,
                  config.lr, config.beta1, config.beta2)
        if config.gp_mode == GP_WEIGHT_CLIP:
            _clip_weights(critic, config.clip)
        losses.append(float(loss.data))
    return losses[0], losses[1]


def generator_update(model: WiaeModel, segments, config: TrainConfig,
                     opt_enc: AdamState | None = None,
                     opt_dec: AdamState | None = None):
    """One Adam step each on the encoder and decoder; critics untouched.

    The encoder minimizes -D_nu(innovations) + mu * recon; the decoder sees
    only the mu-weighted reconstruction term (plus -D_x(recon) when
    use_recon_critic_in_gen is set).  Returns the scalar loss.
    """
    segments = _check_segments(segments, config)
    m, n = config.m, config.n
    opt_enc = opt_enc if opt_enc is not None else AdamState.for_params(model.encoder.flat_arrays())
    opt_dec = opt_dec if opt_dec is not None else AdamState.for_params(model.decoder.flat_arrays())

    b = segments.shape[0]
    inner = config.segment_len - m + 1                       # = m + n - 1
    rec = ComputationRecord()
    enc_ts = nn.params_on_tape(rec, model.encoder, trainable=True)
    dec_ts = nn.params_on_tape(rec, model.decoder, trainable=True)
    cnu_ts = nn.params_on_tape(rec, model.critic_nu, trainable=False)

    x_windows = rec.constant(_batch_windows(segments, m))
    nu = nn.mlp_forward_tape(x_windows, enc_ts, model.encoder.activations)
    nu = nu.reshape(b, inner)
    x_hat = nn.mlp_forward_tape(nu.unfold(m), dec_ts, model.decoder.activations)
    x_hat = x_hat.reshape(b, n)

    d_nu = nn.mlp_forward_tape(nu.slice_cols(inner - n, inner), cnu_ts,
                               model.critic_nu.activations).mean()
    recon = x_hat.sub(rec.constant(segments[:, -n:])).l2norm_rows().mean()
    loss = d_nu.scale(-1.0).add(recon.scale(config.mu))
    if config.use_recon_critic_in_gen:
        cx_ts = nn.params_on_tape(rec, model.critic_x, trainable=False)
        d_x = nn.mlp_forward_tape(x_hat, cx_ts, model.critic_x.activations).mean()
        loss = loss.add(d_x.scale(-1.0))

    lr = config.lr if config.gen_lr is None else config.gen_lr
    grads = backward(rec, loss)
    adam_step(model.encoder.flat_arrays(),
              _apply_params(model.encoder, rec, enc_ts, grads), opt_enc,
              lr, config.beta1, config.beta2)
    adam_step(model.decoder.flat_arrays(),
              _apply_params(model.decoder, rec, dec_ts, grads), opt_dec,
              lr, config.beta1, config.beta2)
    return float(loss.data)


def _sample_segments(xs: np.ndarray, seg_len: int, b: int,
                     rng: np.random.Generator) -> np.ndarray:
    starts = rng.integers(0, xs.size - seg_len + 1, size=b)
    return np.stack([xs[s:s + seg_len] for s in starts])


def train(series, config: TrainConfig, callback=None,
          warm_start: WiaeModel | None = None) -> WiaeModel:
    """Full adversarial training loop; deterministic given the arguments.

    Each epoch runs n_critic critic updates followed by one auto-encoder
    update, on freshly sampled random batches of segments.  An optional
    callback(model, epoch) runs after each epoch; returning a truthy value
    stops training early (the callback must not mutate the model).

    warm_start resumes from an existing model: its weights and normalization
    are copied (the input model is not mutated) and Adam moments start
    fresh.  This supports phased schedules, e.g. dropping mu or gen_lr for
    a final calibration phase.
    """
    xs_raw = np.asarray(series, dtype=np.float64)
    seg_len = config.segment_len
    if xs_raw.size < seg_len + config.batch_size:
        raise DegenerateDataError(
            f"need at least {seg_len + config.batch_size} samples, got {xs_raw.size}")
    if warm_start is not None and (warm_start.window.m != config.m
                                   or warm_start.window.n != config.n):
        raise ContractViolationError(
            f"warm-start window ({warm_start.window.m}, {warm_start.window.n}) "
            f"does not match config ({config.m}, {config.n})")
    norm = warm_start.norm if warm_start is not None else normalize_fit(xs_raw)
    xs = norm.apply(xs_raw)

    seeds = np.random.SeedSequence(config.seed).spawn(3)
    rng_init = np.random.default_rng(seeds[0])
    rng_batch = np.random.default_rng(seeds[1])
    rng_latent = np.random.default_rng(seeds[2])

    model = init_model(config, norm, rng_init)
    if warm_start is not None:
        for dst, src in ((model.encoder, warm_start.encoder),
                         (model.decoder, warm_start.decoder),
                         (model.critic_nu, warm_start.critic_nu),
                         (model.critic_x, warm_start.critic_x)):
            for (wd, bd), (ws, bs) in zip(dst.layers, src.layers):
                wd[...] = ws
                bd[...] = bs
    opt = {
        "enc": AdamState.for_params(model.encoder.flat_arrays()),
        "dec": AdamState.for_params(model.decoder.flat_arrays()),
        "cnu": AdamState.for_params(model.critic_nu.flat_arrays()),
        "cx": AdamState.for_params(model.critic_x.flat_arrays()),
    }

    for epoch in range(config.epochs):
        cfg = config
        if config.lr_decay_epoch is not None and epoch >= config.lr_decay_epoch:
            cfg = replace(config, lr=config.lr_decayed)
        loss_nu = loss_x = 0.0
        for _ in range(cfg.n_critic):
            batch = _sample_segments(xs, seg_len, cfg.batch_size, rng_batch)
            loss_nu, loss_x = critic_update(model, batch, cfg, rng_latent,
                                            opt["cnu"], opt["cx"])
        batch = _sample_segments(xs, seg_len, cfg.batch_size, rng_batch)
        gen_loss = generator_update(model, batch, cfg, opt["enc"], opt["dec"])
        model.train_log.append({
            "epoch": epoch,
            "critic_nu_loss": loss_nu,
            "critic_x_loss": loss_x,
            "gen_loss": gen_loss,
        })
        if callback is not None and callback(model, epoch):
            break
    return model


# ---------------------------------------------------------------------------
# Checkpoints: versioned JSON, floats at full round-trip precision
# ---------------------------------------------------------------------------

def _mlp_to_json(params: MlpParams) -> dict:
    return {
        "activations": list(params.activations),
        "layers": [{"w": w.tolist(), "b": b.tolist()} for w, b in params.layers],
    }


def _mlp_from_json(obj: dict) -> MlpParams:
    layers = [(np.asarray(l["w"], dtype=np.float64),
               np.asarray(l["b"], dtype=np.float64)) for l in obj["layers"]]
    return MlpParams(layers, list(obj["activations"]))


def save_checkpoint(model: WiaeModel, path, config: TrainConfig | None = None):
    doc = {
        "format_version": CHECKPOINT_VERSION,
        "config": asdict(config) if config is not None else None,
        "window": {"m": model.window.m, "n": model.window.n},
        "norm": {"scale": model.norm.scale, "offset": model.norm.offset},
        "weights": {
            "encoder": _mlp_to_json(model.encoder),
            "decoder": _mlp_to_json(model.decoder),
            "critic_nu": _mlp_to_json(model.critic_nu),
            "critic_x": _mlp_to_json(model.critic_x),
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_checkpoint(path):
    """Returns (model, config-or-None)."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    version = doc.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {version!r} (expected {CHECKPOINT_VERSION})")
    try:
        weights = doc["weights"]
        model = WiaeModel(
            encoder=_mlp_from_json(weights["encoder"]),
            decoder=_mlp_from_json(weights["decoder"]),
            critic_nu=_mlp_from_json(weights["critic_nu"]),
            critic_x=_mlp_from_json(weights["critic_x"]),
            window=WindowSpec(doc["window"]["m"], doc["window"]["n"]),
            norm=Normalization(doc["norm"]["scale"], doc["norm"]["offset"]),
        )
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"malformed checkpoint {path}: {exc}") from exc
    config = TrainConfig(**doc["config"]) if doc.get("config") else None
    return model, config
