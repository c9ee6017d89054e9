"""Command-line front end: generate | train | detect | eval.

Exit codes: 0 success, 2 usage error, 3 I/O error, 4 contract/data error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import datagen, evaluate
from .autoencoder import (
    TrainConfig,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .detect import DetectConfig, score_stream, scores_from_jsonl, scores_to_jsonl
from .errors import CheckpointError, ContractViolationError, DegenerateDataError, TsNoveltyError
from .stats import runs_up_down_test

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_CONTRACT = 4

# Per-case training presets: (lambda1, lambda2, mu, seed).
CASE_PRESETS = {
    "mc": (1.0, 1.0, 1.0, 140),
    "ar": (1.0, 1.6, 1.0, 18),
    "ma": (1.0, 1.6, 1.0, 37),
    "utk": (1.0, 1.2, 2.9, 80),
    "bess": (1.0, 1.0, 1.0, 58),
}


@dataclass
class ExperimentConfig:
    """Everything one CLI invocation needs, resolved from file + flags."""

    train: TrainConfig
    detect: DetectConfig | None = None
    data_path: str | None = None
    out_path: str | None = None


def _train_config_from_args(args) -> TrainConfig:
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_cfg = json.load(fh)
        known = {f.name for f in fields(TrainConfig)}
        unknown = set(file_cfg) - known
        if unknown:
            raise ContractViolationError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    if getattr(args, "case", None):
        lam1, lam2, mu, seed = CASE_PRESETS[args.case]
        cfg.setdefault("lambda1", lam1)
        cfg.setdefault("lambda2", lam2)
        cfg.setdefault("mu", mu)
        cfg.setdefault("seed", seed)
    # explicit flags override both the file and the case preset
    for name in ("m", "n", "lr", "beta1", "beta2", "lambda1", "lambda2", "mu",
                 "batch_size", "epochs", "n_critic", "seed", "gp_mode",
                 "penalty_batch", "lr_decay_epoch", "lr_decayed", "gen_lr"):
        val = getattr(args, name, None)
        if val is not None:
            cfg[name] = val
    if getattr(args, "use_recon_critic_in_gen", False):
        cfg["use_recon_critic_in_gen"] = True
    return TrainConfig(**cfg)


def _disjoint_blocks(x: np.ndarray, n: int) -> np.ndarray:
    k = x.size // n
    if k == 0:
        raise DegenerateDataError(f"series too short for blocks of {n}")
    return x[:k * n].reshape(k, n)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.kind == "ma":
        series = datagen.gen_ma(args.len, seed=args.seed, theta=args.theta, law=args.law)
    elif args.kind == "lar":
        phi = [float(p) for p in args.phi.split(",")]
        series = datagen.gen_lar(args.len, phi=phi, seed=args.seed, law=args.law)
    else:
        p = np.array([[args.p00, 1.0 - args.p00], [1.0 - args.p11, args.p11]])
        series = datagen.gen_mc(args.len, p, seed=args.seed)
    if args.inject_gmm:
        series = datagen.inject_gmm_noise(series, seed=args.gmm_seed)
    datagen.save_csv(series, args.out)
    print(json.dumps({
        "rows": int(series.size),
        "mean": float(series.mean()),
        "std": float(series.std()),
        "min": float(series.min()),
        "max": float(series.max()),
        "out": args.out,
    }, sort_keys=True))
    return EXIT_OK


def cmd_train(args) -> int:
    config = _train_config_from_args(args)
    series = datagen.load_csv(args.data).values
    warm = load_checkpoint(args.warm_start)[0] if args.warm_start else None
    model = train(series, config, warm_start=warm)
    save_checkpoint(model, args.out, config)
    if args.loss_log:
        with open(args.loss_log, "w") as fh:
            fh.write("epoch,critic_nu_loss,critic_x_loss,gen_loss\n")
            for row in model.train_log:
                fh.write(f"{row['epoch']},{row['critic_nu_loss']!r},"
                         f"{row['critic_x_loss']!r},{row['gen_loss']!r}\n")
    final = model.train_log[-1] if model.train_log else {}
    print(json.dumps({"checkpoint": args.out, "epochs": config.epochs,
                      "final_losses": final}, sort_keys=True))
    return EXIT_OK


def cmd_detect(args) -> int:
    model, _ = load_checkpoint(args.checkpoint)
    series = datagen.load_csv(args.data).values
    lo = model.norm.offset - 0.5 * 1.8 / model.norm.scale
    hi = model.norm.offset + 0.5 * 1.8 / model.norm.scale
    frac_outside = float(np.mean((series < lo) | (series > hi)))
    if frac_outside > 0.25:
        print(f"warning: {frac_outside:.0%} of samples outside the training "
              "normalization range; checkpoint/data domains may not match",
              file=sys.stderr)
    cfg = DetectConfig(block_len=args.block, stride=args.stride,
                       p_threshold=args.p_threshold, neyman_order=args.order)
    scores = score_stream(model, series, cfg)
    scores_to_jsonl(scores, args.out)
    rejected = sum(1 for s in scores if s.decision == "novel")
    print(json.dumps({
        "blocks": len(scores),
        "rejected": rejected,
        "rejection_rate": rejected / len(scores) if scores else 0.0,
        "out": args.out,
    }, sort_keys=True))
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.mode == "roc":
        if not args.scores_h0 or not args.scores_h1:
            raise ContractViolationError("roc mode needs --scores-h0 and --scores-h1")
        h0 = [s.p_value for s in scores_from_jsonl(args.scores_h0)]
        h1 = [s.p_value for s in scores_from_jsonl(args.scores_h1)]
        report = evaluate.roc_points(h0, h1)
        evaluate.save_roc(report, args.out_csv, args.out_summary,
                          n_h0=len(h0), n_h1=len(h1))
        print(json.dumps({"auroc": report.auroc, "n_h0": len(h0), "n_h1": len(h1)},
                         sort_keys=True))
        return EXIT_OK

    model, _ = load_checkpoint(args.checkpoint)
    series = datagen.load_csv(args.data).values
    n = model.window.n
    rng = np.random.default_rng(args.seed)
    if args.mode == "representation":
        nu = model.encode(series)
        runs = runs_up_down_test(nu)
        blocks = _disjoint_blocks(nu, n)
        uniform = rng.uniform(-1.0, 1.0, size=blocks.shape)
        w = evaluate.wasserstein_critic(blocks, uniform, repeats=args.w_repeats,
                                        steps=args.w_steps, seed=args.seed)
        w_marg = evaluate.wasserstein_uniform_exact(nu)
        print(json.dumps({"p": runs.p_value, "W_mean": w.mean, "W_std": w.std,
                          "W_marginal": w_marg}, sort_keys=True))
        return EXIT_OK

    # reconstruction: Wasserstein distance between reconstructed and real blocks
    recon = model.reconstruct(series)
    real = series[series.size - recon.size:]
    w = evaluate.wasserstein_critic(_disjoint_blocks(recon, n),
                                    _disjoint_blocks(real, n),
                                    repeats=args.w_repeats, steps=args.w_steps,
                                    seed=args.seed)
    print(json.dumps({"W_mean": w.mean, "W_std": w.std}, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsnovelty",
        description="Train a causal innovations auto-encoder on normal data "
                    "and detect novelty in streams via goodness-of-fit tests.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic series as CSV")
    g.add_argument("--kind", choices=["ma", "lar", "mc"], required=True)
    g.add_argument("--len", type=int, required=True, help="number of samples")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="series.csv")
    g.add_argument("--theta", type=float, default=2.5, help="MA lag-1 coefficient")
    g.add_argument("--phi", default="0.5",
                   help="comma-separated AR coefficients (default 0.5)")
    g.add_argument("--law", choices=list(datagen.INNOVATION_LAWS), default="U[-1,1]")
    g.add_argument("--p00", type=float, default=0.6, help="MC stay probability, state 0")
    g.add_argument("--p11", type=float, default=0.6, help="MC stay probability, state 1")
    g.add_argument("--inject-gmm", action="store_true",
                   help="add Gaussian-mixture noise (default components)")
    g.add_argument("--gmm-seed", type=int, default=0)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train the auto-encoder on a CSV series")
    t.add_argument("--data", required=True)
    t.add_argument("--out", default="checkpoint.json")
    t.add_argument("--loss-log", default=None, help="optional per-epoch loss CSV")
    t.add_argument("--config", default=None, help="JSON file mirroring the flags below")
    t.add_argument("--case", choices=sorted(CASE_PRESETS),
                   help="per-case preset for lambda1/lambda2/mu/seed")
    for name, typ in (("m", int), ("n", int), ("lr", float), ("beta1", float),
                      ("beta2", float), ("lambda1", float), ("lambda2", float),
                      ("mu", float), ("batch-size", int), ("epochs", int),
                      ("n-critic", int), ("seed", int), ("penalty-batch", int),
                      ("lr-decay-epoch", int), ("lr-decayed", float),
                      ("gen-lr", float)):
        t.add_argument(f"--{name}", type=typ, default=None, dest=name.replace("-", "_"))
    t.add_argument("--gp-mode", choices=["finite-difference-penalty", "weight-clipping"],
                   default=None, dest="gp_mode")
    t.add_argument("--use-recon-critic-in-gen", action="store_true")
    t.add_argument("--warm-start", default=None,
                   help="checkpoint to resume from (fresh optimizer state)")
    t.set_defaults(func=cmd_train)

    d = sub.add_parser("detect", help="score a CSV series against a checkpoint")
    d.add_argument("--checkpoint", required=True)
    d.add_argument("--data", required=True)
    d.add_argument("--out", default="scores.jsonl")
    d.add_argument("--block", type=int, default=500, help="innovations per test block")
    d.add_argument("--stride", type=int, default=None)
    d.add_argument("--p-threshold", type=float, default=0.05)
    d.add_argument("--order", type=int, default=4)
    d.set_defaults(func=cmd_detect)

    e = sub.add_parser("eval", help="ROC/AUROC or representation-quality reports")
    e.add_argument("--mode", choices=["roc", "representation", "reconstruction"],
                   required=True)
    e.add_argument("--scores-h0", default=None, help="JSONL scores on normal data")
    e.add_argument("--scores-h1", default=None, help="JSONL scores on novel data")
    e.add_argument("--out-csv", default="roc.csv")
    e.add_argument("--out-summary", default=None)
    e.add_argument("--checkpoint", default=None)
    e.add_argument("--data", default=None)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--w-repeats", type=int, default=5)
    e.add_argument("--w-steps", type=int, default=2000)
    e.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, PermissionError, IsADirectoryError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TsNoveltyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
