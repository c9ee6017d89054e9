"""Representation- and detector-quality metrics: critic-based Wasserstein
distance estimates and ROC/AUROC curves."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import nn
from .autodiff import AdamState, ComputationRecord, adam_step, backward
from .autoencoder import TrainConfig, _critic_loss, _apply_params
from .errors import ContractViolationError

__all__ = [
    "WassersteinEstimate",
    "RocReport",
    "wasserstein_critic",
    "wasserstein_uniform_exact",
    "roc_points",
    "auroc_bruteforce",
    "save_roc",
]


@dataclass
class WassersteinEstimate:
    mean: float
    std: float
    repeats: int


@dataclass
class RocReport:
    points: list            # ordered (fpr, tpr) pairs from (0,0) to (1,1)
    auroc: float


def wasserstein_critic(samples_a, samples_b, repeats: int = 5,
                       steps: int = 2000, batch_size: int = 60,
                       lr: float = 1e-4, gp_coef: float = 10.0,
                       seed: int = 0) -> WassersteinEstimate:
    """Wasserstein-1 distance between two block distributions via the dual:
    a fresh critic is trained to maximize its mean score gap (with a gradient
    penalty keeping it near 1-Lipschitz); the final absolute gap is the
    estimate.  The absolute value makes the estimate symmetric in its
    arguments: the penalty can lock the critic into the sign of its random
    initial slope, and the mirrored critic witnesses the same distance.
    """
    a = np.atleast_2d(np.asarray(samples_a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(samples_b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ContractViolationError("both sample sets must be nonempty")
    if a.shape[1] != b.shape[1]:
        raise ContractViolationError("block lengths must match")
    if repeats < 1:
        raise ContractViolationError("repeats must be >= 1")
    n = a.shape[1]
    cfg = TrainConfig(m=1, n=n, lr=lr, lambda2=gp_coef, batch_size=batch_size)

    gaps = []
    for r in range(repeats):
        rng = np.random.default_rng(np.random.SeedSequence([seed, r]))
        critic = nn.build_critic(n, rng)
        opt = AdamState.for_params(critic.flat_arrays())
        for _ in range(steps):
            batch_a = a[rng.integers(0, a.shape[0], size=batch_size)]
            batch_b = b[rng.integers(0, b.shape[0], size=batch_size)]
            # minimizing D(b) - D(a) maximizes the gap E[D(a)] - E[D(b)]
            rec, critic_ts, loss = _critic_loss(critic, batch_b, batch_a,
                                                gp_coef, cfg, rng)
            grads = backward(rec, loss)
            adam_step(critic.flat_arrays(),
                      _apply_params(critic, rec, critic_ts, grads), opt, lr)
        gap = float(nn.mlp_forward(critic, a).mean() - nn.mlp_forward(critic, b).mean())
        gaps.append(abs(gap))
    gaps = np.asarray(gaps)
    return WassersteinEstimate(mean=float(gaps.mean()),
                               std=float(gaps.std()), repeats=repeats)


def wasserstein_uniform_exact(samples, lo: float = -1.0,
                              hi: float = 1.0) -> float:
    """Exact Wasserstein-1 distance between the empirical law of scalar
    samples and the continuous uniform on [lo, hi].

    In one dimension W1 is the integral of |Q_emp(u) - Q_unif(u)| over the
    quantile level u.  Q_emp is the i-th order statistic on each interval
    ((i-1)/k, i/k]; Q_unif is linear; the integrand is piecewise linear, so
    each interval integrates in closed form (splitting at sign changes).
    """
    x = np.sort(np.asarray(samples, dtype=np.float64).ravel())
    if x.size == 0:
        raise ContractViolationError("sample set must be nonempty")
    if not hi > lo:
        raise ContractViolationError("need hi > lo")
    k = x.size
    width = 1.0 / k
    edges = np.arange(k + 1) / k
    d_l = x - (lo + (hi - lo) * edges[:-1])    # gap at the interval's left
    d_r = x - (lo + (hi - lo) * edges[1:])     # and right endpoint
    same = d_l * d_r >= 0.0
    area = np.where(same,
                    0.5 * (np.abs(d_l) + np.abs(d_r)) * width,
                    0.5 * (d_l * d_l + d_r * d_r) * width
                    / np.maximum(np.abs(d_l - d_r), 1e-300))
    return float(area.sum())


def roc_points(scores_h0, scores_h1) -> RocReport:
    """ROC over p-values, lower p-value = more novel.

    Sweeps the rejection threshold over every distinct p-value (ties grouped
    into single sweep steps); fpr is the fraction of normal blocks rejected,
    tpr the fraction of novel blocks rejected.  AUROC is the trapezoidal
    area of the resulting curve.
    """
    h0 = np.asarray(scores_h0, dtype=np.float64)
    h1 = np.asarray(scores_h1, dtype=np.float64)
    if h0.size == 0 or h1.size == 0:
        raise ContractViolationError("both score sets must be nonempty")
    points = [(0.0, 0.0)]
    for v in np.unique(np.concatenate([h0, h1])):
        points.append((float(np.mean(h0 <= v)), float(np.mean(h1 <= v))))
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
    auroc = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        auroc += (x1 - x0) * 0.5 * (y0 + y1)
    return RocReport(points=points, auroc=auroc)


def auroc_bruteforce(scores_h0, scores_h1) -> float:
    """Exact pairwise AUROC: mean of 1[h1 more novel] + 0.5 * 1[tie]."""
    h0 = np.asarray(scores_h0, dtype=np.float64)
    h1 = np.asarray(scores_h1, dtype=np.float64)
    if h0.size == 0 or h1.size == 0:
        raise ContractViolationError("both score sets must be nonempty")
    wins = (h1[:, None] < h0[None, :]).sum()
    ties = (h1[:, None] == h0[None, :]).sum()
    return float((wins + 0.5 * ties) / (h0.size * h1.size))


def save_roc(report: RocReport, csv_path, summary_path=None,
             n_h0: int | None = None, n_h1: int | None = None):
    """CSV of fpr,tpr rows plus an optional JSON summary."""
    with open(csv_path, "w") as fh:
        fh.write("fpr,tpr\n")
        for fpr, tpr in report.points:
            fh.write(f"{fpr!r},{tpr!r}\n")
    if summary_path is not None:
        with open(summary_path, "w") as fh:
            json.dump({"auroc": report.auroc, "n_h0": n_h0, "n_h1": n_h1},
                      fh, sort_keys=True)
            fh.write("\n")
