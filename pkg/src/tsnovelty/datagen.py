"""Synthetic stationary processes, novelty injection, and CSV series I/O."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError, DegenerateDataError

__all__ = [
    "ProcessSpec",
    "LabeledSeries",
    "gen_ma",
    "gen_lar",
    "gen_mc",
    "inject_gmm_noise",
    "load_csv",
    "save_csv",
]

INNOVATION_LAWS = ("U[-1,1]", "U[-1.5,1.5]", "N(0,1)")


@dataclass
class ProcessSpec:
    """Declarative description of a synthetic process."""

    kind: str                        # "MA" | "LAR" | "MC" | "file"
    parameters: list = field(default_factory=list)
    law: str = "U[-1,1]"
    seed: int = 0


@dataclass
class LabeledSeries:
    values: np.ndarray
    labels: list | None = None
    meta: ProcessSpec | None = None


def _draw_innovations(rng: np.random.Generator, law: str, size: int) -> np.ndarray:
    if law == "U[-1,1]":
        return rng.uniform(-1.0, 1.0, size)
    if law == "U[-1.5,1.5]":
        return rng.uniform(-1.5, 1.5, size)
    if law == "N(0,1)":
        return rng.standard_normal(size)
    raise ContractViolationError(f"unknown innovation law '{law}'")


def gen_ma(length: int, seed: int = 0, theta: float = 2.5,
           law: str = "U[-1,1]") -> np.ndarray:
    """First-order moving average x_t = nu_t + theta * nu_{t-1}."""
    if length < 2:
        raise ContractViolationError("length must be >= 2")
    rng = np.random.default_rng(seed)
    burn = 1
    nu = _draw_innovations(rng, law, length + burn)
    x = nu[1:] + theta * nu[:-1]
    return x[:length]


def gen_lar(length: int, phi=0.5, seed: int = 0, law: str = "U[-1,1]",
            burn_in: int = 1000) -> np.ndarray:
    """Linear autoregression x_t = sum_k phi_k x_{t-k} + nu_t.

    phi may be a scalar (order 1) or a coefficient list; the roots of the
    characteristic polynomial must lie inside the stability region.
    """
    coeffs = np.atleast_1d(np.asarray(phi, dtype=np.float64))
    if not np.all(np.isfinite(coeffs)):
        raise ContractViolationError("AR coefficients must be finite")
    # roots of 1 - phi_1 z - ... - phi_p z^p must lie outside the unit circle
    poly = np.concatenate([[1.0], -coeffs])
    roots = np.roots(poly[::-1])
    if roots.size and np.any(np.abs(roots) <= 1.0):
        raise ContractViolationError("unstable AR coefficients")
    rng = np.random.default_rng(seed)
    p = coeffs.size
    total = length + burn_in
    nu = _draw_innovations(rng, law, total)
    x = np.zeros(total)
    for t in range(total):
        acc = nu[t]
        for k in range(p):
            if t - k - 1 >= 0:
                acc += coeffs[k] * x[t - k - 1]
        x[t] = acc
    return x[burn_in:]


def _validate_transition_matrix(p: np.ndarray):
    if p.shape != (2, 2):
        raise ContractViolationError("transition matrix must be 2x2")
    if np.any(p < 0):
        raise ContractViolationError("transition probabilities must be nonnegative")
    if np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-12):
        raise ContractViolationError("transition matrix rows must sum to 1")


def gen_mc(length: int, p, seed: int = 0) -> np.ndarray:
    """Two-state Markov chain over {0.0, 1.0}, started from the stationary law."""
    p = np.asarray(p, dtype=np.float64)
    _validate_transition_matrix(p)
    rng = np.random.default_rng(seed)
    # stationary distribution of a 2x2 chain
    denom = p[0, 1] + p[1, 0]
    pi0 = 0.5 if denom == 0.0 else p[1, 0] / denom
    x = np.empty(length)
    state = 0 if rng.uniform() < pi0 else 1
    u = rng.uniform(size=length)
    for t in range(length):
        x[t] = float(state)
        state = 0 if u[t] < p[state, 0] else 1
    return x


def inject_gmm_noise(series, components=None, seed: int = 0) -> np.ndarray:
    """Add i.i.d. Gaussian-mixture noise elementwise.

    components is a list of (weight, mean, std); the default mixture is a
    symmetric two-component one scaled by the input's sample std.  These
    defaults are artifact choices, configurable by the caller.
    """
    x = np.asarray(series, dtype=np.float64)
    if components is None:
        s = float(np.std(x))
        components = [(0.5, -0.5 * s, 0.2 * s), (0.5, 0.5 * s, 0.2 * s)]
    weights = np.array([w for w, _, _ in components], dtype=np.float64)
    if abs(weights.sum() - 1.0) > 1e-9:
        raise ContractViolationError("mixture weights must sum to 1")
    means = np.array([m for _, m, _ in components])
    stds = np.array([s for _, _, s in components])
    if np.any(stds < 0):
        raise ContractViolationError("mixture stds must be nonnegative")
    rng = np.random.default_rng(seed)
    comp = rng.choice(len(components), size=x.size, p=weights)
    noise = means[comp] + stds[comp] * rng.standard_normal(x.size)
    return x + noise.reshape(x.shape)


# ---------------------------------------------------------------------------
# CSV I/O: one `value[,label]` row per sample, optional header
# ---------------------------------------------------------------------------

def save_csv(series, path, labels=None):
    """Write a series (and optional per-row labels) with full float precision."""
    x = np.asarray(series, dtype=np.float64)
    if labels is not None and len(labels) != x.size:
        raise ContractViolationError("labels length must match series length")
    with open(path, "w", newline="\n") as fh:
        for i, v in enumerate(x):
            if labels is None:
                fh.write(f"{float(v)!r}\n")
            else:
                fh.write(f"{float(v)!r},{labels[i]}\n")


def load_csv(path) -> LabeledSeries:
    """Read a `value[,label]` series; a non-numeric first row is skipped."""
    values = []
    labels = []
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or all(not row for row in rows):
        raise DegenerateDataError(f"empty CSV file: {path}")
    start = 0
    first = next(row for row in rows if row)
    try:
        float(first[0])
    except ValueError:
        start = rows.index(first) + 1
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if not row:
            continue
        try:
            values.append(float(row[0]))
        except ValueError as exc:
            raise DegenerateDataError(f"unparsable value at row {lineno}: {row!r}") from exc
        if len(row) > 1:
            labels.append(row[1])
    if not values:
        raise DegenerateDataError(f"no data rows in {path}")
    if labels and len(labels) != len(values):
        raise DegenerateDataError("label column present on only some rows")
    return LabeledSeries(values=np.asarray(values),
                         labels=labels if labels else None,
                         meta=ProcessSpec(kind="file"))
