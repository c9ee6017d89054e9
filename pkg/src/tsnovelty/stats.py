"""Statistical machinery: smooth goodness-of-fit test for uniformity,
runs up-and-down randomness test, and the tail functions they need."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ContractViolationError,
    DomainError,
    SmallSampleError,
    TieError,
)

__all__ = [
    "GofResult",
    "RunsResult",
    "shifted_legendre",
    "neyman_statistic",
    "runs_up_down_test",
    "chi_square_sf",
    "standard_normal_sf",
    "dither",
]


@dataclass
class GofResult:
    statistic: float
    dof: int
    p_value: float
    block_len: int


@dataclass
class RunsResult:
    runs: int
    z: float
    p_value: float
    n: int


def shifted_legendre(j: int, u):
    """Orthonormal shifted Legendre polynomial of order j on [0, 1].

    Orders 1..4 are supported; <h_j, h_k> = delta_jk under the uniform
    measure on [0, 1].
    """
    u = np.asarray(u, dtype=np.float64)
    if j == 1:
        return math.sqrt(3.0) * (2.0 * u - 1.0)
    if j == 2:
        return math.sqrt(5.0) * ((6.0 * u - 6.0) * u + 1.0)
    if j == 3:
        return math.sqrt(7.0) * (((20.0 * u - 30.0) * u + 12.0) * u - 1.0)
    if j == 4:
        return 3.0 * ((((70.0 * u - 140.0) * u + 90.0) * u - 20.0) * u + 1.0)
    raise ContractViolationError(f"polynomial order must be in 1..4, got {j}")


def neyman_statistic(block, order: int = 4,
                     max_out_of_range: float = 0.01) -> GofResult:
    """Smooth test of uniformity on [0, 1] for one block of values.

    The statistic sums, over orders r = 1..order, the squared normalized
    polynomial scores (sum_i h_r(u_i) / sqrt(N))^2; under uniformity it is
    asymptotically chi-square with `order` degrees of freedom.

    Values outside [0, 1] are clamped; if more than `max_out_of_range` of
    the block needed clamping the input is considered broken.
    """
    if not 1 <= order <= 4:
        raise ContractViolationError(f"test order must be in 1..4, got {order}")
    u = np.asarray(block, dtype=np.float64)
    n = u.size
    if n < 20:
        raise SmallSampleError(f"block too small for asymptotics: {n} < 20")
    outside = np.count_nonzero((u < 0.0) | (u > 1.0))
    if outside > max_out_of_range * n:
        raise DomainError(
            f"{outside}/{n} values outside [0, 1]; encoder output looks broken")
    u = np.clip(u, 0.0, 1.0)
    t = 0.0
    for r in range(1, order + 1):
        t += float(shifted_legendre(r, u).sum()) ** 2 / n
    return GofResult(statistic=t, dof=order,
                     p_value=chi_square_sf(t, order), block_len=n)


def runs_up_down_test(seq) -> RunsResult:
    """Runs up-and-down test of serial randomness.

    R = 1 + number of direction changes in the first differences.  Under
    i.i.d. continuous data, R is asymptotically normal with mean (2N-1)/3
    and variance (16N-29)/90 (Gibbons & Chakraborti).
    """
    x = np.asarray(seq, dtype=np.float64)
    n = x.size
    if n < 26:
        raise SmallSampleError(
            f"need at least 26 samples for the normal approximation, got {n}")
    d = np.diff(x)
    if np.any(d == 0.0):
        raise TieError("zero first-difference; dither discrete data first")
    s = np.sign(d)
    runs = int(1 + np.count_nonzero(s[1:] != s[:-1]))
    mean = (2.0 * n - 1.0) / 3.0
    var = (16.0 * n - 29.0) / 90.0
    z = (runs - mean) / math.sqrt(var)
    p = 2.0 * standard_normal_sf(abs(z))
    return RunsResult(runs=runs, z=z, p_value=p, n=n)


def dither(seq, seed: int, amplitude: float = 1e-9) -> np.ndarray:
    """Seeded uniform jitter for discrete-valued data ahead of the runs test."""
    x = np.asarray(seq, dtype=np.float64)
    rng = np.random.default_rng(seed)
    return x + rng.uniform(-amplitude, amplitude, size=x.shape)


# ---------------------------------------------------------------------------
# Tail functions
# ---------------------------------------------------------------------------

_IGAM_EPS = 1e-15
_IGAM_MAX_ITER = 500


def _igam_lower_series(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) by power series (x < a+1)."""
    term = 1.0 / a
    total = term
    k = a
    for _ in range(_IGAM_MAX_ITER):
        k += 1.0
        term *= x / k
        total += term
        if abs(term) < abs(total) * _IGAM_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _igam_upper_cf(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) by continued fraction (x >= a+1)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _IGAM_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _IGAM_EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi_square_sf(x: float, k: int) -> float:
    """Chi-square survival function P[X > x] with k degrees of freedom."""
    if x < 0:
        raise ContractViolationError("chi-square statistic must be nonnegative")
    if k < 1:
        raise ContractViolationError("degrees of freedom must be >= 1")
    if x == 0.0:
        return 1.0
    a = 0.5 * k
    t = 0.5 * x
    if t < a + 1.0:
        return min(1.0, max(0.0, 1.0 - _igam_lower_series(a, t)))
    return min(1.0, max(0.0, _igam_upper_cf(a, t)))


def standard_normal_sf(z: float) -> float:
    """Upper tail 1 - Phi(z) of the standard normal."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))
