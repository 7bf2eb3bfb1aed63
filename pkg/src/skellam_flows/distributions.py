"""Poisson, Skellam, and conditional joint count distributions.

All probability arithmetic happens in log space with a single
exponentiation at normalization time, so tables stay finite far into the
tails. The conditional joint law of (arrivals I, departures R) given an
observed net change delta places mass on pairs (k, k - delta) with
k >= max(delta, 0); its truncated, normalized pmf is the workhorse of the
stochastic E-step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DegenerateTableError

DEFAULT_K_MAX = 1000


def _check_intensity(value, name: str = "lambda") -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a positive finite real, got {value!r}")
    return value


@dataclass(frozen=True)
class SkellamParams:
    """Intensities of the two independent Poisson count streams."""

    lambda_in: float
    lambda_out: float

    def __post_init__(self):
        object.__setattr__(self, "lambda_in", _check_intensity(self.lambda_in, "lambda_in"))
        object.__setattr__(self, "lambda_out", _check_intensity(self.lambda_out, "lambda_out"))


def poisson_log_pmf(k, lam):
    """Log pmf of Poisson(lam) at k, via log-gamma.

    `k` may be a nonnegative integer or an integer array; the result has the
    same shape. Stays finite for lam up to ~1e6 and k up to ~1e6.
    """
    lam = _check_intensity(lam)
    k_arr = np.asarray(k)
    if not np.issubdtype(k_arr.dtype, np.number):
        raise ValueError(f"k must be integer-valued, got {k!r}")
    if np.any(k_arr != np.floor(k_arr)) or np.any(k_arr < 0):
        raise ValueError(f"k must be a nonnegative integer, got {k!r}")
    k_arr = k_arr.astype(np.int64)
    out = k_arr * np.log(lam) - lam - gammaln(k_arr + 1.0)
    return float(out) if np.isscalar(k) or k_arr.ndim == 0 else out


def _support_bound(delta, lambda_in, lambda_out):
    """Upper end of the numerically relevant support of the joint terms.

    The unnormalized term P(I=k) P(R=k-delta) peaks near
    k* = delta/2 + sqrt(delta^2/4 + lambda_in*lambda_out) and decays at
    least as fast as a Poisson tail beyond it; 14 sigma plus a constant
    margin leaves the neglected mass far below double precision.
    """
    mode = 0.5 * delta + np.sqrt(0.25 * np.square(delta) + lambda_in * lambda_out)
    return np.ceil(mode + 14.0 * np.sqrt(mode + 1.0) + 40.0)


def _joint_log_terms(delta: int, params: SkellamParams, k_max: int):
    k_min = max(delta, 0)
    if k_max < k_min:
        raise ValueError(
            f"k_max={k_max} is below the support start max(delta, 0)={k_min}"
        )
    k_hi = int(min(k_max, _support_bound(delta, params.lambda_in, params.lambda_out)))
    k = np.arange(k_min, k_hi + 1)
    log_terms = poisson_log_pmf(k, params.lambda_in) + poisson_log_pmf(
        k - delta, params.lambda_out
    )
    return k, log_terms


def skellam_pmf(delta: int, params: SkellamParams, k_max: int = DEFAULT_K_MAX) -> float:
    """P(I - R = delta) via the truncated convolution sum.

    Equals the Skellam pmf up to the (negligible for moderate intensities)
    mass beyond k_max.
    """
    _, log_terms = _joint_log_terms(int(delta), params, int(k_max))
    return float(np.exp(logsumexp(log_terms)))


@dataclass(frozen=True)
class ConditionalJointTable:
    """Truncated normalized pmf over (I, R) pairs given one observed delta.

    `probs[j]` is P(I = k_min + j, R = k_min + j - delta); the support is
    k in [k_min, k_max] with k_min = max(delta, 0). `tail_ratio` is the
    last evaluated unnormalized term divided by the normalizer, a
    diagnostic upper-bound proxy for the truncated mass.
    """

    delta: int
    k_min: int
    k_max: int
    probs: np.ndarray
    tail_ratio: float

    def support(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def mean_arrivals(self) -> float:
        return float(self.support() @ self.probs)


def conditional_joint_table(
    delta: int, params: SkellamParams, k_max: int = DEFAULT_K_MAX
) -> ConditionalJointTable:
    """Build the normalized conditional table of (I, R) given delta.

    The table self-truncates where entries stop contributing in double
    precision, so its stored k_max can be smaller than the requested one.
    """
    delta = int(delta)
    k, log_terms = _joint_log_terms(delta, params, int(k_max))
    peak = float(np.max(log_terms))
    if not np.isfinite(peak):
        raise DegenerateTableError(delta, params.lambda_in, params.lambda_out)
    weights = np.exp(log_terms - peak)
    total = float(weights.sum())
    if total <= 0.0 or not np.isfinite(total):
        raise DegenerateTableError(delta, params.lambda_in, params.lambda_out)
    probs = weights / total
    tail_ratio = float(weights[-1] / total)
    last = int(np.nonzero(probs)[0][-1])
    probs = probs[: last + 1]
    return ConditionalJointTable(
        delta=delta,
        k_min=int(k[0]),
        k_max=int(k[last]),
        probs=probs,
        tail_ratio=tail_ratio,
    )


def sample_joint(table: ConditionalJointTable, rng: np.random.Generator):
    """Draw one (arrivals, departures) pair by inverse CDF from the table."""
    cdf = np.cumsum(table.probs)
    idx = int(np.searchsorted(cdf, rng.random(), side="right"))
    idx = min(idx, len(table.probs) - 1)
    i = table.k_min + idx
    return i, i - table.delta


def _sample_joint_many(
    deltas,
    lambdas_in,
    lambdas_out,
    rng: np.random.Generator,
    k_max: int = DEFAULT_K_MAX,
    k_cap=None,
):
    """Vectorized one-draw-per-row sampler over conditional joint tables.

    Equivalent to building `conditional_joint_table` for every row and
    drawing once from each, sharing a common column grid. `k_cap`, when
    given, additionally truncates each row's support at k <= k_cap[row]
    (used for strict censoring of departures). Returns integer arrays
    (i, r) plus a boolean mask of rows whose table degenerated; degenerate
    rows carry i = r = 0 and are the caller's responsibility.
    """
    deltas = np.asarray(deltas, dtype=np.int64)
    lam_i = np.asarray(lambdas_in, dtype=float)
    lam_r = np.asarray(lambdas_out, dtype=float)
    n = deltas.shape[0]

    usable = (
        np.isfinite(lam_i) & (lam_i > 0.0) & np.isfinite(lam_r) & (lam_r > 0.0)
    )
    # Placeholder intensities keep the vectorized math finite on bad rows.
    lam_i = np.where(usable, lam_i, 1.0)
    lam_r = np.where(usable, lam_r, 1.0)

    k_lo = np.maximum(deltas, 0)
    bound = _support_bound(deltas, lam_i, lam_r)
    k_hi = np.minimum(bound, float(k_max)).astype(np.int64)
    k_hi = np.maximum(k_hi, k_lo)
    if k_cap is not None:
        cap = np.asarray(k_cap, dtype=np.int64)
        usable &= cap >= k_lo
        k_hi = np.minimum(k_hi, np.maximum(cap, k_lo))

    width = int(np.max(k_hi - k_lo)) + 1 if n else 1
    k_grid = k_lo[:, None] + np.arange(width)[None, :]
    valid = k_grid <= k_hi[:, None]
    r_grid = k_grid - deltas[:, None]

    log_terms = (
        k_grid * np.log(lam_i)[:, None]
        - lam_i[:, None]
        - gammaln(k_grid + 1.0)
        + r_grid * np.log(lam_r)[:, None]
        - lam_r[:, None]
        - gammaln(np.maximum(r_grid, 0) + 1.0)
    )
    log_terms = np.where(valid, log_terms, -np.inf)

    peak = np.max(log_terms, axis=1)
    degenerate = ~usable | ~np.isfinite(peak) | (k_hi < k_lo)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    weights = np.exp(log_terms - peak[:, None])
    csum = np.cumsum(weights, axis=1)
    total = csum[:, -1]
    degenerate |= ~np.isfinite(total) | (total <= 0.0)

    u = rng.random(n) * np.where(degenerate, 1.0, total)
    idx = np.minimum((csum < u[:, None]).sum(axis=1), width - 1)
    i = np.where(degenerate, 0, k_lo + idx)
    r = np.where(degenerate, 0, i - deltas)
    return i.astype(np.int64), r.astype(np.int64), degenerate
