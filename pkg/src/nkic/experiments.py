"""Monte Carlo harnesses.

Trials are grouped into fixed-size blocks; block ``i`` draws from the stream
keyed by ``(seed, tag, ..., i)`` and returns integer counts or per-trial
values stored by index.  Any number of worker threads therefore produces
bit-identical aggregates.

Tail exponents are fitted by weighted least squares of -ln p against ln snr
with delta-method weights n p / (1 - p), so thinly populated high-SNR points
count for less.  Every SNR point reuses the same raw draws (common random
numbers).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .errors import ConfigError
from .exporders import (
    LAWS,
    AnalyticLaw,
    TheoremBounds,
    analytic_tail_exponent,
    orders,
    partition_limit,
    theorem_bounds,
)
from .linalg import hermitian_eigenvalues
from .netmodel import NetworkConfig, active_set_partition, sample_network
from .rates import mimo_rates_batch, siso_rates_batch, sum_rate
from .scheduling import select_exhaustive, select_partitioned, select_random

THREADS_ENV = "NKIC_THREADS"
BLOCK = 1 << 16
MIN_TAIL_TRIALS = 1000
RESOLUTION_COUNT = 100
GROUP_CHUNK = 1 << 14


def default_threads():
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _map(fn, items, threads=None):
    threads = default_threads() if threads is None else max(1, int(threads))
    items = list(items)
    if threads == 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _blocks(trials, block):
    return [(i, min(block, trials - i * block)) for i in range(-(-trials // block))]


def _check_snr_grid(snr_grid, min_points=2):
    g = np.asarray(snr_grid, dtype=float)
    if g.ndim != 1 or g.size < min_points:
        raise ConfigError(f"snr grid: need >= {min_points} SNR points, got {g.size}")
    if not np.all(g > 1):
        raise ConfigError("snr grid: every SNR must exceed 1 (0 dB)")
    if not np.all(np.diff(g) > 0):
        raise ConfigError("snr grid: must be strictly increasing")
    return g


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(snr):
    return 10.0 * np.log10(np.asarray(snr, dtype=float))


# --------------------------------------------------------------------------
# law samplers: raw draws are SNR-free, statistics are evaluated per SNR


def _gram_eigs(A):
    return hermitian_eigenvalues(A @ np.conj(np.swapaxes(A, -1, -2)))


def _draw_raw(law: AnalyticLaw, rng, size):
    K, N = law.K, law.N
    if law.law == "Z_siso":
        return rng.standard_exponential((size, K))
    if law.law == "X_siso":
        return rng.standard_exponential((size, K, K))
    if law.law == "beta_alpha":
        return rng.standard_exponential((size, 2))
    if law.law in ("Z_mimo", "X_mimo"):
        users = 1 if law.law == "Z_mimo" else K
        Hd = _rng.complex_normal(rng, (size, users, N, N))
        Hi = _rng.complex_normal(rng, (size, users, N, (K - 1) * N))
        return _gram_eigs(Hd), _gram_eigs(Hi)
    A = _rng.complex_normal(rng, (size, law.p, law.q))
    return _gram_eigs(A)


def _capped_interference(a):
    """min over v != u of min(a[u, v], 1), for a stack of K x K order matrices."""
    K = a.shape[-1]
    off = np.where(np.eye(K, dtype=bool), np.inf, a)
    return np.minimum(off.min(axis=-1), 1.0)


def _statistic(law: AnalyticLaw, raw, snr):
    if law.law == "Z_siso":
        a = orders(raw, snr)
        beta = np.minimum(a[:, 1:].min(axis=1), 1.0) if law.K > 1 else np.ones(len(a))
        return np.maximum(beta - a[:, 0], 0.0)
    if law.law == "X_siso":
        a = orders(raw, snr)
        direct = np.einsum("...ii->...i", a)
        return np.maximum(_capped_interference(a) - direct, 0.0).sum(axis=-1)
    if law.law == "beta_alpha":
        a = orders(raw, snr)
        return np.maximum(np.minimum(a[:, 1], 1.0) - a[:, 0], 0.0)
    if law.law in ("Z_mimo", "X_mimo"):
        mu, lam = raw
        a, b = orders(mu, snr), orders(lam, snr)
        with np.errstate(invalid="ignore"):
            z = np.sum(1.0 - a, axis=-1) - np.sum(np.maximum(1.0 - b, 0.0), axis=-1)
        z = np.maximum(np.nan_to_num(z, nan=0.0, neginf=0.0), 0.0)
        return z.sum(axis=-1)
    a = orders(raw, snr)
    return np.sum(np.maximum(1.0 - a, 0.0), axis=-1)


def sample_statistic(law: AnalyticLaw, snr_grid, trials, seed, block=BLOCK):
    """Raw per-trial statistic values, shape (len(snr_grid), trials)."""
    snr = _check_snr_grid(snr_grid, 1)
    out = np.empty((snr.size, trials))
    for i, size in _blocks(trials, block):
        raw = _draw_raw(law, _rng.stream(seed, _rng.TAIL, LAWS.index(law.law), i), size)
        for s, value in enumerate(snr):
            out[s, i * block:i * block + size] = _statistic(law, raw, value)
    return out


# --------------------------------------------------------------------------
# tail exponents


def fit_tail_exponent(snr_grid, p_hat, trials):
    """WLS slope of -ln p against ln snr and its standard error.

    Returns (nan, nan) unless at least three points have p > 0.
    """
    x = np.log(np.asarray(snr_grid, dtype=float))
    p = np.asarray(p_hat, dtype=float)
    keep = p > 0
    if keep.sum() < 3:
        return math.nan, math.nan
    x, p = x[keep], p[keep]
    y = -np.log(p)
    w = trials * p / np.maximum(1.0 - p, 1.0 / trials)
    xm = np.sum(w * x) / np.sum(w)
    ym = np.sum(w * y) / np.sum(w)
    sxx = np.sum(w * (x - xm) ** 2)
    slope = np.sum(w * (x - xm) * (y - ym)) / sxx
    return float(slope), float(math.sqrt(1.0 / sxx))


@dataclass(frozen=True)
class TailEstimate:
    """Empirical tail probabilities of a law's statistic over an SNR grid.

    ``exceedance[s, j]`` is P(stat > thresholds[j]) at snr_grid[s] (for the
    wishart law, P(stat < thresholds[j])).  ``fitted_exponent`` and ``ci``
    are NaN where fewer than three SNR points saw the event.
    """

    law: AnalyticLaw
    thresholds: np.ndarray
    snr_grid: np.ndarray
    trials: int
    counts: np.ndarray
    exceedance: np.ndarray
    fitted_exponent: np.ndarray
    ci: np.ndarray
    analytic: np.ndarray
    below_resolution: np.ndarray
    resolved: np.ndarray

    @property
    def stderr(self):
        p = self.exceedance
        return np.sqrt(p * (1.0 - p) / self.trials)

    def agrees(self, tol):
        """Per threshold: fitted exponent within ``tol`` of the analytic one."""
        with np.errstate(invalid="ignore"):
            return np.abs(self.fitted_exponent - self.analytic) <= tol


def tail_sweep(law: AnalyticLaw, thresholds, snr_grid, trials: int, seed: int,
               threads=None, block=BLOCK) -> TailEstimate:
    if not isinstance(law, AnalyticLaw):
        raise ConfigError("law: expected an AnalyticLaw")
    if trials < MIN_TAIL_TRIALS:
        raise ConfigError(f"trials: need >= {MIN_TAIL_TRIALS}, got {trials}")
    snr = _check_snr_grid(snr_grid)
    thr = np.atleast_1d(np.asarray(thresholds, dtype=float))
    tag = LAWS.index(law.law)

    def run(blk):
        i, size = blk
        raw = _draw_raw(law, _rng.stream(seed, _rng.TAIL, tag, i), size)
        counts = np.empty((snr.size, thr.size), dtype=np.int64)
        for s, value in enumerate(snr):
            stat = _statistic(law, raw, value)
            if law.lower_tail:
                counts[s] = (stat[:, None] < thr[None, :]).sum(axis=0)
            else:
                counts[s] = (stat[:, None] > thr[None, :]).sum(axis=0)
        return counts

    counts = np.sum(_map(run, _blocks(trials, block), threads), axis=0)
    p_hat = counts / trials
    fits = [fit_tail_exponent(snr, p_hat[:, j], trials) for j in range(thr.size)]
    return TailEstimate(
        law=law,
        thresholds=thr,
        snr_grid=snr,
        trials=int(trials),
        counts=counts,
        exceedance=p_hat,
        fitted_exponent=np.array([f[0] for f in fits]),
        ci=np.array([f[1] for f in fits]),
        analytic=np.array([analytic_tail_exponent(law, t) for t in thr]),
        below_resolution=np.all(counts == 0, axis=0),
        resolved=counts[-1] >= RESOLUTION_COUNT,
    )


def wishart_tail_run(p: int, q: int, r_grid, snr_grid, trials: int, seed: int,
                     threads=None) -> TailEstimate:
    """Lower-tail probabilities P(sum_m (1 - a_m)^+ < r) for p x q Gaussian Gram matrices."""
    law = AnalyticLaw("wishart", p=p, q=q)
    r = np.atleast_1d(np.asarray(r_grid, dtype=float))
    if np.any(r <= 0) or np.any(r >= p):
        raise ConfigError(f"r grid: every r must lie in (0, {p})")
    return tail_sweep(law, r, snr_grid, trials, seed, threads)


# --------------------------------------------------------------------------
# degrees of freedom from sum rates


@dataclass(frozen=True)
class DofEstimate:
    snr_grid: np.ndarray
    sum_rate_samples: np.ndarray
    slope: float
    intercept: float
    residual: np.ndarray
    points_used: int


def estimate_dof(snr_grid, sum_rates) -> DofEstimate:
    """Slope of sum rate (bits) against log2 snr over the upper half of the grid."""
    snr = np.asarray(snr_grid, dtype=float)
    rates = np.asarray(sum_rates, dtype=float)
    if snr.size < 2 or rates.shape != snr.shape:
        raise ConfigError("estimate_dof needs >= 2 SNR points with one sum rate each")
    k = max(2, math.ceil(snr.size / 2))
    x = np.log2(snr[-k:])
    slope, intercept = np.polyfit(x, rates[-k:], 1)
    residual = rates - slope * np.log2(snr)
    return DofEstimate(snr, rates, float(slope), float(intercept), residual, k)


STRATEGIES = ("fixed", "partitioned", "exhaustive", "random")


@dataclass(frozen=True)
class RateRun:
    config: NetworkConfig
    snr_grid: np.ndarray
    strategy: str
    mode: str
    samples: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    dof: DofEstimate
    mean_realization_slope: float


def dof_run(config: NetworkConfig, snr_grid, trials: int, strategy="fixed", mode=None,
            threads=None) -> RateRun:
    """Sum rate of the selected active set over ``trials`` network draws.

    ``dof`` is the slope of the mean sum rate; ``mean_realization_slope``
    averages the slopes of the individual realizations.
    """
    snr = _check_snr_grid(snr_grid)
    if strategy not in STRATEGIES:
        raise ConfigError(f"strategy: expected one of {STRATEGIES}, got {strategy!r}")
    if trials < 1:
        raise ConfigError("trials: must be >= 1")
    mode = mode or ("siso" if config.N == 1 else "mimo")
    objective = "sum_rate_siso" if mode == "siso" else "sum_rate_mimo"
    K = config.K

    def one(t):
        ch = sample_network(config, t)
        row = np.empty(snr.size)
        for s, value in enumerate(snr):
            if strategy == "fixed":
                V = active_set_partition(config.n, K)[0]
            elif strategy == "random":
                V = select_random(config.n, K, config.seed, t)
            elif strategy == "partitioned":
                V = select_partitioned(ch, value, K, objective).set
            else:
                V = select_exhaustive(ch, value, K, objective).set
            row[s] = sum_rate(V, ch, value, mode).sum
        return row

    samples = np.array(_map(one, range(trials), threads))
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(trials) if trials > 1 else np.zeros(snr.size)
    per = [estimate_dof(snr, r).slope for r in samples]
    return RateRun(config, snr, strategy, mode, samples, mean, se, estimate_dof(snr, mean),
                   float(np.mean(per)))


# --------------------------------------------------------------------------
# network-size scaling


@dataclass(frozen=True)
class ScalingResult:
    xi: float
    K: int
    N: int
    selector: str
    snr_grid: np.ndarray
    n: np.ndarray
    groups: np.ndarray
    samples: np.ndarray
    limit: float
    bounds: TheoremBounds
    dof: DofEstimate | None = None

    @property
    def mean(self):
        return self.samples.mean(axis=1)

    @property
    def std(self):
        return self.samples.std(axis=1, ddof=1) if self.samples.shape[1] > 1 else np.zeros(len(self.n))

    @property
    def stderr(self):
        return self.std / math.sqrt(self.samples.shape[1])


def _group_x_siso(rng, m, K, snr):
    a = orders(rng.standard_exponential((m, K, K)), snr)
    direct = np.einsum("...ii->...i", a)
    return np.maximum(_capped_interference(a) - direct, 0.0).sum(axis=-1)


def _group_x_mimo(rng, m, K, N, snr):
    H = _rng.complex_normal(rng, (m, K, K, N, N))
    x = np.zeros(m)
    for u in range(K):
        Hi = np.concatenate([H[:, u, v] for v in range(K) if v != u], axis=-1)
        a = orders(_gram_eigs(H[:, u, u]), snr)
        b = orders(_gram_eigs(Hi), snr)
        with np.errstate(invalid="ignore"):
            z = np.sum(1.0 - a, axis=-1) - np.sum(np.maximum(1.0 - b, 0.0), axis=-1)
        x += np.maximum(np.nan_to_num(z, nan=0.0, neginf=0.0), 0.0)
    return x


def _group_sum_rate(rng, m, K, N, snr):
    H = _rng.complex_normal(rng, (m, K, K, N, N))
    if N == 1:
        return siso_rates_batch(np.abs(H[..., 0, 0]) ** 2, snr).sum(axis=-1)
    return mimo_rates_batch(H, 1.0, snr).sum(axis=-1)


def scaling_run(xi: float, K: int, N: int, snr_grid, trials: int, seed: int,
                selector: str = "x_order", n_scale: float = 1.0, threads=None) -> ScalingResult:
    """Best disjoint group as the network grows like n = round(n_scale * snr^xi).

    Each trial draws the ``floor(n/K)`` disjoint groups afresh and records the
    largest group statistic: the DoF statistic X (``x_order``) or the sum rate
    in bits (``sum_rate``).  Rates use unit path loss.
    """
    if selector not in ("x_order", "sum_rate"):
        raise ConfigError(f"selector: expected 'x_order' or 'sum_rate', got {selector!r}")
    if not xi >= 0:
        raise ConfigError(f"xi: must be non-negative, got {xi}")
    if K < 1 or N < 1 or trials < 1:
        raise ConfigError("K, N and trials must be >= 1")
    if N > 1 and K < 2 and selector == "x_order":
        raise ConfigError("K: MIMO order statistics need K >= 2")
    snr = _check_snr_grid(snr_grid, 1)
    n = np.array([int(round(n_scale * s**xi)) for s in snr])
    if np.any(n < K):
        raise ConfigError(f"n = round(n_scale * snr^xi) falls below K={K} on the grid: {n.tolist()}")
    groups = n // K

    def one(job):
        s, t = job
        rng = _rng.stream(seed, _rng.SCALING, s, t)
        best, left = -math.inf, int(groups[s])
        while left:
            m = min(left, GROUP_CHUNK)
            if selector == "sum_rate":
                vals = _group_sum_rate(rng, m, K, N, snr[s])
            elif N == 1:
                vals = _group_x_siso(rng, m, K, snr[s])
            else:
                vals = _group_x_mimo(rng, m, K, N, snr[s])
            best = max(best, float(vals.max()))
            left -= m
        return best

    jobs = [(s, t) for s in range(snr.size) for t in range(trials)]
    samples = np.array(_map(one, jobs, threads)).reshape(snr.size, trials)
    dof = estimate_dof(snr, samples.mean(axis=1)) if selector == "sum_rate" and snr.size >= 2 else None
    return ScalingResult(float(xi), K, N, selector, snr, n, groups, samples,
                         partition_limit(xi, K, N), theorem_bounds(xi, K, N), dof)


# --------------------------------------------------------------------------
# exchangeable sequences


@dataclass(frozen=True)
class Latent:
    """X_i = scale * Y + e_i with Y, e_i independent N(0, 1).

    ``kind='iid'`` drops Y, giving an independent sequence.
    """

    kind: str = "shared_mean"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("shared_mean", "iid"):
            raise ConfigError(f"latent.kind: expected 'shared_mean' or 'iid', got {self.kind!r}")
        if not self.scale >= 0:
            raise ConfigError("latent.scale: must be non-negative")


@dataclass(frozen=True)
class ExchangeRecord:
    x: float
    lhs: float
    rhs: float
    se_lhs: float
    se_rhs: float
    margin: float = field(init=False)
    stderr: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "margin", self.lhs - self.rhs)
        object.__setattr__(self, "stderr", math.hypot(self.se_lhs, self.se_rhs))

    @property
    def holds(self):
        """P(max <= x) >= P(X <= x)^n up to three standard errors."""
        return self.margin >= -3.0 * self.stderr

    @property
    def equal(self):
        return abs(self.margin) <= 3.0 * self.stderr


def exchangeability_check(n: int, x_grid, trials: int, seed: int,
                          latent: Latent = Latent()) -> list[ExchangeRecord]:
    if n < 1 or trials < 2:
        raise ConfigError("need n >= 1 and trials >= 2")
    rng = _rng.stream(seed, _rng.EXCHANGE)
    shared = rng.standard_normal((trials, 1)) if latent.kind == "shared_mean" else np.zeros((trials, 1))
    X = latent.scale * shared + rng.standard_normal((trials, n))
    top = X.max(axis=1)
    out = []
    for x in np.atleast_1d(np.asarray(x_grid, dtype=float)):
        hits = int(np.count_nonzero(top <= x))
        lhs = hits / trials
        # smoothed variance keeps the error bar honest when no hit is seen
        lap = (hits + 1) / (trials + 2)
        frac = np.mean(X <= x, axis=1)
        p = float(frac.mean())
        se_p = float(frac.std(ddof=1) / math.sqrt(trials))
        out.append(ExchangeRecord(
            float(x), lhs, p**n,
            math.sqrt(lap * (1.0 - lap) / trials),
            n * p ** (n - 1) * se_p,
        ))
    return out
