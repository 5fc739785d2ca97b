"""Exponential orders, the Z / X degrees-of-freedom statistics and their tail laws.

The exponential order of a positive quantity v at a given SNR is
``-ln(v) / ln(snr)``, so v = snr^(-order).  Orders of unit-mean Rayleigh
powers are asymptotically non-negative with probability one; at finite SNR
the samplers here clip them at zero (``clip=True``), which keeps every Z in
[0, N] and every X in [0, NK] exactly as in the limit.

Tail laws are reported as exponents b with P(event) ~ snr^(-b).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .linalg import hermitian_eigenvalues
from .netmodel import ActiveSet, ChannelRealization, as_active_set

LAWS = ("Z_siso", "X_siso", "beta_alpha", "Z_mimo", "X_mimo", "wishart")


def exp_order(v, snr):
    """-ln(v)/ln(snr); +inf where v <= 0.  Works elementwise on arrays."""
    if not snr > 1:
        raise ConfigError(f"snr: exponential orders need snr > 1, got {snr}")
    v = np.asarray(v, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(v > 0, -np.log(np.where(v > 0, v, 1.0)) / math.log(snr), np.inf)
    return float(out) if out.ndim == 0 else out


def orders(v, snr, clip=True):
    a = exp_order(v, snr)
    return np.maximum(a, 0.0) if clip else a


def beta_set(u: int, V, alpha) -> float:
    """Smallest interferer order at receiver u, capped at 1.

    ``alpha`` maps (receiver, transmitter) to an order: either a dict keyed by
    user pairs or an n x n array indexed with 1-based users.  With no
    interferers the cap value 1 is returned.
    """
    members = list(V.members if isinstance(V, ActiveSet) else V)
    if u not in members:
        raise ConfigError(f"user {u} is not in the active set {members}")
    if isinstance(alpha, dict):
        vals = [alpha[(u, v)] for v in members if v != u]
    else:
        A = np.asarray(alpha)
        vals = [A[u - 1, v - 1] for v in members if v != u]
    return float(min([min(a, 1.0) for a in vals], default=1.0))


def z_siso(alpha_uu, beta_u):
    """(beta_u - alpha_uu)^+; elementwise on arrays."""
    out = np.maximum(np.subtract(beta_u, alpha_uu), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def x_of_set(z):
    return float(math.fsum(z))


@dataclass(frozen=True)
class EigenOrders:
    """Orders of the direct-link and pooled-interference Gram eigenvalues.

    Both arrays run over ascending eigenvalues, i.e. descending orders.
    """

    direct: np.ndarray
    interf: np.ndarray


def z_mimo(e: EigenOrders, N: int):
    """[sum_m (1 - a_m) - sum_m (1 - b_m)^+]^+ over the N eigen-orders.

    Also accepts stacked orders (leading batch axes, last axis of length N).
    """
    a = np.asarray(e.direct, dtype=float)
    b = np.asarray(e.interf, dtype=float)
    if a.shape[-1] != N or b.shape[-1] != N:
        raise ConfigError(f"expected {N} orders, got {a.shape[-1]} and {b.shape[-1]}")
    with np.errstate(invalid="ignore"):
        val = np.sum(1.0 - a, axis=-1) - np.sum(np.maximum(1.0 - b, 0.0), axis=-1)
    out = np.maximum(np.nan_to_num(val, nan=0.0, neginf=0.0), 0.0)
    return float(out) if out.ndim == 0 else out


def gram_orders(A, snr, clip=True):
    """Orders of the eigenvalues of A A^H (ascending eigenvalue order).

    ``A`` may be a single p x q matrix or a stack.  A zero-width A yields the
    all-zero Gram matrix, whose orders are +inf.
    """
    A = np.asarray(A, dtype=complex)
    G = A @ np.conj(np.swapaxes(A, -1, -2))
    mu = hermitian_eigenvalues(G) if A.shape[-1] else np.zeros(G.shape[:-1])
    return orders(mu, snr, clip=clip)


def eigen_orders(ch: ChannelRealization, u: int, V, snr: float,
                 include_pathloss=False, clip=True) -> EigenOrders:
    V = as_active_set(V, ch.n)
    if u not in V:
        raise ConfigError(f"user {u} is not in the active set {V.members}")
    others = V.others(u)
    Hd = ch.channel(u, u)
    Hi = np.hstack([ch.channel(u, v) for v in others]) if others else np.zeros((ch.N, 0))
    if include_pathloss:
        Hd = math.sqrt(ch.gamma(u, u)) * Hd
        if others:
            Hi = math.sqrt(max(ch.gamma(u, v) for v in others)) * Hi
    return EigenOrders(gram_orders(Hd, snr, clip), gram_orders(Hi, snr, clip))


@dataclass(frozen=True)
class OrderSample:
    """Orders and DoF statistics of one active set at one SNR.

    For single-antenna sets ``alpha`` is the K x K order matrix in member
    order and ``beta_set`` the per-user capped interference order.  For
    multi-antenna sets those two are None and ``eigen`` holds the per-user
    eigen-orders instead.
    """

    members: tuple
    alpha: np.ndarray | None
    beta_set: np.ndarray | None
    z: np.ndarray
    x: float
    snr: float
    eigen: tuple | None = None


def order_sample(ch: ChannelRealization, V, snr: float, include_pathloss=False, clip=True) -> OrderSample:
    V = as_active_set(V, ch.n)
    idx = [m - 1 for m in V.members]
    if ch.N == 1:
        P = np.abs(ch.gains[np.ix_(idx, idx)][:, :, 0, 0]) ** 2
        if include_pathloss:
            P = P * ch.pathloss[np.ix_(idx, idx)]
        alpha = orders(P, snr, clip=clip)
        K = len(idx)
        beta = np.array([beta_set(i + 1, range(1, K + 1), alpha) for i in range(K)])
        z = z_siso(np.diag(alpha), beta)
        z = np.atleast_1d(z)
        return OrderSample(V.members, alpha, beta, z, x_of_set(z), float(snr))
    eig = tuple(eigen_orders(ch, u, V, snr, include_pathloss, clip) for u in V)
    z = np.array([z_mimo(e, ch.N) for e in eig])
    return OrderSample(V.members, None, None, z, x_of_set(z), float(snr), eig)


@dataclass(frozen=True)
class AnalyticLaw:
    """A tail law and its parameters.

    Exceedance laws (Z_siso, X_siso, beta_alpha, Z_mimo, X_mimo) describe
    P(stat > point).  The wishart law describes the lower tail
    P(sum_m (1 - a_m)^+ < r) of a p x q complex Gaussian Gram matrix.
    """

    law: str
    K: int = 2
    N: int = 1
    p: int = 1
    q: int = 1

    def __post_init__(self):
        if self.law not in LAWS:
            raise ConfigError(f"law: expected one of {LAWS}, got {self.law!r}")
        if self.law == "wishart":
            if not 1 <= self.p <= self.q:
                raise ConfigError(f"p, q: need 1 <= p <= q (p={self.p}, q={self.q})")
        elif self.law in ("Z_mimo", "X_mimo"):
            if self.K < 2 or self.N < 1:
                raise ConfigError(f"K: MIMO laws need K >= 2 and N >= 1 (K={self.K}, N={self.N})")
        elif self.K < 1:
            raise ConfigError(f"K: must be >= 1, got {self.K}")

    @property
    def upper(self):
        """Largest value the statistic can take."""
        return {
            "Z_siso": 1.0, "X_siso": float(self.K), "beta_alpha": 1.0,
            "Z_mimo": float(self.N), "X_mimo": float(self.N * self.K),
            "wishart": float(self.p),
        }[self.law]

    @property
    def lower_tail(self):
        return self.law == "wishart"


def analytic_tail_exponent(law: AnalyticLaw, point: float) -> float:
    x = float(point)
    K, N = law.K, law.N
    if law.law == "wishart":
        p, q = law.p, law.q
        if x < 0:
            return math.inf
        if x > p:
            return 0.0
        return (q - x) * (p - x)
    if x < 0:
        return 0.0
    if x > law.upper:
        return math.inf
    if law.law in ("Z_siso", "X_siso"):
        return (K - 1) * x
    if law.law == "beta_alpha":
        return x
    return x * (x + (K - 2) * N)


def dmt_exponent(p: int, q: int, r: float) -> float:
    """Piecewise-linear exponent of P(sum_m (1 - a_m)^+ < r) for p x q Gaussian A.

    Linear interpolation of (p - k)(q - k) between integers k; agrees with
    the (q - r)(p - r) wishart law at integer r only.
    """
    if not 1 <= p <= q:
        raise ConfigError(f"need 1 <= p <= q (p={p}, q={q})")
    if r < 0:
        return math.inf
    if r >= p:
        return 0.0
    k = math.floor(r)
    lo = (p - k) * (q - k)
    hi = (p - k - 1) * (q - k - 1)
    return lo + (r - k) * (hi - lo)


@dataclass(frozen=True)
class TheoremBounds:
    xi: float
    K: int
    N: int
    lb_siso: float
    ub_siso: float
    lb_mimo: float
    zeta: float

    def xi_sufficient(self, d):
        """Network-size exponent that guarantees d DoF, single antenna."""
        return d * (self.K - 1)

    def xi_necessary(self, d):
        return d / (2 * self.K)

    def xi_sufficient_mimo(self, d):
        K, N = self.K, self.N
        if d <= 2 * N - 1:
            return d * d + d * (K - 2) * N
        return d * (N * K - 1)


def theorem_bounds(xi: float, K: int, N: int = 1) -> TheoremBounds:
    if not xi >= 0:
        raise ConfigError(f"xi: must be non-negative, got {xi}")
    if K < 1 or N < 1:
        raise ConfigError(f"K and N must be >= 1 (K={K}, N={N})")
    lb_siso = float(K) if K == 1 else min(K, xi / (K - 1))
    ub_siso = K * min(1.0, 2.0 * xi)
    zeta = (math.sqrt((K - 2) ** 2 * N**2 + 4.0 * xi) - (K - 2) * N) / 2.0
    pairing = math.inf if N * K == 1 else xi / (N * K - 1)
    lb_mimo = min(N * K, max(pairing, zeta))
    return TheoremBounds(float(xi), K, N, float(lb_siso), float(ub_siso), float(lb_mimo), float(zeta))


def partition_limit(xi: float, K: int, N: int = 1) -> float:
    """Point where max_i X_{U_i} over the disjoint groups concentrates."""
    b = theorem_bounds(xi, K, N)
    return b.lb_siso if N == 1 else min(N * K, b.zeta)
