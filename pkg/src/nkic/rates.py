"""Single-user-decoding rates, in bits per channel use.

Each receiver treats the other active transmitters as Gaussian noise.  The
noise term is ``1/snr`` (unit-power signals), so for one antenna

    sinr_u = gamma_uu |H_uu|^2 / (sum_{v != u} gamma_uv |H_uv|^2 + 1/snr).

The ``*_batch`` helpers evaluate the same formulas over stacks of independent
groups and back the Monte Carlo code; the scalar functions are the reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import ConfigError, NumericError
from .linalg import cholesky, spd_logdet
from .netmodel import ActiveSet, ChannelRealization, as_active_set

LN2 = math.log(2.0)
MODES = ("siso", "mimo", "mimo_lb")


@dataclass(frozen=True)
class RateReport:
    per_user: dict
    sum: float
    snr: float


def _check(u, V, ch, snr):
    V = as_active_set(V, ch.n)
    if u not in V:
        raise ConfigError(f"user {u} is not in the active set {V.members}")
    if not snr > 0:
        raise ConfigError(f"snr: must be positive, got {snr}")
    if not ch.is_finite():
        raise NumericError("channel realization has non-finite entries")
    return V


def sinr_siso(u: int, V: ActiveSet, ch: ChannelRealization, snr: float) -> float:
    V = _check(u, V, ch, snr)
    if ch.N != 1:
        raise ConfigError("sinr_siso needs a single-antenna realization")
    signal = ch.gamma(u, u) * ch.power(u, u)
    interference = sum(ch.gamma(u, v) * ch.power(u, v) for v in V.others(u))
    return signal / (interference + 1.0 / snr)


def rate_sd_siso(u: int, V: ActiveSet, ch: ChannelRealization, snr: float) -> float:
    return math.log1p(sinr_siso(u, V, ch, snr)) / LN2


def _interference_matrix(u, V, ch, pooled_gamma=False):
    """N x (K-1)N matrix of scaled interfering channels at receiver u.

    With ``pooled_gamma`` every block is scaled by the largest interfering
    path loss instead of its own.
    """
    others = V.others(u)
    if not others:
        return np.zeros((ch.N, 0), dtype=complex)
    gammas = [ch.gamma(u, v) for v in others]
    if pooled_gamma:
        gammas = [max(gammas)] * len(others)
    return np.hstack([math.sqrt(g) * ch.channel(u, v) for g, v in zip(gammas, others)])


def rate_sd_mimo(u: int, V: ActiveSet, ch: ChannelRealization, snr: float) -> float:
    """log2 det[I + snr g_uu H_uu^H B^{-1} H_uu], B = I + snr H_uV H_uV^H.

    B is factored as L L^H and the whitened channel L^{-1} H_uu is formed by a
    triangular solve.
    """
    V = _check(u, V, ch, snr)
    N = ch.N
    Hi = _interference_matrix(u, V, ch)
    B = np.eye(N) + snr * (Hi @ Hi.conj().T)
    L = cholesky(B)
    Y = solve_triangular(L, ch.channel(u, u), lower=True)
    M = np.eye(N) + snr * ch.gamma(u, u) * (Y.conj().T @ Y)
    return max(spd_logdet(M) / LN2, 0.0)


def rate_sd_mimo_lb(u: int, V: ActiveSet, ch: ChannelRealization, snr: float) -> float:
    """log2(1 + det(snr g_uu H_uu H_uu^H) / det(I + snr Ht Ht^H)).

    Ht stacks the interfering channels, all scaled by the largest interfering
    path loss.  Never exceeds ``rate_sd_mimo``.
    """
    V = _check(u, V, ch, snr)
    N = ch.N
    H = ch.channel(u, u)
    sign, logabs = np.linalg.slogdet(H)
    if sign == 0:
        return 0.0
    log_num = N * math.log(snr * ch.gamma(u, u)) + 2.0 * logabs
    Ht = _interference_matrix(u, V, ch, pooled_gamma=True)
    log_den = spd_logdet(np.eye(N) + snr * (Ht @ Ht.conj().T))
    return float(np.logaddexp(0.0, log_num - log_den)) / LN2


_RATE = {"siso": rate_sd_siso, "mimo": rate_sd_mimo, "mimo_lb": rate_sd_mimo_lb}


def sum_rate(V: ActiveSet, ch: ChannelRealization, snr: float, mode: str = "siso") -> RateReport:
    if mode not in _RATE:
        raise ConfigError(f"mode: expected one of {MODES}, got {mode!r}")
    if mode == "siso" and ch.N != 1:
        raise ConfigError("mode 'siso' needs a single-antenna realization")
    V = as_active_set(V, ch.n)
    per_user = {u: _RATE[mode](u, V, ch, snr) for u in V}
    return RateReport(per_user, float(math.fsum(per_user.values())), float(snr))


def siso_rates_batch(power, snr):
    """Per-user rates for a stack of SISO groups.

    ``power[..., u, v]`` is gamma_uv |H_uv|^2 inside each K-user group; the
    result has shape ``power.shape[:-1]``.
    """
    P = np.asarray(power, dtype=float)
    direct = np.einsum("...ii->...i", P)
    interference = P.sum(axis=-1) - direct
    return np.log1p(direct / (interference + 1.0 / snr)) / LN2


def mimo_rates_batch(gains, gamma, snr):
    """Per-user rates for a stack of MIMO groups.

    ``gains[..., u, v, :, :]`` is H_uv inside each K-user group and
    ``gamma[..., u, v]`` the matching path loss.
    """
    G = np.asarray(gains, dtype=complex)
    K, N = G.shape[-3], G.shape[-1]
    gamma = np.broadcast_to(np.asarray(gamma, dtype=float), G.shape[:-2])
    eye = np.eye(N)
    out = np.empty(G.shape[:-4] + (K,))
    for u in range(K):
        Hd = G[..., u, u, :, :]
        B = np.broadcast_to(eye, Hd.shape).astype(complex)
        for v in range(K):
            if v != u:
                Hv = G[..., u, v, :, :]
                B = B + (snr * gamma[..., u, v])[..., None, None] * (Hv @ np.conj(np.swapaxes(Hv, -1, -2)))
        L = cholesky(B)
        Y = np.linalg.solve(L, Hd)
        M = eye + (snr * gamma[..., u, u])[..., None, None] * (np.conj(np.swapaxes(Y, -1, -2)) @ Y)
        out[..., u] = np.maximum(spd_logdet(M) / LN2, 0.0)
    return out
