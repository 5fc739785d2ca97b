"""Network configurations, Rayleigh channel draws and active sets.

User indices are 1-based everywhere in the public API, matching the usual
``A(n) = {1, ..., n}`` labelling; the gain tensor itself is indexed from 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from .errors import ConfigError

PATHLOSS_MODELS = ("unit", "loguniform")


@dataclass(frozen=True)
class PathLoss:
    """Path-loss model tag and its parameters.

    ``unit`` gives gamma = 1 on every link.  ``loguniform`` draws each
    gamma_{u,v} independently with log(gamma) uniform on
    [log gamma_min, log gamma_max].
    """

    model: str = "unit"
    gamma_min: float = 1.0
    gamma_max: float = 1.0

    def __post_init__(self):
        if self.model not in PATHLOSS_MODELS:
            raise ConfigError(f"pathloss.model: unknown model {self.model!r}")
        if not (self.gamma_min > 0 and self.gamma_max > 0):
            raise ConfigError("pathloss: gamma values must be positive")
        if not (math.isfinite(self.gamma_min) and math.isfinite(self.gamma_max)):
            raise ConfigError("pathloss: gamma values must be finite")
        if self.gamma_min > self.gamma_max:
            raise ConfigError("pathloss: gamma_min exceeds gamma_max")

    def matrix(self, n, seed):
        if self.model == "unit":
            return np.ones((n, n))
        rng = _rng.stream(seed, _rng.PATHLOSS)
        lo, hi = math.log(self.gamma_min), math.log(self.gamma_max)
        return np.exp(rng.uniform(lo, hi, size=(n, n)))

    def to_dict(self):
        return {"model": self.model, "gamma_min": self.gamma_min, "gamma_max": self.gamma_max}


@dataclass(frozen=True)
class NetworkConfig:
    n: int
    K: int
    N: int = 1
    pathloss: PathLoss = field(default_factory=PathLoss)
    seed: int = 0

    def __post_init__(self):
        for name in ("n", "K", "N"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name}: expected an integer, got {value!r}")
            if value < 1:
                raise ConfigError(f"{name}: must be >= 1, got {value}")
        if self.K > self.n:
            raise ConfigError(f"K: must not exceed n (K={self.K}, n={self.n})")
        if not isinstance(self.pathloss, PathLoss):
            raise ConfigError("pathloss: expected a PathLoss instance")
        _rng.check_seed(self.seed)


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Gains ``H[u, v, b, a]`` from antenna ``a`` of transmitter v to antenna
    ``b`` of receiver u, plus the path-loss matrix ``gamma[u, v]``."""

    gains: np.ndarray
    pathloss: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=complex)
        if g.ndim != 4 or g.shape[0] != g.shape[1] or g.shape[2] != g.shape[3]:
            raise ConfigError(f"gains: expected shape (n, n, N, N), got {g.shape}")
        gamma = np.asarray(self.pathloss, dtype=float)
        if gamma.shape != g.shape[:2]:
            raise ConfigError(f"pathloss: expected shape {g.shape[:2]}, got {gamma.shape}")
        if not np.all(gamma > 0):
            raise ConfigError("pathloss: all gamma values must be positive")
        object.__setattr__(self, "gains", _frozen(g))
        object.__setattr__(self, "pathloss", _frozen(gamma))

    @property
    def n(self):
        return self.gains.shape[0]

    @property
    def N(self):
        return self.gains.shape[2]

    def channel(self, u, v):
        """N x N matrix H_{u,v} (1-based user indices)."""
        return self.gains[u - 1, v - 1]

    def gamma(self, u, v):
        return float(self.pathloss[u - 1, v - 1])

    def power(self, u, v):
        """|H_{u,v}|^2 for single-antenna realizations."""
        if self.N != 1:
            raise ConfigError("power() is defined for N = 1 only")
        return float(abs(self.gains[u - 1, v - 1, 0, 0]) ** 2)

    def is_finite(self):
        return bool(np.all(np.isfinite(self.gains)))


@dataclass(frozen=True)
class ActiveSet:
    """K distinct active users out of ``n``; members keep the given order."""

    members: tuple
    n: int

    def __post_init__(self):
        members = tuple(int(m) for m in self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise ConfigError("active set must not be empty")
        if len(set(members)) != len(members):
            raise ConfigError(f"active set has repeated members: {members}")
        bad = [m for m in members if not 1 <= m <= self.n]
        if bad:
            raise ConfigError(f"active set members out of range [1, {self.n}]: {bad}")

    @property
    def K(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, u):
        return u in self.members

    def others(self, u):
        return [v for v in self.members if v != u]


def as_active_set(V, n):
    if isinstance(V, ActiveSet):
        if V.n != n:
            return ActiveSet(V.members, n)
        return V
    return ActiveSet(tuple(V), n)


def sample_network(config: NetworkConfig, trial_id: int) -> ChannelRealization:
    """Draw one block-fading realization; a pure function of (seed, trial_id)."""
    if not isinstance(config, NetworkConfig):
        raise ConfigError("sample_network expects a NetworkConfig")
    if trial_id < 0:
        raise ConfigError(f"trial_id: must be non-negative, got {trial_id}")
    rng = _rng.stream(config.seed, _rng.NETWORK, trial_id)
    n, N = config.n, config.N
    gains = _rng.complex_normal(rng, (n, n, N, N))
    return ChannelRealization(gains, config.pathloss.matrix(n, config.seed))


def active_set_partition(n: int, K: int) -> list[ActiveSet]:
    """Disjoint groups {K(i-1)+1, ..., Ki}, i = 1..floor(n/K); leftovers dropped."""
    if K < 1 or n < 1:
        raise ConfigError(f"n and K must be >= 1 (n={n}, K={K})")
    if K > n:
        raise ConfigError(f"K: must not exceed n (K={K}, n={n})")
    return [ActiveSet(tuple(range(K * i + 1, K * (i + 1) + 1)), n) for i in range(n // K)]


def antenna_pairing_transform(ch: ChannelRealization) -> ChannelRealization:
    """Split every N-antenna user into N single-antenna users.

    Derived user (v, a) is 1-based index ``(v - 1) * N + a``.  The gain from
    derived transmitter (v, a) to derived receiver (u, b) is H_{u,v}[b, a]
    and carries path loss gamma_{u,v}.
    """
    n, N = ch.n, ch.N
    # (u, v, b, a) -> (u, b, v, a) so rows run over (u, b) and columns over (v, a)
    g = ch.gains.transpose(0, 2, 1, 3).reshape(n * N, n * N)
    gamma = np.repeat(np.repeat(ch.pathloss, N, axis=0), N, axis=1)
    return ChannelRealization(g[:, :, None, None], gamma)
