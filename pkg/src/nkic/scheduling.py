"""Active-set selection: exhaustive search, disjoint-partition search, random.

Objectives are the sum rate (bits) of single-user decoding or, for
``x_order``, the DoF statistic X of the set computed from exponential orders
at the measurement SNR.  Ties always go to the earliest candidate in
enumeration order, so results never depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from . import _rng
from .errors import ConfigError
from .exporders import order_sample
from .netmodel import ActiveSet, ChannelRealization, active_set_partition
from .rates import sum_rate

OBJECTIVES = ("sum_rate_siso", "sum_rate_mimo", "x_order")
EXHAUSTIVE_CAP = 10**6


@dataclass(frozen=True)
class SelectionResult:
    set: ActiveSet
    objective: float
    strategy: str
    candidates_evaluated: int


def objective_value(V: ActiveSet, ch: ChannelRealization, snr: float, objective: str) -> float:
    if objective == "sum_rate_siso":
        return sum_rate(V, ch, snr, "siso").sum
    if objective == "sum_rate_mimo":
        return sum_rate(V, ch, snr, "mimo").sum
    if objective == "x_order":
        return order_sample(ch, V, snr).x
    raise ConfigError(f"objective: expected one of {OBJECTIVES}, got {objective!r}")


def _argmax(candidates, ch, snr, objective, strategy):
    best, best_val, count = None, -math.inf, 0
    for V in candidates:
        val = objective_value(V, ch, snr, objective)
        count += 1
        if val > best_val:
            best, best_val = V, val
    return SelectionResult(best, best_val, strategy, count)


def select_exhaustive(ch: ChannelRealization, snr: float, K: int, objective: str = "sum_rate_siso",
                      cap: int = EXHAUSTIVE_CAP) -> SelectionResult:
    n = ch.n
    if not 1 <= K <= n:
        raise ConfigError(f"K: need 1 <= K <= n (K={K}, n={n})")
    if objective not in OBJECTIVES:
        raise ConfigError(f"objective: expected one of {OBJECTIVES}, got {objective!r}")
    total = math.comb(n, K)
    if total > cap:
        raise ConfigError(
            f"exhaustive search over C({n},{K}) = {total} subsets exceeds the cap of {cap}; "
            "use select_partitioned instead"
        )
    cands = (ActiveSet(c, n) for c in combinations(range(1, n + 1), K))
    return _argmax(cands, ch, snr, objective, "exhaustive")


def select_partitioned(ch: ChannelRealization, snr: float, K: int,
                       objective: str = "sum_rate_siso") -> SelectionResult:
    """Best of the floor(n/K) disjoint groups; needs only within-group CSI."""
    if objective not in OBJECTIVES:
        raise ConfigError(f"objective: expected one of {OBJECTIVES}, got {objective!r}")
    return _argmax(active_set_partition(ch.n, K), ch, snr, objective, "partitioned")


def select_random(n: int, K: int, seed: int, draw: int = 0) -> ActiveSet:
    """Uniform K-subset of {1..n}; deterministic in (seed, draw)."""
    if not 1 <= K <= n:
        raise ConfigError(f"K: need 1 <= K <= n (K={K}, n={n})")
    rng = _rng.stream(seed, _rng.SELECT, draw)
    picked = rng.choice(n, size=K, replace=False)
    return ActiveSet(tuple(sorted(int(i) + 1 for i in picked)), n)
