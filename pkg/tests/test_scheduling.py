import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_channel
from nkic.errors import ConfigError
from nkic.netmodel import NetworkConfig, active_set_partition, sample_network
from nkic.scheduling import objective_value, select_exhaustive, select_partitioned, select_random


def _siso_sum(P, idx, snr):
    # independent rate path: plain numpy on the power matrix
    total = 0.0
    for u in idx:
        interf = sum(P[u, v] for v in idx if v != u)
        total += math.log2(1 + P[u, u] / (interf + 1 / snr))
    return total


def test_exhaustive_n_equals_k():
    ch = sample_network(NetworkConfig(3, 3, seed=0), 0)
    res = select_exhaustive(ch, 100.0, 3)
    assert res.set.members == (1, 2, 3) and res.candidates_evaluated == 1


def test_exhaustive_matches_reenumeration():
    for t in range(10):
        ch = sample_network(NetworkConfig(4, 2, seed=21), t)
        P = np.abs(ch.gains[:, :, 0, 0]) ** 2
        scores = {c: _siso_sum(P, [i - 1 for i in c], 50.0) for c in combinations(range(1, 5), 2)}
        best = max(scores, key=lambda c: (scores[c], [-i for i in c]))
        res = select_exhaustive(ch, 50.0, 2)
        assert res.set.members == best
        assert res.objective == pytest.approx(scores[best], rel=1e-12)
        assert res.candidates_evaluated == 6


def test_exhaustive_tie_goes_to_lexicographic_first():
    ch = make_channel(np.eye(4))
    assert select_exhaustive(ch, 10.0, 2).set.members == (1, 2)
    assert select_partitioned(ch, 10.0, 2).set.members == (1, 2)


def test_exhaustive_cap():
    ch = sample_network(NetworkConfig(30, 15, seed=0), 0)
    with pytest.raises(ConfigError, match="select_partitioned"):
        select_exhaustive(ch, 10.0, 15)
    with pytest.raises(ConfigError):
        select_exhaustive(ch, 10.0, 2, objective="max_min")


def test_partitioned_dominant_group():
    g = np.full((4, 4), 0.3)
    g[0, 0] = g[1, 1] = 10.0
    g[0, 1] = g[1, 0] = 0.0
    res = select_partitioned(make_channel(g), 100.0, 2)
    assert res.set.members == (1, 2) and res.candidates_evaluated == 2
    res = select_partitioned(make_channel(g), 100.0, 4)
    assert res.set.members == (1, 2, 3, 4)


def test_partitioned_per_group_oracle():
    ch = sample_network(NetworkConfig(6, 2, seed=4), 0)
    P = np.abs(ch.gains[:, :, 0, 0]) ** 2
    per = [_siso_sum(P, [0, 1], 30.0), _siso_sum(P, [2, 3], 30.0), _siso_sum(P, [4, 5], 30.0)]
    res = select_partitioned(ch, 30.0, 2)
    assert res.objective == pytest.approx(max(per), rel=1e-12)
    assert res.set.members == ((1, 2), (3, 4), (5, 6))[int(np.argmax(per))]


def test_objective_recomputes():
    ch = sample_network(NetworkConfig(6, 3, seed=2), 1)
    for obj in ("sum_rate_siso", "sum_rate_mimo", "x_order"):
        res = select_exhaustive(ch, 1e3, 3, obj)
        assert res.objective == objective_value(res.set, ch, 1e3, obj)


def test_random_examples():
    assert select_random(5, 5, 3).members == (1, 2, 3, 4, 5)
    assert select_random(10, 3, 7) == select_random(10, 3, 7)
    assert len({select_random(10, 3, 7, draw=d).members for d in range(20)}) > 1
    with pytest.raises(ConfigError):
        select_random(2, 3, 0)


def test_random_uniformity():
    counts = np.zeros(10)
    draws = 100_000
    for d in range(draws):
        for m in select_random(10, 2, 99, d):
            counts[m - 1] += 1
    assert np.all(np.abs(counts / draws - 0.2) < 0.01)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 8), st.integers(1, 4), st.integers(0, 2**32),
       st.sampled_from(["sum_rate_siso", "x_order"]), st.floats(2.0, 1e6))
def test_dominance_chain(n, K, seed, objective, snr):
    if K > n:
        K = n
    ch = sample_network(NetworkConfig(n, K, seed=seed), 0)
    ex = select_exhaustive(ch, snr, K, objective)
    part = select_partitioned(ch, snr, K, objective)
    groups = [objective_value(g, ch, snr, objective) for g in active_set_partition(n, K)]
    assert ex.objective >= part.objective - 1e-12
    assert part.objective == max(groups)
    assert all(part.objective >= g for g in groups)
    assert min(groups) <= part.objective
    rnd = select_random(n, K, seed)
    assert ex.objective >= objective_value(rnd, ch, snr, objective) - 1e-12


def test_x_order_selection_ignores_common_snr():
    # with orders held fixed the chosen group is the same at any measurement snr
    rng = np.random.default_rng(0)
    alpha = rng.uniform(0, 1.5, (6, 6))
    picks = set()
    for snr in (10.0, 1e3, 1e6):
        ch = make_channel(np.sqrt(snr ** (-alpha)))
        picks.add(select_partitioned(ch, snr, 2, "x_order").set.members)
    assert len(picks) == 1
