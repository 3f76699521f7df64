import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from kfree import _config
from kfree.exceptions import OutOfRangeError, SieveLimitError
from kfree.sieve import (
    Factorization,
    big_omega,
    build_sieve,
    ceil_root,
    count_squarefree,
    count_squarefree_coprime,
    dirichlet_convolution,
    factorize,
    floor_root,
    g_weight,
    is_kfree,
    mobius,
    multiplicative_table,
    primes_up_to,
    shared_sieve,
    squarefree_counts,
    tau,
)


def test_mu_table_small():
    s = build_sieve(10)
    assert s.mu[1:].tolist() == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]


def test_limit_one():
    s = build_sieve(1)
    assert s.mu[1] == 1
    assert s.primes.size == 0
    assert s.mobius(1) == 1


def test_spf_invariants():
    s = build_sieve(5000)
    for n in range(2, 5001):
        p = int(s.spf[n])
        assert n % p == 0
        assert oracles.trial_factor(p) == {p: 1}


def test_mu_matches_trial_division_random():
    s = shared_sieve(10**6)
    rng = random.Random(1)
    for n in [rng.randrange(1, 10**6 + 1) for _ in range(1000)]:
        assert s.mobius(n) == oracles.mu(n)


@pytest.mark.slow
def test_mu_matches_trial_division_at_1e8():
    s = build_sieve(10**8)
    rng = random.Random(7)
    for n in [rng.randrange(1, 10**8 + 1) for _ in range(1000)]:
        assert s.mobius(n) == oracles.mu(n)
    del s


def test_memory_budget():
    with pytest.raises(SieveLimitError):
        build_sieve(10**6, memory_budget=10**5)


def test_configured_limit(monkeypatch):
    _config.set_sieve_limit(1000)
    try:
        with pytest.raises(SieveLimitError):
            build_sieve(2000)
        with pytest.raises(SieveLimitError):
            count_squarefree(5000)
    finally:
        _config.set_sieve_limit(None)
    monkeypatch.setenv(_config.SIEVE_LIMIT_ENV, "500")
    assert _config.sieve_limit() == 500


def test_pointwise_examples():
    assert mobius(30) == -1
    assert mobius(12) == 0
    assert mobius(1) == 1
    assert not is_kfree(8, 3)
    assert is_kfree(8, 4)
    assert tau(12) == 6
    assert big_omega(12) == 3
    assert factorize(360).factors == ((2, 3), (3, 2), (5, 1))


def test_factorization_record():
    f = Factorization(12, ((2, 2), (3, 1)))
    assert f.radical == 6 and f.omega == 2 and f.big_omega == 3
    assert f.tau() == 6 and f.mobius() == 0
    with pytest.raises(ValueError):
        Factorization(12, ((3, 1), (2, 2)))
    with pytest.raises(ValueError):
        Factorization(13, ((2, 2), (3, 1)))


def test_out_of_range():
    with pytest.raises(OutOfRangeError):
        mobius(0)
    with pytest.raises(OutOfRangeError):
        count_squarefree(0.5)


def test_trial_division_fallback_agrees_with_sieve():
    s = shared_sieve(1 << 16)
    big = 999_983 * 1_000_003
    assert factorize(big).factors == ((999_983, 1), (1_000_003, 1))
    with pytest.raises(OutOfRangeError):
        factorize(10**15 + 37)
    for n in range(1, 2000):
        assert factorize(n) == factorize(n, s)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=10**6))
def test_mobius_property(n):
    assert mobius(n) == oracles.mu(n)
    assert big_omega(n) == oracles.big_omega(n)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=10**5), st.integers(min_value=2, max_value=6))
def test_kfree_monotone_in_k(n, k):
    assert is_kfree(n, k) == oracles.is_kfree(n, k)
    if is_kfree(n, k):
        assert is_kfree(n, k + 1)


def test_tau_against_divisor_loop():
    for n in range(1, 400):
        assert tau(n) == oracles.tau(n)


def test_count_squarefree_examples():
    assert count_squarefree(10) == 7
    assert count_squarefree(1) == 1
    assert count_squarefree(10.9) == 7
    q = count_squarefree(10**6)
    assert q == 607926
    assert abs(q - 10**6 * 6 / math.pi**2) < 1.5e3


def test_count_squarefree_coprime_examples():
    assert count_squarefree_coprime(10, 1) == 7
    # odd squarefree numbers up to 10: 1, 3, 5, 7
    assert count_squarefree_coprime(10, 2) == len(oracles.squarefree_upto(10, 2)) == 4
    assert count_squarefree_coprime(10**5, 6) == len(oracles.squarefree_upto(10**5, 6))


def test_count_squarefree_inclusion_exclusion():
    xs = list(range(1, 3000)) + [10**4, 54321, 10**5]
    assert squarefree_counts(xs) == [oracles.count_squarefree_ie(x) for x in xs]


def test_segment_size_does_not_matter():
    xs = [1, 17, 999, 12345, 99999]
    assert squarefree_counts(xs, segment_size=97) == squarefree_counts(xs)
    assert squarefree_counts(xs, 30, segment_size=1000) == [len(oracles.squarefree_upto(x, 30)) for x in xs]


def test_g_weight():
    assert g_weight(1, 7) == 1
    assert g_weight(4, 2) == 1
    assert g_weight(3, 2) == 0
    assert g_weight(8, 6) == -1
    for c in range(1, 300):
        for a in (1, 2, 6, 30, 49):
            assert g_weight(c, a) == oracles.g_weight(c, a)


def test_convolution_identity_small():
    n = 600
    mu2 = build_sieve(n).mu.astype(np.int64) ** 2
    for a in (1, 4, 12, 35):
        g = np.array([0] + [g_weight(c, a) for c in range(1, n + 1)])
        lhs = dirichlet_convolution(g, mu2)
        assert all(lhs[m] == mu2[m] * (math.gcd(m, a) == 1) for m in range(1, n + 1))


def test_multiplicative_table():
    t = multiplicative_table(2000, lambda p: 1.0 / p)
    for n in range(1, 2001):
        f = oracles.trial_factor(n)
        want = 0.0 if any(e > 1 for e in f.values()) else 1.0 / math.prod(f)
        assert t[n] == pytest.approx(want, rel=1e-14)
    t3 = multiplicative_table(2000, lambda p: p, max_exponent=2)
    assert t3[12] == 6 and t3[8] == 0 and t3[4] == 2


def test_roots_and_primes():
    assert floor_root(26, 2) == 5 and ceil_root(26, 2) == 6
    assert floor_root(27, 3) == 3 and ceil_root(27, 3) == 3
    assert floor_root(10**30, 3) == 10**10
    assert primes_up_to(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
