"""Sieve-backed arithmetic functions.

Smallest-prime-factor and Möbius tables, factorization, the k-free indicator,
squarefree counting (segmented, so counts reach 10^8 without a full table) and
the small multiplicative helpers the other modules are built from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from . import _config
from .exceptions import OutOfRangeError, SieveLimitError

__all__ = [
    "Factorization",
    "SieveTables",
    "build_sieve",
    "primes_up_to",
    "factorize",
    "mobius",
    "is_kfree",
    "tau",
    "big_omega",
    "count_squarefree",
    "count_squarefree_coprime",
    "squarefree_counts",
    "g_weight",
    "multiplicative_table",
    "dirichlet_convolution",
    "floor_root",
    "ceil_root",
]

# bytes per table entry: spf int32 + mu int8
_BYTES_PER_ENTRY = 5
_CHUNK = 1 << 22


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factorization {self.factors!r}")
            prod *= p**e
            last = p
        if prod != self.n:
            raise ValueError(f"factors multiply to {prod}, not {self.n}")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def omega(self) -> int:
        return len(self.factors)

    @property
    def big_omega(self) -> int:
        return sum(e for _, e in self.factors)

    @property
    def radical(self) -> int:
        return math.prod(self.primes)

    def is_kfree(self, k: int) -> bool:
        return all(e < k for _, e in self.factors)

    def mobius(self) -> int:
        if any(e > 1 for _, e in self.factors):
            return 0
        return -1 if len(self.factors) % 2 else 1

    def tau(self) -> int:
        return math.prod(e + 1 for _, e in self.factors)


def primes_up_to(n: int) -> np.ndarray:
    """All primes ``p <= n`` as an int64 array (plain Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(n + 1, dtype=bool)
    is_p[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if is_p[p]:
            is_p[p * p :: p] = False
    return np.flatnonzero(is_p).astype(np.int64)


class SieveTables:
    """Smallest prime factor and Möbius tables on ``[0, limit]``.

    ``spf[n]`` is the least prime dividing ``n`` for ``n >= 2`` (0 for n < 2);
    ``mu[n]`` is μ(n) for ``n >= 1`` and 0 at index 0.  The arrays are marked
    read-only after construction.
    """

    def __init__(self, limit: int, spf: np.ndarray, mu: np.ndarray):
        if spf.shape != (limit + 1,) or mu.shape != (limit + 1,):
            raise ValueError("table shapes do not match limit")
        spf.setflags(write=False)
        mu.setflags(write=False)
        self.limit = limit
        self.spf = spf
        self.mu = mu

    def __repr__(self):
        return f"SieveTables(limit={self.limit})"

    def _check(self, n: int):
        if not 1 <= n <= self.limit:
            raise OutOfRangeError(f"n={n} outside sieve range [1, {self.limit}]")

    def factorize(self, n: int) -> Factorization:
        self._check(n)
        factors = []
        m = int(n)
        spf = self.spf
        while m > 1:
            p = int(spf[m])
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            factors.append((p, e))
        return Factorization(int(n), tuple(factors))

    def prime_factors(self, n: int) -> list[int]:
        """Distinct primes of ``n`` in increasing order."""
        self._check(n)
        out = []
        m = int(n)
        spf = self.spf
        while m > 1:
            p = int(spf[m])
            out.append(p)
            while m % p == 0:
                m //= p
        return out

    def mobius(self, n: int) -> int:
        self._check(n)
        return int(self.mu[n])

    @property
    def primes(self) -> np.ndarray:
        idx = np.arange(self.limit + 1)
        return idx[(self.spf == idx) & (idx >= 2)]

    def squarefree_factored(self, upto: int | None = None) -> Iterator[tuple[int, list[int]]]:
        """Yield ``(r, primes of r)`` for squarefree ``r <= upto`` in increasing order."""
        upto = self.limit if upto is None else upto
        self._check(upto)
        for r in np.flatnonzero(self.mu[: upto + 1]).tolist():
            yield r, self.prime_factors(r)


def _mu_from_spf(spf: np.ndarray, limit: int) -> np.ndarray:
    # mu(n) = -mu(n/p) if p does not divide n/p, else 0, with p = spf(n).
    # On [lo, 2lo) every n/p < lo, so each doubling block is one vector step.
    mu = np.zeros(limit + 1, dtype=np.int8)
    if limit >= 1:
        mu[1] = 1
    lo = 2
    while lo <= limit:
        hi_block = min(2 * lo, limit + 1)
        for a in range(lo, hi_block, _CHUNK):
            b = min(a + _CHUNK, hi_block)
            n = np.arange(a, b, dtype=np.int64)
            p = spf[a:b].astype(np.int64)
            m = n // p
            mu[a:b] = np.where(m % p == 0, 0, -mu[m])
        lo = hi_block
    return mu


def build_sieve(limit: int, memory_budget: int | None = None) -> SieveTables:
    """Build smallest-prime-factor and Möbius tables up to ``limit``.

    Raises :class:`SieveLimitError` when ``limit`` exceeds the configured sieve
    limit or the tables would not fit in the memory budget (default
    ``_config.MEMORY_BUDGET``).
    """
    limit = int(limit)
    if limit < 1:
        raise OutOfRangeError("sieve limit must be >= 1")
    if limit > _config.sieve_limit():
        raise SieveLimitError(f"sieve up to {limit} exceeds the configured limit {_config.sieve_limit()}")
    budget = _config.MEMORY_BUDGET if memory_budget is None else memory_budget
    need = _BYTES_PER_ENTRY * (limit + 1) + 16 * _CHUNK
    if need > budget:
        raise SieveLimitError(
            f"sieve up to {limit} needs ~{need / 2**20:.0f} MiB, budget is {budget / 2**20:.0f} MiB"
        )
    spf = np.zeros(limit + 1, dtype=np.int32)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            view = spf[p * p :: p]
            view[view == 0] = p
    unmarked = np.flatnonzero(spf == 0)
    unmarked = unmarked[unmarked >= 2]
    spf[unmarked] = unmarked
    return SieveTables(limit, spf, _mu_from_spf(spf, limit))


@lru_cache(maxsize=4)
def shared_sieve(limit: int) -> SieveTables:
    """Cached :func:`build_sieve`; tables are immutable so sharing is safe."""
    return build_sieve(limit)


def _trial_factor(n: int) -> Factorization:
    if n > _config.TRIAL_DIVISION_LIMIT:
        raise OutOfRangeError(
            f"n={n} exceeds trial-division limit {_config.TRIAL_DIVISION_LIMIT}"
        )
    factors = []
    m = n
    for p in (2, 3):
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        if e:
            factors.append((p, e))
    p = 5
    step = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            factors.append((p, e))
        p += step
        step = 6 - step
    if m > 1:
        factors.append((m, 1))
    return Factorization(n, tuple(factors))


def factorize(n: int, sieve: SieveTables | None = None) -> Factorization:
    """Factor ``n``: table lookup when a sieve covers it, trial division otherwise."""
    n = int(n)
    if n < 1:
        raise OutOfRangeError(f"cannot factor n={n}")
    if sieve is not None and n <= sieve.limit:
        return sieve.factorize(n)
    return _trial_factor(n)


def mobius(n: int, sieve: SieveTables | None = None) -> int:
    n = int(n)
    if sieve is not None and 1 <= n <= sieve.limit:
        return int(sieve.mu[n])
    return factorize(n, sieve).mobius()


def is_kfree(n: int, k: int, sieve: SieveTables | None = None) -> bool:
    """μ_k(n): true iff no prime k-th power divides ``n``."""
    if k < 1:
        raise OutOfRangeError("k must be >= 1")
    return factorize(n, sieve).is_kfree(k)


def tau(n: int, sieve: SieveTables | None = None) -> int:
    return factorize(n, sieve).tau()


def big_omega(n: int, sieve: SieveTables | None = None) -> int:
    return factorize(n, sieve).big_omega


def floor_root(n: int, k: int) -> int:
    """Largest integer ``t`` with ``t**k <= n``."""
    if n < 0:
        raise OutOfRangeError("floor_root of a negative number")
    if n < 2:
        return n
    t = int(round(n ** (1.0 / k)))
    while t**k > n:
        t -= 1
    while (t + 1) ** k <= n:
        t += 1
    return t


def ceil_root(n: int, k: int) -> int:
    """Smallest integer ``t`` with ``t**k >= n``."""
    t = floor_root(n, k)
    return t if t**k == n else t + 1


def _floor_arg(x) -> int:
    n = math.floor(x)
    if n < 1:
        raise OutOfRangeError(f"x={x} must be >= 1")
    limit = _config.sieve_limit()
    if n > limit:
        raise SieveLimitError(f"floor(x)={n} exceeds sieve limit {limit}")
    return n


def squarefree_counts(xs: Iterable, coprime_to: int = 1, segment_size: int | None = None) -> list[int]:
    """Exact counts ``#{n <= x : n squarefree, gcd(n, a) = 1}`` for every ``x``.

    One segmented pass up to ``max(xs)``: each block is cleared at multiples of
    p² (and of the primes of ``coprime_to``) and the survivors counted.
    """
    ns = [_floor_arg(x) for x in xs]
    if not ns:
        return []
    if coprime_to < 1:
        raise OutOfRangeError("coprime_to must be >= 1")
    seg = segment_size or _config.SEGMENT_SIZE
    top = max(ns)
    squares = [int(p) ** 2 for p in primes_up_to(math.isqrt(top))]
    excluded = list(factorize(coprime_to).primes)
    queries = sorted(set(ns))
    found: dict[int, int] = {}
    qi = 0
    running = 0
    lo = 1
    while lo <= top:
        hi = min(lo + seg, top + 1)
        block = np.ones(hi - lo, dtype=bool)
        for sq in squares:
            if sq >= hi:
                break
            block[(-lo) % sq :: sq] = False
        for p in excluded:
            block[(-lo) % p :: p] = False
        if qi < len(queries) and queries[qi] < hi:
            cum = np.cumsum(block, dtype=np.int64)
            while qi < len(queries) and queries[qi] < hi:
                found[queries[qi]] = running + int(cum[queries[qi] - lo])
                qi += 1
        running += int(np.count_nonzero(block))
        lo = hi
    return [found[n] for n in ns]


def count_squarefree(x) -> int:
    """Σ_{n <= x} μ(n)², by segmented enumeration."""
    return squarefree_counts([x])[0]


def count_squarefree_coprime(x, a: int) -> int:
    """Σ_{n <= x, gcd(n, a) = 1} μ(n)²."""
    return squarefree_counts([x], coprime_to=int(a))[0]


def g_weight(c: int, a: int) -> int:
    """g_a(c) = (-1)^Ω(c) if every prime of ``c`` divides ``a``, else 0."""
    if c < 1 or a < 1:
        raise OutOfRangeError("c and a must be positive")
    f = factorize(c)
    if any(a % p for p in f.primes):
        return 0
    return -1 if f.big_omega % 2 else 1


def multiplicative_table(
    limit: int,
    prime_value: Callable[[np.ndarray], np.ndarray],
    max_exponent: int = 1,
) -> np.ndarray:
    """Float table of ``a[n] = ∏_{p|n} prime_value(p)`` on ``(max_exponent+1)``-free n.

    The value depends only on the radical of ``n``; entries for ``n`` divisible
    by some p^(max_exponent+1) are 0, as is ``a[0]``.  ``prime_value`` is called
    on float arrays of primes.
    """
    if limit < 1:
        raise OutOfRangeError("limit must be >= 1")
    vals = np.ones(limit + 1)
    vals[0] = 0.0
    rem = np.arange(limit + 1, dtype=np.int64)
    ok = np.ones(limit + 1, dtype=bool)
    ok[0] = False
    root = math.isqrt(limit)
    small = primes_up_to(root)
    fsmall = np.asarray(prime_value(small.astype(float)), dtype=float)
    for p, fp in zip(small.tolist(), fsmall.tolist()):
        vals[p::p] *= fp
        pe = p
        while pe <= limit:
            rem[pe::pe] //= p
            pe *= p
        bad = p ** (max_exponent + 1)
        if bad <= limit:
            ok[bad::bad] = False
    # what is left is 1 or a single prime above sqrt(limit)
    big = rem > 1
    vals[big] *= np.asarray(prime_value(rem[big].astype(float)), dtype=float)
    vals[~ok] = 0.0
    return vals


def dirichlet_convolution(f: Sequence, g: Sequence) -> np.ndarray:
    """``(f*g)(n) = Σ_{cd=n} f(c) g(d)`` for ``1 <= n < len(f)``; index 0 unused."""
    f = np.asarray(f)
    g = np.asarray(g)
    n = min(len(f), len(g)) - 1
    out = np.zeros(n + 1, dtype=np.result_type(f, g))
    for c in range(1, n + 1):
        fc = f[c]
        if fc:
            m = n // c
            out[c :: c][:m] += fc * g[1 : m + 1]
    return out
