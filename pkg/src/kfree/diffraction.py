"""Diffraction intensity of the k-free integers near the origin.

Three evaluators of the same quantity:

* :func:`z_direct` sums the Bragg peaks of Baake, Moody and Pleasants in
  (0, ε]:  Z_k(ε) = Σ_q μ_{k+1}(q) w_k(q) #{m <= qε : gcd(m, q) = 1},
  with w_k(q) = ∏_{p|q} (p^k - 1)^-2.
* :func:`ztilde_definition` is the same sum with ε replaced by 1/N, i.e.
  Z̃_k(N).
* :func:`ztilde_via_zk` rebuilds Z̃_k(N) as Σ_b z_k(Nb) from the factorised
  tail sums z_k(c) = ξ_k Σ_{t >= c^{1/k}} |μ(t)| H_k(t), where
  H_k(t) = ∏_{p|t} 1/(p^{2k} - 2p^k).

The Bragg sums are enumerated by the radical r = rad(q): w_k(q) only depends
on r, and for r > ``rad_max`` the coprime count is replaced by its mean value
qε·φ(r)/r.  Summed over all q with a given radical, the mean values telescope
to ε·(ζ(k) - Σ_{r <= rad_max} ∏_{p|r} 1/(p^k - 1)), and the replacement error
is at most Σ_{r > rad_max} ∏_{p|r} 2k/(p^k - 1)², an Euler product minus a
partial sum.  ``complete=False`` drops the mean-value completion and bounds
the omitted peaks by the absolute-convergence majorant instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Optional

import numpy as np
from mpmath import mpf

from .exceptions import CutoffError, OutOfRangeError
from .sieve import (
    ceil_root,
    floor_root,
    multiplicative_table,
    shared_sieve,
)
from .special import (
    RationalFactor,
    TailBounded,
    euler_product_rational,
    xi_factor,
    zeta_real,
    _check_k,
)

__all__ = [
    "METHODS",
    "IntensityResult",
    "SandwichReport",
    "bragg_weight",
    "z_direct",
    "ztilde_definition",
    "zk_factorised",
    "zk_definition",
    "ztilde_via_zk",
    "sandwich_check",
]

METHODS = ("direct-bmp", "ztilde-definition", "ztilde-via-zk")

EPS = np.finfo(float).eps
RAD_CAP = 1 << 20
# relative error of a multiplicative-table entry (a few roundings per prime)
_TABLE_REL_ERR = 64 * EPS
_AUX_TAIL = 1e-30


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        # shortest repr, so 0.001 means 1/1000 rather than its binary neighbour
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a rational")


def _check_positive_int(name, n) -> int:
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise OutOfRangeError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


# ---------------------------------------------------------------------------
# per-k auxiliary products


def _poly(*terms):
    """Polynomial coefficients from (coefficient, power) pairs."""
    deg = max(p for _, p in terms)
    out = [0] * (deg + 1)
    for c, p in terms:
        out[p] += c
    return tuple(out)


def _mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


@lru_cache(maxsize=None)
def _aux(k: int) -> dict:
    one_mk = _poly((1, 0), (-1, k))  # 1 - x^k
    one_m2k = _poly((1, 0), (-2, k))  # 1 - 2x^k
    sq = _mul(one_mk, one_mk)
    factors = {
        # Σ_t |μ(t)| H_k(t) t^k = ∏ (1 + 1/(p^k - 2))
        "G": RationalFactor(one_mk, one_m2k, f"G_{k}"),
        # sup over squarefree t of ∏_{p|t} (1 - 2p^-k)^-1
        "C": RationalFactor((1,), one_m2k, f"C_{k}"),
        # Σ_q μ_{k+1}(q) w_k(q) 2^ω(q) = ∏ (1 + 2k/(p^k - 1)²)
        "E": RationalFactor(_poly((1, 0), (-2, k), (1 + 2 * k, 2 * k)), sq, f"E_{k}"),
        # Σ_q μ_{k+1}(q) w_k(q) q = ∏ (1 + p/((p - 1)(p^k - 1)))
        "M": RationalFactor(_poly((1, 0), (-1, 1), (1, k + 1)), _mul((1, -1), one_mk), f"M_{k}"),
    }
    out = {name: euler_product_rational(f, _AUX_TAIL) for name, f in factors.items()}
    out["xi"] = euler_product_rational(xi_factor(k), _AUX_TAIL)
    out["zeta_k"] = zeta_real(k, _AUX_TAIL)
    return out


def _upper(tb: TailBounded) -> float:
    return math.nextafter(float(tb.value + tb.tail), math.inf)


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class IntensityResult:
    """One intensity evaluation.

    ``explicit`` is the part that was summed term by term (radical-truncated
    Bragg sum, or Σ_{b <= b_max} z_k(Nb)); ``value`` adds the completion.
    """

    value: TailBounded
    method: str
    k: int
    epsilon: Optional[Fraction] = None
    N: Optional[int] = None
    cutoffs: Mapping = field(default_factory=dict)
    explicit: Optional[float] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if (self.epsilon is None) == (self.N is None):
            raise ValueError("exactly one of epsilon and N must be set")
        if not self.value.value + self.value.tail >= 0:
            raise ValueError("intensity enclosure lies below zero")

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "k": self.k,
            "value": float(self.value.value),
            "tail": float(self.value.tail),
            "cutoffs": dict(self.cutoffs),
            "explicit": self.explicit,
        }
        if self.epsilon is not None:
            d["epsilon"] = str(self.epsilon)
        else:
            d["N"] = self.N
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "IntensityResult":
        eps = d.get("epsilon")
        return cls(
            value=TailBounded(d["value"], d["tail"]),
            method=d["method"],
            k=int(d["k"]),
            epsilon=None if eps is None else Fraction(eps),
            N=d.get("N"),
            cutoffs=dict(d.get("cutoffs", {})),
            explicit=d.get("explicit"),
        )


# ---------------------------------------------------------------------------
# Bragg sums enumerated by radical


def bragg_weight(q: int, k: int) -> Fraction:
    """Exact peak weight ∏_{p|q} (p^k - 1)^-2."""
    from .sieve import factorize

    q = _check_positive_int("q", q)
    out = Fraction(1)
    for p in factorize(q).primes:
        out /= (p**k - 1) ** 2
    return out


@lru_cache(maxsize=16)
def _radical_tables(k: int, limit: int) -> dict:
    pk = lambda p: p**k - 1.0  # noqa: E731
    return {
        "U": multiplicative_table(limit, lambda p: 1.0 / pk(p)),
        "E": multiplicative_table(limit, lambda p: 2.0 * k / pk(p) ** 2),
        "M": multiplicative_table(limit, lambda p: p / ((p - 1.0) * pk(p))),
    }


def _choose_rad_max(k: int, total: TailBounded, key: str, target: float) -> int:
    """Smallest radical cutoff whose rank-one remainder is below ``target``."""
    bound = _upper(total)
    limit = 1 << 10
    while limit <= RAD_CAP:
        vals = _radical_tables(k, limit)[key]
        rem = bound - np.cumsum(vals) * (1 - _TABLE_REL_ERR)
        hit = np.flatnonzero(rem[1:] <= target)
        if hit.size:
            return int(hit[0]) + 1
        limit <<= 2
    raise CutoffError(f"no radical cutoff <= {RAD_CAP} reaches tail {target:g} for k={k}")


def _partial(k: int, key: str, rad_max: int) -> float:
    limit = max(1 << 10, 1 << (rad_max - 1).bit_length())
    return math.fsum(_radical_tables(k, limit)[key][1 : rad_max + 1].tolist())


def _bragg_sum(k: int, scale: Fraction, rad_max: Optional[int], complete: bool, target: float):
    """Σ_q μ_{k+1}(q) w_k(q) #{m <= q·scale : gcd(m, q) = 1}, enumerated by radical."""
    aux = _aux(k)
    key = "E" if complete else "M"
    if rad_max is None:
        budget = target / 2 if complete else target / (2 * float(scale))
        rad_max = _choose_rad_max(k, aux[key], key, budget)
    rad_max = _check_positive_int("rad_max", rad_max)
    if not complete and rad_max**k * scale < 1:
        raise OutOfRangeError(
            f"rad_max={rad_max}: every peak with radical <= rad_max lies beyond {scale}"
        )
    a, b = scale.numerator, scale.denominator
    sieve = shared_sieve(max(1 << 10, 1 << (rad_max - 1).bit_length()))
    terms = []
    for r, primes in sieve.squarefree_factored(rad_max):
        if r**k * a < b:
            continue
        w = 1.0
        for p in primes:
            w /= (p**k - 1) ** 2
        divisors = [(1, 1)]
        qs = [1]
        for p in primes:
            divisors += [(d * p, -mu) for d, mu in divisors]
            qs = [q * p**e for q in qs for e in range(1, k + 1)]
        inner = 0
        for q in qs:
            x = q * a
            if x < b:
                continue
            inner += sum(mu * (x // (b * d)) for d, mu in divisors)
        if inner:
            terms.append(w * inner)
    explicit = math.fsum(terms)
    # weights carry at most ~2ω+2 roundings each
    rounding = 40 * EPS * explicit
    if complete:
        zk = aux["zeta_k"]
        u_part = _partial(k, "U", rad_max)
        completion = float(scale) * max(float(zk.value) - u_part, 0.0)
        rounding += 40 * EPS * float(scale) * float(zk.value) + float(scale) * float(zk.tail)
        err = max(_upper(aux["E"]) - _partial(k, "E", rad_max) * (1 - _TABLE_REL_ERR), 0.0)
        value = explicit + completion
        tail = err + rounding
    else:
        rem = max(_upper(aux["M"]) - _partial(k, "M", rad_max) * (1 - _TABLE_REL_ERR), 0.0)
        value = explicit
        tail = float(scale) * rem + rounding
    return value, math.nextafter(tail, math.inf), explicit, rad_max


def z_direct(
    k: int,
    epsilon,
    rad_max: Optional[int] = None,
    *,
    complete: bool = True,
    target_tail: float = 1e-12,
) -> IntensityResult:
    """Z_k(ε) from the Bragg-peak sum over (0, ε].

    ``epsilon`` may be a float, string or Fraction; floats are read through
    their shortest decimal form so that ``0.001`` is exactly 1/1000.
    """
    k = _check_k(k)
    eps = _as_fraction(epsilon)
    if not 0 < eps < 1:
        raise OutOfRangeError(f"epsilon must lie in (0, 1), got {epsilon}")
    value, tail, explicit, R = _bragg_sum(k, eps, rad_max, complete, target_tail)
    return IntensityResult(
        TailBounded(value, tail),
        "direct-bmp",
        k,
        epsilon=eps,
        cutoffs={"rad_max": R, "complete": complete},
        explicit=explicit,
    )


def ztilde_definition(
    k: int,
    N: int,
    rad_max: Optional[int] = None,
    *,
    complete: bool = True,
    target_tail: float = 1e-12,
) -> IntensityResult:
    """Z̃_k(N) = Σ_q μ_{k+1}(q) w_k(q) #{m <= q/N : gcd(m, q) = 1}."""
    k = _check_k(k)
    N = _check_positive_int("N", N)
    value, tail, explicit, R = _bragg_sum(k, Fraction(1, N), rad_max, complete, target_tail)
    return IntensityResult(
        TailBounded(value, tail),
        "ztilde-definition",
        k,
        N=N,
        cutoffs={"rad_max": R, "complete": complete},
        explicit=explicit,
    )


# ---------------------------------------------------------------------------
# z_k(c)


@lru_cache(maxsize=8)
def _h_tables(k: int, limit: int):
    """H_k(t) and H_k(t) t^k on squarefree t <= limit (0 elsewhere)."""
    H = multiplicative_table(limit, lambda p: 1.0 / (p ** (2 * k) - 2.0 * p**k))
    Hk = multiplicative_table(limit, lambda p: 1.0 / (p**k - 2.0))
    return H, Hk


def _h_for(k: int, t_max: int):
    limit = max(1 << 10, 1 << (t_max - 1).bit_length())
    H, Hk = _h_tables(k, limit)
    return H[: t_max + 1], Hk[: t_max + 1]


def _h_remainder(k: int, t_max: int) -> float:
    """Upper bound for Σ_{t > t_max} |μ(t)| H_k(t)."""
    return _upper(_aux(k)["C"]) * float(t_max) ** (1 - 2 * k) / (2 * k - 1)


def _t_max_for(k: int, target: float) -> int:
    c = _upper(_aux(k)["C"])
    return max(1, math.ceil((c / ((2 * k - 1) * target)) ** (1.0 / (2 * k - 1))))


def _sum_with_rounding(x: np.ndarray):
    s = float(np.sum(x))
    return s, (math.log2(max(len(x), 2)) + 12) * EPS * float(np.sum(np.abs(x)))


def zk_factorised(
    k: int,
    c: int,
    t_max: Optional[int] = None,
    target_tail: Optional[float] = None,
) -> TailBounded:
    """z_k(c) = ξ_k Σ_{t >= c^{1/k}} |μ(t)| t^{-2k} ∏_{p|t} (1 - 2p^{-k})^{-1}.

    The sum is cut at ``t_max``; the rest is at most
    C_k t_max^{1-2k}/(2k-1) with C_k = ∏_p (1 - 2p^-k)^-1.  By default the
    cut is placed so the tail is 1e-10 of the size c^{-2+1/k} of the value.
    """
    k = _check_k(k)
    c = _check_positive_int("c", c)
    start = ceil_root(c, k)
    if t_max is None:
        target = target_tail if target_tail is not None else 1e-10 * c ** (-2 + 1 / k)
        t_max = max(start, _t_max_for(k, target / 2))
    t_max = _check_positive_int("t_max", t_max)
    if t_max < start:
        raise OutOfRangeError(f"t_max={t_max} below the first index {start} = ceil(c^(1/k))")
    H, _ = _h_for(k, t_max)
    partial, rounding = _sum_with_rounding(H[start:])
    rem = _h_remainder(k, t_max)
    inner = TailBounded(partial + rem / 2, rem / 2 + rounding)
    out = _aux(k)["xi"].to_float() * inner
    return TailBounded(float(out.value), float(out.tail))


@lru_cache(maxsize=4)
def _definition_tables(k: int, q_max: int):
    sieve = shared_sieve(q_max)
    wq = multiplicative_table(q_max, lambda p: 1.0 / (p**k - 1.0) ** 2, max_exponent=k)
    wq2 = multiplicative_table(q_max, lambda p: 2.0 / (p**k - 1.0) ** 2, max_exponent=k)
    return sieve.mu.astype(float), wq, wq2


def zk_definition(k: int, c: int, q_max: Optional[int] = None, target_tail: float = 1e-8) -> TailBounded:
    """z_k(c) from its definition Σ_{r >= c} Σ_d μ(d) μ_{k+1}(dr) ∏_{p|dr} (p^k - 1)^-2.

    Pairs are kept when ``d r <= q_max``.  The omitted pairs have modulus at
    most Σ_{q > q_max} μ_{k+1}(q) w_k(q) 2^ω(q), the Euler product
    ∏ (1 + 2k/(p^k - 1)²) minus its partial sum.  Convergence is slow, so this
    is meant as a check at small c.  Without ``q_max`` the cutoff is grown
    fourfold from 2^16 until the tail is below ``target_tail``.
    """
    k = _check_k(k)
    c = _check_positive_int("c", c)
    if q_max is None:
        q_max = max(1 << 16, c)
        while True:
            out = zk_definition(k, c, q_max)
            if out.tail <= target_tail:
                return out
            if q_max >= RAD_CAP << 4:
                raise CutoffError(f"zk_definition cannot reach tail {target_tail:g} for k={k}")
            q_max <<= 2
    q_max = _check_positive_int("q_max", q_max)
    if q_max < c:
        raise OutOfRangeError("q_max must be at least c")
    mu, wq, wq2 = _definition_tables(k, q_max)
    d0 = math.isqrt(q_max)
    parts = []
    for d in range(1, d0 + 1):
        if mu[d] and d * c <= q_max:
            parts.append(mu[d] * np.sum(wq[d * c : q_max + 1 : d]))
    for r in range(c, q_max // (d0 + 1) + 1):
        hi = q_max // r
        if hi > d0:
            parts.append(float(np.dot(mu[d0 + 1 : hi + 1], wq[(d0 + 1) * r : hi * r + 1 : r])))
    value = math.fsum(parts)
    partial_e, rounding_e = _sum_with_rounding(wq2)
    tail = max(_upper(_aux(k)["E"]) - partial_e + rounding_e, 0.0)
    rounding = (math.log2(q_max) + 12) * EPS * float(np.sum(wq)) * 2
    return TailBounded(float(value), float(tail + rounding))


# ---------------------------------------------------------------------------
# Z̃_k(N) through z_k


def _floor_div_powers(t: np.ndarray, k: int, N: int, B: int) -> np.ndarray:
    """floor(t^k / N) - B, exactly."""
    if t.size == 0:
        return np.zeros(0)
    if float(t[-1]) ** k < 2.0**62:
        return (t.astype(np.int64) ** k // N - B).astype(float)
    return np.array([int(x) ** k // N - B for x in t.tolist()], dtype=float)


def ztilde_via_zk(
    k: int,
    N: int,
    b_max: Optional[int] = None,
    t_max: Optional[int] = None,
    *,
    target_tail: float = 1e-12,
) -> IntensityResult:
    """Z̃_k(N) = Σ_{b >= 1} z_k(Nb).

    Terms ``b <= b_max`` are summed from the factorised z_k.  For the rest,
    exchanging the b and t sums (all terms positive) gives
    ξ_k Σ_{t^k > N b_max} H_k(t) (floor(t^k/N) - b_max); it is summed
    explicitly for ``t <= t_max`` and, beyond, equals
    (G_k - Σ_{t<=t_max} H_k(t) t^k)/N minus a fractional-part correction
    in [0, Σ_{t>t_max} H_k(t)], where G_k = ∏_p (1 + 1/(p^k - 2)).
    """
    k = _check_k(k)
    N = _check_positive_int("N", N)
    B = _check_positive_int("b_max", 64 if b_max is None else b_max)
    need = ceil_root(N * B, k)
    if t_max is None:
        t_max = max(need, _t_max_for(k, target_tail / 4))
    t_max = _check_positive_int("t_max", t_max)
    if t_max < need:
        raise OutOfRangeError(f"t_max={t_max} must be at least ceil((N b_max)^(1/k)) = {need}")
    aux = _aux(k)
    H, Hk = _h_for(k, t_max)
    suffix = np.zeros(t_max + 2)
    suffix[: t_max + 1] = np.cumsum(H[::-1])[::-1]
    starts = np.array([ceil_root(N * b, k) for b in range(1, B + 1)])
    explicit_inner = float(np.sum(suffix[starts]))
    t0 = floor_root(N * B, k) + 1
    ts = np.arange(t0, t_max + 1)
    rem_terms = H[t0:] * _floor_div_powers(ts, k, N, B)
    rem, rounding_rem = _sum_with_rounding(rem_terms)
    hk_part, rounding_hk = _sum_with_rounding(Hk)
    G = aux["G"]
    beyond = (float(G.value) - hk_part) / N
    h_rem = _h_remainder(k, t_max)
    bracket = explicit_inner + rem + beyond - h_rem / 2
    rounding = (
        rounding_rem
        + (rounding_hk + float(G.tail) + 4 * EPS * float(G.value)) / N
        + (math.log2(t_max + 2) + 12) * EPS * explicit_inner * 2
    )
    xi = aux["xi"].to_float()
    total = xi * TailBounded(bracket, h_rem / 2 + rounding)
    total = TailBounded(float(total.value), float(total.tail))
    explicit = float(xi.value) * (explicit_inner + B * h_rem / 2)
    return IntensityResult(
        total,
        "ztilde-via-zk",
        k,
        N=N,
        cutoffs={"b_max": B, "t_max": t_max},
        explicit=explicit,
    )


# ---------------------------------------------------------------------------
# sandwich


@dataclass(frozen=True)
class SandwichReport:
    """Z̃_k(N+1) <= Z_k(ε) <= Z̃_k(N) with N = floor(1/ε), checked up to tails."""

    k: int
    epsilon: Fraction
    N: int
    z: IntensityResult
    upper: IntensityResult
    lower: IntensityResult
    lower_ok: bool
    upper_ok: bool

    @property
    def verdict(self) -> bool:
        return self.lower_ok and self.upper_ok

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "epsilon": str(self.epsilon),
            "N": self.N,
            "z": self.z.to_dict(),
            "upper": self.upper.to_dict(),
            "lower": self.lower.to_dict(),
            "lower_ok": self.lower_ok,
            "upper_ok": self.upper_ok,
            "verdict": self.verdict,
        }


def sandwich_check(k: int, epsilon, *, target_tail: float = 1e-12, bound_method: str = "ztilde-via-zk") -> SandwichReport:
    k = _check_k(k)
    eps = _as_fraction(epsilon)
    if not 0 < eps < 1:
        raise OutOfRangeError(f"epsilon must lie in (0, 1), got {epsilon}")
    N = math.floor(1 / eps)
    if bound_method == "ztilde-via-zk":
        bound = lambda n: ztilde_via_zk(k, n, target_tail=target_tail)  # noqa: E731
    elif bound_method == "ztilde-definition":
        bound = lambda n: ztilde_definition(k, n, target_tail=target_tail)  # noqa: E731
    else:
        raise ValueError(f"unknown bound method {bound_method!r}")
    z = z_direct(k, eps, target_tail=target_tail)
    upper = bound(N)
    lower = bound(N + 1)
    zv = z.value
    lower_ok = lower.value.value - lower.value.tail <= zv.value + zv.tail
    upper_ok = zv.value - zv.tail <= upper.value.value + upper.value.tail
    return SandwichReport(k, eps, N, z, upper, lower, bool(lower_ok), bool(upper_ok))
