"""Tail-bounded special values: ζ(s) for real s > 1 and Euler products.

Every infinite object is reported as a :class:`TailBounded` pair, a value and a
nonnegative bound on its truncation error.  Arithmetic on these pairs
propagates the bounds and never shrinks them.

Two Euler-product evaluators are provided.  :func:`euler_product` multiplies the
local factors up to a prime cutoff and bounds the rest from a quadratic decay
hypothesis; it is simple but its tail only falls like 1/P.
:func:`euler_product_rational` handles local factors that are rational
functions of 1/p: it multiplies directly up to a modest cutoff and sums the
logarithm of the remaining product through the prime zeta function, with a
remainder bound taken from the roots of the rational function.  That is what
the constants for each k use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Union

import mpmath
from mpmath import mpf

from .exceptions import CutoffError, DecayHypothesisError, OutOfRangeError
from .sieve import primes_up_to

__all__ = [
    "TailBounded",
    "KfreeConstants",
    "RationalFactor",
    "zeta_real",
    "euler_product",
    "euler_product_rational",
    "constants_for_k",
    "xi_factor",
    "gamma_factor",
    "c_factor",
]

Real = Union[float, int, Fraction, mpf]

# working precision floor (decimal digits) and hard cap
MIN_DPS = 40
MAX_DPS = 150
EPS = 2.0**-52

# values leave the working-precision blocks as mpf; later arithmetic on them
# must not silently drop back to double precision
if mpmath.mp.dps < MIN_DPS:
    mpmath.mp.dps = MIN_DPS


def _is_mp(x) -> bool:
    return isinstance(x, mpf)


def _abs(x):
    return abs(x)


def _to_mp(x) -> mpf:
    if isinstance(x, Fraction):
        return mpf(x.numerator) / x.denominator
    return mpf(x)


@dataclass(frozen=True)
class TailBounded:
    """A real ``value`` with ``|true - value| <= tail``."""

    value: Real
    tail: Real

    def __post_init__(self):
        t = self.tail
        if _is_mp(t):
            bad = not mpmath.isfinite(t) or t < 0
        else:
            bad = not math.isfinite(float(t)) or t < 0
        if bad:
            raise ValueError(f"tail must be finite and >= 0, got {t!r}")

    @property
    def lower(self):
        return self.value - self.tail

    @property
    def upper(self):
        return self.value + self.tail

    def contains(self, x) -> bool:
        # compared at working precision, so float endpoints are not rounded inward
        return abs(_to_mp(x) - _to_mp(self.value)) <= _to_mp(self.tail)

    def agrees_with(self, other: "TailBounded", slack: Real = 0) -> bool:
        """True when the two enclosures overlap (up to ``slack``)."""
        return abs(self.value - other.value) <= self.tail + other.tail + slack

    def __float__(self):
        return float(self.value)

    def _coerce(self, other) -> "TailBounded":
        if isinstance(other, TailBounded):
            return other
        return TailBounded(other, 0)

    def __add__(self, other):
        o = self._coerce(other)
        return TailBounded(self.value + o.value, self.tail + o.tail)

    __radd__ = __add__

    def __neg__(self):
        return TailBounded(-self.value, self.tail)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        tail = _abs(self.value) * o.tail + _abs(o.value) * self.tail + self.tail * o.tail
        return TailBounded(self.value * o.value, tail)

    __rmul__ = __mul__

    def reciprocal(self) -> "TailBounded":
        a = _abs(self.value)
        if a <= self.tail:
            raise ZeroDivisionError("enclosure contains zero")
        return TailBounded(1 / self.value, self.tail / (a * (a - self.tail)))

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only nonnegative integer powers are supported")
        out = TailBounded(1, 0)
        for _ in range(n):
            out = out * self
        return out

    def to_float(self) -> "TailBounded":
        """Float copy; the tail is rounded up and widened by the conversion error."""
        v = float(self.value)
        err = abs(self.value - mpf(v)) if _is_mp(self.value) else 0
        t = float(self.tail + err)
        return TailBounded(v, math.nextafter(t, math.inf) if t > 0 else 0.0)

    def to_dict(self) -> dict:
        return {"value": _serialize(self.value), "tail": _serialize(self.tail)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "TailBounded":
        return cls(_deserialize(d["value"]), _deserialize(d["tail"]))


def _serialize(x):
    if _is_mp(x):
        return mpmath.nstr(x, mpmath.mp.dps + 5, strip_zeros=False, min_fixed=1, max_fixed=0)
    if isinstance(x, Fraction):
        return float(x)
    return x


def _deserialize(x):
    if isinstance(x, str):
        return mpf(x)
    return x


def _dps_for(target_tail) -> int:
    if target_tail <= 0:
        raise OutOfRangeError("target_tail must be positive")
    digits = -math.floor(math.log10(float(target_tail))) if float(target_tail) > 0 else MAX_DPS
    dps = max(MIN_DPS, digits + 15)
    if dps > MAX_DPS:
        raise CutoffError(
            f"target tail {target_tail} needs {dps} digits; precision cap is {MAX_DPS}"
        )
    return dps


# ---------------------------------------------------------------------------
# zeta


def zeta_real(s: Real, target_tail: Real = 1e-30, max_terms: int = 200) -> TailBounded:
    """ζ(s) for real ``s >= 1.1`` by Euler–Maclaurin summation.

    With ``M`` leading terms and ``J >= 4`` Bernoulli corrections the remainder
    is bounded by the first omitted correction, since every derivative of
    x^-s has constant sign on [M, ∞).
    """
    dps = _dps_for(target_tail)
    with mpmath.workdps(dps):
        s = mpf(s) if not isinstance(s, Fraction) else mpf(s.numerator) / s.denominator
        if not s >= mpf("1.1"):
            raise OutOfRangeError(f"zeta_real needs s >= 1.1, got {s}")
        target = mpf(target_tail) / 10
        M = 20
        while M <= 10**6:
            Mm = mpf(M)
            total = mpmath.fsum(mpf(n) ** (-s) for n in range(1, M))
            total += Mm ** (1 - s) / (s - 1) + Mm ** (-s) / 2
            rising = s  # s(s+1)...(s+2j-2)
            power = Mm ** (-s - 1)  # M^(-s-2j+1)
            last = None
            for j in range(1, max_terms + 1):
                term = mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j) * rising * power
                if j > 4 and abs(term) <= target:
                    return TailBounded(+total, abs(term) + mpf(10) ** (-dps + 5))
                if last is not None and j > 4 and abs(term) > abs(last):
                    break  # the asymptotic series has turned around
                total += term
                last = term
                rising *= (s + 2 * j - 1) * (s + 2 * j)
                power /= Mm * Mm
            M *= 4
        raise CutoffError(f"zeta_real({s}) cannot reach tail {target_tail}")


# ---------------------------------------------------------------------------
# Euler products


def euler_product(
    local_factor: Union[Callable[[int], Real], Mapping[int, Real]],
    decay_constant: Real,
    prime_cutoff: int,
    samples: int = 64,
) -> TailBounded:
    """``∏_{p <= P} f(p)`` with a bound on the omitted primes.

    The caller asserts ``|f(p) - 1| <= A/p²`` for all primes; it is checked at a
    sample of primes.  Then ``|log ∏_{p>P} f(p)| <= Σ_{p>P} 2A/p² <= 2A/(P-1)``.
    The product is accumulated in float64 through a compensated sum of logs.
    """
    f = local_factor.__getitem__ if isinstance(local_factor, Mapping) else local_factor
    A = float(decay_constant)
    P = int(prime_cutoff)
    if P < 2 or A < 0:
        raise OutOfRangeError("need prime_cutoff >= 2 and decay_constant >= 0")
    if 2 * A > P * P:
        raise OutOfRangeError("prime cutoff too small for the decay constant")
    primes = primes_up_to(P).tolist()
    step = max(1, len(primes) // samples)
    for p in primes[:samples] + primes[::step]:
        v = float(f(p))
        if abs(v - 1) > A / p**2 * (1 + 1e-12) + 4 * EPS * abs(v):
            raise DecayHypothesisError(f"|f({p}) - 1| exceeds {A}/p^2")
    logs = []
    for p in primes:
        v = float(f(p))
        if v <= 0:
            raise DecayHypothesisError(f"local factor at p={p} is not positive")
        logs.append(math.log1p(v - 1) if abs(v - 1) < 0.5 else math.log(v))
    log_value = math.fsum(logs)
    value = math.exp(log_value)
    log_tail = 2 * A / (P - 1)
    # each log carries a few ulps of its own size; exp adds one more
    rounding = 8 * EPS * (math.fsum(abs(x) for x in logs) + abs(log_value))
    tail = value * math.expm1(log_tail + rounding)
    return TailBounded(value, tail)


@dataclass(frozen=True)
class RationalFactor:
    """Local factor ``f(p) = num(1/p) / den(1/p)`` with integer polynomials.

    Coefficients are listed from the constant term upward; both constant terms
    must be 1.
    """

    num: tuple[int, ...]
    den: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        if not self.num or not self.den or self.num[0] != 1 or self.den[0] != 1:
            raise ValueError("numerator and denominator must have constant term 1")

    def __call__(self, p) -> mpf:
        x = 1 / mpf(p)
        return mpmath.polyval(self.num[::-1], x) / mpmath.polyval(self.den[::-1], x)

    def exact(self, p: int) -> Fraction:
        x = Fraction(1, p)
        n = sum(c * x**i for i, c in enumerate(self.num))
        d = sum(c * x**i for i, c in enumerate(self.den))
        return n / d

    def log_coefficients(self, n: int) -> list[Fraction]:
        """Exact Taylor coefficients ``a_0..a_n`` of ``log f`` in x = 1/p."""
        return [a - b for a, b in zip(_log_series(self.num, n), _log_series(self.den, n))]

    def root_radius(self) -> mpf:
        """Smallest modulus among the roots of numerator and denominator."""
        radii = []
        for poly in (self.num, self.den):
            coeffs = list(poly)
            while coeffs and coeffs[-1] == 0:
                coeffs.pop()
            if len(coeffs) > 1:
                roots = mpmath.polyroots(coeffs[::-1], maxsteps=200, extraprec=200)
                radii.extend(abs(r) for r in roots)
        return min(radii) if radii else mpmath.inf

    @property
    def degree(self) -> int:
        return (len(self.num) - 1) + (len(self.den) - 1)


def _log_series(poly: tuple[int, ...], n: int) -> list[Fraction]:
    # log P with P(0) = 1: from P g' = P', j g_j = j p_j - Σ_{i<j} i g_i p_{j-i}
    p = [Fraction(c) for c in poly] + [Fraction(0)] * (n + 1)
    g = [Fraction(0)] * (n + 1)
    for j in range(1, n + 1):
        acc = j * p[j]
        for i in range(1, j):
            acc -= i * g[i] * p[j - i]
        g[j] = acc / j
    return g


@lru_cache(maxsize=None)
def _prime_power_sums(cutoff: int, jmax: int, dps: int) -> tuple:
    with mpmath.workdps(dps):
        primes = [mpf(p) for p in primes_up_to(cutoff).tolist()]
        return tuple(mpmath.fsum(p ** (-j) for p in primes) for j in range(jmax + 1))


@lru_cache(maxsize=None)
def _primezeta(j: int, dps: int) -> mpf:
    with mpmath.workdps(dps):
        return +mpmath.primezeta(j)


@lru_cache(maxsize=None)
def euler_product_rational(
    factor: RationalFactor,
    target_tail: float = 1e-30,
    prime_cutoff: int = 1000,
    max_terms: int = 400,
) -> TailBounded:
    """``∏_p f(p)`` for a :class:`RationalFactor`, to within ``target_tail``.

    Primes up to ``prime_cutoff`` are multiplied directly.  For the rest,
    ``log f(1/p) = Σ_j a_j p^-j`` so ``log ∏_{p>P} f(p) = Σ_j a_j P_{>P}(j)``
    where ``P_{>P}(j)`` is the prime zeta function minus its first terms.  If
    the roots of numerator and denominator have modulus at least ρ, then
    ``|a_j| <= D ρ^-j / j`` (D the total degree), which bounds the series
    after ``J`` terms by ``D / ((J+1) J ρ^{J+1} P^J (1 - 1/(Pρ)))``.
    """
    dps = _dps_for(target_tail)
    with mpmath.workdps(dps):
        P = int(prime_cutoff)
        rho = factor.root_radius()
        if rho is not mpmath.inf:
            rho = rho * (1 - mpf(10) ** -20)
            if P * rho <= 2:
                raise OutOfRangeError("prime cutoff too small for the factor's root radius")
        target = mpf(target_tail) / 10
        D = factor.degree
        J = None
        for j in range(2, max_terms + 1):
            if rho is mpmath.inf:
                J = j
                break
            bound = D / ((j + 1) * j * rho ** (j + 1) * mpf(P) ** j * (1 - 1 / (P * rho)))
            if bound <= target:
                J = j
                break
        if J is None:
            raise CutoffError(f"Euler product {factor.name or factor} needs more than {max_terms} terms")
        coeffs = factor.log_coefficients(J)
        if coeffs[1] != 0:
            raise DecayHypothesisError("local factor is 1 + O(1/p): the product diverges")
        sums = _prime_power_sums(P, J, dps)
        head = mpf(1)
        for p in primes_up_to(P).tolist():
            head *= factor(p)
        log_tail = mpf(0)
        for j in range(2, J + 1):
            if coeffs[j]:
                a = mpf(coeffs[j].numerator) / coeffs[j].denominator
                log_tail += a * (_primezeta(j, dps) - sums[j])
        value = head * mpmath.exp(log_tail)
        series_rem = 0 if rho is mpmath.inf else bound
        rounding = mpf(10) ** (-dps + 8)
        tail = abs(value) * (mpmath.expm1(series_rem + rounding))
        return TailBounded(value, tail)


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


def _mono(coeff: int, power: int) -> tuple:
    return tuple([0] * power + [coeff])


def _poly_add(*polys):
    n = max(len(p) for p in polys)
    out = [0] * n
    for p in polys:
        for i, c in enumerate(p):
            out[i] += c
    return tuple(out)


def xi_factor(k: int) -> RationalFactor:
    """1 - (p^k - 1)^-2 = (1 - 2x^k) / (1 - x^k)²."""
    one_minus = _poly_add((1,), _mono(-1, k))
    return RationalFactor(_poly_add((1,), _mono(-2, k)), _poly_mul(one_minus, one_minus), f"xi_{k}")


def gamma_factor(k: int) -> RationalFactor:
    """1 + 2/((p+1)(p^k - 2)) = (1 + x - 2x^k) / ((1 + x)(1 - 2x^k))."""
    num = _poly_add((1, 1), _mono(-2, k))
    den = _poly_mul((1, 1), _poly_add((1,), _mono(-2, k)))
    return RationalFactor(num, den, f"gamma_{k}")


def c_factor(k: int) -> RationalFactor:
    """1 - 2p/((p+1)p^k) = (1 + x - 2x^k) / (1 + x)."""
    return RationalFactor(_poly_add((1, 1), _mono(-2, k)), (1, 1), f"c_{k}")


# ---------------------------------------------------------------------------
# constants for one k


@dataclass(frozen=True)
class KfreeConstants:
    k: int
    xi_k: TailBounded
    gamma_k: TailBounded
    c_k: TailBounded

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "xi_k": self.xi_k.to_dict(),
            "gamma_k": self.gamma_k.to_dict(),
            "c_k": self.c_k.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "KfreeConstants":
        return cls(
            int(d["k"]),
            TailBounded.from_dict(d["xi_k"]),
            TailBounded.from_dict(d["gamma_k"]),
            TailBounded.from_dict(d["c_k"]),
        )


def _check_k(k) -> int:
    if isinstance(k, bool) or int(k) != k or k < 2:
        raise OutOfRangeError("k must be ≥ 2")
    return int(k)


@lru_cache(maxsize=None)
def constants_for_k(k: int, target_tail: float = 1e-30) -> KfreeConstants:
    """ξ_k, γ_k and c_k, each with tail at most ``target_tail``.

    ξ_k = ∏_p (1 - (p^k-1)^-2),
    γ_k = ζ(2)^-1 ∏_p (1 + 2/((p+1)(p^k-2))),
    c_k = 2k/(2k-1) · ζ(2-1/k)/ζ(2) · ζ(k)² · ∏_p (1 - 2p/((p+1)p^k)).
    """
    k = _check_k(k)
    dps = _dps_for(target_tail)
    inner = target_tail / 100
    with mpmath.workdps(dps):
        xi = euler_product_rational(xi_factor(k), inner)
        zeta2 = zeta_real(2, inner)
        gamma = euler_product_rational(gamma_factor(k), inner) / zeta2
        s = 2 - mpf(1) / k
        ck = (
            TailBounded(mpf(2 * k) / (2 * k - 1), 0)
            * zeta_real(s, inner)
            / zeta2
            * zeta_real(k, inner) ** 2
            * euler_product_rational(c_factor(k), inner)
        )
    out = KfreeConstants(k, xi, gamma, ck)
    for name in ("xi_k", "gamma_k", "c_k"):
        if getattr(out, name).tail > target_tail:
            raise CutoffError(f"{name} tail exceeds target {target_tail}")
    return out
