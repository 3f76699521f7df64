"""Numerical checks of the asymptotic statements.

Weighted squarefree sums and their mean values, Walfisz-type residuals of the
squarefree count, the Abel-summation asymptotic of z_k(c), and a log-log power
law fit of Z_k(ε).  Error terms with inexplicit constants are never asserted;
the residuals are recorded, normalised, and left to the caller to judge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from . import _config
from .diffraction import z_direct, zk_factorised
from .exceptions import DecayHypothesisError, OutOfRangeError, SieveLimitError
from .sieve import factorize, multiplicative_table, primes_up_to, squarefree_counts
from .special import TailBounded, _check_k, constants_for_k, euler_product, zeta_real

__all__ = [
    "ResidualSeries",
    "PowerLawFit",
    "PowerLawRegressor",
    "log_grid",
    "weighted_squarefree_sum",
    "weighted_squarefree_sums",
    "weighted_sum_generic",
    "generic_main_term",
    "walfisz_residuals",
    "weighted_squarefree_residuals",
    "zk_asymptotic_check",
    "expected_power_law",
    "fit_power_law",
    "power_law_fit",
]

# ζ(2) for main terms; its tail is far below anything a residual can resolve
_ZETA2 = float(zeta_real(2, 1e-25).value)


def log_grid(start: float, stop: float, points: int) -> np.ndarray:
    """``points`` log-spaced values from ``start`` to ``stop`` inclusive."""
    if points < 1 or start <= 0 or stop <= 0:
        raise OutOfRangeError("log grid needs positive bounds and at least one point")
    if points == 1:
        return np.array([float(start)])
    return np.logspace(math.log10(start), math.log10(stop), points)


# ---------------------------------------------------------------------------
# residual records


@dataclass(frozen=True)
class ResidualSeries:
    """Exact values against a main term at increasing sample points.

    ``normalized = residual / x**norm_exponent``.
    """

    x: tuple
    main: tuple
    exact: tuple
    norm_exponent: float = 0.5
    label: str = ""
    residual: tuple = field(init=False)
    normalized: tuple = field(init=False)

    def __post_init__(self):
        x = tuple(float(v) for v in self.x)
        main = tuple(float(v) for v in self.main)
        exact = tuple(float(v) for v in self.exact)
        if not len(x) == len(main) == len(exact):
            raise ValueError("x, main and exact must have equal lengths")
        if any(b <= a for a, b in zip(x, x[1:])):
            raise ValueError("sample points must be strictly increasing")
        if any(v <= 0 for v in x):
            raise ValueError("sample points must be positive")
        res = tuple(e - m for e, m in zip(exact, main))
        norm = tuple(r / xi**self.norm_exponent for r, xi in zip(res, x))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "main", main)
        object.__setattr__(self, "exact", exact)
        object.__setattr__(self, "residual", res)
        object.__setattr__(self, "normalized", norm)

    def __len__(self):
        return len(self.x)

    @property
    def ratios(self) -> tuple:
        return tuple(e / m for e, m in zip(self.exact, self.main))

    def max_abs_normalized(self, lo: float = 0.0, hi: float = math.inf) -> float:
        vals = [abs(n) for xi, n in zip(self.x, self.normalized) if lo <= xi <= hi]
        return max(vals) if vals else math.nan

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "norm_exponent": self.norm_exponent,
            "x": list(self.x),
            "main": list(self.main),
            "exact": list(self.exact),
            "residual": list(self.residual),
            "normalized": list(self.normalized),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "ResidualSeries":
        return cls(d["x"], d["main"], d["exact"], d.get("norm_exponent", 0.5), d.get("label", ""))


def _increasing(xs: Iterable) -> np.ndarray:
    arr = np.asarray(list(xs), dtype=float)
    if arr.size == 0:
        raise OutOfRangeError("empty grid")
    if np.any(np.diff(arr) <= 0):
        raise OutOfRangeError("grid must be strictly increasing")
    return arr


def _check_limit(u: float) -> int:
    n = math.floor(u)
    if n < 1:
        raise OutOfRangeError(f"u={u} must be >= 1")
    if n > _config.sieve_limit():
        raise SieveLimitError(f"floor(u)={n} exceeds sieve limit {_config.sieve_limit()}")
    return n


# ---------------------------------------------------------------------------
# weighted squarefree sums


def _prime_values(delta: Callable, primes: np.ndarray) -> np.ndarray:
    """Evaluate ``delta`` at float primes, vectorised when it allows."""
    p = primes.astype(float)
    try:
        vals = np.asarray(delta(p), dtype=float)
        if vals.shape == p.shape:
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([float(delta(int(q))) for q in primes.tolist()])


def _cumulative(table: np.ndarray, ns: Sequence[int]) -> list[float]:
    cum = np.cumsum(table)
    return [float(cum[n]) for n in ns]


def weighted_squarefree_sums(k: int, us: Iterable) -> list[float]:
    """S_k(u) = Σ_{t <= u} |μ(t)| ∏_{p|t} (1 - 2p^-k)^-1 at every u."""
    k = _check_k(k)
    ns = [_check_limit(u) for u in us]
    if not ns:
        return []
    table = multiplicative_table(max(ns), lambda p: 1.0 / (1.0 - 2.0 * p ** (-float(k))))
    return _cumulative(table, ns)


def weighted_squarefree_sum(k: int, u) -> float:
    return weighted_squarefree_sums(k, [u])[0]


def weighted_sum_generic(delta: Callable, u) -> float:
    """Σ_{m <= u} μ(m)² ∏_{p|m} (1 + δ(p)), with |δ(p)| <= 4/p² checked for p <= u."""
    n = _check_limit(u)
    primes = primes_up_to(n)
    if primes.size:
        d = _prime_values(delta, primes)
        pf = primes.astype(float)
        bad = np.flatnonzero(np.abs(d) > 4.0 / pf**2 * (1 + 1e-12))
        if bad.size:
            raise DecayHypothesisError(f"|delta({int(primes[bad[0]])})| exceeds 4/p^2")
    table = multiplicative_table(n, lambda p: 1.0 + _prime_values(delta, p.astype(np.int64)))
    return math.fsum(table.tolist())


def generic_main_term(delta: Callable, u, prime_cutoff: int = 10**6) -> TailBounded:
    """∏_p (1 + δ(p)/(p+1)) · u/ζ(2), the mean value of :func:`weighted_sum_generic`."""
    prod = euler_product(lambda p: 1.0 + float(_prime_values(delta, np.array([p]))[0]) / (p + 1), 4.0, prime_cutoff)
    return prod * (float(u) / _ZETA2)


# ---------------------------------------------------------------------------
# residual series


def walfisz_residuals(x_grid: Iterable, a: int = 1) -> ResidualSeries:
    """Squarefree counts coprime to ``a`` against ∏_{p|a} (1 + 1/p)^-1 · x/ζ(2)."""
    x = _increasing(x_grid)
    if a < 1:
        raise OutOfRangeError("a must be >= 1")
    factor = 1.0
    for p in factorize(int(a)).primes:
        factor *= p / (p + 1.0)
    counts = squarefree_counts(x.tolist(), coprime_to=int(a))
    main = factor * x / _ZETA2
    label = "walfisz" if a == 1 else f"walfisz a={a}"
    return ResidualSeries(tuple(x), tuple(main), tuple(counts), 0.5, label)


def weighted_squarefree_residuals(k: int, u_grid: Iterable) -> ResidualSeries:
    """S_k(u) against γ_k u, normalised by u^{1/2}."""
    k = _check_k(k)
    u = _increasing(u_grid)
    gamma = float(constants_for_k(k).gamma_k.value)
    exact = weighted_squarefree_sums(k, u.tolist())
    return ResidualSeries(tuple(u), tuple(gamma * u), tuple(exact), 0.5, f"S_{k}")


def zk_asymptotic_check(k: int, c_grid: Iterable) -> ResidualSeries:
    """z_k(c) against ξ_k γ_k c^{-2+1/k}/(2k-1); residuals normalised by c^{-2+1/(2k)}."""
    k = _check_k(k)
    c = _increasing(c_grid)
    if np.any(c < 1) or np.any(c != np.floor(c)):
        raise OutOfRangeError("c values must be positive integers")
    const = constants_for_k(k)
    lead = float(const.xi_k.value) * float(const.gamma_k.value) / (2 * k - 1)
    main = lead * c ** (-2.0 + 1.0 / k)
    exact = [float(zk_factorised(k, int(ci)).value) for ci in c.tolist()]
    return ResidualSeries(tuple(c), tuple(main), tuple(exact), -2.0 + 1.0 / (2 * k), f"z_{k}")


# ---------------------------------------------------------------------------
# power law


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``log y = log A + α log x`` without weights.

    After ``fit``: ``exponent_`` (α), ``log_amplitude_`` (log A) and
    ``residuals_`` (log y minus the fitted line at the training points).
    """

    def fit(self, X, y):
        x = np.asarray(X, dtype=float).reshape(len(y), -1)
        if x.shape[1] != 1:
            raise ValueError("PowerLawRegressor takes a single feature")
        y = np.asarray(y, dtype=float)
        if x.shape[0] < 2:
            raise ValueError("need at least two points")
        if np.any(x <= 0) or np.any(y <= 0):
            raise ValueError("power-law fit needs positive data")
        lx = np.log(x[:, 0])
        ly = np.log(y)
        design = np.column_stack([np.ones_like(lx), lx])
        (b, a), *_ = np.linalg.lstsq(design, ly, rcond=None)
        self.log_amplitude_ = float(b)
        self.exponent_ = float(a)
        self.residuals_ = ly - (b + a * lx)
        self.n_features_in_ = 1
        return self

    @property
    def amplitude_(self) -> float:
        check_is_fitted(self, "log_amplitude_")
        return math.exp(self.log_amplitude_)

    def predict(self, X):
        check_is_fitted(self, "exponent_")
        x = np.asarray(X, dtype=float).reshape(-1)
        return np.exp(self.log_amplitude_ + self.exponent_ * np.log(x))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    log_amplitude: float
    residuals: tuple
    epsilons: tuple
    values: tuple
    tails: tuple = ()
    k: Optional[int] = None
    method: str = ""

    @property
    def amplitude(self) -> float:
        return math.exp(self.log_amplitude)

    def recomputed_residuals(self) -> np.ndarray:
        e = np.log(np.asarray(self.epsilons))
        return np.log(np.asarray(self.values)) - (self.log_amplitude + self.exponent * e)

    def is_consistent(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.recomputed_residuals() - np.asarray(self.residuals)) <= tol))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "method": self.method,
            "exponent": self.exponent,
            "log_amplitude": self.log_amplitude,
            "amplitude": self.amplitude,
            "epsilons": list(self.epsilons),
            "values": list(self.values),
            "tails": list(self.tails),
            "residuals": list(self.residuals),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PowerLawFit":
        return cls(
            d["exponent"],
            d["log_amplitude"],
            tuple(d["residuals"]),
            tuple(d["epsilons"]),
            tuple(d["values"]),
            tuple(d.get("tails", ())),
            d.get("k"),
            d.get("method", ""),
        )


def expected_power_law(k: int) -> tuple[float, TailBounded]:
    """(2 - 1/k, c_k/(2k)), the predicted exponent and amplitude."""
    k = _check_k(k)
    return 2.0 - 1.0 / k, constants_for_k(k).c_k / (2 * k)


def fit_power_law(epsilons, values, tails=(), k=None, method="") -> PowerLawFit:
    reg = PowerLawRegressor().fit(np.asarray(epsilons, dtype=float), values)
    return PowerLawFit(
        reg.exponent_,
        reg.log_amplitude_,
        tuple(float(r) for r in reg.residuals_),
        tuple(float(e) for e in epsilons),
        tuple(float(v) for v in values),
        tuple(float(t) for t in tails),
        k,
        method,
    )


def _check_fit_grid(eps: np.ndarray):
    if eps.size < 5:
        raise OutOfRangeError("power-law fit needs at least 5 grid points")
    if np.any(eps <= 0) or np.any(eps > 0.1):
        raise OutOfRangeError("grid points must lie in (0, 0.1]")
    if math.log10(eps.max() / eps.min()) < 2 - 1e-9:
        raise OutOfRangeError("grid must span at least two decades")


def power_law_fit(
    k: int,
    eps_grid: Iterable,
    *,
    target_tail: float = 1e-12,
    evaluator: Optional[Callable[[float], float]] = None,
) -> PowerLawFit:
    """Fit Z_k(ε) on ``eps_grid`` in log-log coordinates.

    Values come from :func:`z_direct` unless ``evaluator`` maps ε to a value.
    """
    k = _check_k(k)
    eps = np.asarray(list(eps_grid), dtype=float)
    _check_fit_grid(eps)
    values, tails = [], []
    for e in eps.tolist():
        if evaluator is None:
            r = z_direct(k, e, target_tail=target_tail)
            values.append(float(r.value.value))
            tails.append(float(r.value.tail))
        else:
            values.append(float(evaluator(e)))
            tails.append(0.0)
    method = "direct-bmp" if evaluator is None else "custom"
    return fit_power_law(eps, values, tails, k, method)
