"""Identity suites: re-summation, sandwich, cross-form, convolution, constants.

Each suite returns a :class:`CheckResult`; :func:`run_verification` bundles
them at a ``quick`` or ``full`` level.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .diffraction import (
    sandwich_check,
    zk_definition,
    zk_factorised,
    ztilde_definition,
    ztilde_via_zk,
)
from .sieve import build_sieve, dirichlet_convolution, g_weight
from .special import constants_for_k, zeta_real

__all__ = [
    "CheckResult",
    "LEVELS",
    "random_epsilons",
    "resummation_suite",
    "sandwich_suite",
    "cross_form_suite",
    "convolution_suite",
    "constant_identity_suite",
    "run_verification",
]

LEVELS = ("quick", "full")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    cases: int
    failures: tuple = ()
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self, timing: bool = True) -> dict:
        d = {
            "name": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "failures": list(self.failures),
            "details": self.details,
        }
        if timing:
            d["seconds"] = round(self.seconds, 3)
        return d


def _timed(name, fn):
    t0 = time.perf_counter()
    cases, failures, details = fn()
    return CheckResult(name, not failures, cases, tuple(failures), time.perf_counter() - t0, details)


def random_epsilons(n: int, lo: float = 1e-3, hi: float = 0.9, seed: int = 0) -> list[float]:
    """``n`` log-uniform draws in (lo, hi), rounded to 12 significant digits."""
    rng = np.random.default_rng(seed)
    raw = np.exp(rng.uniform(math.log(lo), math.log(hi), n))
    return [float(f"{x:.12g}") for x in raw]


def resummation_suite(ks: Sequence[int], Ns: Iterable[int], target_tail: float = 1e-10) -> CheckResult:
    """|Z̃_k(N) by definition - Σ_b z_k(Nb)| <= combined tails."""
    Ns = list(Ns)

    def run():
        failures = []
        worst = 0.0
        for k in ks:
            for N in Ns:
                a = ztilde_definition(k, N, target_tail=target_tail).value
                b = ztilde_via_zk(k, N, target_tail=target_tail).value
                gap = abs(a.value - b.value)
                worst = max(worst, gap / (a.tail + b.tail))
                if not a.agrees_with(b):
                    failures.append(f"k={k} N={N}: |diff|={gap:.3g} > tails {a.tail + b.tail:.3g}")
        return len(ks) * len(Ns), failures, {"max_gap_over_tails": worst}

    return _timed("resummation", run)


def sandwich_suite(ks: Sequence[int], epsilons: Iterable[float], target_tail: float = 1e-10) -> CheckResult:
    """Z̃_k(N+1) <= Z_k(ε) <= Z̃_k(N), N = floor(1/ε), up to tails."""
    epsilons = list(epsilons)

    def run():
        failures = []
        for k in ks:
            for e in epsilons:
                rep = sandwich_check(k, e, target_tail=target_tail)
                if not rep.verdict:
                    failures.append(f"k={k} eps={e}: lower_ok={rep.lower_ok} upper_ok={rep.upper_ok}")
        return len(ks) * len(epsilons), failures, {}

    return _timed("sandwich", run)


def cross_form_suite(k: int, cs: Iterable[int], target_tail: float = 1e-8) -> CheckResult:
    """z_k(c) from its definition against the factorised tail sum."""
    cs = list(cs)

    def run():
        failures = []
        tails = {}
        for c in cs:
            a = zk_definition(k, c, target_tail=target_tail)
            b = zk_factorised(k, c, target_tail=target_tail)
            tails[str(c)] = a.tail + b.tail
            if not a.agrees_with(b):
                failures.append(f"k={k} c={c}: |diff|={abs(a.value - b.value):.3g} > tails {a.tail + b.tail:.3g}")
        return len(cs), failures, {"combined_tails": tails}

    return _timed("cross-form", run)


def convolution_suite(n_max: int, a_max: int) -> CheckResult:
    """Σ_{cd=n} g_a(c) μ(d)² = μ(n)² [gcd(n, a) = 1], exactly."""

    def run():
        mu2 = build_sieve(n_max).mu.astype(np.int64) ** 2
        n = np.arange(n_max + 1)
        failures = []
        for a in range(1, a_max + 1):
            g = np.array([0] + [g_weight(c, a) for c in range(1, n_max + 1)], dtype=np.int64)
            lhs = dirichlet_convolution(g, mu2)
            rhs = mu2 * (np.gcd(n, a) == 1)
            bad = np.flatnonzero(lhs[1:] != rhs[1:])
            if bad.size:
                failures.append(f"a={a}: first mismatch at n={int(bad[0]) + 1}")
        return n_max * a_max, failures, {}

    return _timed("convolution", run)


def constant_identity_suite(ks: Sequence[int], tol: float = 1e-12) -> CheckResult:
    """|γ_k ξ_k ζ(2-1/k)/(2k-1) - c_k/(2k)| <= tol."""

    def run():
        failures = []
        gaps = {}
        for k in ks:
            const = constants_for_k(k)
            lhs = const.gamma_k * const.xi_k * zeta_real(Fraction(2 * k - 1, k)) / (2 * k - 1)
            rhs = const.c_k / (2 * k)
            gap = float(abs(lhs.value - rhs.value)) + float(lhs.tail + rhs.tail)
            gaps[str(k)] = gap
            if not gap <= tol:
                failures.append(f"k={k}: |difference| + tails = {gap:.3g} > {tol:g}")
        return len(ks), failures, {"gap_plus_tails": gaps}

    return _timed("constant-identity", run)


def run_verification(level: str = "quick", seed: int = 0) -> list[CheckResult]:
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}")
    if level == "quick":
        return [
            resummation_suite([2], range(1, 11)),
            sandwich_suite([2], random_epsilons(5, seed=seed)),
            cross_form_suite(2, [1, 2, 3]),
            convolution_suite(1000, 10),
            constant_identity_suite([2, 3]),
        ]
    return [
        resummation_suite([2, 3], range(1, 51)),
        sandwich_suite([2, 3], random_epsilons(100, seed=seed)),
        cross_form_suite(2, [1, 2, 3, 5]),
        convolution_suite(10**4, 50),
        constant_identity_suite([2, 3, 4, 5, 8, 10]),
    ]
