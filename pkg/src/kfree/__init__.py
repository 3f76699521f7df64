"""Diffraction intensity of the k-free integers near the origin.

Sieve-backed arithmetic (:mod:`kfree.sieve`), tail-bounded special values and
Euler-product constants (:mod:`kfree.special`), the three intensity evaluators
(:mod:`kfree.diffraction`), asymptotic checks and power-law fitting
(:mod:`kfree.asymptotics`), identity suites (:mod:`kfree.verification`) and a
command-line front end (:mod:`kfree.cli`).
"""

from .asymptotics import (
    PowerLawFit,
    PowerLawRegressor,
    ResidualSeries,
    power_law_fit,
    walfisz_residuals,
    weighted_squarefree_sum,
    weighted_sum_generic,
    zk_asymptotic_check,
)
from .diffraction import (
    IntensityResult,
    SandwichReport,
    bragg_weight,
    sandwich_check,
    z_direct,
    zk_definition,
    zk_factorised,
    ztilde_definition,
    ztilde_via_zk,
)
from .exceptions import (
    CutoffError,
    DecayHypothesisError,
    KfreeError,
    OutOfRangeError,
    SieveLimitError,
)
from .sieve import (
    Factorization,
    SieveTables,
    big_omega,
    build_sieve,
    count_squarefree,
    count_squarefree_coprime,
    factorize,
    g_weight,
    is_kfree,
    mobius,
    tau,
)
from .special import KfreeConstants, TailBounded, constants_for_k, euler_product, zeta_real

__version__ = "0.1.0"
