import json
from fractions import Fraction

import pytest

import oracles
from kfree.diffraction import (
    IntensityResult,
    bragg_weight,
    sandwich_check,
    z_direct,
    zk_definition,
    zk_factorised,
    ztilde_definition,
    ztilde_via_zk,
)
from kfree.exceptions import OutOfRangeError
from kfree.special import constants_for_k


def test_bragg_weight_examples():
    assert bragg_weight(1, 2) == 1
    assert bragg_weight(2, 2) == Fraction(1, 9)
    assert bragg_weight(6, 2) == Fraction(1, 576)
    assert bragg_weight(12, 3) == Fraction(1, 7**2 * 26**2)
    for q in range(1, 200):
        assert bragg_weight(q, 3) == oracles.bragg_weight(q, 3)


def test_half_epsilon_small_radicals():
    # radicals 1 and 2: q = 2 gives m = 1, q = 4 gives m = 1 (m = 2 shares a factor)
    r = z_direct(2, 0.5, rad_max=2, complete=False)
    assert r.explicit == pytest.approx(2 / 9, rel=1e-15)
    assert oracles.bragg_sum_by_radical(2, Fraction(1, 2), 2) == Fraction(2, 9)


@pytest.mark.parametrize(
    "k, eps, R",
    [(3, Fraction(9, 10), 30), (2, Fraction(1, 7), 40), (2, Fraction(37, 1000), 25), (4, Fraction(1, 3), 12)],
)
def test_bragg_sum_against_double_loop(k, eps, R):
    r = z_direct(k, eps, rad_max=R, complete=False)
    ref = oracles.bragg_sum_by_radical(k, eps, R)
    assert r.explicit == pytest.approx(float(ref), rel=1e-15)
    assert r.value.contains(float(z_direct(k, eps).value.value))


def test_complete_value_bounds_plain_q_loop():
    # the q <= 400 double loop is a lower bound for the full sum
    for k, eps in [(2, Fraction(1, 5)), (3, Fraction(9, 10))]:
        part = float(oracles.bragg_sum_by_q(k, eps, 400))
        full = z_direct(k, eps).value
        assert part <= full.value + full.tail


def test_complete_and_truncated_modes_agree():
    for N in (3, 20):
        a = ztilde_definition(2, N, target_tail=1e-10)
        b = ztilde_definition(2, N, rad_max=3000, complete=False)
        assert a.value.agrees_with(b.value)


def test_direct_at_one_over_n_is_ztilde():
    for k, N in [(2, 10), (3, 7)]:
        z = z_direct(k, Fraction(1, N))
        t = ztilde_via_zk(k, N)
        assert z.value.agrees_with(t.value)


def test_direct_inside_sandwich_at_tenth():
    z = z_direct(2, 0.1).value
    up = ztilde_via_zk(2, 10).value
    lo = ztilde_via_zk(2, 11).value
    assert lo.value - lo.tail <= z.value + z.tail
    assert z.value - z.tail <= up.value + up.tail


def test_ztilde_one_is_zeta_k():
    import mpmath

    for k in (2, 3):
        for r in (ztilde_definition(k, 1), ztilde_via_zk(k, 1)):
            assert r.value.contains(float(mpmath.zeta(k)))


def test_partial_sums_increase_for_n_one():
    vals = [ztilde_definition(2, 1, rad_max=R, complete=False).explicit for R in (1, 2, 5, 10, 50)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[0] == 1.0  # q = 1, m = 1
    full = ztilde_definition(2, 1).value
    assert vals[-1] <= full.value + full.tail


@pytest.mark.parametrize("N", [10, 100])
def test_resummation_cross_method(N):
    a = ztilde_definition(2, N).value
    b = ztilde_via_zk(2, N).value
    assert a.agrees_with(b)


def test_power_law_scale_at_n_1000():
    amp = float(constants_for_k(2).c_k.value) / 4
    dev = {N: abs(ztilde_via_zk(2, N).value.value / (amp * N**-1.5) - 1) for N in (10**2, 10**3, 10**6)}
    assert dev[10**3] < 0.05
    assert dev[10**6] < dev[10**2]


def test_zk_factorised_indexing():
    xi = float(constants_for_k(2).xi_k.value)
    one = zk_factorised(2, 1)
    assert one.value >= xi
    assert zk_factorised(2, 17).agrees_with(zk_factorised(2, 25))
    assert zk_factorised(2, 26).value < zk_factorised(2, 25).value
    with pytest.raises(OutOfRangeError):
        zk_factorised(2, 17, t_max=4)


def test_zk_definition_first_terms():
    assert zk_definition(2, 1, q_max=1).value == 1.0
    assert zk_definition(2, 2, q_max=2).value == pytest.approx(1 / 9)
    assert zk_definition(2, 2, q_max=300).value == pytest.approx(oracles.zk_definition_pairs(2, 2, 300), rel=1e-12)


@pytest.mark.parametrize("c", [1, 2, 3, 5])
def test_zk_cross_form(c):
    a = zk_definition(2, c, target_tail=1e-8)
    b = zk_factorised(2, c, target_tail=1e-8)
    assert a.tail <= 1e-8 and b.tail <= 1e-8
    assert a.agrees_with(b)


def test_zk_tends_to_z_one_one():
    # z_k(1) = 1 exactly: the factorised form must enclose it
    assert zk_factorised(2, 1).contains(1.0)
    assert zk_factorised(3, 1).contains(1.0)


def test_via_zk_single_b_is_smaller():
    part = ztilde_via_zk(2, 10, b_max=1, t_max=4000).explicit
    assert part <= ztilde_via_zk(2, 10).value.value


def test_monotone_in_n():
    vals = [ztilde_via_zk(2, N).value for N in range(1, 31)]
    for a, b in zip(vals, vals[1:]):
        assert b.value - b.tail <= a.value + a.tail


def test_positivity():
    for r in (z_direct(3, 0.01), ztilde_definition(2, 50), ztilde_via_zk(3, 50)):
        assert r.value.value >= 0 and r.value.value + r.value.tail >= 0
    assert zk_factorised(2, 1000).value > 0


@pytest.mark.parametrize("k, eps", [(2, 0.137), (3, 0.01), (2, Fraction(1, 10)), (3, 0.5)])
def test_sandwich_examples(k, eps):
    rep = sandwich_check(k, eps)
    assert rep.verdict
    assert rep.N == int(1 / Fraction(str(eps)))
    json.dumps(rep.to_dict())


def test_sandwich_with_definition_bounds():
    assert sandwich_check(2, 0.23, bound_method="ztilde-definition").verdict


def test_result_roundtrip_and_validation():
    r = z_direct(2, 0.05)
    again = IntensityResult.from_dict(json.loads(json.dumps(r.to_dict())))
    assert again == r
    with pytest.raises(ValueError):
        IntensityResult(r.value, "nonsense", 2, N=3)
    with pytest.raises(ValueError):
        IntensityResult(r.value, "direct-bmp", 2)


def test_epsilon_input_types():
    import numpy as np

    ref = z_direct(2, Fraction(1, 1000)).value.value
    for eps in (0.001, np.float64(0.001), "0.001", "1/1000"):
        assert z_direct(2, eps).value.value == ref


def test_argument_errors():
    with pytest.raises(OutOfRangeError):
        z_direct(2, 1.5)
    with pytest.raises(OutOfRangeError):
        z_direct(1, 0.5)
    with pytest.raises(OutOfRangeError):
        ztilde_definition(2, 0)
    with pytest.raises(OutOfRangeError):
        z_direct(2, 0.001, rad_max=5, complete=False)
    with pytest.raises(OutOfRangeError):
        zk_definition(2, 10, q_max=5)
