import math

import pytest

from numerics.bounds import (
    bernstein_growth,
    bounds_report,
    constants_M,
    euclidean_disk_zeros,
    kry_parameters,
    ln_delta0,
    ln_M1,
    main_lemma_bounds,
    mardesic_multiplicity,
    petrov_increment,
    poincare_pab,
    poincare_pb,
    poincare_ratio,
    rho_bound,
    theorem_A,
    theorem_A1,
    theorem_A2,
    theorem_A_combined,
    theorem_B,
    theorem_B1,
    theorem_B2,
    theorem_C_radius,
)
from numerics.errors import Coincidence, OutOfRange, RTooSmall

LN2 = math.log(2)


def test_zeros_of_ovals_for_unit_gaps():
    assert theorem_A(2, 1, 1) == pytest.approx(80000)
    assert theorem_A(2, 1, 1, c=5) == pytest.approx(80)
    assert theorem_A1(2, 1, 1) == pytest.approx(9248)
    assert theorem_A2(2, 1, 1) == pytest.approx(76800)
    assert theorem_A_combined(2, 1, 1) == pytest.approx(76800 + LN2)


def test_prefactor_grows_as_c_prime_shrinks():
    assert theorem_A1(2, 0.5, 1) == pytest.approx(math.log(1 + LN2) + 9248)


def test_appendix_constant_is_checked():
    with pytest.raises(OutOfRange):
        theorem_A(2, 1, 1, c=7)


def test_gap_functions_and_degree_are_checked():
    with pytest.raises(OutOfRange):
        theorem_A1(2, 0, 1)
    with pytest.raises(OutOfRange):
        theorem_A1(2, 1, 1.5)
    with pytest.raises(OutOfRange):
        theorem_A1(1, 1, 1)


def test_theorem_b_is_dominated_by_its_second_term():
    value = theorem_B(2, 1, 1, 1, 4609)
    assert value == pytest.approx(77281 + math.log1p(math.exp(7 * 4609 - 77281)))
    with pytest.raises(RTooSmall):
        theorem_B(2, 1, 1, 1, 4608)
    assert theorem_B1(2, 1, 1, 4608) == pytest.approx(7 * 4608)
    with pytest.raises(RTooSmall):
        theorem_B1(2, 1, 1, 4607)
    assert theorem_B2(2, 1, 1, 1) == pytest.approx(4700 * 16 + 481)


def test_theorem_b_without_sheets_keeps_the_disk_term():
    # for a huge radius the exp(7R) term wins and B reduces to B1
    R = 20000
    assert theorem_B(2, 1, 1, 0, R) == pytest.approx(theorem_B1(2, 1, 1, R))


def test_radius_and_determinant_constants():
    assert theorem_C_radius(2, 1) == pytest.approx(520 * LN2)
    assert ln_delta0(2, 1, 1) == pytest.approx(-496 * LN2)


def test_main_lemma_for_unit_gaps():
    lemma = main_lemma_bounds(2, 1, 1)
    assert lemma["Bukpol"] == pytest.approx(707_788_800)
    assert lemma["Eq1.8"] == pytest.approx(32)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
@pytest.mark.parametrize("c_prime", [1, 0.5, 0.1, 0.01])
@pytest.mark.parametrize("c_doubleprime", [1, 0.5, 0.1, 0.01])
def test_polynomial_bound_beats_the_exponential_one(n, c_prime, c_doubleprime):
    lemma = main_lemma_bounds(n, c_prime, c_doubleprime)
    assert math.log(lemma["Bukpol"]) < lemma["Eq1.8"]


def test_constants_M():
    assert ln_M1(2, 1, 9, 1 / 16) == pytest.approx(9175040 * LN2)
    M = constants_M(2, 1, 1, 9, 1 / 16)
    assert M["M1_integral"] == pytest.approx(M["M1"] - 4 * LN2)
    assert M["M0"] == pytest.approx(2600 * 2 ** 16 * LN2)
    with pytest.raises(OutOfRange):
        ln_M1(2, 1, 9, 0)


def test_euclidean_disk_bound():
    assert euclidean_disk_zeros(2, 1, 1, 144, 1 / 32) == pytest.approx(9 * 144 * 32)
    with pytest.raises(RTooSmall):
        euclidean_disk_zeros(2, 1, 1, 143, 1 / 32)
    with pytest.raises(OutOfRange):
        euclidean_disk_zeros(2, 1, 1, 144, 1 / 16)


def test_poincare_lower_bounds():
    C = 2 * LN2 + 5
    assert poincare_pb(0, 2, 2, 1) == pytest.approx(1 / (2 * (LN2 + C)))
    assert poincare_pab(0, -1, 1) == pytest.approx(1 / (LN2 + 5))
    with pytest.raises(Coincidence):
        poincare_pb(2, 2, 2, 1)
    with pytest.raises(OutOfRange):
        poincare_pab(0, 1, 1)


def test_small_helpers():
    assert mardesic_multiplicity(3) == 81
    assert bernstein_growth(1.0, 1) == pytest.approx(1 + math.log(5))
    assert rho_bound(2, 0.5) == pytest.approx(8)
    assert petrov_increment(2) == pytest.approx(5 * math.pi)
    assert poincare_ratio(math.log(3)) == pytest.approx(2.0)
    with pytest.raises(OutOfRange):
        poincare_ratio(0)
    params = kry_parameters(2, 1, 1)
    assert params["nu"] == pytest.approx(1 / 16)
    assert params["eps"] == pytest.approx(1 / 96)
    assert params["D"] == pytest.approx(145)


def test_bounds_report_for_unit_gaps():
    report = bounds_report(2, 1, 1)
    assert report.R == 4609
    assert report.ln_A == pytest.approx(16)
    assert all(math.isfinite(v) for v in report.entries.values())
    assert report.entries["TheoremA"] == pytest.approx(80000)
    assert report.entries["Bukpol"] == pytest.approx(math.log(707_788_800))
    assert report.plain["nu"] == pytest.approx(1 / 16)
    assert "PoincareLB" not in report.entries
    rows = report.table()
    assert [name for name, _, _ in rows] == sorted(report.entries)
    name, ln_value, log10_value = rows[0]
    assert log10_value == pytest.approx(ln_value / math.log(10))


def test_bounds_report_with_a_point():
    report = bounds_report(2, 1, 1, c_appendix=5, t=0.0, values=[-2, 2])
    assert report.entries["TheoremA"] == pytest.approx(80)
    assert report.plain["PoincareLB"] == pytest.approx(poincare_pb(0, 2, 2, 1))
    assert report.entries["PoincareLB"] == pytest.approx(math.log(report.plain["PoincareLB"]))
