import math

import numpy as np
import pytest

from numerics.bounds import theorem_A1
from numerics.cycles import OneForm
from numerics.errors import ConfigViolation
from numerics.monodromy import sigma_interval
from numerics.zerocount import (
    AbelianProbe,
    AnalyticProbe,
    Contour,
    YProbe,
    bernstein_estimate,
    bernstein_index,
    count_zeros_in_annulus_sector,
    euclidean_diameter,
    growth_zeros_check,
    kry_check,
    petrov_reality,
    pi_gap,
    sample_contour,
    vanishes_identically,
    winding_count,
    zeros_on_interval,
)

IDENTITY = AnalyticProbe(lambda t: t, label="z")


def test_circle_contour():
    c = Contour.circle(0, 1)
    assert c.closed
    assert c.vertices[0] == c.vertices[-1]
    assert c.length() == pytest.approx(2 * math.pi, rel=1e-4)
    assert c.curvature() == pytest.approx(2 * math.pi, rel=1e-9)


def test_sector_contour_pieces():
    c = Contour.sector(0, 0.1, 1.0, l=1)
    assert set(c.pieces) == {"gamma1", "gamma2", "gamma3", "gamma4"}
    s, e = c.pieces["gamma1"]
    assert abs(c.vertices[s] - 1.0) < 1e-12
    assert abs(c.vertices[e] - 1.0) < 1e-12
    s, e = c.pieces["gamma3"]
    assert abs(c.vertices[s] - 0.1) < 1e-12
    assert c.history.end == pytest.approx(1.0)
    with pytest.raises(ValueError):
        Contour.sector(0, 1.0, 0.5)
    with pytest.raises(ValueError):
        Contour.sector(0, 0.1, 1.0, l=0)


def test_winding_counts_polynomial_zeros():
    f = AnalyticProbe(lambda t: (t - 0.3) * (t + 0.2j) ** 2)
    assert winding_count(f, Contour.circle(0, 1)) == 3
    assert winding_count(f, Contour.circle(0.3, 0.1)) == 1
    assert winding_count(AnalyticProbe(lambda t: t - 2), Contour.circle(0, 1)) == 0
    with pytest.raises(ValueError):
        winding_count(f, Contour.segment(0, 1))


def test_log_branch_is_continued_along_the_contour():
    f = AnalyticProbe(lambda t, L: L, branch_point=0)
    samples = sample_contour(f, Contour.circle(0, 1, turns=2))
    assert samples.values[0] == pytest.approx(0.0)
    assert samples.values[-1] == pytest.approx(4j * math.pi)
    assert np.allclose(np.exp(samples.values), samples.ts)


def test_y_probe_removes_the_logarithmic_part():
    I = AnalyticProbe(lambda t, L: t * L / (2j * math.pi) + (t - 0.5), branch_point=0, label="I")
    J = AnalyticProbe(lambda t: t, label="J")
    Y = YProbe(I, J, 0, 1)
    assert winding_count(Y, Contour.circle(0, 1)) == 1


def test_sector_counts_zeros_on_every_sheet():
    f = AnalyticProbe(lambda t: t - 0.5)
    result = count_zeros_in_annulus_sector(f, 0, 0.1, 1.0, l=1, theta0=math.pi / 3)
    assert result.count == 2
    assert result.sheets == 2
    assert result.per_sheet == pytest.approx(1.0)
    assert result.detours == []


def test_sector_detours_around_zeros_on_the_rays():
    f = AnalyticProbe(lambda t: t - 0.5)
    result = count_zeros_in_annulus_sector(f, 0, 0.1, 1.0, l=1, theta0=0.0)
    assert result.count == 3
    assert len(result.detours) == 2
    assert all(abs(t - 0.5) < 1e-6 for t in result.detours)
    assert result.to_dict()["per_sheet"] == pytest.approx(1.5)


def test_growth_and_zeros_for_the_identity():
    K = [Contour.segment(-1, 1)]
    U = [Contour.circle(0, 2)]
    report = growth_zeros_check(IDENTITY, K, U, zeros=[0.0])
    assert report.D == pytest.approx(2.0)
    assert report.eps == pytest.approx(1.0)
    assert report.bernstein == pytest.approx(math.log(2))
    assert report.ln_rhs == pytest.approx(4 + math.log(math.log(2)))
    assert report.passed


def test_kry_inequality_for_the_identity():
    gamma = Contour.circle(0, 1, label="gamma")
    U2, U1, U = (Contour.circle(0, r, label=f"U{r}") for r in (2, 3, 4))
    report = kry_check(IDENTITY, gamma, U2, U1, U, eps=0.49, D=8)
    assert report.passed
    assert report.variation == pytest.approx(2 * math.pi, rel=1e-6)
    assert report.increment == pytest.approx(2 * math.pi, rel=1e-6)
    assert report.bernstein == pytest.approx(math.log(2))
    assert report.diameters == pytest.approx((4.0, 6.0))
    with pytest.raises(ConfigViolation):
        kry_check(IDENTITY, gamma, U2, U1, U, eps=0.5, D=8)
    with pytest.raises(ConfigViolation):
        kry_check(IDENTITY, gamma, U2, U1, U, eps=0.49, D=1)
    with pytest.raises(ConfigViolation):
        kry_check(IDENTITY, gamma, U1, U2, U, eps=0.49, D=8)


def test_gap_and_diameter():
    assert pi_gap([0], [1, 2j]) == pytest.approx(1.0)
    assert euclidean_diameter([0, 3, 4j]) == pytest.approx(5.0)
    assert euclidean_diameter([1j]) == 0.0


def test_bernstein_index_of_the_identity():
    K, U = [Contour.segment(-1, 1)], [Contour.circle(0, math.e)]
    estimate = bernstein_estimate(IDENTITY, K, U)
    assert estimate.value == pytest.approx(1.0)
    assert estimate.m == pytest.approx(1.0)
    assert bernstein_index(IDENTITY, K, U) == pytest.approx(1.0)


def test_zeros_on_an_interval():
    f = AnalyticProbe(lambda t: t * t - 0.09)
    result = zeros_on_interval(f, 0.0, -1.0, 1.0, n=2)
    assert [z.t for z in result.zeros] == pytest.approx([-0.3, 0.3], abs=1e-10)
    assert result.confirmed
    assert result.multiplicity_bound == 16
    assert result.multiplicity_ok
    assert not result.identically_zero


def test_identically_zero_integrand():
    f = AnalyticProbe(lambda t: 0 * t)
    result = zeros_on_interval(f, 0.0, -1.0, 1.0, n=2)
    assert result.identically_zero
    assert result.count == 0
    assert vanishes_identically(sample_contour(f, Contour.segment(0, 1)))


@pytest.mark.slow
def test_oval_area_has_no_zeros_on_sigma(oval_system, h_star_oval, oval_level, h_star_report):
    sd = sigma_interval(oval_system.critical_values, oval_level, oval_system.nu)
    probe = AbelianProbe(OneForm.monomial(0, 0), h_star_oval, oval_system.tol, oval_system.critical_values)
    result = zeros_on_interval(probe, oval_level, sd.left, sd.right, n=2, count=32)
    assert result.count == 0
    assert theorem_A1(2, h_star_report.c_prime, h_star_report.c_doubleprime) > 0
    assert result.multiplicity_ok


@pytest.mark.slow
def test_vanishing_integrals_are_real_on_real_levels(h_star_system):
    kinds = []
    for index in range(h_star_system.mu):
        kind, residual, count, peak = petrov_reality(h_star_system, index, OneForm.monomial(0, 0), samples=10)
        kinds.append(kind)
        assert residual <= h_star_system.tol.reality
        assert count == 10
        assert peak > 0
    assert sorted(kinds) == ["maximum", "minimum", "saddle", "saddle"]
