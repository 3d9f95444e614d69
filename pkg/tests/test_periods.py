import math

import numpy as np
import pytest

from numerics.errors import NoStabilization
from numerics.periods import (
    circle_samples,
    delta0_audit,
    delta0_bound,
    determinant_monodromy_check,
    determinant_polynomiality_check,
    fit_polynomial,
    period_matrix,
    standard_forms,
)
from numerics.tolerances import DEFAULT_TOLERANCES


def test_standard_forms_for_cubics():
    tags = [w.monomial_tag for w in standard_forms(2)]
    assert tags == [(0, 0), (1, 0), (0, 1), (2, 0)]
    with pytest.raises(ValueError):
        standard_forms(1)


def test_standard_forms_filtered_by_the_higher_form(h_star_normalized):
    H, _ = h_star_normalized
    forms = standard_forms(2, H)
    assert len(forms) == 4
    assert len({w.monomial_tag for w in forms}) == 4


def test_fit_recovers_a_quadratic():
    ts = circle_samples(1.5, 10)
    values = [2 - 1j * t + 0.5 * t * t for t in ts]
    fit = fit_polynomial(ts, values)
    assert fit.degree == 2
    assert fit.residual < 1e-12
    assert np.allclose(fit.coefficients, [2, -1j, 0.5], atol=1e-10)


def test_fit_gives_up_on_non_polynomial_data():
    ts = circle_samples(1.5, 10)
    tol = DEFAULT_TOLERANCES.with_overrides({"max_fit_degree": 3})
    with pytest.raises(NoStabilization):
        fit_polynomial(ts, [1 / (t - 2) for t in ts], tol)


def test_circle_samples():
    ts = circle_samples(1.5, 10)
    assert len(ts) == 10
    assert np.allclose(np.abs(ts), 1.5)
    assert min(abs(t.imag) for t in ts) > 0.4


def test_delta0_bound_for_h_star(h_star_report):
    assert delta0_bound(h_star_report) == pytest.approx(-496 * math.log(2))


@pytest.mark.slow
def test_period_matrix_of_h_star(h_star_system, h_star_report):
    pm = h_star_system.base_periods
    assert pm.entries.shape == (4, 4)
    assert abs(pm.det) > 0
    assert delta0_audit(pm, h_star_report)
    again = period_matrix(h_star_system)
    assert np.allclose(again.entries, pm.entries, rtol=1e-8)


@pytest.mark.slow
def test_determinant_is_single_valued(h_star_system):
    loops = list(h_star_system.lambdas)
    loops.append(loops[0].then(loops[1], "lambda0.lambda1"))
    check = determinant_monodromy_check(h_star_system, loops)
    assert check.passed
    assert len(check.residuals) == 5


@pytest.mark.slow
def test_determinant_is_a_polynomial(h_star_system):
    fit = determinant_polynomiality_check(h_star_system, circle_samples(1.5, 10))
    assert fit.residual <= DEFAULT_TOLERANCES.fit_rtol
    assert fit.degree <= 8
