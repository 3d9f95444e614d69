import math

import numpy as np
import pytest

from numerics.cycles import (
    BasePath,
    Cycle,
    OneForm,
    integrate_form,
    intersection_index,
    local_vanishing_cycle,
    polyline_clearance,
    trace_real_oval,
    transport_cycle,
)
from numerics.polynomial_core import Polynomial2, critical_points


@pytest.fixture(scope="module")
def disk():
    """x**2 + y**2, whose level 1 is the unit circle"""
    return Polynomial2.from_terms({(2, 0): 1.0, (0, 2): 1.0}, strict=False)


def test_monomial_form():
    w = OneForm.monomial(1, 0)
    assert w.monomial_tag == (1, 0)
    assert w.A.terms() == {(1, 1): 1.0}
    assert not np.any(w.B.coeffs)
    assert OneForm.from_dict({"monomial": [1, 0]}).monomial_tag == (1, 0)
    assert OneForm.from_dict(w.to_dict()).monomial_tag == (1, 0)


def test_form_from_coefficient_lists():
    w = OneForm.from_dict({"A": [{"i": 0, "j": 1, "re": 2.0}], "B": [{"i": 1, "j": 0, "re": -1.0}]})
    A, B = w(0.5, 3.0)
    assert A == pytest.approx(6.0)
    assert B == pytest.approx(-0.5)
    assert w.monomial_tag is None


def test_exact_form_is_the_differential():
    f = Polynomial2.from_terms({(2, 1): 1.0, (0, 3): 2.0}, strict=False)
    A, B = OneForm.exact(f)(1.0, 2.0)
    assert A == pytest.approx(4.0)
    assert B == pytest.approx(1.0 + 24.0)


def test_traced_circle_is_counterclockwise(disk):
    c = trace_real_oval(disk, 1.0, (1.0, 0.0))
    assert c.on_level(1.0)
    assert c.residual < 1e-9
    assert np.allclose(np.abs(c.points[:, 0] ** 2 + c.points[:, 1] ** 2), 1.0, atol=1e-9)
    # y dx over a ccw circle is minus the enclosed area
    assert integrate_form(c, OneForm.monomial(0, 0)) == pytest.approx(-math.pi, rel=1e-7)


def test_integrand_divides_only_by_the_chart_component(disk):
    # (1, 0) has H_y = 0 exactly
    angles = 2 * np.pi * np.arange(64) / 64
    c = Cycle(disk, 1.0, np.column_stack([np.cos(angles), np.sin(angles)]))
    with np.errstate(divide="raise", invalid="raise"):
        area = integrate_form(c, OneForm.monomial(0, 0))
    assert area == pytest.approx(-math.pi, rel=1e-7)


def test_exact_forms_integrate_to_zero(disk, h_star_oval):
    f = Polynomial2.from_terms({(3, 1): 1.0, (1, 2): -0.7, (0, 1): 2.0}, strict=False)
    w = OneForm.exact(f)
    assert abs(integrate_form(trace_real_oval(disk, 1.0, (1.0, 0.0)), w)) < 1e-9
    assert abs(integrate_form(h_star_oval, w)) < 1e-9


def test_oval_of_h_star(h_star_oval, oval_level):
    assert h_star_oval.on_level(oval_level)
    assert np.all(np.abs(h_star_oval.points.imag) < 1e-12)
    area = -integrate_form(h_star_oval, OneForm.monomial(0, 0))
    assert area.real > 0
    assert abs(area.imag) < 1e-12


def test_local_vanishing_cycle_at_a_minimum(h_star):
    cp = critical_points(h_star)[0]
    r = 1e-3
    c = local_vanishing_cycle(h_star, cp, r)
    assert c.on_level(cp.value + r)
    J = integrate_form(c, OneForm.monomial(0, 0))
    # ellipse {Q(w)/2 = r} has area 2 pi r / sqrt(det Q)
    expected = 2 * math.pi * r / math.sqrt(abs(cp.hessian_det))
    assert abs(J) == pytest.approx(expected, rel=1e-2)
    assert abs(J.imag) < 1e-6 * abs(J)


def test_transport_round_trip_returns_to_the_same_cycle(h_star_oval, oval_level):
    w = OneForm.monomial(0, 0)
    loop = BasePath([oval_level, oval_level + 0.02, oval_level + 0.02j, oval_level])
    moved = transport_cycle(h_star_oval, loop)
    assert moved.on_level(oval_level)
    assert integrate_form(moved, w) == pytest.approx(integrate_form(h_star_oval, w), rel=1e-8)


def test_oval_meets_the_saddle_cycle_once():
    H = Polynomial2.from_terms({(3, 0): 1.0, (1, 0): -3.0, (0, 2): 1.0}, strict=False)
    oval = trace_real_oval(H, 0.0, (1.0, math.sqrt(2.0)))
    saddle = next(cp for cp in critical_points(H) if abs(cp.location[0] + 1) < 1e-9)
    vanishing = local_vanishing_cycle(H, saddle, -0.05)
    moved = transport_cycle(vanishing, BasePath([1.95, 0.0]))
    assert abs(intersection_index(oval, moved)) == 1
    assert intersection_index(oval, oval) == 0


def test_polyline_clearance_and_paths():
    assert polyline_clearance([0, 2], [1 + 1j]) == pytest.approx(1.0)
    assert polyline_clearance([0, 2], [0, 1 + 0.5j], exclude=[0]) == pytest.approx(0.5)
    path = BasePath.from_points([0, 1, 1 + 1j], [0.5 + 0.25j], label="p")
    assert path.clearance == pytest.approx(0.25)
    assert path.length() == pytest.approx(2.0)
    with pytest.raises(ValueError):
        path.then(BasePath([5, 6]))
    circle = BasePath(np.exp(2j * math.pi * np.arange(65) / 64))
    assert circle.fingerprint([0])[0] == pytest.approx(2 * math.pi)
    assert circle.fingerprint([3])[0] == pytest.approx(0.0, abs=1e-12)
