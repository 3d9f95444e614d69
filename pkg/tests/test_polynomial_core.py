import json
import math

import numpy as np
import pytest

from numerics.errors import ZeroPolynomial
from numerics.polynomial_core import (
    AffineFrame,
    Polynomial2,
    critical_points,
    hmax_norm,
    is_ultra_morse,
    minimal_enclosing_disk,
)
from conftest import H_STAR_INNER, H_STAR_PATH, H_STAR_VALUES


def test_h_star_file_matches_fixture(h_star):
    with open(H_STAR_PATH) as f:
        poly = Polynomial2.from_json(json.load(f))
    assert poly.degree == 3
    assert poly.n == 2
    assert poly.terms() == h_star.terms()
    assert Polynomial2.from_json(poly.to_json()).terms() == poly.terms()


def test_declared_degree_must_match():
    doc = {"degree": 4, "coeffs": [{"i": 3, "j": 0, "re": 1.0, "im": 0.0}]}
    with pytest.raises(ValueError):
        Polynomial2.from_json(doc)


def test_low_degree_and_zero_polynomials_are_rejected():
    with pytest.raises(ValueError):
        Polynomial2.from_terms({(2, 0): 1.0, (0, 2): 1.0})
    with pytest.raises(ZeroPolynomial):
        Polynomial2.from_terms({})


def test_evaluation_and_derivatives(h_star):
    assert h_star(1.0, 1.0) == pytest.approx(-2.5)
    gx, gy = h_star.gradient(1.0, math.sqrt(0.5))
    assert abs(gx) < 1e-12
    assert abs(gy) < 1e-12
    hess = h_star.hessian(1.0, math.sqrt(0.5))
    assert hess[0, 0] == pytest.approx(6.0)
    assert hess[1, 1] == pytest.approx(6 * math.sqrt(0.5))
    assert hess[0, 1] == pytest.approx(0.0)


def test_critical_points_of_h_star(h_star):
    crit = critical_points(h_star)
    assert len(crit) == 4
    assert all(cp.morse for cp in crit)
    assert [cp.value.real for cp in crit] == pytest.approx(H_STAR_VALUES, abs=1e-10)
    lowest = crit[0].location
    assert lowest[0] == pytest.approx(1.0, abs=1e-10)
    assert lowest[1] == pytest.approx(math.sqrt(0.5), abs=1e-10)


def test_h_star_is_ultra_morse(h_star):
    verdict = is_ultra_morse(h_star)
    assert verdict.ok
    assert verdict.clause is None


def test_coinciding_critical_values_fail_clause_b():
    # values -4, 0, 0, 4
    H = Polynomial2.from_terms({(3, 0): 1.0, (1, 0): -3.0, (0, 3): 1.0, (0, 1): -3.0})
    verdict = is_ultra_morse(H)
    assert not verdict.ok
    assert verdict.clause == "b"


def test_value_tolerance_override_rejects_h_star(h_star):
    from numerics.tolerances import DEFAULT_TOLERANCES

    verdict = is_ultra_morse(h_star, DEFAULT_TOLERANCES.with_overrides({"value": 1.0}))
    assert verdict.clause == "b"


def test_minimal_enclosing_disk():
    center, radius = minimal_enclosing_disk([-1, 1, 1j, 0.2 - 0.3j], seed=3)
    assert abs(center) < 1e-12
    assert radius == pytest.approx(1.0)


def test_normalization_of_h_star(h_star_report):
    r = h_star_report
    assert r.n == 2
    assert r.c_prime == pytest.approx(1.0)
    assert r.c_doubleprime == pytest.approx(1.0)
    assert r.nu == pytest.approx(1 / 16)
    assert r.big_A_log == pytest.approx(16.0)
    assert r.scale_a == pytest.approx(2 / H_STAR_VALUES[-1])
    assert abs(r.shift_b) < 1e-9
    expected = [v * r.scale_a for v in H_STAR_VALUES]
    assert [v.real for v in r.critical_values] == pytest.approx(expected, abs=1e-9)
    assert expected[1] == pytest.approx(H_STAR_INNER, abs=1e-12)
    assert H_STAR_INNER == pytest.approx(-0.9551845, abs=1e-6)
    assert r.verdict.ok


def test_value_maps_are_inverse(h_star_report):
    t = h_star_report.to_normalized_value(-2.5)
    assert t.real == pytest.approx(-1.84699, abs=1e-5)
    assert h_star_report.to_source_value(t) == pytest.approx(-2.5)


def test_rescaled_polynomial(h_star_report, h_star_normalized):
    H, crit = h_star_normalized
    assert hmax_norm(H.higher_form()) == pytest.approx(1.0, rel=1e-4)
    values = sorted(cp.value.real for cp in crit)
    assert values == pytest.approx([v.real for v in h_star_report.critical_values], abs=1e-9)
    assert min(abs(complex(cp.location[0])) + abs(complex(cp.location[1])) for cp in crit) < 1e-9


def test_affine_frame_round_trip():
    frame = AffineFrame(scale=0.5, shift=(1 + 0j, -2j))
    x, y = frame.to_source(0.3, 0.4)
    u, v = frame.to_normalized(x, y)
    assert complex(u) == pytest.approx(0.3)
    assert complex(v) == pytest.approx(0.4)


def test_affine_value_shifts_critical_values(h_star):
    G = h_star.affine_value(2.0, 1.0)
    values = sorted(cp.value.real for cp in critical_points(G))
    assert values == pytest.approx([2 * v + 1 for v in H_STAR_VALUES], abs=1e-9)
    assert np.allclose(G.higher_form().coeffs, 2 * h_star.higher_form().coeffs)
