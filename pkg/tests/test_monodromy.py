import numpy as np
import pytest

from numerics.cycles import Cycle, OneForm
from numerics.errors import ClearanceViolation, ConfigViolation
from numerics.monodromy import (
    _ring_tolerances,
    build_K,
    default_t0,
    homology_coordinates,
    monodromy_at_infinity,
    oval_decomposition,
    picard_lefschetz_apply,
    pl_continuation_residuals,
    real_values,
    route,
    sigma_interval,
    sigma_pieces,
    source_oval_decomposition,
    special_paths,
    validate_t0,
)
from numerics.polynomial_core import Polynomial2
from numerics.tolerances import DEFAULT_TOLERANCES
from services.verify_manager import EIGHT_FIGURE, EIGHT_FIGURE_OVAL
from conftest import H_STAR_INNER

NORMALIZED_VALUES = [-2.0, H_STAR_INNER, -H_STAR_INNER, 2.0]


def test_default_t0_picks_the_widest_gap():
    assert default_t0(NORMALIZED_VALUES) == pytest.approx(0.0)
    assert default_t0([1j, -1j, 2]) == 0.0
    assert default_t0([-1.0, 1.0, 1.5]) == pytest.approx(0.0)


def test_validate_t0():
    validate_t0(NORMALIZED_VALUES, 0.0, 1 / 16)
    with pytest.raises(ConfigViolation):
        validate_t0(NORMALIZED_VALUES, 0.93, 1 / 16)
    with pytest.raises(ConfigViolation):
        validate_t0(NORMALIZED_VALUES, 3.5, 1 / 16)


def test_route_keeps_clearance():
    straight = route(-1.5, -1.2, NORMALIZED_VALUES, 0.1)
    assert len(straight.vertices) == 2
    detour = route(-1.5, 1.5, NORMALIZED_VALUES, 0.1)
    assert detour.clearance >= 0.1
    assert detour.start == -1.5
    assert detour.end == 1.5
    with pytest.raises(ClearanceViolation):
        route(0.0, 0.5, [0.25 + 0.05j * k for k in range(-200, 201)], 0.1)


def test_sigma_of_the_oval_level(oval_level):
    nu = 1 / 16
    sd = sigma_interval(NORMALIZED_VALUES, oval_level, nu)
    assert sd.a == pytest.approx(-2.0)
    assert sd.b == pytest.approx(H_STAR_INNER)
    assert sd.left == pytest.approx(-1.9375)
    assert sd.right == pytest.approx(H_STAR_INNER - nu)
    assert sd.right == pytest.approx(-1.017683, abs=5e-6)
    pieces = sigma_pieces(NORMALIZED_VALUES, oval_level, nu, 2)
    assert set(pieces) == {"sigma_left", "sigma_right", "L+", "L-", "R+", "R-"}
    assert pieces["L+"].clearance >= nu * (1 - 1e-12)


def test_sigma_without_a_real_critical_value_below():
    sd = sigma_interval([1.0, 1j, -1j], 0.0, 0.1)
    assert sd.a is None
    assert sd.left == -3.0
    assert sd.b == pytest.approx(1.0)


def test_real_values():
    assert real_values([1.0, 1j, -2.0 + 1e-12j]) == [-2.0, 1.0]


@pytest.mark.slow
def test_marked_system_of_h_star(h_star_system):
    s = h_star_system
    assert s.mu == 4
    I = s.intersection_matrix
    assert np.array_equal(I, -I.T)
    assert np.all(np.diag(I) == 0)
    assert s.pl_sign in (1, -1)
    assert len(s.alphas) == len(s.lambdas) == 4
    for path, a in zip(s.alphas, s.critical_values):
        assert path.start == pytest.approx(0.0)
        assert path.end == pytest.approx(a)
        assert path.clearance >= s.nu / 2
    manifest = s.to_manifest()
    assert manifest["intersection_matrix"] == I.tolist()


@pytest.mark.slow
def test_picard_lefschetz_matches_continuation(h_star_system):
    residuals = pl_continuation_residuals(h_star_system)
    assert len(residuals) == 16
    assert max(residuals.values()) <= DEFAULT_TOLERANCES.pl_rtol


@pytest.mark.slow
def test_picard_lefschetz_fixes_its_own_cycle(h_star_system):
    for j in range(h_star_system.mu):
        e = np.eye(h_star_system.mu, dtype=int)[j]
        assert np.array_equal(picard_lefschetz_apply(h_star_system, j, e), e)


@pytest.mark.slow
def test_deltas_have_unit_coordinates(h_star_system):
    for j, delta in enumerate(h_star_system.deltas):
        coords = homology_coordinates(h_star_system, delta)
        assert np.array_equal(coords, np.eye(h_star_system.mu, dtype=int)[j])


@pytest.mark.slow
def test_oval_decomposes_over_the_enclosed_minimum(oval_system, h_star_oval):
    signs = oval_decomposition(oval_system, h_star_oval)
    assert np.count_nonzero(signs) == 1
    assert np.max(np.abs(signs)) == 1
    j = int(np.flatnonzero(signs)[0])
    assert oval_system.critical_values[j].real == pytest.approx(-2.0)


@pytest.mark.slow
def test_construction_of_K(oval_system, h_star_oval):
    K = build_K(oval_system, oval=h_star_oval, form=OneForm.monomial(0, 0))
    assert len(K.edge_checks) == 4
    assert all(c.passed for c in K.edge_checks)
    assert K.intrinsic_diameter_K_prime < 19 * 4
    assert K.intrinsic_diameter_K < 36 * 4
    assert K.clearance >= oval_system.nu * (1 - 1e-9)
    assert K.value_check["passed"]


@pytest.mark.slow
def test_modified_construction_from_a_vanishing_cycle(h_star_system):
    K = build_K(h_star_system, distinguished=0)
    assert K.root == 0
    assert len(K.edge_checks) == 3
    assert "disk_l" in K.extras
    with pytest.raises(ValueError):
        build_K(h_star_system)


@pytest.mark.slow
def test_monodromy_at_infinity(h_star_system, h_star_normalized):
    H, _ = h_star_normalized
    report = monodromy_at_infinity(
        H,
        OneForm.monomial(0, 0),
        5.0,
        h_star_system.deltas[0],
        h_star_system.critical_values,
        DEFAULT_TOLERANCES,
        extra_forms=h_star_system.forms,
    )
    assert report.circuits == 3
    assert report.returned
    assert report.divides
    assert report.residuals[-1] <= 1e-6
    with pytest.raises(ValueError):
        monodromy_at_infinity(H, OneForm.monomial(0, 0), 2.0, h_star_system.deltas[0])


def test_lifted_paths_stay_below_a_nearly_real_ray():
    # three real values on the ray from t0 towards -2, and a pair leaving it at a shallow angle
    values = [2.0, 0.5, -2.0, -1.986 + 0.187j, -1.986 - 0.187j]
    nu = 0.0068
    paths = special_paths(values, 2.226, nu)
    assert [p.end for p in paths] == pytest.approx(values)
    assert all(p.start == pytest.approx(2.226) for p in paths)
    assert all(p.clearance >= nu / 2 for p in paths)
    lifted = paths[2].vertices[1:-1]
    assert np.all(lifted.imag > 0)
    slope = lifted[0].imag / (2.226 - lifted[0].real)
    assert slope < 0.187 / 4.212


def test_ring_tolerances_follow_the_cycle_extent():
    disk = Polynomial2.from_terms({(2, 0): 1.0, (0, 2): 1.0}, strict=False)
    angles = 2 * np.pi * np.arange(64) / 64
    small = Cycle(disk, 4.0, np.column_stack([2 * np.cos(angles), 2 * np.sin(angles)]))
    large = Cycle(disk, 36.0, np.column_stack([6 * np.cos(angles), 6 * np.sin(angles)]))
    same = _ring_tolerances(DEFAULT_TOLERANCES, small, 2.0, 3)
    assert same.h_max == pytest.approx(DEFAULT_TOLERANCES.h_max)
    assert same.max_points == 4 * DEFAULT_TOLERANCES.max_points
    grown = _ring_tolerances(DEFAULT_TOLERANCES, large, 2.0, 3)
    assert grown.h_max == pytest.approx(3 * DEFAULT_TOLERANCES.h_max)
    assert grown.h_min == pytest.approx(3 * DEFAULT_TOLERANCES.h_min)


@pytest.mark.slow
def test_eight_figure_oval_decomposes_over_two_minima_and_a_saddle():
    level, seed = EIGHT_FIGURE_OVAL
    system, signs = source_oval_decomposition(EIGHT_FIGURE, level, seed)
    assert system.mu == 9
    assert np.count_nonzero(signs) == 3
    assert np.max(np.abs(signs)) == 1
    for j in np.flatnonzero(signs):
        x, y = system.critical[j].location
        assert abs(x.imag) < 1e-9 and abs(y.imag) < 1e-9
