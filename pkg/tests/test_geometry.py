import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import smooth_profile
from firey_lab import geometry
from firey_lab.errors import InvalidInput, NonConvex, OriginNotInterior
from firey_lab.geometry import (AxisymBody, CircleGrid, Polygon, ProfileSupport, barycentre,
                                body_from_dict, body_to_dict, disc, ellipse, gauss_preimage,
                                polar_support, radial_at_angles, radial_from_support, sandwich,
                                support_from_points)

SQUARE = [[1, 1], [-1, 1], [-1, -1], [1, -1]]


def random_polygon(rng, count=12, radius=1.0):
    ang = np.sort(rng.uniform(0, 2 * np.pi, count))
    r = radius * rng.uniform(0.6, 1.0, count)
    return Polygon.from_points(np.column_stack([r * np.cos(ang), r * np.sin(ang)]))


# support from points ---------------------------------------------------------

def test_square_support_values():
    grid = CircleGrid(256)
    L = support_from_points(SQUARE, grid)
    assert L.h[0] == pytest.approx(1.0, abs=1e-15)
    assert L.h[32] == pytest.approx(np.sqrt(2), abs=1e-15)  # phi = pi/4


def test_dense_circle_points():
    grid = CircleGrid(1024)
    t = 2 * np.pi * np.arange(10_000) / 10_000
    L = support_from_points(np.column_stack([np.cos(t), np.sin(t)]), grid)
    assert np.max(np.abs(L.h - 1)) <= 1e-6


def test_translation_adds_linear_term():
    grid = CircleGrid(512)
    pts = np.random.default_rng(0).normal(size=(40, 2))
    a = np.array([0.0, 0.3])
    h0 = support_from_points(pts, grid).h
    h1 = support_from_points(pts + a, grid).h
    # the same maximiser is selected, so only rounding of the sum remains
    assert np.max(np.abs(h1 - h0 - 0.3 * np.sin(grid.angles))) <= 4 * np.finfo(float).eps * 4


@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2)), min_size=3, max_size=30),
       st.floats(-1, 1), st.floats(-1, 1))
def test_translation_covariance_property(points, ax, ay):
    pts = np.array(points)
    if np.linalg.matrix_rank(pts - pts.mean(axis=0)) < 2:
        return
    grid = CircleGrid(256)
    a = np.array([ax, ay])
    h0 = support_from_points(pts, grid).h
    h1 = support_from_points(pts + a, grid).h
    assert np.max(np.abs(h1 - h0 - grid.u @ a)) <= 16 * np.finfo(float).eps * (1 + np.abs(pts).max())


# radial function and polarity ---------------------------------------------------

@pytest.mark.parametrize("r", [0.5, 1.0, 3.0])
def test_disc_radial_and_polar(r):
    grid = CircleGrid(256)
    L = disc(grid, r)
    assert np.allclose(radial_at_angles(L, grid.angles), r, atol=1e-13)
    assert np.allclose(polar_support(L).h, 1 / r, atol=1e-13)


def test_square_radial_diagonal():
    L = support_from_points(SQUARE, CircleGrid(256))
    v = np.array([1.0, 1.0]) / np.sqrt(2)
    assert radial_from_support(L, v) == pytest.approx(np.sqrt(2), abs=1e-14)


def test_square_polar_is_diamond():
    grid = CircleGrid(256)
    P = polar_support(support_from_points(SQUARE, grid))
    assert P.h[0] == pytest.approx(1.0, abs=1e-14)
    diamond = np.maximum(np.abs(np.cos(grid.angles)), np.abs(np.sin(grid.angles)))
    assert np.max(np.abs(P.h - diamond)) <= 1e-13


def test_random_polygon_duality_identity():
    rng = np.random.default_rng(1)
    grid = CircleGrid(512)
    for _ in range(10):
        L = ProfileSupport.from_polygon(grid, random_polygon(rng))
        rho = radial_at_angles(L, grid.angles)
        hp = L.polygon.polar().support(grid.u)
        assert np.max(np.abs(rho * hp - 1)) <= 1e-6


def test_double_polar_of_random_polygon():
    rng = np.random.default_rng(2)
    grid = CircleGrid(2048)
    for _ in range(5):
        L = ProfileSupport.from_polygon(grid, random_polygon(rng).translate([0.05, -0.02]))
        assert np.max(np.abs(polar_support(polar_support(L)).h - L.h)) <= 1e-5


def test_dual_support_is_independent_of_radial_route():
    # h_{L°}(v) = max_u <u, v> / h_L(u) as a dense maximum
    grid = CircleGrid(256)
    L = ellipse(grid, 1.7, 0.6, 0.4, (0.1, 0.2))
    M = 1 << 16
    psi = 2 * np.pi * np.arange(M) / M
    pts = geometry.unit(psi) / L.evaluate(psi)[:, None]
    brute = np.max(grid.u @ pts.T, axis=1)
    assert np.max(np.abs(polar_support(L).h - brute)) <= 1e-7


@given(st.lists(st.floats(-1, 1), min_size=2, max_size=10), st.floats(-0.2, 0.2), st.floats(-0.2, 0.2))
def test_involution_property(coefs, ax, ay):
    L = smooth_profile(coefs + [0.0] * (len(coefs) % 2), N=1024, shift=(ax, ay))
    PP = polar_support(polar_support(L))
    assert np.max(np.abs(PP.h - L.h)) <= 1e-9


def test_polar_requires_origin_interior():
    with pytest.raises(OriginNotInterior):
        polar_support(disc(CircleGrid(256), 1.0, (2.0, 0.0)))


# Gauss map ------------------------------------------------------------------------

def test_gauss_preimage_examples():
    grid = CircleGrid(256)
    phi = grid.angles
    p = gauss_preimage(disc(grid, 2.0), phi)
    assert np.allclose(p, 2 * geometry.unit(phi), atol=1e-13)
    p = gauss_preimage(disc(grid, 1.0, (0, 0.3)), phi)
    assert np.allclose(p, geometry.unit(phi) + [0, 0.3], atol=1e-13)
    p = gauss_preimage(ellipse(grid, 2.0, 1.0), [0.0])
    assert np.allclose(p, [[2.0, 0.0]], atol=1e-13)


@given(st.lists(st.floats(-1, 1), min_size=2, max_size=8), st.floats(0, 2 * np.pi))
def test_gauss_preimage_touches_support(coefs, phi):
    L = smooth_profile(coefs + [0.0] * (len(coefs) % 2))
    p = gauss_preimage(L, [phi])[0]
    assert abs(p @ geometry.unit(phi) - L.evaluate(phi)[0]) <= 1e-8


# barycentre and sandwich -----------------------------------------------------------

def test_barycentre_examples():
    grid = CircleGrid(512)
    assert np.linalg.norm(barycentre(ellipse(grid, 2.0, 0.7, 0.3))) <= 1e-8
    assert np.allclose(barycentre(disc(grid, 1.0, (0.0, 0.25))), [0.0, 0.25], atol=1e-12)
    tri = ProfileSupport.from_polygon(grid, Polygon.from_points([[0, 0], [3, 0], [0, 3]]))
    assert np.allclose(barycentre(tri), [1.0, 1.0], atol=1e-12)


def test_smooth_barycentre_against_polygon_centroid():
    L = ellipse(CircleGrid(1024), 1.5, 0.5, 0.7, (0.2, -0.1))
    assert np.allclose(barycentre(L), Polygon(geometry.boundary_sample(L, 8192)).centroid, atol=1e-6)


def test_sandwich_examples():
    grid = CircleGrid(512)
    rep = sandwich(disc(grid, 1.5))
    assert rep.r_in == pytest.approx(1.5) and rep.r_out == pytest.approx(1.5)
    rep = sandwich(ellipse(grid, 2.0, 1.0))
    assert rep.r_in == pytest.approx(1.0, abs=1e-12) and rep.r_out == pytest.approx(2.0, abs=1e-12)


def test_sandwich_ratio_bounded_for_pinched_curvature():
    # curvature radius within [1/2, 2] keeps the in/out ratio uniformly bounded
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(40):
        L = smooth_profile(rng.normal(size=8), N=512, base=1.0)
        f = L.derivative(2) + L.h
        assert 0.5 <= f.min() and f.max() <= 2.0
        worst = max(worst, sandwich(L).ratio)
    assert worst < 4.0


# validation and I/O ----------------------------------------------------------------

def test_profile_validation():
    grid = CircleGrid(256)
    with pytest.raises(InvalidInput):
        ProfileSupport(grid, np.ones(100))
    with pytest.raises(InvalidInput):
        ProfileSupport(grid, np.full(256, np.nan))
    with pytest.raises(NonConvex):
        ProfileSupport(grid, 1 + 0.5 * np.cos(4 * grid.angles))


def test_grid_size_validation():
    with pytest.raises(InvalidInput):
        CircleGrid(2)
    with pytest.raises(InvalidInput):
        CircleGrid(12.5)


def test_axisym_requires_reflection_symmetry():
    grid = CircleGrid(256)
    with pytest.raises(Exception):
        AxisymBody(3, disc(grid, 1.0, (0.2, 0.0)))
    AxisymBody(3, disc(grid, 1.0, (0.0, 0.2)))


def test_body_json_roundtrip(tmp_path):
    grid = CircleGrid(256)
    for body in (ellipse(grid, 1.3, 0.9), AxisymBody(3, disc(grid, 2.0)),
                 ProfileSupport.from_polygon(grid, Polygon.from_points(SQUARE))):
        d = json.loads(json.dumps(body_to_dict(body)))
        back = body_from_dict(d)
        prof = back.profile if isinstance(back, AxisymBody) else back
        orig = body.profile if isinstance(body, AxisymBody) else body
        assert np.array_equal(prof.h, orig.h)
        assert prof.smooth == orig.smooth
    with pytest.raises(InvalidInput):
        body_from_dict({"n": 2, "h": [1, 2]})
