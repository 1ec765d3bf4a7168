import numpy as np
import pytest
import sympy as sp

from firey_lab import construct, gclass, measure
from firey_lab.errors import BoundaryNotFound, PreconditionError, TangentMismatch
from firey_lab.gclass import GTab
from firey_lab.geometry import AxisymBody, CircleGrid, ProfileSupport, disc, ellipse


@pytest.fixture(scope="module")
def counterexamples():
    return {n: construct.build_counterexample(n, 1.0, 0.1) for n in (2, 3)}


# bump ----------------------------------------------------------------------------------

def test_bump_derivatives_against_sympy():
    s = sp.symbols("s")
    expr = sp.E * sp.exp(-1 / (1 - 4 * s**2))
    xs = np.linspace(-0.45, 0.45, 19)
    for k in range(4):
        f = sp.lambdify(s, sp.diff(expr, s, k), "numpy")
        assert np.allclose(construct.bump(xs, k), f(xs), rtol=1e-11, atol=1e-14)
    assert construct.bump(0.0) == pytest.approx(1.0)
    assert np.all(construct.bump(np.array([-0.6, 0.5, 0.7])) == 0)


# ball deviation ---------------------------------------------------------------------------

def test_ball_deviation():
    grid = CircleGrid(512)
    dev, centre, rad = construct.ball_deviation(disc(grid, 1.3, (0.2, -0.1)))
    assert dev <= 1e-12 and np.allclose(centre, [0.2, -0.1]) and rad == pytest.approx(1.3)
    dev, _, _ = construct.ball_deviation(ellipse(grid, 2.0, 1.0))
    assert dev == pytest.approx(0.5, abs=1e-9)


# tangency gluing ------------------------------------------------------------------------

def test_glue_disc_with_itself():
    grid = CircleGrid(512)
    D = disc(grid, 1.0)
    L = construct.tangency_glue(D, D, [1.0, 0.0], [-1.0, 0.0])
    assert np.max(np.abs(L.h - 1.0)) <= 1e-14


def test_glue_disc_with_tangent_body():
    grid = CircleGrid(512)
    D = disc(grid, 1.0)
    T = ProfileSupport(grid, 1 + 0.3 * np.sin(grid.angles) ** 2)  # touches D at (+-1, 0)
    L = construct.tangency_glue(D, T, [1.0, 0.0], [-1.0, 0.0])
    assert sorted(L.seams) == pytest.approx([0.0, np.pi])
    upper = np.sin(grid.angles) > 0
    assert np.array_equal(L.h[upper], D.h[upper])
    assert np.array_equal(L.h[~upper], T.h[~upper])
    # convexity away from the seams
    q = measure.density_planar(L, mode="fd").f
    keep = measure.seam_mask(grid.angles, L.seams, 2, grid.step)
    assert q[keep].min() >= 0


def test_glue_rejects_tangent_mismatch():
    grid = CircleGrid(512)
    D = disc(grid, 1.0)
    E = ellipse(grid, 1.3, 0.8, 0.4)
    from scipy.optimize import brentq
    from firey_lab.geometry import radial_at_angles
    f = lambda t: radial_at_angles(E, np.array([t]))[0] - 1.0  # noqa: E731
    t0 = brentq(f, 0.5, 1.5)
    p = np.array([np.cos(t0), np.sin(t0)])
    with pytest.raises(TangentMismatch):
        construct.tangency_glue(D, E, p, -p)
    with pytest.raises(BoundaryNotFound):
        construct.tangency_glue(D, E, [1.0, 0.0], [-1.0, 0.0])


# central gluing ------------------------------------------------------------------------

def test_central_glue_examples():
    grid = CircleGrid(1024)
    s = np.sin(grid.angles)
    K = AxisymBody(3, ellipse(grid, 1.2, 0.9))
    assert np.max(np.abs(construct.glue_central_symmetric(K).profile.h - K.profile.h)) <= 1e-15
    # upper hemisphere of a ball with a different lower part: output is the ball
    h = 1.0 + 0.2 * np.minimum(s, 0) ** 3
    out = construct.glue_central_symmetric(AxisymBody(3, ProfileSupport(grid, h)))
    assert np.max(np.abs(out.profile.h - 1.0)) <= 1e-15
    again = construct.glue_central_symmetric(out)
    assert np.array_equal(again.profile.h, out.profile.h)
    with pytest.raises(PreconditionError):
        construct.glue_central_symmetric(AxisymBody(3, disc(grid, 1.0, (0.0, 0.1))))


def test_central_glue_restores_the_residual():
    # spheroid with semi-axes (a, c, a) solves f = a^4 c^2 / h^4 in R^3
    a, c = 1.3, 0.7
    grid = CircleGrid(2048)
    phi = grid.angles
    s = np.sin(phi)
    h0 = np.sqrt((a * np.cos(phi)) ** 2 + (c * s) ** 2)
    K = AxisymBody(3, ProfileSupport(grid, h0 + 0.01 * np.where(s < 0, s**4, 0.0)))
    G = GTab(0.6, 1.4, 3, func=lambda t: a**4 * c**2 / t**4)
    rep_in = measure.monge_ampere_residual(K, G, dens=measure.density(K, mode="fd").f)
    assert np.max(np.abs(rep_in.residual[s < -0.5])) > 1e-3
    out = construct.glue_central_symmetric(K)
    assert np.max(np.abs(out.profile.h - h0)) <= 1e-15
    assert measure.monge_ampere_residual(out, G, seams=[0.0, np.pi], seam_band=2).max_abs <= 1e-9


# cap gluing ----------------------------------------------------------------------------

def cap_setup(n, N=4096):
    grid = CircleGrid(N)
    T = construct.cubic_cap_profile(grid)
    nu1, nu2 = np.arcsin(0.2), np.arcsin(0.8)
    spec = construct.GlueSpec(T, 1.0, 1.01, nu1, nu2)
    G = construct.profile_gtab(T, n, nu1, nu2)
    return spec, AxisymBody(n, T), G


@pytest.mark.parametrize("n", [2, 3])
def test_cap_gluing_residual(n):
    spec, K, G = cap_setup(n)
    cg = construct.glue_spherical_caps(spec, K, G, 0.002)
    body, G_eps, measure_eps = cg
    assert body.n == n and measure_eps > 0
    assert cg.residual().max_abs <= 1e-5
    # caps carry the ball densities r_i^{n-1}
    f = measure.density(body, mode="fd").f
    s = np.abs(np.sin(body.profile.phi))
    keep = measure.seam_mask(body.profile.phi, cg.seams, 2, body.profile.grid.step)
    assert np.allclose(f[(s < 0.15) & keep], 1.0 ** (n - 1), atol=1e-9)
    assert np.allclose(f[(s > 0.85) & keep], 1.01 ** (n - 1), atol=1e-9)
    # centrally symmetric output
    h = body.profile.h
    assert np.array_equal(h, np.roll(h, body.profile.N // 2))


def test_excluded_measure_decreases_to_zero():
    spec, K, G = cap_setup(2)
    eps = 0.002 / 2.0 ** np.arange(5)
    meas = [construct.excluded_measure(spec, 2, e) for e in eps]
    assert np.all(np.diff(meas) < 0)
    assert meas[-1] < 0.3 * meas[0]
    # n = 2: measure is the arc length of {r1 < h < r1 + eps} U {r2 - eps < h < r2}
    cg = construct.glue_spherical_caps(spec, K, G, 0.002)
    step = K.profile.grid.step
    counted = cg.excluded_mask().sum() * step
    assert counted == pytest.approx(meas[0], abs=8 * step)


def test_cap_hypotheses():
    grid = CircleGrid(1024)
    with pytest.raises(PreconditionError) as err:
        construct.GlueSpec(disc(grid, 1.005), 1.0, 1.01, 0.2, 1.0)
    assert err.value.details["hypothesis"] == "tangency"
    spec, K, _ = cap_setup(3, 1024)
    with pytest.raises(PreconditionError) as err:
        construct.glue_spherical_caps(spec, K, gclass.preset("const:0.5", 3, 0.5, 2.0), 0.001)
    assert err.value.details["hypothesis"] == "b"


# counterexample -------------------------------------------------------------------------

def test_zero_bump_gives_ball():
    def zero(s, order=0):
        return np.zeros_like(np.asarray(s, dtype=float))

    C = construct.build_counterexample(3, 1.0, 0.1, g=zero, N=512, num=1025)
    assert C.m == 1
    assert np.max(np.abs(C.body.profile.h - 1.0)) == 0
    assert np.max(np.abs(C.G.G - 1.0)) <= 1e-12
    assert construct.verify_counterexample(C).residual.max_abs <= 1e-10  # shifted ball roundoff


@pytest.mark.parametrize("n", [2, 3])
def test_counterexample_report(counterexamples, n):
    C = counterexamples[n]
    rep = construct.verify_counterexample(C)
    assert rep.residual.max_abs <= 1e-6
    assert rep.certificate.passed and rep.An_min > 0
    assert rep.central_symmetry_error == 0
    assert rep.translation_identity_error <= 1e-8
    assert np.allclose(rep.barycentre, [0.0, 0.1], atol=1e-9)
    assert C.checks.monotone_margin > 0 and C.checks.density_min > 0
    w = construct.nonmonotonicity_witness(C)
    assert w is not None and C.G.c1 < w["theta_extremum"] < C.G.c2


def test_outer_latitudes_have_ball_density():
    r, n = 1.5, 3
    C = construct.build_counterexample(n, r, 0.1)
    # the local stencil sees only ball nodes there; the spectral density would
    # carry the global aliasing of the bump (about 2e-9)
    f = measure.density(C.body, mode="fd").f
    s = np.abs(np.sin(C.body.profile.phi))
    assert np.max(np.abs(f[s > 0.5] - r ** (n - 1))) <= 1e-12


def test_m_sweep_converges_to_constant(counterexamples):
    m0 = counterexamples[3].m
    rows = construct.m_sweep(3, 1.0, 0.1, m0=m0, steps=3)
    sup = [r["sup_G_minus_const"] for r in rows]
    dG = [r["sup_dG"] for r in rows]
    assert np.all(np.diff(sup) < 0) and np.all(np.diff(dG) < 0)
    assert sup[-1] < 1e-2
    assert sup[0] / sup[-1] == pytest.approx(4.0, rel=0.05)


def test_explicit_small_m_is_rejected(counterexamples):
    with pytest.raises(PreconditionError) as err:
        construct.build_counterexample(3, 1.0, 0.1, m=64)
    assert err.value.details["minimal_admissible_m"] == counterexamples[3].m


def test_counterexample_requires_room_for_the_shift():
    with pytest.raises(PreconditionError):
        construct.build_counterexample(3, 0.1, 0.1)
