import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from firey_lab import gclass
from firey_lab.errors import InvalidInput, PreconditionError
from firey_lab.gclass import GTab, check_An, extend_An, glue_G_eps, gtab_from_dict, preset


# certificate ----------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("dp", [0.25, 1.0, 2.5, 4.0])
def test_powers_above_threshold_pass(n, dp):
    p = -n - 1 + dp
    assert check_An(preset(f"power:{p}", n), n).passed


@pytest.mark.parametrize("n", [2, 3, 4])
def test_threshold_power_is_flat(n):
    # theta G + n H = theta^-n - theta^-n + const is constant
    cert = check_An(preset(f"power:{-n - 1}", n), n)
    assert not cert.passed
    assert cert.violation[2] == "not strictly increasing"


def test_below_threshold_decreases():
    cert = check_An(preset("power:-5", 3), 3)
    assert not cert.passed and cert.violation[2] == "decreasing"


@given(st.floats(0.01, 5.0), st.floats(0.05, 3.0))
def test_increasing_functions_pass(a, b):
    G = GTab(0.2, 4.0, 3, func=lambda t: a + np.tanh(b * t), dfunc=lambda t: b / np.cosh(b * t) ** 2)
    assert check_An(G, 3).passed


def test_min_derivative_form_matches_closed_form():
    # theta G' + (n+1) G = (p + n + 1) theta^p for G = theta^p
    n, p = 3, -2.0
    cert = check_An(preset(f"power:{p}", n, 0.5, 2.0), n)
    assert cert.min_derivative_form == pytest.approx((p + n + 1) * 2.0**p, rel=1e-12)


# GTab ---------------------------------------------------------------------------------

def test_gtab_interpolation_and_antiderivative():
    th = np.linspace(0.5, 2.0, 2001)
    G = GTab(0.5, 2.0, 2, samples=th**2)
    x = np.array([0.7, 1.33, 1.9])
    assert np.allclose(G(x), x**2, atol=1e-12)
    assert np.allclose(G.antiderivative(x), (x**3 - 0.125) / 3, atol=1e-12)
    Gl = GTab(0.5, 2.0, 2, samples=th**2, interp="linear")
    assert np.allclose(Gl(x), x**2, atol=1e-6)


def test_gtab_validation_and_json():
    with pytest.raises(InvalidInput):
        GTab(1.0, 0.5, 2, func=np.ones_like)
    with pytest.raises(InvalidInput):
        GTab(0.5, 1.0, 2, samples=-np.ones(10))
    with pytest.raises(InvalidInput):
        preset("mystery:1")
    G = preset("power:2", 3, 0.5, 2.0, num=257)
    back = gtab_from_dict(G.to_dict())
    assert back.n == 3 and np.array_equal(back.G, G.G)
    with pytest.raises(InvalidInput):
        gtab_from_dict({"n": 2, "G": [1, 2]})


# extension to (0, Theta] -----------------------------------------------------------------

def test_extension_of_constant():
    n, c = 3, 1.7
    ext, frep = extend_An(preset(f"const:{c}", n, 1.0, 2.0), Theta=5.0, n=n)
    th = np.linspace(0.01, 5.0, 200)
    assert np.allclose(ext.G_bar(th), c)
    assert np.allclose(ext.F(th), (n + 1) * c * th, atol=1e-12)
    assert frep.check()


def test_extension_against_symbolic_antiderivative():
    # G(theta) = theta on [1, 2], n = 2
    t = sp.symbols("t", positive=True)
    Hbar = sp.Piecewise((t * 1, t < 1),
                        (1 + sp.integrate(sp.Symbol("s"), (sp.Symbol("s"), 1, t)), t <= 2),
                        (1 + sp.Rational(3, 2) + 2 * (t - 2), True))
    F = t * sp.Piecewise((1, t < 1), (t, t <= 2), (2, True)) + 2 * Hbar
    ext, frep = extend_An(preset("power:1", 2, 1.0, 2.0), Theta=3.0, n=2)
    for x in np.linspace(0.05, 3.0, 37):
        assert float(ext.H_bar(x)) == pytest.approx(float(Hbar.subs(t, x)), abs=1e-12)
        assert float(ext.F(x)) == pytest.approx(float(F.subs(t, x)), abs=1e-12)
    assert frep.F[0] == 0.0 and frep.check()


def test_extension_integral_identity():
    rng = np.random.default_rng(0)
    ext, _ = extend_An(preset("power:-1.5", 3, 0.8, 1.6), Theta=3.0)
    assert ext.identity_residual(rng.uniform(0.05, 3.0, 50)) <= 1e-9


def test_extension_certificate_on_subintervals():
    ext, _ = extend_An(preset("increasing:demo", 3, 0.5, 1.5), Theta=3.0, n=3)
    for a, b in ((0.1, 0.6), (0.4, 2.0), (1.2, 3.0)):
        assert check_An(ext.as_gtab(a, b), 3).passed


def test_extension_rejects_non_class_G():
    with pytest.raises(PreconditionError):
        extend_An(preset("power:-4", 3), n=3)


# end-point gluing ------------------------------------------------------------------------

def test_glue_trivial_when_values_match():
    G = preset("power:1", 2, 0.5, 3.0)
    Ge = glue_G_eps(G, 1.0, 2.0, 1.0, 2.0, 0.1)
    th = np.linspace(1.0, 2.0, 101)
    assert Ge.ramp_ends == (1.0, 2.0)
    assert np.array_equal(Ge(th), G(th))


def test_glue_constant_with_ramps():
    G = preset("const:1", 3, 0.5, 3.0)
    eps = 0.1
    Ge = glue_G_eps(G, 1.0, 2.0, 0.5, 2.0, eps, n=3)
    c1p, c2p = Ge.ramp_ends
    assert 1.0 < c1p <= 1.0 + eps and 2.0 - eps <= c2p < 2.0
    assert float(Ge(1.0)) == pytest.approx(0.5) and float(Ge(2.0)) == pytest.approx(2.0)
    # linear on the ramps
    x = np.linspace(1.0, c1p, 7)
    assert np.allclose(np.diff(Ge(x), 2), 0, atol=1e-12)
    assert check_An(Ge, 3).passed
    # antiderivative consistent with the values
    th = np.linspace(1.0, 2.0, 4001)
    from scipy.integrate import cumulative_trapezoid
    num = cumulative_trapezoid(Ge(th), th, initial=0)
    assert np.max(np.abs(Ge.antiderivative(th) - num)) <= 1e-6


def test_glue_copies_G_in_the_middle():
    G = preset("increasing:demo", 2, 0.5, 3.0)
    eps = 0.05
    Ge = glue_G_eps(G, 1.0, 2.0, 0.5, 5.0, eps)
    th = np.linspace(1.0 + eps, 2.0 - eps, 501)
    assert np.array_equal(Ge(th), G(th))


def test_glue_family_bounded_as_eps_shrinks():
    G = preset("const:1", 2, 0.5, 3.0)
    sups = []
    for eps in 0.2 / 2.0 ** np.arange(8):
        Ge = glue_G_eps(G, 1.0, 2.0, 0.5, 2.0, eps)
        sups.append(np.max(Ge(np.linspace(1.0, 2.0, 20001))))
    assert max(sups) <= 2.0 + 1e-12


def test_glue_hypotheses():
    G = preset("const:1", 2, 0.5, 3.0)
    with pytest.raises(PreconditionError):
        glue_G_eps(G, 1.0, 2.0, 1.5, 2.0, 0.1)  # G(c1) < a1
    with pytest.raises(PreconditionError):
        glue_G_eps(G, 1.0, 2.0, 0.5, 0.8, 0.1)  # a1 < a2 but G(c2) > a2
    with pytest.raises(PreconditionError):
        glue_G_eps(G, 1.0, 2.0, 0.5, 2.0, 0.6)
    with pytest.raises(PreconditionError):
        glue_G_eps(G, 0.1, 2.0, 0.5, 2.0, 0.1)


def test_presets_names():
    assert gclass.preset("power:1").name == "power:1"
    assert gclass.preset("increasing:demo").derivative(np.array([1.0]))[0] == pytest.approx(0.5)
