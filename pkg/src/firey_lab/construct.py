"""Gluing of planar profiles and bodies of revolution, and the translated
non-spherical solution built from a smooth bump.

Angles follow the axisymmetric convention: phi is the angle of the normal
measured from the x1-axis, so sin(phi) is the latitude coordinate <v, e2>.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import linprog

from .errors import (BoundaryNotFound, InvalidInput, PreconditionError, TangentMismatch)
from .gclass import AnCertificate, GTab, check_An, glue_G_eps
from .geometry import AxisymBody, CircleGrid, ProfileSupport
from .measure import (ResidualReport, _axisym_density_values, density, monge_ampere_residual,
                      seam_mask, sphere_area)

SEAM_BAND = 2


def _wrap(a):
    return np.angle(np.exp(1j * np.asarray(a, dtype=np.float64)))


def _as_axisym(K, n=2):
    if isinstance(K, AxisymBody):
        return K
    if isinstance(K, ProfileSupport):
        return AxisymBody(n, K)
    raise InvalidInput("expected an AxisymBody or ProfileSupport", got=type(K).__name__)


def ball_deviation(body) -> tuple[float, np.ndarray, float]:
    """Chebyshev distance from the support function to the best ball.

    Returns (deviation, centre, radius) minimising max |h(u) - <z, u> - c|.
    """
    L = body.profile if isinstance(body, AxisymBody) else body
    u, h = L.grid.u, L.h
    N = h.size
    # variables z1, z2, c, t ; minimise t
    A = np.zeros((2 * N, 4))
    A[:N, :2], A[:N, 2], A[:N, 3] = -u, -1.0, -1.0
    A[N:, :2], A[N:, 2], A[N:, 3] = u, 1.0, -1.0
    b = np.concatenate([-h, h])
    res = linprog([0, 0, 0, 1], A_ub=A, b_ub=b, bounds=[(None, None)] * 3 + [(0, None)],
                  method="highs")
    if not res.success:
        raise PreconditionError("best-ball fit failed", message=res.message)
    return float(res.x[3]), res.x[:2].copy(), float(res.x[2])


# ---------------------------------------------------------------------------
# gluing two planar bodies along a common chord
# ---------------------------------------------------------------------------

def _normal_at(L: ProfileSupport, p, tol):
    """Outer normal angle of L at the boundary point p.

    The gap max_phi <p, u> - h(phi) is zero exactly when p is on the boundary
    and the maximiser is the normal there.
    """
    p = np.asarray(p, dtype=np.float64)
    gap = L.grid.u @ p - L.h
    k = int(np.argmax(gap))
    a = float(L.phi[k])
    for _ in range(50):
        h, h1, h2 = (x[0] for x in L.interpolant.evaluate(a))
        c, s = np.cos(a), np.sin(a)
        d1 = -p[0] * s + p[1] * c - h1
        d2 = -p[0] * c - p[1] * s - h2
        if d2 >= 0:
            break
        step = -d1 / d2
        a += float(np.clip(step, -L.grid.step, L.grid.step))
        if abs(step) < 1e-15:
            break
    g = float(p @ np.array([np.cos(a), np.sin(a)]) - L.interpolant(a)[0])
    if abs(g) > tol:
        raise BoundaryNotFound("point is not on the boundary", point=p.tolist(), gap=g, tol=tol)
    return a


def tangency_glue(T1: ProfileSupport, T2: ProfileSupport, p, q, angle_tol=1e-6,
                  boundary_tol=None) -> ProfileSupport:
    """Union of the part of T1 on one side of the chord pq and T2 on the other.

    T1 contributes the boundary arc traversed counterclockwise from p to q, T2
    the arc from q back to p. Both bodies must pass through p and q with the
    same tangent lines there. The returned profile carries the two normal
    angles at p and q in ``seams``.
    """
    if not (T1.smooth and T2.smooth):
        raise InvalidInput("tangency_glue needs smooth profiles")
    if T1.N != T2.N:
        raise InvalidInput("profiles sampled on different grids", N1=T1.N, N2=T2.N)
    scale = max(float(np.max(np.abs(T1.h))), float(np.max(np.abs(T2.h))))
    tol = 1e-6 * scale if boundary_tol is None else boundary_tol
    p, q = np.asarray(p, dtype=np.float64), np.asarray(q, dtype=np.float64)
    if np.linalg.norm(p - q) <= tol:
        raise InvalidInput("p and q must be distinct")
    angles = {}
    for name, T in (("T1", T1), ("T2", T2)):
        angles[name] = (_normal_at(T, p, tol), _normal_at(T, q, tol))
    for i, pt in enumerate(("p", "q")):
        d = abs(float(_wrap(angles["T1"][i] - angles["T2"][i])))
        if d > angle_tol:
            raise TangentMismatch(f"tangent lines differ at {pt}", point=pt,
                                  normal_T1=angles["T1"][i], normal_T2=angles["T2"][i],
                                  difference=d, tol=angle_tol)
    ap, aq = angles["T1"]
    span = (aq - ap) % (2 * np.pi)
    rel = (T1.phi - ap) % (2 * np.pi)
    from_T1 = rel <= span
    h = np.where(from_T1, T1.h, T2.h)
    out = ProfileSupport(T1.grid, h)
    out.seams = (float(_wrap(ap)), float(_wrap(aq)))
    return out


# ---------------------------------------------------------------------------
# central symmetrisation of a body of revolution
# ---------------------------------------------------------------------------

def _central_glue(K: AxisymBody) -> AxisymBody:
    L = K.profile
    N = L.N
    if N % 2:
        raise InvalidInput("central gluing needs an even grid size", N=N)
    idx = (np.arange(N) + N // 2) % N
    lower = np.sin(L.phi) < 0
    h = np.where(lower, L.h[idx], L.h)
    return AxisymBody(K.n, ProfileSupport(L.grid, h), K.tol)


def glue_central_symmetric(K, tol=None, mode="spectral") -> AxisymBody:
    """Keep the upper half of K and replace the lower half by the reflection
    of the upper half through the origin.

    Requires the boundary point with normal e1 to lie on the x1-axis, that is
    h'(0) = 0. Seams sit at phi = 0 and phi = pi.
    """
    K = _as_axisym(K)
    L = K.profile
    tol = 1e-6 * float(np.max(np.abs(L.h))) if tol is None else tol
    d0 = float(L.derivative(1, mode)[0])
    if abs(d0) > tol:
        raise PreconditionError("h'(0) must vanish: the point with normal e1 is off the x1-axis",
                                h_prime_0=d0, tol=tol)
    return _central_glue(K)


# ---------------------------------------------------------------------------
# spherical caps
# ---------------------------------------------------------------------------

@dataclass
class GlueSpec:
    """Profile T with two tangential spherical caps.

    ``nu1``, ``nu2`` are normal angles in [0, pi/2]; the cap of radius r_i
    touches T at p_T(nu_i) = r_i u(nu_i). Cut heights are the x2-coordinates
    of these touching points.
    """

    profile: ProfileSupport
    r1: float
    r2: float
    nu1: float
    nu2: float
    tol: float | None = None
    t1: float = field(init=False)
    t2: float = field(init=False)

    def __post_init__(self):
        T = self.profile
        if not T.smooth:
            raise InvalidInput("cap gluing needs a smooth profile")
        self.r1, self.r2, self.nu1, self.nu2 = map(float, (self.r1, self.r2, self.nu1, self.nu2))
        if not (0 < self.r1 < self.r2):
            raise PreconditionError("need 0 < r1 < r2", r1=self.r1, r2=self.r2)
        for name, a in (("nu1", self.nu1), ("nu2", self.nu2)):
            if not (-1e-12 <= a <= np.pi / 2 + 1e-12):
                raise PreconditionError(f"{name} must lie in the closed upper-right quarter", angle=a)
        if abs(np.sin(self.nu1) - np.sin(self.nu2)) < 1e-12:
            raise PreconditionError("nu1 and nu2 must be distinct", nu1=self.nu1, nu2=self.nu2)
        tol = 1e-6 * float(np.max(T.h)) if self.tol is None else self.tol
        self.tol = tol
        pts = []
        for i, (r, a) in enumerate(((self.r1, self.nu1), (self.r2, self.nu2)), start=1):
            h, h1, _ = (x[0] for x in T.interpolant.evaluate(a))
            u = np.array([np.cos(a), np.sin(a)])
            p = h * u + h1 * np.array([-u[1], u[0]])
            miss = float(np.linalg.norm(p - r * u))
            if miss > tol:
                raise PreconditionError(
                    f"p_T(nu{i}) does not lie on the circle of radius r{i} along nu{i}",
                    hypothesis="tangency", cap=i, point=p.tolist(), radius=r, miss=miss, tol=tol)
            pts.append(p)
        self.t1, self.t2 = float(pts[0][1]), float(pts[1][1])
        # hypothesis (a): strictly between the radii on the open latitude band
        s_lo, s_hi = sorted((np.sin(self.nu1), np.sin(self.nu2)))
        s = np.sin(T.phi)
        band = (s > s_lo) & (s < s_hi)
        hb = T.h[band]
        bad = (hb <= self.r1) | (hb >= self.r2)
        if np.any(bad):
            k = np.nonzero(band)[0][np.nonzero(bad)[0][0]]
            raise PreconditionError("r1 < h_T < r2 fails between the tangency latitudes",
                                    hypothesis="a", node=int(k), phi=float(T.phi[k]),
                                    value=float(T.h[k]))

    @property
    def ordered(self):
        """((sin nu', r') for the lower cap, (sin nu'', r'') for the upper cap)."""
        a = (float(np.sin(self.nu1)), self.r1)
        b = (float(np.sin(self.nu2)), self.r2)
        return (a, b) if a[0] < b[0] else (b, a)


@dataclass
class CapGlue:
    body: AxisymBody
    G_eps: GTab
    excluded_measure: float
    eps: float
    spec: GlueSpec
    seams: tuple
    certificate_G: AnCertificate
    certificate_G_eps: AnCertificate

    def __iter__(self):
        return iter((self.body, self.G_eps, self.excluded_measure))

    def excluded_mask(self, phi=None):
        L = self.body.profile
        h = L.h if phi is None else L.evaluate(phi)
        r1, r2, e = self.spec.r1, self.spec.r2, self.eps
        return ((h > r1) & (h < r1 + e)) | ((h > r2 - e) & (h < r2))

    def residual(self, seam_band=SEAM_BAND) -> ResidualReport:
        dens = density(self.body, mode="fd").f
        rep = monge_ampere_residual(self.body, self.G_eps, seams=self.seams,
                                    seam_band=seam_band, dens=dens)
        rep.included = rep.included & ~self.excluded_mask()
        return rep


def _zeta(T: ProfileSupport, s_a, s_b, value):
    """Latitude coordinate s in [s_a, s_b] with h_T(asin s) = value (bisection)."""
    lo, hi = min(s_a, s_b), max(s_a, s_b)
    f_lo = float(T.interpolant(np.arcsin(lo))[0]) - value
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        f_mid = float(T.interpolant(np.arcsin(mid))[0]) - value
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def excluded_measure(spec: GlueSpec, n: int, eps: float) -> float:
    """H^{n-1} of {r1 < h < r1 + eps} U {r2 - eps < h < r2} for the glued body."""
    (s_lo, r_lo), (s_hi, r_hi) = spec.ordered
    T = spec.profile
    intervals = []
    for r_edge, inward in ((spec.r1, spec.r1 + eps), (spec.r2, spec.r2 - eps)):
        s_edge = s_lo if r_edge == r_lo else s_hi
        other = s_hi if s_edge == s_lo else s_lo
        if (inward - spec.r1) * (spec.r2 - inward) <= 0:
            s_in = other
        else:
            s_in = _zeta(T, s_edge, other, inward)
        intervals.append(tuple(sorted((s_edge, s_in))))
    total = 0.0
    for a, b in intervals:
        pa, pb = np.arcsin(a), np.arcsin(b)
        if n == 2:
            # four arcs: upper and lower half, left and right of the axis
            total += 4 * (pb - pa)
        else:
            val, _ = quad(lambda t: np.cos(t) ** (n - 2), pa, pb)
            total += 2 * sphere_area(n - 2) * val
    return float(total)


def glue_spherical_caps(spec: GlueSpec, K, G: GTab, eps: float, require_An=False) -> CapGlue:
    """Replace the polar and equatorial zones of K by spherical caps, then
    symmetrise through the origin.

    Below the lower tangency latitude the support function is that of the
    lower cap ball, above the upper one that of the upper cap ball; in
    between it is h_K. G_eps comes from ``glue_G_eps`` with a_i = r_i^{n-1}.
    """
    K = _as_axisym(K)
    n = K.n
    T = spec.profile
    if T.N != K.profile.N or np.max(np.abs(T.h - K.profile.h)) > 1e-12 * np.max(T.h):
        raise InvalidInput("GlueSpec profile must be the profile of K")
    r1, r2 = spec.r1, spec.r2
    g1, g2 = float(G(r1)), float(G(r2))
    if g1 < r1 ** (n - 1):
        raise PreconditionError("cap hypothesis r1^(n-1) <= G(r1) fails", hypothesis="b",
                                G_r1=g1, bound=r1 ** (n - 1))
    if g2 > r2 ** (n - 1):
        raise PreconditionError("cap hypothesis r2^(n-1) >= G(r2) fails", hypothesis="b",
                                G_r2=g2, bound=r2 ** (n - 1))
    cert_G = check_An(G, n)
    if require_An and not cert_G.passed:
        raise PreconditionError("G is not certified in A(n)", hypothesis="G in A(n)",
                                violation=cert_G.violation)
    (s_lo, r_lo), (s_hi, r_hi) = spec.ordered
    s = np.sin(T.phi)
    h = np.where(s <= s_lo, r_lo, np.where(s >= s_hi, r_hi, T.h))
    K_prime = AxisymBody(n, ProfileSupport(T.grid, h))
    K_bar = _central_glue(K_prime)
    G_eps = glue_G_eps(G, r1, r2, r1 ** (n - 1), r2 ** (n - 1), eps, n=n)
    a_lo, a_hi = np.arcsin(s_lo), np.arcsin(s_hi)
    seams = tuple(float(_wrap(x)) for x in
                  (a_lo, np.pi - a_lo, -a_lo, a_lo - np.pi, a_hi, np.pi - a_hi, -a_hi, a_hi - np.pi))
    return CapGlue(K_bar, G_eps, excluded_measure(spec, n, eps), float(eps), spec,
                   tuple(sorted(set(seams))), cert_G, check_An(G_eps, n))


def profile_gtab(T: ProfileSupport, n: int, nu_a: float, nu_b: float, num=4097, name=None) -> GTab:
    """G with f_T = G(h_T) on the latitudes between nu_a and nu_b.

    h_T must be strictly monotone there; G is evaluated exactly through the
    inverse of h_T and tabulated with a cubic spline.
    """
    s_a, s_b = float(np.sin(nu_a)), float(np.sin(nu_b))
    ha = float(T.interpolant(nu_a)[0])
    hb = float(T.interpolant(nu_b)[0])
    c1, c2 = min(ha, hb), max(ha, hb)
    theta = np.linspace(c1, c2, num)
    ss = np.array([_zeta(T, s_a, s_b, t) for t in theta])
    phi = np.arcsin(ss)
    f = _axisym_density_values(*T.interpolant.evaluate(phi), phi, n) if n > 2 else \
        (lambda v: v[0] + v[2])(T.interpolant.evaluate(phi))
    return GTab(c1, c2, n, samples=f, name=name or "profile")


def cubic_cap_profile(grid, r1=1.0, r2=1.01, s1=0.2, s2=0.8) -> ProfileSupport:
    """h = R(sin phi) with R cubic, a local minimum r1 at s1 and a local maximum r2 at s2."""
    if isinstance(grid, int):
        grid = CircleGrid(grid)
    mid, w = 0.5 * (s1 + s2), 0.5 * (s2 - s1)
    c0, A = 0.5 * (r1 + r2), 0.5 * (r2 - r1)
    x = (np.sin(grid.angles) - mid) / w
    return ProfileSupport(grid, c0 + A * (3 * x - x**3) / 2)


# ---------------------------------------------------------------------------
# translated non-spherical solution
# ---------------------------------------------------------------------------

def bump(s, order=0):
    """e * exp(-1/(1 - 4 s^2)) on |s| < 1/2 (peak 1) and its derivatives up to order 3."""
    s = np.asarray(s, dtype=np.float64)
    q = 1.0 - 4.0 * s * s
    inside = q > 1e-3  # exp(-1/q) underflows well before this
    qs = np.where(inside, q, 1.0)
    g = np.where(inside, np.exp(1.0 - 1.0 / qs), 0.0)
    if order == 0:
        return g
    a1 = -8 * s / qs**2
    if order == 1:
        return g * a1
    a2 = -8 / qs**2 - 128 * s * s / qs**3
    if order == 2:
        return g * (a1 * a1 + a2)
    a3 = -384 * s / qs**3 - 3072 * s**3 / qs**4
    if order == 3:
        return g * (a1**3 + 3 * a1 * a2 + a3)
    raise InvalidInput("bump derivatives available up to order 3", order=order)


class _Profile:
    """Closed forms in the latitude coordinate s = sin(phi) for
    h = r + g(s)/m (+ lam s for the shifted body)."""

    def __init__(self, n, r, lam, m, g):
        self.n, self.r, self.lam, self.m, self.g = n, r, lam, m, g

    def parts(self, s):
        m, r = self.m, self.r
        g0, g1, g2, g3 = (self.g(s, k) for k in range(4))
        A = r + (g0 + g2 * (1 - s * s) - s * g1) / m     # h'' + h
        X = r + (g0 - s * g1) / m                        # rotational radius
        dA = (g3 * (1 - s * s) - 3 * s * g2) / m
        dX = -s * g2 / m
        return A, X, dA, dX

    def density(self, s):
        A, X, _, _ = self.parts(s)
        return A * X ** (self.n - 2)

    def density_ds(self, s):
        A, X, dA, dX = self.parts(s)
        n = self.n
        out = dA * X ** (n - 2)
        if n > 2:
            out = out + (n - 2) * A * X ** (n - 3) * dX
        return out

    def shifted(self, s):
        return self.r + self.g(s, 0) / self.m + self.lam * s

    def shifted_ds(self, s):
        return self.lam + self.g(s, 1) / self.m

    def zeta(self, theta, s_mesh, H_mesh):
        """s with shifted(s) = theta: monotone interpolation then Newton polish."""
        s = np.interp(theta, H_mesh, s_mesh)
        for _ in range(8):
            s = np.clip(s - (self.shifted(s) - theta) / self.shifted_ds(s), -1.0, 1.0)
        return s


@dataclass
class MCheck:
    m: int
    density_min: float
    monotone_margin: float
    An_min: float | None
    An_passed: bool
    deviation_from_constant: float | None

    @property
    def passed(self):
        return self.density_min > 0 and self.monotone_margin > 0 and self.An_passed

    def to_dict(self):
        return {"m": self.m, "density_min": self.density_min, "monotone_margin": self.monotone_margin,
                "An_min": self.An_min, "An_passed": self.An_passed,
                "deviation_from_constant": self.deviation_from_constant, "passed": self.passed}


@dataclass
class Counterexample:
    n: int
    m: int
    r: float
    lam: float
    s_samples: np.ndarray
    g: np.ndarray
    body: AxisymBody
    shifted: AxisymBody
    G: GTab
    certificate: AnCertificate
    checks: MCheck
    history: list = field(default_factory=list)

    def to_dict(self):
        return {"n": self.n, "m": self.m, "r": self.r, "lambda": self.lam,
                "checks": self.checks.to_dict(), "certificate": self.certificate.to_dict(),
                "history": [c.to_dict() for c in self.history]}


S_MESH = 200001


def _examine(P: _Profile, r, s_mesh, num, tabulate):
    margin = 1e-8 * r
    dens_min = float(np.min(P.density(s_mesh)) - margin)
    mono = float(np.min(P.shifted_ds(s_mesh)) - margin)
    if dens_min <= 0 or mono <= 0:
        return MCheck(P.m, dens_min, mono, None, False, None), None
    H = P.shifted(s_mesh)
    f = P.density(s_mesh)
    form = H * P.density_ds(s_mesh) / P.shifted_ds(s_mesh) + (P.n + 1) * f
    An_min = float(form.min())
    dev = float(np.max(np.abs(f - r ** (P.n - 1))))
    G = None
    passed = An_min > 0
    if passed or tabulate:
        c1, c2 = r - P.lam, r + P.lam
        theta = np.linspace(c1, c2, num)
        G = GTab(c1, c2, P.n, samples=P.density(P.zeta(theta, s_mesh, H)), name=f"G_m(m={P.m})")
        passed = passed and check_An(G, P.n).passed
    return MCheck(P.m, dens_min, mono, An_min, passed, dev), G


def build_counterexample(n=3, r=1.0, lam=0.1, m=None, N=4096, num=16385, g=bump,
                         m_start=1, m_max=2**22) -> Counterexample:
    """Translated body K_m + lam e2 solving f = G_m(h) with G_m in A(n).

    K_m has support function r + g(<v, e2>)/m. With ``m=None`` the smallest
    power of two (from ``m_start``) is chosen for which the density is
    positive, the shifted profile is strictly increasing in the latitude and
    theta G_m' + (n+1) G_m > 0.
    """
    n, r, lam = int(n), float(r), float(lam)
    if n < 2:
        raise InvalidInput("dimension must be at least 2", n=n)
    if not (r > 2 * lam > 0):
        raise PreconditionError("need r > 2 lambda > 0", r=r, lam=lam)
    s_mesh = np.linspace(-1.0, 1.0, S_MESH)
    history = []
    if m is None:
        mm = int(m_start)
        while True:
            chk, G = _examine(_Profile(n, r, lam, mm, g), r, s_mesh, num, False)
            history.append(chk)
            if chk.passed:
                break
            if mm >= m_max:
                raise PreconditionError("no admissible m found", m_max=m_max, last=chk.to_dict())
            mm *= 2
        m = mm
    else:
        m = int(m)
        chk, G = _examine(_Profile(n, r, lam, m, g), r, s_mesh, num, False)
        history.append(chk)
        if not chk.passed:
            est = m
            while est < m_max:
                est *= 2
                if _examine(_Profile(n, r, lam, est, g), r, s_mesh, num, False)[0].passed:
                    break
            raise PreconditionError("m too small", m=m, checks=chk.to_dict(), minimal_admissible_m=est)
    P = _Profile(n, r, lam, m, g)
    grid = CircleGrid(N)
    sphi = np.sin(grid.angles)
    body = AxisymBody(n, ProfileSupport(grid, r + g(sphi) / m))
    shifted = AxisymBody(n, ProfileSupport(grid, P.shifted(sphi)))
    s_samp = np.linspace(-1.0, 1.0, 2049)
    return Counterexample(n, m, r, lam, s_samp, g(s_samp), body, shifted, G, check_An(G, n), chk,
                          history)


def m_sweep(n=3, r=1.0, lam=0.1, m0=None, steps=4, **kw):
    """Counterexamples at m0, 2 m0, ..., returning max |G_m - r^{n-1}| and max |G_m'|."""
    if m0 is None:
        m0 = build_counterexample(n, r, lam, **kw).m
    rows = []
    for j in range(steps):
        C = build_counterexample(n, r, lam, m=m0 * 2**j, **kw)
        th = C.G.theta
        rows.append({"m": C.m, "sup_G_minus_const": float(np.max(np.abs(C.G.G - r ** (n - 1)))),
                     "sup_dG": float(np.max(np.abs(C.G.derivative(th)))),
                     "An_min": C.checks.An_min})
    return rows


def nonmonotonicity_witness(C: Counterexample):
    """An interior strict local extremum of G_m, as (kind, theta_left, theta_peak, theta_right)."""
    th, G = C.G.theta, C.G.G
    d = np.sign(np.diff(G))
    nz = np.nonzero(d)[0]
    for a, b in zip(nz[:-1], nz[1:]):
        if d[a] != d[b]:
            kind = "max" if d[a] > 0 else "min"
            return {"kind": kind, "theta_left": float(th[a]), "theta_extremum": float(th[a + 1]),
                    "theta_right": float(th[b + 1]), "value": float(G[a + 1])}
    return None


def centroid_axisym(body: AxisymBody) -> np.ndarray:
    """Centre of mass of a body of revolution (on the x2-axis)."""
    from .geometry import radial_at_angles
    from .measure import _gauss_legendre, volume
    n, L = body.n, body.profile
    if n == 2:
        from .geometry import barycentre
        return barycentre(L)
    psi, w = _gauss_legendre()
    rho = radial_at_angles(L, psi)
    m2 = sphere_area(n - 2) / (n + 1) * float(np.sum(w * rho ** (n + 1) * np.sin(psi) * np.cos(psi) ** (n - 2)))
    return np.array([0.0, m2 / volume(body)])


@dataclass
class CounterexampleReport:
    residual: ResidualReport
    certificate: AnCertificate
    An_min: float
    nonsphericity: float
    shifted_offset: float
    central_symmetry_error: float
    translation_identity_error: float
    barycentre: np.ndarray

    def to_dict(self):
        return {"residual_max": self.residual.max_abs, "residual_l2": self.residual.l2_norm,
                "certificate": self.certificate.to_dict(), "An_min": self.An_min,
                "nonsphericity": self.nonsphericity, "shifted_offset": self.shifted_offset,
                "central_symmetry_error": self.central_symmetry_error,
                "translation_identity_error": self.translation_identity_error,
                "barycentre": self.barycentre.tolist()}


def verify_counterexample(C: Counterexample) -> CounterexampleReport:
    """Residual of f = G_m(h) for K_m + lam e2 and the supporting checks."""
    f_shift = density(C.shifted).f
    f_body = density(C.body).f
    res = monge_ampere_residual(C.shifted, C.G, dens=f_shift)
    L = C.body.profile
    idx = (np.arange(L.N) + L.N // 2) % L.N
    sym = float(np.max(np.abs(L.h[idx] - L.h)))
    dev, _, _ = ball_deviation(C.body)
    # distance of the shifted body from the best ball centred at the origin
    off = 0.5 * float(np.max(C.shifted.h) - np.min(C.shifted.h))
    return CounterexampleReport(res, C.certificate, float(C.checks.An_min), dev, off, sym,
                                float(np.max(np.abs(f_shift - f_body))), centroid_axisym(C.shifted))


__all__ = [
    "CapGlue", "Counterexample", "CounterexampleReport", "GlueSpec", "MCheck", "ball_deviation",
    "build_counterexample", "bump", "centroid_axisym", "cubic_cap_profile", "excluded_measure",
    "glue_central_symmetric", "glue_spherical_caps", "m_sweep", "nonmonotonicity_witness",
    "profile_gtab", "tangency_glue", "verify_counterexample",
]
