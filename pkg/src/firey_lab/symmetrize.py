"""Steiner symmetrization as a shadow system and the polar-volume probes.

Writing x = xbar e_perp + y e, a planar body is {z(xbar) <= y <= w(xbar)} and
the Steiner shadow family moves every chord by -(1 - t) u(xbar) e with
u = (z + w) / 2. t = 1 gives the body, t = 0 its symmetral and t = -1 its
reflection across e_perp. All members are handled as exact polygons: for a
polygon, z and w are piecewise linear with breaks at the vertex abscissae,
so every L_t is the hull of the sheared chord end points at those breaks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NonConvergence, OptimizationError, OriginNotInterior
from .geometry import Polygon, ProfileSupport, barycentre, boundary_sample, unit

DEFAULT_SAMPLE = 2048
LADDER = tuple(range(6, 15))


def _as_unit(e):
    e = np.asarray(e, dtype=np.float64)
    if e.ndim == 0:
        return unit(float(e))
    return e / np.linalg.norm(e)


def _chains(xs, ys):
    """Lower and upper hull chains of a point set, as (x, y) arrays sorted by x."""
    order = np.lexsort((ys, xs))
    pts = np.column_stack([xs[order], ys[order]])

    def half(points):
        out = []
        for p in points:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return np.array(out)

    lower = half(pts)
    upper = half(pts[::-1])[::-1]
    return lower, upper


def _collapse(chain, reduce):
    x = chain[:, 0]
    ux, inv = np.unique(x, return_inverse=True)
    y = np.full(ux.shape, np.inf if reduce is np.minimum else -np.inf)
    reduce.at(y, inv, chain[:, 1])
    return ux, y


class ShadowFamily:
    """The Steiner shadow system {L_t : t in [-1, 1]} of a planar body along e."""

    def __init__(self, L, e, sample: int = DEFAULT_SAMPLE, offset: float = 0.5):
        if isinstance(L, ProfileSupport):
            self.grid = L.grid
            pts = boundary_sample(L, sample, offset)
        elif isinstance(L, Polygon):
            self.grid = None
            pts = L.vertices
        else:
            pts = np.asarray(L, dtype=np.float64)
            self.grid = None
        self.base = L
        self.e = _as_unit(e)
        self.ep = np.array([-self.e[1], self.e[0]])
        xbar = pts @ self.ep
        y = pts @ self.e
        lower, upper = _chains(xbar, y)
        xl, zl = _collapse(lower, np.minimum)
        xu, wu = _collapse(upper, np.maximum)
        xb = np.unique(np.concatenate([xl, xu]))
        self.xb = xb
        self.zb = np.interp(xb, xl, zl)
        self.wb = np.interp(xb, xu, wu)
        self.ub = 0.5 * (self.zb + self.wb)

    # chord functions -----------------------------------------------------------

    @property
    def interval(self):
        return float(self.xb[0]), float(self.xb[-1])

    def z(self, x):
        return np.interp(x, self.xb, self.zb)

    def w(self, x):
        return np.interp(x, self.xb, self.wb)

    def u(self, x):
        return np.interp(x, self.xb, self.ub)

    def _to_xy(self, xbar, y):
        return np.outer(xbar, self.ep) + np.outer(y, self.e)

    def polygon_at(self, t) -> Polygon:
        t = float(t)
        if not -1.0 <= t <= 1.0:
            raise InvalidInput("shadow parameter t must lie in [-1, 1]", t=t)
        s = 1.0 - t
        lo = self.zb - s * self.ub
        hi = self.wb - s * self.ub
        pts = self._to_xy(np.concatenate([self.xb, self.xb]), np.concatenate([lo, hi]))
        return Polygon.from_points(pts)

    def polygon_at_s(self, s) -> Polygon:
        """Member at t = 1 - s; s may be any small nonnegative number."""
        lo = self.zb - s * self.ub
        hi = self.wb - s * self.ub
        pts = self._to_xy(np.concatenate([self.xb, self.xb]), np.concatenate([lo, hi]))
        return Polygon.from_points(pts)


def shadow_body(F: ShadowFamily, t, grid=None) -> ProfileSupport:
    grid = grid or F.grid
    if grid is None:
        raise InvalidInput("a grid is needed to sample the shadow body")
    return ProfileSupport.from_polygon(grid, F.polygon_at(t))


def steiner_symmetral(L: ProfileSupport, e, sample: int = DEFAULT_SAMPLE) -> ProfileSupport:
    return shadow_body(ShadowFamily(L, e, sample), 0.0, L.grid)


# ---------------------------------------------------------------------------
# Santalo point
# ---------------------------------------------------------------------------

@dataclass
class SantaloResult:
    point: np.ndarray
    polar_volume: float
    gradient_norm: float
    iterations: int
    trace: list


def _polygon_polar_terms(P: Polygon, z, order=2):
    n = P.normals
    c = P.offsets - n @ z
    if np.any(c <= 0):
        return None
    nj = np.roll(n, -1, axis=0)
    cj = np.roll(c, -1)
    s = n[:, 0] * nj[:, 1] - n[:, 1] * nj[:, 0]
    a = s / (c * cj)
    V = 0.5 * float(a.sum())
    if order == 0:
        return V, None, None
    wi = n / c[:, None]
    wj = nj / cj[:, None]
    w = wi + wj
    g = 0.5 * (a[:, None] * w).sum(axis=0)
    H = 0.5 * (np.einsum("k,ki,kj->ij", a, w, w) + np.einsum("k,ki,kj->ij", a, wi, wi)
               + np.einsum("k,ki,kj->ij", a, wj, wj))
    return V, g, H


def _smooth_polar_terms(L: ProfileSupport, z, order=2):
    u = L.grid.u
    d = L.h - u @ z
    if np.any(d <= 0):
        return None
    wt = L.grid.weights
    V = 0.5 * float(np.sum(d**-2.0 * wt))
    if order == 0:
        return V, None, None
    g = (u * (d**-3.0 * wt)[:, None]).sum(axis=0)
    H = 3.0 * np.einsum("k,ki,kj->ij", d**-4.0 * wt, u, u)
    return V, g, H


def polar_volume_about(L, z):
    """V((L - z)°) for a ProfileSupport or Polygon; inf if z is not interior."""
    terms = (_polygon_polar_terms(L, z, 0) if isinstance(L, Polygon)
             else (_polygon_polar_terms(L.polygon, z, 0) if not L.smooth
                   else _smooth_polar_terms(L, z, 0)))
    return np.inf if terms is None else terms[0]


def santalo_point(L, tol=1e-10, max_iter=100, return_info=False):
    """Minimizer of z -> V((L - z)°) by damped Newton with the exact Hessian."""
    if isinstance(L, Polygon):
        terms = lambda z, o=2: _polygon_polar_terms(L, z, o)  # noqa: E731
        z = L.centroid.copy()
    elif not L.smooth:
        terms = lambda z, o=2: _polygon_polar_terms(L.polygon, z, o)  # noqa: E731
        z = L.polygon.centroid.copy()
    else:
        terms = lambda z, o=2: _smooth_polar_terms(L, z, o)  # noqa: E731
        z = barycentre(L)
    cur = terms(z)
    if cur is None:
        raise OriginNotInterior("initial centre is not interior")
    trace = []
    for it in range(max_iter):
        V, g, H = cur
        gn = float(np.linalg.norm(g))
        trace.append({"iter": it, "V": V, "grad_norm": gn})
        if gn <= tol:
            res = SantaloResult(z, V, gn, it, trace)
            return res if return_info else z
        try:
            if np.linalg.cond(H) > 1e12:
                raise np.linalg.LinAlgError
            step = -np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            step = -g / max(np.abs(np.diag(H)).max(), 1e-300)
        # the gradient sums many O(1) terms; once the Newton step is at the
        # roundoff level of z the residual gradient is noise
        if np.linalg.norm(step) <= 1e-13 * (1.0 + np.linalg.norm(z)) and gn <= 1e-6:
            res = SantaloResult(z, V, gn, it, trace)
            return res if return_info else z
        lam = 1.0
        for _ in range(60):
            zn = z + lam * step
            nxt = terms(zn)
            if nxt is not None and nxt[0] <= V + 1e-4 * lam * float(g @ step) + 4e-16 * abs(V):
                break
            lam *= 0.5
        else:
            zn = z + lam * step
            nxt = terms(zn)
            if nxt is None:
                break
        z, cur = zn, nxt
    V, g, _ = cur
    gn = float(np.linalg.norm(g))
    if gn <= tol:
        res = SantaloResult(z, V, gn, max_iter, trace)
        return res if return_info else z
    raise OptimizationError("Santalo Newton iteration did not converge", grad_norm=gn, trace=trace[-10:])


def polar_barycentre(L, z=None):
    """Barycentre of (L - z)°."""
    z = np.zeros(2) if z is None else np.asarray(z, dtype=np.float64)
    if isinstance(L, Polygon) or not L.smooth:
        P = L if isinstance(L, Polygon) else L.polygon
        return P.translate(-z).polar().centroid
    V, g, _ = _smooth_polar_terms(L, z, 1)
    return g / (3.0 * V)


# ---------------------------------------------------------------------------
# convexity probes
# ---------------------------------------------------------------------------

def _second_differences(v):
    v = np.asarray(v)
    return v[:-2] - 2 * v[1:-1] + v[2:]


def polar_volume_convexity_probe(F: ShadowFamily, samples=None, tol=1e-7):
    """Second differences of 1/V((L_t)*) and of 1/V((L_t)° intersected with the half-planes."""
    ts = np.linspace(-1, 1, 21) if samples is None else np.asarray(samples, dtype=np.float64)
    if np.any(ts < -1) or np.any(ts > 1):
        raise InvalidInput("t samples must lie in [-1, 1]")
    inv_star, inv_plus, inv_minus, inv_polar = [], [], [], []
    for t in ts:
        P = F.polygon_at(t)
        res = santalo_point(P, return_info=True)
        inv_star.append(1.0 / res.polar_volume)
        Q = P.polar()
        qp = Q.clip(-F.e, 0.0)
        qm = Q.clip(F.e, 0.0)
        inv_plus.append(1.0 / qp.area)
        inv_minus.append(1.0 / qm.area)
        inv_polar.append(1.0 / Q.area)
    series = {"star": np.array(inv_star), "plus": np.array(inv_plus), "minus": np.array(inv_minus)}
    d2 = {k: _second_differences(v) for k, v in series.items()}
    worst = min(float(v.min()) for v in d2.values()) if len(ts) >= 3 else 0.0
    return {
        "t": ts, "inverse_values": series, "second_differences": d2,
        "inverse_polar_volume": np.array(inv_polar),
        "min_second_difference": worst, "passed": worst >= -tol,
    }


# ---------------------------------------------------------------------------
# h'_L: left derivative of h_{L^t}, L^t = ((L°)_t)°
# ---------------------------------------------------------------------------

def polar_polygon(L: ProfileSupport, sample=None):
    """L° as a polygon whose vertices lie on the true boundary of L°.

    Smooth bodies give vertices u(psi)/h_L(psi) at half-offset directions so
    that rays through the grid nodes cross edge midpoints.
    """
    L.require_origin_interior()
    if not L.smooth:
        return L.polygon.polar()
    M = sample or max(DEFAULT_SAMPLE, 4 * L.N)
    psi = 2 * np.pi * (np.arange(M) + 0.5) / M
    return Polygon(unit(psi) / L.evaluate(psi)[:, None])


def _richardson(D):
    """Two rounds of first-order Richardson on a halving ladder."""
    R1 = 2 * D[1:] - D[:-1]
    R2 = (4 * R1[1:] - R1[:-1]) / 3
    return R1, R2


def polar_shadow_left_derivatives(L: ProfileSupport, e, directions, ladder=LADDER,
                                  sample=None, rtol=1e-6, bound=1e8):
    """h'_L at many directions (rows of ``directions``)."""
    Q = polar_polygon(L, sample)
    F = ShadowFamily(Q, e)
    V = np.atleast_2d(np.asarray(directions, dtype=np.float64))
    g0 = 1.0 / Q.radial(V)
    D = []
    for j in ladder:
        s = 2.0 ** (-j)
        g = 1.0 / F.polygon_at_s(s).radial(V)
        D.append((g0 - g) / s)
    D = np.array(D)
    if not np.all(np.isfinite(D)) or np.abs(D).max() > bound * max(1.0, np.abs(g0).max()):
        raise NonConvergence("difference-quotient ladder is unbounded", max_quotient=float(np.abs(D).max()))
    _, R2 = _richardson(D)
    est = R2[-1]
    spread = np.abs(R2[-1] - R2[-2])
    scale = 1.0 + np.abs(est)
    if np.any(spread > rtol * scale):
        k = int(np.argmax(spread / scale))
        raise NonConvergence("Richardson estimates of h' disagree", direction=V[k].tolist(),
                             spread=float(spread[k]), ladder=D[:, k].tolist())
    return est


def polar_shadow_left_derivative(L: ProfileSupport, e, v, ladder=LADDER, **kw) -> float:
    return float(polar_shadow_left_derivatives(L, e, np.atleast_2d(v), ladder, **kw)[0])


def shadow_integrals(L: ProfileSupport, e, G, ladder=LADDER, derivatives=None):
    """(int G(h_L) h'_L dH, int h'_L dS_L) on the circle.

    ``derivatives`` may carry precomputed (h' at the grid directions, h' at
    the polygon normals) to reuse the ladder across several G.
    """
    if derivatives is None:
        derivatives = shadow_derivative_samples(L, e, ladder)
    hp, hpn = derivatives
    wts = L.grid.weights
    I1 = float(np.sum(G(L.h) * hp * wts))
    if L.smooth:
        f = L.derivative(2) + L.h
        I2 = float(np.sum(hp * f * wts))
    else:
        I2 = float(np.sum(hpn * L.polygon.lengths))
    return I1, I2


def shadow_derivative_samples(L: ProfileSupport, e, ladder=LADDER):
    hp = polar_shadow_left_derivatives(L, e, L.grid.u, ladder)
    hpn = None if L.smooth else polar_shadow_left_derivatives(L, e, L.polygon.normals, ladder)
    return hp, hpn


# ---------------------------------------------------------------------------
# d/dt V(B cap a L_t) at t = 1-
# ---------------------------------------------------------------------------

def _circle_crossings(x0, x1, y0, y1, sign):
    """x in (x0, x1) where the segment y(x) meets sign * sqrt(1 - x^2)."""
    if x1 <= x0:
        return []
    q = (y1 - y0) / (x1 - x0)
    p = y0 - q * x0
    A, B, C = 1 + q * q, 2 * p * q, p * p - 1
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    r = np.sqrt(disc)
    out = []
    for x in ((-B - r) / (2 * A), (-B + r) / (2 * A)):
        if x0 < x < x1 and sign * (p + q * x) >= 0:
            out.append(x)
    return out


def ball_intersection_derivative(L, e, a, sample: int = DEFAULT_SAMPLE) -> float:
    """Left derivative at t = 1 of t -> V(B cap a L_t), integrated exactly.

    On each chord the intersection length is min(W, alpha) - max(Z, -alpha)
    with alpha = sqrt(1 - x^2); its t-derivative at t = 1 is
    U (1[W < alpha] - 1[Z > -alpha]). Every function involved is linear
    between the break points, which include the circle crossings.
    """
    a = float(a)
    if a <= 0:
        raise InvalidInput("scale a must be positive", a=a)
    F = L if isinstance(L, ShadowFamily) else ShadowFamily(L, e, sample)
    xb = a * F.xb
    zb, wb = a * F.zb, a * F.wb
    lo, hi = max(xb[0], -1.0), min(xb[-1], 1.0)
    if lo >= hi:
        return 0.0
    cuts = [lo, hi]
    cuts += [x for x in xb if lo < x < hi]
    for k in range(xb.size - 1):
        x0, x1 = xb[k], xb[k + 1]
        cuts += _circle_crossings(x0, x1, wb[k], wb[k + 1], +1)
        cuts += _circle_crossings(x0, x1, zb[k], zb[k + 1], -1)
    cuts = np.unique(np.clip(cuts, lo, hi))
    mid = 0.5 * (cuts[:-1] + cuts[1:])
    width = np.diff(cuts)
    Z = np.interp(mid, xb, zb)
    W = np.interp(mid, xb, wb)
    U = 0.5 * (Z + W)
    alpha = np.sqrt(np.clip(1 - mid**2, 0, None))
    live = np.maximum(Z, -alpha) < np.minimum(W, alpha)
    dphi = U * ((W < alpha).astype(float) - (Z > -alpha).astype(float))
    return float(np.sum(np.where(live, dphi, 0.0) * width))
