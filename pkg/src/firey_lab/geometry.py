"""Planar convex bodies carried by support samples on a uniform circle grid.

Two kinds of body live in a ProfileSupport:

* smooth bodies, whose sampled support function is treated as a band-limited
  periodic function (spectral derivatives, Newton-refined radial function);
* polygonal bodies, which carry an exact convex polygon. A bare sample vector
  declared non-smooth is read as the circumscribed polygon
  P = {x : <x, u_k> <= h_k for all k}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from . import _kernels
from .errors import (
    AxisSymmetryError,
    InvalidInput,
    NonConvex,
    OriginNotInterior,
)
from .spectral import TrigInterpolant, fd_derivative, spectral_derivative


@dataclass(frozen=True)
class CircleGrid:
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 3:
            raise InvalidInput("grid size must be an integer >= 3", N=self.N)

    @cached_property
    def step(self) -> float:
        return 2 * np.pi / self.N

    @cached_property
    def angles(self) -> np.ndarray:
        a = 2 * np.pi * np.arange(self.N) / self.N
        a.setflags(write=False)
        return a

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.full(self.N, 2 * np.pi / self.N)
        w.setflags(write=False)
        return w

    @cached_property
    def u(self) -> np.ndarray:
        """Unit vectors (cos phi_k, sin phi_k), shape (N, 2)."""
        u = np.column_stack([np.cos(self.angles), np.sin(self.angles)])
        # exact values on the axes keep symmetric bodies exactly symmetric
        u[np.abs(u) < 1e-15] = 0.0
        u.setflags(write=False)
        return u

    def reflect_index(self, kind="axis2"):
        """Index map of the reflection phi -> pi - phi (kind='axis2') or phi -> -phi."""
        k = np.arange(self.N)
        if kind == "axis2":
            if self.N % 2:
                raise InvalidInput("reflection about the x2-axis needs an even grid", N=self.N)
            return (self.N // 2 - k) % self.N
        return (-k) % self.N


def unit(phi):
    phi = np.asarray(phi, dtype=np.float64)
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


# ---------------------------------------------------------------------------
# exact polygons
# ---------------------------------------------------------------------------

class Polygon:
    """Convex polygon with counter-clockwise vertices."""

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise InvalidInput("a polygon needs at least three vertices in the plane")
        self.vertices = v
        self.vertices.setflags(write=False)

    @classmethod
    def from_points(cls, points):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise InvalidInput("empty point cloud")
        if pts.shape[0] < 3:
            raise InvalidInput("affine hull of the points is not full-dimensional", count=pts.shape[0])
        try:
            hull = ConvexHull(pts)
        except QhullError as exc:
            raise InvalidInput("affine hull of the points is not full-dimensional", reason=str(exc)) from exc
        return cls(pts[hull.vertices])

    @classmethod
    def from_support_samples(cls, grid: CircleGrid, h):
        """The circumscribed polygon of the support samples h on grid."""
        h = np.asarray(h, dtype=np.float64)
        u = grid.u
        un = np.roll(u, -1, axis=0)
        hn = np.roll(h, -1)
        det = u[:, 0] * un[:, 1] - u[:, 1] * un[:, 0]
        x = (h * un[:, 1] - hn * u[:, 1]) / det
        y = (u[:, 0] * hn - un[:, 0] * h) / det
        return cls.from_points(np.column_stack([x, y]))

    # basic measures ---------------------------------------------------------

    @cached_property
    def _edges(self):
        v = self.vertices
        d = np.roll(v, -1, axis=0) - v
        length = np.hypot(d[:, 0], d[:, 1])
        normal = np.column_stack([d[:, 1], -d[:, 0]]) / length[:, None]
        offset = np.einsum("ij,ij->i", normal, v)
        return normal, offset, length

    @property
    def normals(self):
        return self._edges[0]

    @property
    def offsets(self):
        return self._edges[1]

    @property
    def lengths(self):
        return self._edges[2]

    @cached_property
    def area(self) -> float:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        return 0.5 * float(np.sum(v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]))

    @cached_property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cr = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        c = np.array([np.sum((v[:, 0] + w[:, 0]) * cr), np.sum((v[:, 1] + w[:, 1]) * cr)])
        return c / (6.0 * self.area)

    @property
    def perimeter(self) -> float:
        return float(np.sum(self.lengths))

    # support / radial -------------------------------------------------------

    def support(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=np.float64))
        return _kernels.support_max(u[:, 0], u[:, 1], self.vertices[:, 0], self.vertices[:, 1])

    def support_at(self, phi):
        return self.support(unit(np.atleast_1d(phi)))

    def contains_origin(self, tol=0.0) -> bool:
        return bool(np.all(self.offsets > tol))

    def radial(self, v):
        """Radial function in the directions v (rows); origin must be interior."""
        if not self.contains_origin():
            raise OriginNotInterior("origin is not interior to the polygon", min_offset=float(self.offsets.min()))
        v = np.atleast_2d(np.asarray(v, dtype=np.float64))
        n = self.normals
        val, _ = _kernels.ratio_min(self.offsets, n[:, 0], n[:, 1], v[:, 0], v[:, 1])
        return val

    def radial_at(self, psi):
        return self.radial(unit(np.atleast_1d(psi)))

    def polar(self) -> "Polygon":
        if not self.contains_origin():
            raise OriginNotInterior("origin is not interior to the polygon", min_offset=float(self.offsets.min()))
        return Polygon(self.normals / self.offsets[:, None])

    # transforms ---------------------------------------------------------------

    def translate(self, a) -> "Polygon":
        return Polygon(self.vertices + np.asarray(a, dtype=np.float64))

    def transform(self, A) -> "Polygon":
        return Polygon.from_points(self.vertices @ np.asarray(A, dtype=np.float64).T)

    def clip(self, normal, offset=0.0) -> "Polygon | None":
        """Intersection with the half-plane <normal, x> <= offset."""
        normal = np.asarray(normal, dtype=np.float64)
        v = self.vertices
        s = v @ normal - offset
        out = []
        m = v.shape[0]
        for i in range(m):
            j = (i + 1) % m
            if s[i] <= 0:
                out.append(v[i])
            if (s[i] < 0 < s[j]) or (s[j] < 0 < s[i]):
                t = s[i] / (s[i] - s[j])
                out.append(v[i] + t * (v[j] - v[i]))
        if len(out) < 3:
            return None
        pts = np.array(out)
        area2 = np.sum(pts[:, 0] * np.roll(pts[:, 1], -1) - np.roll(pts[:, 0], -1) * pts[:, 1])
        if area2 <= 1e-300:
            return None
        return Polygon(pts)

    def boundary_points(self):
        return self.vertices.copy()

    def __repr__(self):
        return f"Polygon({self.vertices.shape[0]} vertices, area={self.area:.6g})"


# ---------------------------------------------------------------------------
# support-sample bodies
# ---------------------------------------------------------------------------

def discrete_curvature_radius(h, step):
    """(h[k-1] + h[k+1] - 2 cos(d) h[k]) / (2 - 2 cos(d)).

    A second-order estimate of h'' + h that is exact on discs and translates,
    and nonnegative for every sampled support function.
    """
    h = np.asarray(h, dtype=np.float64)
    c = np.cos(step)
    return (np.roll(h, 1) + np.roll(h, -1) - 2 * c * h) / (2 - 2 * c)


class ProfileSupport:
    """Sampled support function h(phi_k) of a planar convex body."""

    def __init__(self, grid: CircleGrid, h, smooth: bool = True, polygon: Polygon | None = None,
                 tol_convex: float | None = None, check: bool = True):
        if isinstance(grid, int):
            grid = CircleGrid(grid)
        h = np.array(h, dtype=np.float64)
        if h.ndim != 1 or h.shape[0] != grid.N:
            raise InvalidInput("support samples must match the grid", expected=grid.N, got=list(h.shape))
        if not np.all(np.isfinite(h)):
            raise InvalidInput("support samples must be finite")
        self.grid = grid
        self.h = h
        self.h.setflags(write=False)
        self.smooth = bool(smooth) and polygon is None
        self.tol_convex = 1e-6 * float(np.max(np.abs(h))) if tol_convex is None else float(tol_convex)
        if check:
            q = discrete_curvature_radius(h, grid.step)
            bad = np.nonzero(q < -self.tol_convex)[0]
            if bad.size:
                raise NonConvex(
                    "support samples violate discrete convexity",
                    nodes=bad[:20].tolist(), count=int(bad.size), worst=float(q.min()),
                    tol_convex=self.tol_convex,
                )
        if polygon is None and not self.smooth:
            polygon = Polygon.from_support_samples(grid, h)
        self.polygon = polygon

    # construction helpers ------------------------------------------------------

    @classmethod
    def from_function(cls, grid, func, **kw):
        return cls(grid, func(grid.angles), **kw)

    @classmethod
    def from_polygon(cls, grid, polygon: Polygon):
        return cls(grid, polygon.support(grid.u), smooth=False, polygon=polygon)

    def with_h(self, h, **kw):
        return ProfileSupport(self.grid, h, smooth=self.smooth, **kw)

    # basic data ------------------------------------------------------------------

    @property
    def N(self):
        return self.grid.N

    @property
    def phi(self):
        return self.grid.angles

    @property
    def kind(self):
        return "smooth" if self.smooth else "polygon"

    @cached_property
    def interpolant(self) -> TrigInterpolant:
        return TrigInterpolant(self.h)

    def derivative(self, order=1, mode="spectral"):
        if mode == "spectral":
            return spectral_derivative(self.h, order)
        if mode == "fd":
            return fd_derivative(self.h, order)
        raise InvalidInput("unknown derivative mode", mode=mode)

    def evaluate(self, phi):
        """Support function at arbitrary angles."""
        phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
        if self.smooth:
            return self.interpolant(phi)
        return self.polygon.support_at(phi)

    def support(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=np.float64))
        if self.smooth:
            return self.evaluate(np.arctan2(u[:, 1], u[:, 0]))
        return self.polygon.support(u)

    def require_origin_interior(self):
        if np.min(self.h) <= 0:
            k = int(np.argmin(self.h))
            raise OriginNotInterior(
                "origin is not interior: nonpositive support sample",
                node=k, phi=float(self.phi[k]), value=float(self.h[k]),
            )

    def translate(self, a) -> "ProfileSupport":
        a = np.asarray(a, dtype=np.float64)
        if self.smooth:
            return ProfileSupport(self.grid, self.h + self.grid.u @ a)
        return ProfileSupport.from_polygon(self.grid, self.polygon.translate(a))

    def reflect(self, e) -> "ProfileSupport":
        """Reflection across the line e^perp."""
        e = np.asarray(e, dtype=np.float64)
        e = e / np.linalg.norm(e)
        R = np.eye(2) - 2 * np.outer(e, e)
        if self.smooth:
            return ProfileSupport(self.grid, self.support(self.grid.u @ R.T))
        return ProfileSupport.from_polygon(self.grid, self.polygon.transform(R))

    def as_polygon(self) -> Polygon:
        """Exact polygon for polygonal bodies; a dense inscribed polygon otherwise."""
        if self.polygon is not None:
            return self.polygon
        return Polygon(boundary_sample(self))

    def __repr__(self):
        return f"ProfileSupport(N={self.N}, kind={self.kind}, h in [{self.h.min():.6g}, {self.h.max():.6g}])"


@dataclass(frozen=True)
class AxisymBody:
    """Body of revolution about the x2-axis, given by its planar section."""

    n: int
    profile: ProfileSupport
    tol: float = field(default=1e-9)

    def __post_init__(self):
        if self.n < 2:
            raise InvalidInput("dimension must be at least 2", n=self.n)
        h = self.profile.h
        dev = np.abs(h[self.profile.grid.reflect_index("axis2")] - h)
        if dev.max() > self.tol * max(1.0, float(np.max(np.abs(h)))):
            k = int(np.argmax(dev))
            raise AxisSymmetryError(
                "profile is not symmetric about the x2-axis",
                node=k, deviation=float(dev.max()),
            )

    @property
    def grid(self):
        return self.profile.grid

    @property
    def h(self):
        return self.profile.h


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if p.size == 0:
            raise InvalidInput("empty point cloud")
        object.__setattr__(self, "points", p)

    @property
    def dim(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class SandwichReport:
    center: np.ndarray
    r_in: float
    r_out: float

    @property
    def ratio(self):
        return self.r_out / self.r_in

    def to_dict(self):
        return {"center": list(map(float, self.center)), "r_in": self.r_in,
                "r_out": self.r_out, "ratio": self.ratio}


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def support_from_points(P, grid: CircleGrid) -> ProfileSupport:
    """Support samples max_p <u_k, p> of a planar point cloud."""
    if not isinstance(P, PointCloud):
        P = PointCloud(P)
    pts = P.points
    if pts.shape[1] != 2:
        raise InvalidInput("planar points expected", dim=pts.shape[1])
    h = _kernels.support_max(grid.u[:, 0], grid.u[:, 1], pts[:, 0], pts[:, 1])
    poly = Polygon.from_points(pts)
    return ProfileSupport(grid, h, smooth=False, polygon=poly)


def _newton_radial(L: ProfileSupport, psi, iters=40):
    interp = L.interpolant
    grid = L.grid
    psi = np.asarray(psi, dtype=np.float64)
    v = unit(psi)
    _, arg = _kernels.ratio_min(L.h, grid.u[:, 0], grid.u[:, 1], v[:, 0], v[:, 1])
    phi = grid.angles[arg].copy()
    # unwrap the seed next to psi
    phi = psi + np.angle(np.exp(1j * (phi - psi)))
    step_cap = grid.step
    for _ in range(iters):
        h, h1, h2 = interp.evaluate(phi)
        d = phi - psi
        F = h1 * np.cos(d) + h * np.sin(d)
        dF = (h2 + h) * np.cos(d)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dF > 0, F / dF, 0.0)
        step = np.clip(step, -step_cap, step_cap)
        phi = phi - step
        if np.max(np.abs(step)) < 1e-15:
            break
    h, _, _ = interp.evaluate(phi)
    return h / np.cos(phi - psi)


def radial_at_angles(L: ProfileSupport, psi) -> np.ndarray:
    L.require_origin_interior()
    psi = np.atleast_1d(np.asarray(psi, dtype=np.float64))
    if L.smooth:
        return _newton_radial(L, psi)
    return L.polygon.radial_at(psi)


def radial_from_support(L: ProfileSupport, v):
    """rho_L(v) = min over u with <u,v> > 0 of h_L(u) / <u,v>.

    v is a unit vector or an array of unit vectors (rows).
    """
    v = np.asarray(v, dtype=np.float64)
    scalar = v.ndim == 1
    v = np.atleast_2d(v)
    rho = radial_at_angles(L, np.arctan2(v[:, 1], v[:, 0]))
    return float(rho[0]) if scalar else rho


def polar_support(L: ProfileSupport) -> ProfileSupport:
    """Support samples of the polar body, via h_{L°} = 1 / rho_L."""
    L.require_origin_interior()
    if L.smooth:
        rho = radial_at_angles(L, L.phi)
        return ProfileSupport(L.grid, 1.0 / rho)
    P = L.polygon.polar()
    return ProfileSupport(L.grid, 1.0 / L.polygon.radial(L.grid.u), smooth=False, polygon=P)


def gauss_preimage(L: ProfileSupport, phi):
    """Boundary point with outer normal (cos phi, sin phi): h u + h' u_perp."""
    phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
    if L.smooth:
        h, h1, _ = L.interpolant.evaluate(phi)
        c, s = np.cos(phi), np.sin(phi)
        p = np.column_stack([h * c - h1 * s, h * s + h1 * c])
    else:
        verts = L.polygon.vertices
        p = verts[np.argmax(unit(phi) @ verts.T, axis=1)]
    return p


def boundary_sample(L: ProfileSupport, count: int = 2048, offset: float = 0.0):
    """Dense boundary points; Gauss preimages at evenly spaced normals."""
    if not L.smooth:
        return L.polygon.vertices.copy()
    phi = 2 * np.pi * (np.arange(count) + offset) / count
    return gauss_preimage(L, phi)


def area(L: ProfileSupport) -> float:
    """Area: (1/2) int (h^2 - h'^2) for smooth bodies, exact for polygons."""
    if not L.smooth:
        return L.polygon.area
    h1 = L.derivative(1)
    return 0.5 * float(np.sum((L.h**2 - h1**2) * L.grid.weights))


def barycentre(L: ProfileSupport) -> np.ndarray:
    """Area centroid.

    For smooth bodies this is the moment (1/3) int p h (h'' + h) dphi / V, the
    boundary form of the polar-coordinates integral (1/3) int rho^3 v dpsi.
    """
    if not L.smooth:
        return L.polygon.centroid.copy()
    h = L.h
    h1 = L.derivative(1)
    f = L.derivative(2) + h
    u = L.grid.u
    p = h[:, None] * u + h1[:, None] * np.column_stack([-u[:, 1], u[:, 0]])
    w = L.grid.weights
    V = 0.5 * float(np.sum((h**2 - h1**2) * w))
    return (p * (h * f * w)[:, None]).sum(axis=0) / (3.0 * V)


def sandwich(L: ProfileSupport) -> SandwichReport:
    """In- and circumradius about the barycentre."""
    b = barycentre(L)
    if L.smooth:
        hc = L.h - L.grid.u @ b
        # refine the extremes on a finer mesh of the interpolant
        phi = 2 * np.pi * np.arange(4 * L.N) / (4 * L.N)
        hf = L.interpolant(phi) - unit(phi) @ b
        r_in, r_out = float(min(hc.min(), hf.min())), float(max(hc.max(), hf.max()))
    else:
        P = L.polygon.translate(-b)
        r_in = float(P.offsets.min())
        r_out = float(np.hypot(P.vertices[:, 0], P.vertices[:, 1]).max())
    if r_in <= 0:
        raise OriginNotInterior("barycentre is not interior", r_in=r_in)
    return SandwichReport(center=b, r_in=r_in, r_out=r_out)


# ---------------------------------------------------------------------------
# standard bodies
# ---------------------------------------------------------------------------

def disc(grid, r=1.0, center=(0.0, 0.0)) -> ProfileSupport:
    c = np.asarray(center, dtype=np.float64)
    return ProfileSupport(grid, r + grid.u @ c)


def ellipse(grid, a, b, angle=0.0, center=(0.0, 0.0)) -> ProfileSupport:
    phi = grid.angles - angle
    h = np.sqrt((a * np.cos(phi)) ** 2 + (b * np.sin(phi)) ** 2)
    return ProfileSupport(grid, h + grid.u @ np.asarray(center, dtype=np.float64))


def polygon_body(grid, vertices) -> ProfileSupport:
    return ProfileSupport.from_polygon(grid, Polygon.from_points(vertices))


# ---------------------------------------------------------------------------
# JSON I/O
# ---------------------------------------------------------------------------

def body_to_dict(body) -> dict:
    if isinstance(body, AxisymBody):
        n, prof = body.n, body.profile
    else:
        n, prof = 2, body
    out = {"n": int(n), "grid_N": int(prof.N), "h": [float(x) for x in prof.h]}
    if not prof.smooth:
        out["kind"] = "polygon"
        out["vertices"] = prof.polygon.vertices.tolist()
    return out


def body_from_dict(d: dict):
    try:
        n = int(d.get("n", 2))
        N = int(d["grid_N"])
        h = np.asarray(d["h"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput("body JSON needs fields n, grid_N, h", reason=str(exc)) from exc
    grid = CircleGrid(N)
    if d.get("kind") == "polygon" and "vertices" in d:
        prof = ProfileSupport(grid, h, smooth=False, polygon=Polygon(d["vertices"]))
    else:
        prof = ProfileSupport(grid, h, smooth=d.get("kind", "smooth") == "smooth")
    if n >= 3:
        return AxisymBody(n, prof)
    return prof


def load_body(path):
    with open(path) as fh:
        return body_from_dict(json.load(fh))


def load_points(path) -> PointCloud:
    with open(path) as fh:
        d = json.load(fh)
    if "points" not in d:
        raise InvalidInput("point cloud JSON needs a 'points' field")
    return PointCloud(np.asarray(d["points"], dtype=np.float64))
