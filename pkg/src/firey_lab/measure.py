"""Surface-area-measure densities, volumes, mixed volumes and residuals.

Axisymmetric bodies in R^n are described by their section in the (x1, x2)
plane; phi is the angle of the normal from the equator, so phi = +-pi/2 are
the poles on the x2-axis.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .errors import DomainError, GridMismatch, InvalidInput, NonConvex
from .geometry import AxisymBody, ProfileSupport, area, radial_at_angles, unit

GL_NODES = 256


def sphere_area(k: int) -> float:
    """H^k measure of the unit sphere S^k."""
    return 2 * np.pi ** ((k + 1) / 2) / gamma((k + 1) / 2)


def _gauss_legendre(m=GL_NODES):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * np.pi * x, 0.5 * np.pi * w


@dataclass
class DensityField:
    phi: np.ndarray
    f: np.ndarray
    n: int
    clamped: int = 0

    def to_dict(self):
        return {"n": self.n, "phi": self.phi.tolist(), "f": self.f.tolist()}


def _clamp(f, tol, what, noise=None):
    bad = f < -tol
    if np.any(bad):
        k = np.nonzero(bad)[0]
        raise NonConvex(f"negative {what} beyond tolerance", nodes=k[:20].tolist(),
                        worst=float(f.min()), tol=tol)
    # values at rounding level are zeroed silently; larger dips are reported
    if noise is None:
        noise = 64 * np.finfo(float).eps * max(float(np.max(np.abs(f))), 1.0)
    f = np.where((f < 0) & (f >= -noise), 0.0, f)
    small = f < 0
    count = int(small.sum())
    if count:
        warnings.warn(f"clamped {count} slightly negative density samples to 0", RuntimeWarning)
        f = np.where(small, 0.0, f)
    return f, count


def density_planar(L: ProfileSupport, mode="spectral", tol=None) -> DensityField:
    """Radius of curvature h'' + h on the grid.

    For polygonal bodies the value is the edge length of the circumscribed
    polygon divided by the node spacing, so that sum(f) * step is the
    perimeter of that polygon.
    """
    from .geometry import discrete_curvature_radius

    d = L.grid.step
    scale = float(np.max(np.abs(L.h)))
    noise = None
    if L.smooth and mode == "spectral":
        f = L.derivative(2) + L.h
    elif L.smooth and mode == "fd":
        f = discrete_curvature_radius(L.h, d)
        noise = 16 * np.finfo(float).eps * scale / (2 - 2 * np.cos(d))
    else:
        f = discrete_curvature_radius(L.h, d) * (2 - 2 * np.cos(d)) / np.sin(d) / d
        # flat edges give 0 up to rounding amplified by the second difference
        noise = 16 * np.finfo(float).eps * scale / (np.sin(d) * d)
    tol = L.tol_convex if tol is None else tol
    f, count = _clamp(f, tol, "curvature radius", noise)
    return DensityField(L.phi.copy(), f, 2, count)


def _axisym_density_values(h, h1, h2, phi, n):
    R = h2 + h
    c, s = np.cos(phi), np.sin(phi)
    pole = np.abs(c) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        X = np.where(pole, R, (h * c - h1 * s) / np.where(pole, 1.0, c))
    return R * X ** (n - 2)


def density_axisym(K: AxisymBody, mode="spectral", tol=None) -> DensityField:
    """Density det(h_ij + delta_ij h) of a body of revolution.

    The meridian principal radius is h'' + h; the n - 2 rotational radii equal
    the distance of the boundary point from the axis divided by cos(phi).
    At the poles the quotient tends to h'' + h. ``mode='fd'`` uses centered
    differences, which stay local near the seams of glued bodies.
    """
    if K.n == 2:
        return density_planar(K.profile, mode=mode, tol=tol)
    L = K.profile
    if not L.smooth:
        raise InvalidInput("axisymmetric densities need a smooth profile")
    h1 = L.derivative(1, mode)
    h2 = L.derivative(2, mode)
    f = _axisym_density_values(L.h, h1, h2, L.phi, K.n)
    tol = 1e-6 * float(np.max(L.h)) ** (K.n - 1) if tol is None else tol
    f, count = _clamp(f, max(tol, 1e-300), "density")
    return DensityField(L.phi.copy(), f, K.n, count)


def density(body, **kw) -> DensityField:
    if isinstance(body, AxisymBody):
        return density_axisym(body, **kw)
    return density_planar(body, **kw)


def _density_at(L: ProfileSupport, n, phi):
    h, h1, h2 = L.interpolant.evaluate(phi)
    if n == 2:
        return h2 + h
    return _axisym_density_values(h, h1, h2, phi, n)


def _split(body):
    if isinstance(body, AxisymBody):
        return body.n, body.profile
    return 2, body


def volume(body) -> float:
    """Volume (area for n = 2) from the radial function, V = (1/n) int rho^n."""
    n, L = _split(body)
    if n == 2:
        if not L.smooth:
            return L.polygon.area
        rho = radial_at_angles(L, L.phi)
        return 0.5 * float(np.sum(rho**2 * L.grid.weights))
    psi, w = _gauss_legendre()
    rho = radial_at_angles(L, psi)
    return sphere_area(n - 2) / n * float(np.sum(w * rho**n * np.cos(psi) ** (n - 2)))


def polar_volume(body) -> float:
    """Volume of the polar body, (1/n) int h^{-n}."""
    n, L = _split(body)
    L.require_origin_interior()
    if n == 2:
        if not L.smooth:
            return L.polygon.polar().area
        return 0.5 * float(np.sum(L.h ** -2.0 * L.grid.weights))
    psi, w = _gauss_legendre()
    h = L.interpolant(psi)
    return sphere_area(n - 2) / n * float(np.sum(w * h ** (-float(n)) * np.cos(psi) ** (n - 2)))


def mixed_volume(Lb, Mb) -> float:
    """V(L, M) = (1/n) int h_L dS_M."""
    nL, L = _split(Lb)
    nM, M = _split(Mb)
    if nL != nM:
        raise GridMismatch("bodies live in different dimensions", n_L=nL, n_M=nM)
    n = nL
    if n == 2:
        if not M.smooth:
            P = M.polygon
            return 0.5 * float(np.sum(L.support(P.normals) * P.lengths))
        if not L.smooth:
            P = L.polygon
            return 0.5 * float(np.sum(M.support(P.normals) * P.lengths))
        if L.N != M.N:
            raise GridMismatch("bodies sampled on different grids", N_L=L.N, N_M=M.N)
        fM = M.derivative(2) + M.h
        return 0.5 * float(np.sum(L.h * fM * M.grid.weights))
    if not (L.smooth and M.smooth):
        raise InvalidInput("axisymmetric mixed volumes need smooth profiles")
    psi, w = _gauss_legendre()
    hL = L.interpolant(psi)
    fM = _density_at(M, n, psi)
    return sphere_area(n - 2) / n * float(np.sum(w * hL * fM * np.cos(psi) ** (n - 2)))


def surface_area(body) -> float:
    n, L = _split(body)
    if n == 2:
        if not L.smooth:
            return L.polygon.perimeter
        return float(np.sum((L.derivative(2) + L.h) * L.grid.weights))
    psi, w = _gauss_legendre()
    return sphere_area(n - 2) * float(np.sum(w * _density_at(L, n, psi) * np.cos(psi) ** (n - 2)))


def barycentre_of_surface_measure(body) -> np.ndarray:
    """int v dS(v); vanishes for every convex body (closure)."""
    n, L = _split(body)
    if n == 2:
        if not L.smooth:
            P = L.polygon
            return (P.normals * P.lengths[:, None]).sum(axis=0)
        f = L.derivative(2) + L.h
        return (L.grid.u * (f * L.grid.weights)[:, None]).sum(axis=0)
    psi, w = _gauss_legendre()
    f = _density_at(L, n, psi)
    c = np.cos(psi) ** (n - 2)
    return np.array([0.0, sphere_area(n - 2) * float(np.sum(w * np.sin(psi) * f * c))])


# ---------------------------------------------------------------------------
# Monge-Ampere residual
# ---------------------------------------------------------------------------

@dataclass
class ResidualReport:
    phi: np.ndarray
    h: np.ndarray
    f: np.ndarray
    Gh: np.ndarray
    residual: np.ndarray
    included: np.ndarray
    step: float
    seam_band: int = 0
    seams: list = field(default_factory=list)

    @property
    def max_abs(self) -> float:
        r = np.abs(self.residual[self.included])
        return float(r.max()) if r.size else 0.0

    @property
    def l2_norm(self) -> float:
        r = self.residual[self.included]
        return float(np.sqrt(np.sum(r**2) * self.step))

    @property
    def argmax_phi(self) -> float:
        r = np.where(self.included, np.abs(self.residual), -1.0)
        return float(self.phi[int(np.argmax(r))])

    def to_dict(self):
        return {
            "max_abs": self.max_abs, "l2": self.l2_norm, "argmax_phi": self.argmax_phi,
            "seam_band": self.seam_band, "seams": [float(s) for s in self.seams],
            "excluded_nodes": int((~self.included).sum()),
            "residual": [float(x) for x in self.residual],
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["phi", "h", "f", "G_h", "residual", "included"])
        for row in zip(self.phi, self.h, self.f, self.Gh, self.residual, self.included):
            w.writerow([f"{x:.17g}" for x in row[:5]] + [int(row[5])])
        return buf.getvalue()


def seam_mask(phi, seams, band, step):
    """True at nodes farther than ``band`` grid cells from every seam angle."""
    keep = np.ones(phi.shape, dtype=bool)
    for s in seams:
        d = np.abs(np.angle(np.exp(1j * (phi - s))))
        keep &= d > band * step * (1 + 1e-9)
    return keep


def monge_ampere_residual(body, G, seams=(), seam_band=0, dens=None) -> ResidualReport:
    """Pointwise f_K - G(h_K) on the grid, with optional seam exclusion."""
    n, L = _split(body)
    h = L.h
    lo, hi = G.c1 - G.domain_tol, G.c2 + G.domain_tol
    bad = (h < lo) | (h > hi)
    if np.any(bad):
        raise DomainError("support values outside the domain of G", c1=G.c1, c2=G.c2,
                          offending=np.unique(h[bad])[:10].tolist())
    f = density(body).f if dens is None else dens
    Gh = G(h)
    keep = seam_mask(L.phi, seams, seam_band, L.grid.step) if seams else np.ones(L.N, dtype=bool)
    return ResidualReport(L.phi.copy(), h.copy(), f, Gh, f - Gh, keep, L.grid.step,
                          seam_band, list(seams))


__all__ = [
    "DensityField", "ResidualReport", "area", "barycentre_of_surface_measure", "density",
    "density_axisym", "density_planar", "mixed_volume", "monge_ampere_residual", "polar_volume",
    "seam_mask", "sphere_area", "surface_area", "unit", "volume",
]
