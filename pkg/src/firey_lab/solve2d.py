"""Periodic solutions of h'' + h = G(h) on the circle and their classification."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lstsq
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, InvalidInput, NonConvergence
from .gclass import GTab
from .geometry import AxisymBody, CircleGrid, ProfileSupport
from .spectral import spectral_derivative

TAGS = ("circle-centered", "circle-translated", "ellipse-family", "other")


def _second_derivative_matrix(N):
    """Dense spectral second-derivative matrix on N equispaced nodes."""
    k = np.fft.rfftfreq(N, 1.0 / N)
    sym = -(k**2)
    # circulant: first column is the inverse transform of the symbol
    col = np.fft.irfft(sym, n=N)
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    return col[idx]


def fixed_point(G: GTab):
    """A constant solution c = G(c) inside the domain of G, or None."""
    th = np.linspace(G.c1, G.c2, 2049)
    d = G(th) - th
    sgn = np.nonzero(np.sign(d[:-1]) * np.sign(d[1:]) <= 0)[0]
    if sgn.size == 0:
        return None
    k = int(sgn[0])
    if d[k] == 0:
        return float(th[k])
    return float(brentq(lambda t: float(G(t)) - t, th[k], th[k + 1], xtol=1e-15))


def default_seeds(G: GTab, N: int, count=16, seed=0):
    """Named initial guesses: constant, cos/sin perturbations, random smooth."""
    phi = CircleGrid(N).angles
    c0 = fixed_point(G)
    if c0 is None:
        c0 = 0.5 * (G.c1 + G.c2)
    room = min(c0 - G.c1, G.c2 - c0)
    a = 0.5 * room
    seeds = [("constant", np.full(N, c0))]
    seeds.append(("cos1", c0 + a * np.cos(phi)))
    seeds.append(("sin1", c0 + a * np.sin(phi)))
    for eps in (0.05, 0.1, 0.2, 0.3):
        seeds.append((f"cos2:{eps:g}", c0 * (1 + min(eps, 0.9 * room / c0) * np.cos(2 * phi))))
    for eps in (0.1, 0.25):
        seeds.append((f"sin2:{eps:g}", c0 * (1 + min(eps, 0.9 * room / c0) * np.sin(2 * phi))))
    rng = np.random.default_rng(seed)
    j = 0
    while len(seeds) < count:
        coef = rng.normal(size=(4, 2)) / np.arange(1, 5)[:, None] ** 2
        pert = sum(coef[k, 0] * np.cos((k + 1) * phi) + coef[k, 1] * np.sin((k + 1) * phi)
                   for k in range(4))
        pert *= 0.5 * room / max(np.max(np.abs(pert)), 1e-300)
        seeds.append((f"random:{j}", c0 + pert))
        j += 1
    return seeds[:count]


@dataclass
class BVPProblem:
    G: GTab
    grid: CircleGrid = field(default_factory=lambda: CircleGrid(256))
    seeds: list | None = None
    tol: float = 1e-11
    max_iter: int = 60
    continuation: list = field(default_factory=list)
    recheck_tol: float = 1e-8

    def __post_init__(self):
        if isinstance(self.grid, int):
            self.grid = CircleGrid(self.grid)
        if self.G.n != 2:
            raise InvalidInput("planar solver needs G with n = 2", n=self.G.n)
        if self.seeds is None:
            self.seeds = default_seeds(self.G, self.grid.N)
        for name, h0 in self.seeds:
            h0 = np.asarray(h0)
            if h0.shape != (self.grid.N,):
                raise InvalidInput("seed does not match the grid", seed=name)
            if h0.min() < self.G.c1 or h0.max() > self.G.c2:
                raise DomainError("seed leaves the domain of G", seed=name,
                                  c1=self.G.c1, c2=self.G.c2)


@dataclass
class Solution:
    h: np.ndarray
    seed: str
    iterations: int
    residual: float
    residual_fine: float
    curvature_min: float
    tag: str = "other"
    params: dict = field(default_factory=dict)

    def profile(self, grid=None):
        return ProfileSupport(grid or CircleGrid(self.h.size), self.h)

    def to_dict(self):
        return {"seed": self.seed, "iterations": self.iterations, "residual": self.residual,
                "residual_fine": self.residual_fine, "curvature_min": self.curvature_min,
                "tag": self.tag, "params": self.params}


@dataclass
class SolutionSet:
    solutions: list
    failures: list
    G_name: str | None = None

    def tags(self):
        return [s.tag for s in self.solutions]

    def to_dict(self):
        return {"G": self.G_name, "solutions": [s.to_dict() for s in self.solutions],
                "failures": self.failures}


def roundoff_floor(N, scale=1.0):
    """Attainable max-norm residual of h'' + h in double precision."""
    return 8 * np.finfo(float).eps * (N / 2) ** 2 * float(scale)


def _newton(G: GTab, D2, h, tol, max_iter):
    """Least-squares Newton with backtracking on the residual norm.

    Iterates may step slightly outside the domain of G, where G is continued
    by its end values; the caller checks the domain of the converged profile.
    """
    lo, hi = G.c1, G.c2
    N = h.size
    # spectral h'' amplifies the rounding of the samples by up to (N/2)^2
    tol = max(tol, roundoff_floor(N, np.max(np.abs(h))))

    def resid(v):
        return spectral_derivative(v, 2) + v - G(np.clip(v, lo, hi))

    r = resid(h)
    norm = float(np.max(np.abs(r)))
    for it in range(1, max_iter + 1):
        if norm <= tol:
            return h, norm, it - 1
        inside = (h > lo) & (h < hi)
        J = D2 + np.eye(h.size) - np.diag(np.where(inside, G.derivative(np.clip(h, lo, hi)), 0.0))
        step = lstsq(J, -r, cond=1e-13, lapack_driver="gelsy")[0]
        t = 1.0
        while t > 1e-6:
            hn = h + t * step
            rn = resid(hn)
            nn = float(np.max(np.abs(rn)))
            if nn < norm or nn <= tol:
                break
            t *= 0.5
        else:
            return h, norm, it
        h, r, norm = hn, rn, nn
    return h, norm, max_iter


def _fine_residual(h, G: GTab):
    """Residual of the trigonometric interpolant of h on a grid twice as fine."""
    N = h.size
    F = np.fft.rfft(h)
    Ff = np.zeros(N + 1, dtype=complex)
    Ff[: F.size] = F
    Ff[N // 2] *= 0.5  # split the Nyquist term between +-N/2
    hf = np.fft.irfft(Ff, n=2 * N) * 2
    if hf.min() < G.c1 - G.domain_tol or hf.max() > G.c2 + G.domain_tol:
        return np.inf
    return float(np.max(np.abs(spectral_derivative(hf, 2) + hf - G(hf))))


def rotation_distance(a, b):
    """min over discrete rotations k of max |a - roll(b, k)|."""
    a, b = np.asarray(a), np.asarray(b)
    idx = (np.arange(a.size)[None, :] - np.arange(a.size)[:, None]) % a.size
    return float(np.min(np.max(np.abs(a[None, :] - b[idx]), axis=1)))


def solve_periodic(prob: BVPProblem, classify=True, distinct_tol=1e-6) -> SolutionSet:
    """Newton on the spectral collocation system from every seed of ``prob``."""
    N = prob.grid.N
    D2 = _second_derivative_matrix(N)
    found, failures = [], []
    for name, h0 in prob.seeds:
        h = np.asarray(h0, dtype=np.float64).copy()
        its = 0
        ok = True
        for Gc in list(prob.continuation) + [prob.G]:
            h, res, k = _newton(Gc, D2, h, prob.tol, prob.max_iter)
            its += k
            if res > max(prob.tol, roundoff_floor(N, np.max(np.abs(h)))):
                ok = False
                break
        if not ok:
            failures.append({"seed": name, "best_residual": res, "reason": "newton stalled"})
            continue
        G = prob.G
        if h.min() < G.c1 - G.domain_tol or h.max() > G.c2 + G.domain_tol:
            failures.append({"seed": name, "best_residual": res, "reason": "left the domain of G",
                             "range": [float(h.min()), float(h.max())]})
            continue
        fine = _fine_residual(h, G)
        curv = float(np.min(spectral_derivative(h, 2) + h))
        if fine > prob.recheck_tol or curv <= 0:
            failures.append({"seed": name, "best_residual": res, "fine_residual": fine,
                             "curvature_min": curv, "reason": "fine-grid recheck failed"})
            continue
        found.append(Solution(h, name, its, res, fine, curv))
    if not found:
        best = min((f.get("best_residual", np.inf) for f in failures), default=np.inf)
        raise NonConvergence("no seed converged", best_residual=best, failures=failures)
    distinct = []
    for s in found:
        if all(rotation_distance(s.h, t.h) > distinct_tol for t in distinct):
            distinct.append(s)
    distinct.sort(key=lambda s: (s.residual, tuple(np.round(s.h, 12))))
    if classify:
        for s in distinct:
            s.tag, s.params = classify_solution(s.h)
    return SolutionSet(distinct, failures, prob.G.name)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def _samples(h):
    if isinstance(h, AxisymBody):
        return h.profile
    if isinstance(h, ProfileSupport):
        return h
    return ProfileSupport(CircleGrid(len(h)), np.asarray(h, dtype=np.float64), check=False)


def symmetry_axis(h):
    """Best reflection axis through the origin: (angle in [0, pi), max deviation).

    The reflection across the line at angle beta maps h(phi) to h(2 beta - phi).
    """
    L = _samples(h)
    N = L.N
    hv = L.h
    # candidate axes on half-grid steps, exact on the samples
    devs = np.array([np.max(np.abs(hv - hv[(j - np.arange(N)) % N])) for j in range(N)])
    j = int(np.argmin(devs))
    beta0 = 0.5 * j * L.grid.step
    phi = L.phi
    interp = L.interpolant

    def dev(beta):
        return float(np.max(np.abs(hv - interp(2 * beta - phi))))

    r = minimize_scalar(dev, bounds=(beta0 - L.grid.step, beta0 + L.grid.step), method="bounded",
                        options={"xatol": 1e-12})
    beta, d = (r.x, r.fun) if r.fun < devs[j] else (beta0, float(devs[j]))
    return float(beta % np.pi), float(d)


def _fit(basis, y):
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    return coef, float(np.max(np.abs(basis @ coef - y)))


def classify_solution(h, tol=1e-8):
    """Tag a profile as circle-centered, circle-translated, ellipse-family or other."""
    L = _samples(h)
    phi, hv = L.phi, L.h
    scale = float(np.max(np.abs(hv)))
    c, s = np.cos(phi), np.sin(phi)
    beta, axis_dev = symmetry_axis(L)
    params = {"axis_angle": beta, "axis_deviation": axis_dev}
    # monotone on the half-period in the frame where the axis is e2
    shifted = L.interpolant(np.linspace(-np.pi / 2, np.pi / 2, 2049) + beta - np.pi / 2)
    d = np.diff(shifted)
    params["monotone_half_period"] = bool(np.all(d >= -tol * scale) or np.all(d <= tol * scale))
    spread = float(np.max(hv) - np.min(hv))
    params["circle_deviation"] = 0.5 * spread
    if 0.5 * spread <= tol * max(scale, 1.0):
        params["radius"] = float(np.mean(hv))
        return "circle-centered", params
    coef, err = _fit(np.column_stack([np.ones_like(phi), c, s]), hv)
    params["translate_fit_residual"] = err
    if err <= tol * max(scale, 1.0):
        params.update(radius=float(coef[0]), center=[float(coef[1]), float(coef[2])])
        return "circle-translated", params
    coef, _ = _fit(np.column_stack([np.ones_like(phi), np.cos(2 * phi), np.sin(2 * phi)]), hv**2)
    A0, Bc, Bs = coef
    amp = float(np.hypot(Bc, Bs))
    a2, b2 = A0 + amp, A0 - amp
    if b2 > 0:
        phi0 = 0.5 * float(np.arctan2(Bs, Bc))
        model = np.sqrt(a2 * np.cos(phi - phi0) ** 2 + b2 * np.sin(phi - phi0) ** 2)
        err = float(np.max(np.abs(model - hv)))
        params["ellipse_fit_residual"] = err
        if err <= tol * max(scale, 1.0):
            params.update(a=float(np.sqrt(a2)), b=float(np.sqrt(b2)), angle=phi0,
                          a2b2=float(a2 * b2))
            return "ellipse-family", params
    return "other", params


# ---------------------------------------------------------------------------
# extremum inequalities
# ---------------------------------------------------------------------------

@dataclass
class ExtremumReport:
    extrema: list
    passed: bool

    def to_dict(self):
        return {"passed": self.passed, "extrema": self.extrema}


def local_extremum_inequalities(body, G: GTab, n=None, tol=1e-8) -> ExtremumReport:
    """Check G(h) >= h^{n-1} at local minima of h and <= at local maxima,
    together with the radial touching condition h'(phi0) = 0.

    For bodies of revolution the search runs over [-pi/2, pi/2]; planar
    profiles are searched over the whole circle.
    """
    if isinstance(body, AxisymBody):
        n = body.n if n is None else n
        L = body.profile
    else:
        n = 2 if n is None else n
        L = _samples(body)
    hv = L.h
    N = L.N
    phi = L.phi
    if isinstance(body, AxisymBody):
        keep = np.abs(np.angle(np.exp(1j * phi))) <= np.pi / 2 + 1e-12
    else:
        keep = np.ones(N, dtype=bool)
    scale = float(np.max(np.abs(hv)))
    out = []
    for k in np.nonzero(keep)[0]:
        prev, nxt = hv[(k - 1) % N], hv[(k + 1) % N]
        edge = isinstance(body, AxisymBody) and (not keep[(k - 1) % N] or not keep[(k + 1) % N])
        if edge:
            # the poles: compare with the single interior neighbour (h is even there)
            inner = nxt if keep[(k + 1) % N] else prev
            prev = nxt = inner
        if hv[k] < prev and hv[k] <= nxt:
            kind = "min"
        elif hv[k] > prev and hv[k] >= nxt:
            kind = "max"
        else:
            continue
        a = float(phi[k])
        for _ in range(30):
            _, d1, d2 = (x[0] for x in L.interpolant.evaluate(a))
            if d2 == 0:
                break
            step = float(np.clip(-d1 / d2, -L.grid.step, L.grid.step))
            a += step
            if abs(step) < 1e-15:
                break
        h0, d1, _ = (x[0] for x in L.interpolant.evaluate(a))
        g = float(G(np.clip(h0, G.c1, G.c2)))
        bound = h0 ** (n - 1)
        ok_ineq = g >= bound - tol * max(1.0, bound) if kind == "min" else g <= bound + tol * max(1.0, bound)
        ok_touch = abs(d1) <= max(tol, 1e-9) * scale
        out.append({"kind": kind, "phi": a, "h": float(h0), "G_h": g, "h_pow": float(bound),
                    "touching_defect": float(abs(d1)), "inequality_holds": bool(ok_ineq),
                    "touching_holds": bool(ok_touch)})
    passed = all(e["inequality_holds"] and e["touching_holds"] for e in out)
    return ExtremumReport(out, passed)


__all__ = [
    "BVPProblem", "ExtremumReport", "Solution", "SolutionSet", "classify_solution", "default_seeds",
    "fixed_point", "local_extremum_inequalities", "rotation_distance", "solve_periodic",
    "symmetry_axis",
]
