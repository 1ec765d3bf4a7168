"""Functions G on an interval, the class A(n), extension and end-point gluing.

G belongs to A(n) on [c1, c2] when F = theta G + n H is strictly increasing,
H being any antiderivative of G.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad
from scipy.interpolate import CubicSpline

from .errors import DomainError, InvalidInput, PreconditionError

DEFAULT_DOMAIN = (0.25, 4.0)


class GTab:
    """A positive function G on [c1, c2] with antiderivative H, H(c1) = 0.

    G is given either by a callable (``func``, optionally with ``dfunc`` and
    ``antideriv``) or by samples on a uniform theta grid, interpolated with a
    cubic spline (``interp='cubic'``) or piecewise linearly (``'linear'``).
    """

    def __init__(self, c1, c2, n=2, *, samples=None, func=None, dfunc=None, antideriv=None,
                 interp="cubic", num=4096, name=None, domain_tol=1e-9):
        c1, c2 = float(c1), float(c2)
        if not (0 < c1 < c2):
            raise InvalidInput("domain must satisfy 0 < c1 < c2", c1=c1, c2=c2)
        if (samples is None) == (func is None):
            raise InvalidInput("give exactly one of samples or func")
        self.c1, self.c2, self.n = c1, c2, int(n)
        self.name = name
        self.interp = interp
        self.domain_tol = domain_tol * c2
        self._func, self._dfunc, self._anti = func, dfunc, antideriv
        if samples is not None:
            samples = np.asarray(samples, dtype=np.float64)
            num = samples.shape[0]
        self.theta = np.linspace(c1, c2, num)
        if func is not None:
            self.G = np.asarray(func(self.theta), dtype=np.float64) * np.ones(num)
        else:
            self.G = samples
            if interp == "cubic":
                self._spline = CubicSpline(self.theta, samples)
                self._spline_anti = self._spline.antiderivative()
            elif interp != "linear":
                raise InvalidInput("interp must be 'cubic' or 'linear'", interp=interp)
        if np.any(self.G <= 0) or not np.all(np.isfinite(self.G)):
            raise InvalidInput("G must be finite and strictly positive", min=float(np.nanmin(self.G)))
        self.H = self.antiderivative(self.theta)
        self.H[0] = 0.0

    # evaluation -------------------------------------------------------------

    def check_domain(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        bad = (theta < self.c1 - self.domain_tol) | (theta > self.c2 + self.domain_tol)
        if np.any(bad):
            raise DomainError(
                "argument outside the domain of G",
                c1=self.c1, c2=self.c2, offending=np.unique(theta[bad])[:10].tolist(),
            )
        return np.clip(theta, self.c1, self.c2)

    def __call__(self, theta):
        t = self.check_domain(theta)
        if self._func is not None:
            return np.asarray(self._func(t), dtype=np.float64) * np.ones_like(t)
        if self.interp == "cubic":
            return self._spline(t)
        return np.interp(t, self.theta, self.G)

    def derivative(self, theta):
        t = self.check_domain(theta)
        if self._dfunc is not None:
            return np.asarray(self._dfunc(t), dtype=np.float64) * np.ones_like(t)
        if self._func is None and self.interp == "cubic":
            return self._spline(t, 1)
        if self._func is None:
            k = np.clip(np.searchsorted(self.theta, t, side="right") - 1, 0, self.theta.size - 2)
            return (self.G[k + 1] - self.G[k]) / (self.theta[k + 1] - self.theta[k])
        eps = 1e-6 * (self.c2 - self.c1)
        lo = np.clip(t - eps, self.c1, self.c2)
        hi = np.clip(t + eps, self.c1, self.c2)
        return (self._func(hi) - self._func(lo)) / (hi - lo)

    def antiderivative(self, theta):
        """H(theta) = int_{c1}^{theta} G."""
        t = self.check_domain(theta)
        if self._anti is not None:
            return np.asarray(self._anti(t) - self._anti(self.c1), dtype=np.float64) * np.ones_like(t)
        if self._func is None and self.interp == "cubic":
            return self._spline_anti(t) - self._spline_anti(self.c1)
        if self._func is None:
            cum = np.concatenate([[0.0], cumulative_trapezoid(self.G, self.theta)])
            k = np.clip(np.searchsorted(self.theta, t, side="right") - 1, 0, self.theta.size - 2)
            dt = t - self.theta[k]
            slope = (self.G[k + 1] - self.G[k]) / (self.theta[k + 1] - self.theta[k])
            return cum[k] + self.G[k] * dt + 0.5 * slope * dt**2
        # callable without antiderivative: fine cumulative trapezoid
        fine = np.linspace(self.c1, self.c2, 16 * self.theta.size)
        cum = np.concatenate([[0.0], cumulative_trapezoid(self._func(fine), fine)])
        return np.interp(t, fine, cum)

    def F(self, theta):
        theta = np.asarray(theta, dtype=np.float64)
        return theta * self(theta) + self.n * self.antiderivative(theta)

    def with_n(self, n):
        g = object.__new__(GTab)
        g.__dict__.update(self.__dict__)
        g.n = int(n)
        return g

    # serialization ----------------------------------------------------------

    def to_dict(self):
        return {"n": self.n, "c1": self.c1, "c2": self.c2, "G": [float(x) for x in self.G],
                "name": self.name}

    def __repr__(self):
        label = self.name or ("tabulated" if self._func is None else "function")
        return f"GTab({label}, [{self.c1:g}, {self.c2:g}], n={self.n})"


def gtab_from_dict(d, interp="cubic"):
    try:
        return GTab(d["c1"], d["c2"], d.get("n", 2), samples=np.asarray(d["G"], dtype=np.float64),
                    interp=interp, name=d.get("name"))
    except KeyError as exc:
        raise InvalidInput("GTab JSON needs n, c1, c2, G", missing=str(exc)) from exc


def preset(spec: str, n=2, c1=None, c2=None, num=4096) -> GTab:
    """Named presets: 'power:p', 'const:c', 'increasing:demo', or a JSON path."""
    c1 = DEFAULT_DOMAIN[0] if c1 is None else c1
    c2 = DEFAULT_DOMAIN[1] if c2 is None else c2
    if spec.endswith(".json"):
        with open(spec) as fh:
            g = gtab_from_dict(json.load(fh))
        return g.with_n(n)
    kind, _, arg = spec.partition(":")
    if kind == "power":
        p = float(arg)
        if p == -1:
            anti = np.log
        else:
            anti = lambda t: t ** (p + 1) / (p + 1)  # noqa: E731
        return GTab(c1, c2, n, func=lambda t: t**p, dfunc=lambda t: p * t ** (p - 1),
                    antideriv=anti, num=num, name=spec)
    if kind == "const":
        c = float(arg)
        return GTab(c1, c2, n, func=lambda t: np.full_like(t, c), dfunc=lambda t: np.zeros_like(t),
                    antideriv=lambda t: c * t, num=num, name=spec)
    if kind == "increasing" and arg == "demo":
        return GTab(c1, c2, n, func=lambda t: 1 + np.arctan(t), dfunc=lambda t: 1 / (1 + t**2),
                    antideriv=lambda t: t + t * np.arctan(t) - 0.5 * np.log1p(t**2),
                    num=num, name=spec)
    raise InvalidInput("unknown G preset", spec=spec)


# ---------------------------------------------------------------------------
# certificate
# ---------------------------------------------------------------------------

@dataclass
class AnCertificate:
    passed: bool
    n: int
    min_forward_difference: float
    min_window_increase: float
    scale: float
    violation: tuple | None = None
    min_derivative_form: float | None = None

    def to_dict(self):
        return {
            "passed": self.passed, "n": self.n,
            "min_forward_difference": self.min_forward_difference,
            "min_window_increase": self.min_window_increase, "scale": self.scale,
            "violation": None if self.violation is None else list(self.violation),
            "min_theta_dG_plus_np1_G": self.min_derivative_form,
        }


def check_An(G: GTab, n=None, window=16, tol=1e-12) -> AnCertificate:
    """Certify that theta G + n H is strictly increasing on the samples.

    Forward differences must exceed -tol*scale and every run of ``window``
    samples must gain more than tol*scale, so a function that is flat to
    rounding is rejected.
    """
    n = G.n if n is None else int(n)
    th = G.theta
    F = th * G.G + n * G.H
    scale = float(np.max(np.abs(th * G.G)) + n * np.max(np.abs(G.H))) or 1.0
    dF = np.diff(F)
    w = min(window, th.size - 1)
    inc = F[w:] - F[:-w]
    violation = None
    bad = np.nonzero(dF < -tol * scale)[0]
    if bad.size:
        k = int(bad[0])
        violation = (float(th[k]), float(th[k + 1]), "decreasing")
    else:
        flat = np.nonzero(inc <= tol * scale)[0]
        if flat.size:
            k = int(flat[0])
            violation = (float(th[k]), float(th[k + w]), "not strictly increasing")
    deriv = None
    try:
        deriv = float(np.min(th * G.derivative(th) + (n + 1) * G.G))
    except Exception:  # derivative unavailable; the certificate does not need it
        deriv = None
    return AnCertificate(
        passed=violation is None, n=n, min_forward_difference=float(dF.min()),
        min_window_increase=float(inc.min()), scale=scale, violation=violation,
        min_derivative_form=deriv,
    )


# ---------------------------------------------------------------------------
# extension to (0, Theta]
# ---------------------------------------------------------------------------

@dataclass
class FRep:
    theta: np.ndarray
    F: np.ndarray

    def check(self):
        return bool(self.F[0] == 0.0 and np.all(np.diff(self.F) > 0))


class ExtendedG:
    """G extended below c1 by G(c1) and above c2 by G(c2)."""

    def __init__(self, G: GTab, n: int, Theta: float):
        self.base = G
        self.n = n
        self.a, self.b = G.c1, G.c2
        self.Theta = float(Theta)
        self.Ga = float(G(self.a))
        self.Gb = float(G(self.b))
        self.Hb = float(G.antiderivative(self.b))

    def G_bar(self, theta):
        t = np.asarray(theta, dtype=np.float64)
        mid = np.clip(t, self.a, self.b)
        return np.where(t < self.a, self.Ga, np.where(t > self.b, self.Gb, self.base(mid)))

    def H_bar(self, theta):
        t = np.asarray(theta, dtype=np.float64)
        mid = np.clip(t, self.a, self.b)
        return np.where(
            t < self.a, t * self.Ga,
            np.where(t > self.b, (t - self.b) * self.Gb + self.Hb + self.a * self.Ga,
                     self.base.antiderivative(mid) + self.a * self.Ga),
        )

    def F(self, theta):
        t = np.asarray(theta, dtype=np.float64)
        return t * self.G_bar(t) + self.n * self.H_bar(t)

    def frep(self, num=4096) -> FRep:
        th = np.linspace(0.0, self.Theta, num)
        F = self.F(th)
        F[0] = 0.0
        return FRep(th, F)

    def as_gtab(self, c1=None, c2=None, num=4096) -> GTab:
        c1 = self.Theta * 1e-3 if c1 is None else c1
        c2 = self.Theta if c2 is None else c2
        Ha = float(self.H_bar(c1))
        return GTab(c1, c2, self.n, func=self.G_bar, antideriv=lambda t: self.H_bar(t) - Ha,
                    num=num, name=f"extension of {self.base.name or 'G'}")

    def identity_residual(self, theta):
        """max |int_0^1 r^{n-1} F(r theta) dr - H_bar(theta)| over theta."""
        out = []
        for t in np.atleast_1d(theta):
            pts = [p for p in (self.a / t, self.b / t) if 0 < p < 1]
            val, _ = quad(lambda r: r ** (self.n - 1) * float(self.F(r * t)), 0.0, 1.0,
                          points=pts or None, epsabs=1e-13, epsrel=1e-13, limit=200)
            out.append(abs(val - float(self.H_bar(t))))
        return float(np.max(out))


def extend_An(G: GTab, Theta=None, n=None):
    """Extension to (0, Theta] keeping theta G + n H strictly increasing.

    Returns (ExtendedG, FRep). The certificate on [c1, c2] must pass.
    """
    n = G.n if n is None else int(n)
    cert = check_An(G, n)
    if not cert.passed:
        raise PreconditionError("G is not certified in A(n) on its domain", certificate=cert.to_dict())
    Theta = 2 * G.c2 if Theta is None else float(Theta)
    ext = ExtendedG(G, n, Theta)
    return ext, ext.frep()


# ---------------------------------------------------------------------------
# end-point gluing
# ---------------------------------------------------------------------------

def glue_G_eps(G: GTab, c1, c2, a1, a2, eps, n=None) -> GTab:
    """G with linear ramps near c1 and c2 so that G_eps(c_i) = a_i.

    G_eps coincides with G on [c1 + eps, c2 - eps].
    """
    n = G.n if n is None else int(n)
    c1, c2, a1, a2, eps = map(float, (c1, c2, a1, a2, eps))
    if not (0 < c1 < c2):
        raise PreconditionError("need 0 < c1 < c2", c1=c1, c2=c2)
    if not (0 < a1 < a2):
        raise PreconditionError("need 0 < a1 < a2", a1=a1, a2=a2)
    if c1 < G.c1 - G.domain_tol or c2 > G.c2 + G.domain_tol:
        raise PreconditionError("[c1, c2] must lie in the domain of G", c1=c1, c2=c2, G_c1=G.c1, G_c2=G.c2)
    if not (0 < eps and c1 + eps < c2 - eps):
        raise PreconditionError("need 0 < eps with c1 + eps < c2 - eps", eps=eps)
    g1, g2 = float(G(c1)), float(G(c2))
    if g1 < a1:
        raise PreconditionError("hypothesis G(c1) >= a1 fails", G_c1=g1, a1=a1)
    if g2 > a2:
        raise PreconditionError("hypothesis G(c2) <= a2 fails", G_c2=g2, a2=a2)

    def pick(c, direction, ok):
        # midpoint of the admissible interval, halving toward c until ok
        cp = c + direction * eps / 2
        for _ in range(200):
            if ok(float(G(cp))):
                return cp
            cp = c + (cp - c) / 2
        raise PreconditionError("no admissible inner ramp end found", c=c)

    c1p = c1 if g1 == a1 else pick(c1, +1, lambda v: v >= a1)
    c2p = c2 if g2 == a2 else pick(c2, -1, lambda v: v <= a2)
    G1p, G2p = float(G(c1p)), float(G(c2p))
    H1p = float(G.antiderivative(c1p))

    def func(t):
        t = np.asarray(t, dtype=np.float64)
        out = G(np.clip(t, G.c1, G.c2))
        if c1p > c1:
            m = t <= c1p
            out = np.where(m, a1 + (G1p - a1) * (t - c1) / (c1p - c1), out)
        if c2p < c2:
            m = t >= c2p
            out = np.where(m, G2p + (a2 - G2p) * (t - c2p) / (c2 - c2p), out)
        return out

    def anti(t):
        t = np.asarray(t, dtype=np.float64)
        # left ramp integral from c1
        tl = np.minimum(t, c1p)
        left = a1 * (tl - c1) + 0.5 * (G1p - a1) * (tl - c1) ** 2 / (c1p - c1) if c1p > c1 else 0.0 * t
        ramp1 = a1 * (c1p - c1) + 0.5 * (G1p - a1) * (c1p - c1) if c1p > c1 else 0.0
        tm = np.clip(t, c1p, c2p)
        middle = G.antiderivative(tm) - H1p
        mid_total = float(G.antiderivative(c2p)) - H1p
        tr = np.maximum(t, c2p)
        right = (G2p * (tr - c2p) + 0.5 * (a2 - G2p) * (tr - c2p) ** 2 / (c2 - c2p)) if c2p < c2 else 0.0 * t
        return np.where(t <= c1p, left, np.where(t <= c2p, ramp1 + middle, ramp1 + mid_total + right))

    out = GTab(c1, c2, n, func=func, antideriv=anti, num=G.theta.size,
               name=f"glued({G.name or 'G'}, eps={eps:g})")
    out.ramp_ends = (c1p, c2p)
    return out
