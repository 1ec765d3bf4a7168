"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with the same signature. The numba path is
used unless ``FIREY_LAB_JIT=0`` is set in the environment (or numba is not
importable). ``FIREY_LAB_THREADS`` caps the numba thread pool.

Each output element is produced by a single thread with a fixed loop order, so
results are bit-stable regardless of the thread count.
"""

from __future__ import annotations

import os

import numpy as np

JIT_OPTIONS = {"nogil": True, "cache": True}

try:
    import numba
    from numba import njit, prange

    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is often too old; skip straight to the portable layers
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False


def jit_enabled() -> bool:
    return HAS_NUMBA and os.environ.get("FIREY_LAB_JIT", "1") not in ("0", "false", "no")


# ---------------------------------------------------------------------------
# numpy reference implementations
# ---------------------------------------------------------------------------

def support_max_numpy(ux, uy, px, py):
    """h[k] = max_i (ux[k] px[i] + uy[k] py[i])."""
    out = np.empty(ux.shape[0])
    chunk = 256
    for s in range(0, ux.shape[0], chunk):
        dots = np.multiply.outer(ux[s:s + chunk], px) + np.multiply.outer(uy[s:s + chunk], py)
        out[s:s + chunk] = dots.max(axis=1)
    return out


def ratio_min_numpy(c, nx, ny, vx, vy):
    """For each query v: min over facets i with <n_i, v> > 0 of c[i] / <n_i, v>.

    Returns (value, argmin). Queries with no admissible facet get +inf, -1.
    """
    val = np.empty(vx.shape[0])
    arg = np.empty(vx.shape[0], dtype=np.int64)
    chunk = 256
    for s in range(0, vx.shape[0], chunk):
        den = np.multiply.outer(vx[s:s + chunk], nx) + np.multiply.outer(vy[s:s + chunk], ny)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(den > 0.0, c[None, :] / den, np.inf)
        a = r.argmin(axis=1)
        val[s:s + chunk] = r[np.arange(r.shape[0]), a]
        a[~np.isfinite(val[s:s + chunk])] = -1
        arg[s:s + chunk] = a
    return val, arg


def trig_eval_numpy(a, b, phi):
    """Real trigonometric series and its first two derivatives at phi.

    f(phi) = a[0] + sum_{k>=1} a[k] cos(k phi) + b[k] sin(k phi)
    """
    k = np.arange(a.shape[0], dtype=np.float64)
    f = np.empty(phi.shape[0])
    f1 = np.empty(phi.shape[0])
    f2 = np.empty(phi.shape[0])
    chunk = 128
    for s in range(0, phi.shape[0], chunk):
        kp = np.multiply.outer(phi[s:s + chunk], k)
        c = np.cos(kp)
        sn = np.sin(kp)
        f[s:s + chunk] = c @ a + sn @ b
        f1[s:s + chunk] = (c * k) @ b - (sn * k) @ a
        f2[s:s + chunk] = -((c * k * k) @ a + (sn * k * k) @ b)
    return f, f1, f2


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(parallel=True, **JIT_OPTIONS)
    def support_max_numba(ux, uy, px, py):
        n = ux.shape[0]
        m = px.shape[0]
        out = np.empty(n)
        for k in prange(n):
            best = -np.inf
            a = ux[k]
            b = uy[k]
            for i in range(m):
                d = a * px[i] + b * py[i]
                if d > best:
                    best = d
            out[k] = best
        return out

    @njit(parallel=True, **JIT_OPTIONS)
    def ratio_min_numba(c, nx, ny, vx, vy):
        q = vx.shape[0]
        m = c.shape[0]
        val = np.empty(q)
        arg = np.empty(q, dtype=np.int64)
        for j in prange(q):
            best = np.inf
            bi = -1
            for i in range(m):
                den = vx[j] * nx[i] + vy[j] * ny[i]
                if den > 0.0:
                    r = c[i] / den
                    if r < best:
                        best = r
                        bi = i
            val[j] = best
            arg[j] = bi
        return val, arg

    @njit(parallel=True, **JIT_OPTIONS)
    def trig_eval_numba(a, b, phi):
        q = phi.shape[0]
        m = a.shape[0]
        f = np.empty(q)
        f1 = np.empty(q)
        f2 = np.empty(q)
        for j in prange(q):
            c1 = np.cos(phi[j])
            s1 = np.sin(phi[j])
            ck = 1.0
            sk = 0.0
            acc0 = a[0]
            acc1 = 0.0
            acc2 = 0.0
            for k in range(1, m):
                # rotate (ck, sk) by phi; re-anchor periodically against drift
                if k % 64 == 0:
                    ck = np.cos(k * phi[j])
                    sk = np.sin(k * phi[j])
                else:
                    t = ck * c1 - sk * s1
                    sk = sk * c1 + ck * s1
                    ck = t
                ak = a[k]
                bk = b[k]
                acc0 += ak * ck + bk * sk
                acc1 += k * (bk * ck - ak * sk)
                acc2 -= k * k * (ak * ck + bk * sk)
            f[j] = acc0
            f1[j] = acc1
            f2[j] = acc2
        return f, f1, f2

    def set_threads(count: int) -> None:
        numba.set_num_threads(max(1, min(count, numba.config.NUMBA_NUM_THREADS)))

    if os.environ.get("FIREY_LAB_THREADS"):
        try:
            set_threads(int(os.environ["FIREY_LAB_THREADS"]))
        except ValueError:
            pass


def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def support_max(ux, uy, px, py):
    args = tuple(_f64(x) for x in (ux, uy, px, py))
    if jit_enabled():
        return support_max_numba(*args)
    return support_max_numpy(*args)


def ratio_min(c, nx, ny, vx, vy):
    args = tuple(_f64(x) for x in (c, nx, ny, vx, vy))
    if jit_enabled():
        return ratio_min_numba(*args)
    return ratio_min_numpy(*args)


def trig_eval(a, b, phi):
    args = tuple(_f64(x) for x in (a, b, np.atleast_1d(phi)))
    if jit_enabled():
        return trig_eval_numba(*args)
    return trig_eval_numpy(*args)
