"""Trigonometric differentiation and interpolation of periodic samples."""

from __future__ import annotations

import numpy as np

from . import _kernels


def _wavenumbers(N):
    return np.arange(N // 2 + 1, dtype=np.float64)


def spectral_derivative(f, order=1):
    """Derivative of a 2pi-periodic sample vector by FFT.

    The Nyquist mode is dropped for odd orders so that real input stays real
    and differentiation commutes with reflection of the grid.
    """
    f = np.asarray(f, dtype=np.float64)
    N = f.shape[0]
    F = np.fft.rfft(f)
    k = _wavenumbers(N)
    D = (1j * k) ** order
    if N % 2 == 0 and order % 2 == 1:
        D[-1] = 0.0
    return np.fft.irfft(F * D, n=N)


def fd_derivative(f, order=1):
    """Centered second-order finite differences on the uniform periodic grid."""
    f = np.asarray(f, dtype=np.float64)
    d = 2 * np.pi / f.shape[0]
    fp = np.roll(f, -1)
    fm = np.roll(f, 1)
    if order == 1:
        return (fp - fm) / (2 * d)
    if order == 2:
        return (fp - 2 * f + fm) / d**2
    raise ValueError("fd_derivative supports order 1 or 2")


def trig_coefficients(f):
    """Real coefficients (a, b) with f(x) = sum a_k cos kx + b_k sin kx."""
    f = np.asarray(f, dtype=np.float64)
    N = f.shape[0]
    c = np.fft.rfft(f) / N
    a = 2.0 * c.real
    b = -2.0 * c.imag
    a[0] = c[0].real
    if N % 2 == 0:
        a[-1] = c[-1].real
        b[-1] = 0.0
    return a, b


class TrigInterpolant:
    """Band-limited interpolant of periodic samples, with two derivatives."""

    def __init__(self, samples):
        # the Nyquist term is carried as a cosine; its first derivative
        # vanishes at the nodes, matching spectral_derivative
        self.a, self.b = trig_coefficients(samples)

    def __call__(self, phi):
        return self.evaluate(phi)[0]

    def evaluate(self, phi):
        """Return (f, f', f'') at the angles phi."""
        phi = np.atleast_1d(np.asarray(phi, dtype=np.float64))
        shape = phi.shape
        f, f1, f2 = _kernels.trig_eval(self.a, self.b, phi.ravel())
        return f.reshape(shape), f1.reshape(shape), f2.reshape(shape)
