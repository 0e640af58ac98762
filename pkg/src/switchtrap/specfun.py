r"""Complex error functions and the Moshinsky function.

Everything is built on the Faddeeva function :math:`w(z) = e^{-z^2}\,\mathrm{erfc}(-iz)`,
evaluated in the closed upper half-plane by one of three expansions:

* Maclaurin series of erf for points close to the real axis with modest
  real part (``Im z < 1.5`` and ``|Re z| < 6.5``),
* the Laplace continued fraction (evaluated bottom-up with a term count that
  depends on the distance from the real axis) for moderate ``|z|``,
* the asymptotic series ``i/(sqrt(pi) z) * sum (2k-1)!!/(2z^2)^k`` for
  ``|z| >= 30``.

The lower half-plane follows from ``w(z) = 2 exp(-z^2) - w(-z)``.  The
crossover constants come from a sweep against 40-digit mpmath values; the
worst relative error over the sweep was below 1e-14.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DomainError

SQRT_PI = math.sqrt(math.pi)
INV_SQRT_PI = 1.0 / SQRT_PI

SERIES_MAX_IMAG = 1.5
SERIES_MAX_REAL = 6.5
ASYMPTOTIC_RADIUS = 30.0
CF_TERMS_NEAR_AXIS = 16
CF_TERMS_CAP = 200


# ---------------------------------------------------------------------------
# numba kernels (scalar loop)
# ---------------------------------------------------------------------------


@_backend.njit
def _neg_square_exp(z):
    # exp(-z**2) with Re(-z**2) formed as (y - x)(y + x)
    x = z.real
    y = z.imag
    return cmath.exp(complex((y - x) * (y + x), -2.0 * x * y))


@_backend.njit
def _cf_terms(a, b):
    if a >= SERIES_MAX_REAL:
        return CF_TERMS_NEAR_AXIS
    n = int(math.ceil(10.0 + 200.0 / (b * b)))
    return min(n, CF_TERMS_CAP)


@_backend.njit
def _w_first_quadrant(z):
    a = z.real
    b = z.imag
    r = math.hypot(a, b)
    if r >= ASYMPTOTIC_RADIUS:
        iz2 = 1.0 / (2.0 * z * z)
        term = complex(1.0, 0.0)
        total = term
        for k in range(1, 60):
            term = term * (2 * k - 1) * iz2
            total += term
            if abs(term) < 1e-17 * abs(total):
                break
        return 1j * INV_SQRT_PI * total / z
    if b < SERIES_MAX_IMAG and a < SERIES_MAX_REAL:
        u = complex(b, -a)  # -i z
        mu2 = -(u * u)
        t = u
        s = u
        n = 0
        while True:
            n += 1
            t = t * mu2 / n
            term = t / (2 * n + 1)
            s += term
            if n > r * r and abs(term) <= 1e-17 * abs(s):
                break
            if n > 400:
                break
        return _neg_square_exp(z) * (1.0 - 2.0 * INV_SQRT_PI * s)
    n = _cf_terms(a, b)
    rem = complex(0.0, 0.0)
    for k in range(n, 0, -1):
        rem = (0.5 * k) / (z - rem)
    return 1j * INV_SQRT_PI / (z - rem)


@_backend.njit
def _w_upper(z):
    if z.real < 0.0:
        return _w_first_quadrant(complex(-z.real, z.imag)).conjugate()
    return _w_first_quadrant(z)


@_backend.njit
def _w_scalar(z):
    if z.imag < 0.0:
        return 2.0 * _neg_square_exp(z) - _w_upper(-z)
    return _w_upper(z)


@_backend.njit
def _w_loop(zs, out):
    for i in range(zs.shape[0]):
        out[i] = _w_scalar(zs[i])


# ---------------------------------------------------------------------------
# numpy fallback (vectorised over regions)
# ---------------------------------------------------------------------------


def _neg_square_exp_np(z):
    x, y = z.real, z.imag
    return np.exp((y - x) * (y + x) - 2j * x * y)


def _w_first_quadrant_np(z):
    a, b = z.real, z.imag
    r = np.hypot(a, b)
    out = np.empty_like(z)

    asym = r >= ASYMPTOTIC_RADIUS
    series = ~asym & (b < SERIES_MAX_IMAG) & (a < SERIES_MAX_REAL)
    cf = ~asym & ~series

    if asym.any():
        za = z[asym]
        iz2 = 1.0 / (2.0 * za * za)
        term = np.ones_like(za)
        total = term.copy()
        for k in range(1, 60):
            term = term * (2 * k - 1) * iz2
            total += term
            if np.all(np.abs(term) < 1e-17 * np.abs(total)):
                break
        out[asym] = 1j * INV_SQRT_PI * total / za

    if series.any():
        zs = z[series]
        u = zs.imag - 1j * zs.real
        mu2 = -(u * u)
        t = u.copy()
        s = u.copy()
        rmax = float(np.max(r[series]))
        for n in range(1, 401):
            t = t * mu2 / n
            term = t / (2 * n + 1)
            s += term
            if n > rmax * rmax and np.all(np.abs(term) <= 1e-17 * np.abs(s)):
                break
        out[series] = _neg_square_exp_np(zs) * (1.0 - 2.0 * INV_SQRT_PI * s)

    if cf.any():
        zc = z[cf]
        ac, bc = zc.real, zc.imag
        with np.errstate(divide="ignore"):
            nb = np.ceil(10.0 + 200.0 / (bc * bc))
        nterms = np.where(ac >= SERIES_MAX_REAL, CF_TERMS_NEAR_AXIS, np.minimum(nb, CF_TERMS_CAP))
        rem = np.zeros_like(zc)
        for k in range(int(nterms.max()), 0, -1):
            active = k <= nterms
            rem = np.where(active, (0.5 * k) / (zc - rem), rem)
        out[cf] = 1j * INV_SQRT_PI / (zc - rem)
    return out


def _w_numpy(z):
    z = np.asarray(z, dtype=np.complex128)
    out = np.empty_like(z)
    lower = z.imag < 0.0
    zu = np.where(lower, -z, z)
    left = zu.real < 0.0
    zq = np.where(left, -zu.real + 1j * zu.imag, zu)
    wq = _w_first_quadrant_np(zq)
    wq = np.where(left, np.conj(wq), wq)
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.where(lower, 2.0 * _neg_square_exp_np(z) - wq, wq)
    return out


# ---------------------------------------------------------------------------
# public surface
# ---------------------------------------------------------------------------


def _as_complex_array(z, name="z"):
    arr = np.asarray(z, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def _unwrap(arr, like):
    return complex(arr) if np.ndim(like) == 0 else arr


def faddeeva(z, backend=None):
    """Faddeeva function ``w(z) = exp(-z**2) * erfc(-i z)`` (scalar or array)."""
    arr = _as_complex_array(z)
    if _backend.resolve(backend) == "numba":
        flat = np.ascontiguousarray(arr.ravel())
        out = np.empty_like(flat)
        with np.errstate(over="ignore", invalid="ignore"):
            _w_loop(flat, out)
        res = out.reshape(arr.shape)
    else:
        res = _w_numpy(arr)
    return _unwrap(res, z)


def erfcx_complex(z, backend=None):
    """Scaled complementary error function ``exp(z**2) * erfc(z)``."""
    arr = _as_complex_array(z)
    return _unwrap(np.asarray(faddeeva(1j * arr, backend)), z)


def erfc_complex(z, backend=None):
    """Complementary error function for complex arguments.

    Computed as ``exp(-z**2) * erfcx(z)`` in the right half-plane and through
    the reflection ``erfc(z) = 2 - erfc(-z)`` in the left one.
    """
    arr = _as_complex_array(z)
    right = arr.real >= 0.0
    zr = np.where(right, arr, -arr)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        half = _neg_square_exp_np(zr) * np.asarray(faddeeva(1j * zr, backend))
        res = np.where(right, half, 2.0 - half)
    return _unwrap(res, z)


@dataclass(frozen=True)
class MoshinskyArgs:
    """Arguments of ``M(x, k, t)``; ``t`` must be positive."""

    x: float
    k: complex
    t: float

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError(f"Moshinsky function needs t > 0, got {self.t!r}")


def moshinsky_function(x, k, t, backend=None):
    r"""Vectorised :math:`M(x,k,t) = \tfrac12 e^{ix^2/2t - z^2}\,\mathrm{erfc}(iz)`.

    ``z = (1+i)/2 * sqrt(t) * (k - x/t)``.  With ``w = iz`` the prefactor and
    the error function are combined analytically:

    * ``Re w >= 0``: ``M = 1/2 exp(i x^2 / 2t) erfcx(w)``
    * ``Re w < 0``:  ``M = exp(i k x - i k^2 t / 2) - 1/2 exp(i x^2 / 2t) erfcx(-w)``

    so neither ``exp(-z^2)`` nor ``erfc(iz)`` is ever formed on its own.
    Broadcasts over ``x``, ``k`` and ``t``.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    k = np.asarray(k, dtype=np.complex128)
    if np.any(~(t > 0)):
        raise DomainError("Moshinsky function needs t > 0")
    x, k, t = np.broadcast_arrays(x, k, t)
    sqt = np.sqrt(t)
    w = 1j * (0.5 + 0.5j) * sqt * (k - x / t)
    chirp = np.exp(0.5j * x * x / t)
    right = w.real >= 0.0
    sc = np.asarray(faddeeva(1j * np.where(right, w, -w), backend))
    with np.errstate(over="ignore", invalid="ignore"):
        plane = np.exp(1j * k * x - 0.5j * k * k * t)
        res = np.where(right, 0.5 * chirp * sc, plane - 0.5 * chirp * sc)
    return res


def moshinsky(args: MoshinskyArgs, backend=None) -> complex:
    """Scalar Moshinsky function from a validated argument bundle."""
    return complex(moshinsky_function(args.x, args.k, args.t, backend))
