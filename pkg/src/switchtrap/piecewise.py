"""Exact integration of piecewise sums of exponentials.

Every stationary state in this package is, region by region, a short sum
``sum_j c_j exp(r_j x)``.  Overlaps, norms and kick matrix elements are then
integrals of products of such functions, which this module evaluates in
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def exprel(z):
    """``(exp(z) - 1) / z`` for complex arrays, with the removable point at 0."""
    z = np.asarray(z, dtype=np.complex128)
    small = np.abs(z) < 1e-5
    zs = np.where(small, 1.0, z)
    big = np.expm1(zs) / zs
    series = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0
    return np.where(small, series, big)


def integrate_exp(rate, lo, hi):
    """``int_lo^hi exp(rate x) dx``; ``rate`` may be a complex array, bounds infinite.

    The exponential is anchored at whichever endpoint it is largest, so
    growing rates on long intervals do not overflow prematurely.
    """
    r = np.asarray(rate, dtype=np.complex128)
    if math.isinf(lo) and math.isinf(hi):
        raise ValueError("doubly infinite interval")
    if math.isinf(lo):
        if np.any(r.real <= 0):
            raise ValueError("integral diverges at -inf")
        return np.exp(r * hi) / r
    if math.isinf(hi):
        if np.any(r.real >= 0):
            raise ValueError("integral diverges at +inf")
        return -np.exp(r * lo) / r
    width = hi - lo
    grow = r.real >= 0
    anchor = np.where(grow, r * hi, r * lo)
    rel = exprel(np.where(grow, -r, r) * width)
    return np.exp(anchor) * width * rel


@dataclass(frozen=True)
class Piece:
    """``sum_j coeffs[j] * exp(rates[j] * x)`` on the interval ``(lo, hi]``."""

    lo: float
    hi: float
    coeffs: tuple
    rates: tuple

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=np.complex128)
        for c, r in zip(self.coeffs, self.rates):
            out += c * np.exp(r * x)
        return out


class PiecewiseExp:
    """A function made of :class:`Piece` objects over a partition of the real line."""

    def __init__(self, pieces):
        self.pieces = tuple(pieces)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=np.complex128)
        for p in self.pieces:
            mask = (x > p.lo) & (x <= p.hi)
            if np.any(mask):
                out[mask] = p(x[mask])
        return out

    def breakpoints(self):
        pts = {p.lo for p in self.pieces} | {p.hi for p in self.pieces}
        return sorted(v for v in pts if math.isfinite(v))

    def conj(self):
        return PiecewiseExp(
            Piece(p.lo, p.hi, tuple(np.conj(p.coeffs)), tuple(np.conj(p.rates)))
            for p in self.pieces
        )

    def scale(self, factor):
        return PiecewiseExp(
            Piece(p.lo, p.hi, tuple(factor * c for c in p.coeffs), p.rates)
            for p in self.pieces
        )

    def __mul__(self, other):
        out = []
        for p in self.pieces:
            for q in other.pieces:
                lo, hi = max(p.lo, q.lo), min(p.hi, q.hi)
                if lo >= hi:
                    continue
                coeffs, rates = [], []
                for c1, r1 in zip(p.coeffs, p.rates):
                    for c2, r2 in zip(q.coeffs, q.rates):
                        coeffs.append(c1 * c2)
                        rates.append(r1 + r2)
                out.append(Piece(lo, hi, tuple(coeffs), tuple(rates)))
        return PiecewiseExp(out)

    def integrate(self, wavenumber=0.0):
        """``int f(x) exp(i k x) dx`` over the whole line, vectorised over ``k``."""
        k = np.asarray(wavenumber, dtype=float)
        total = np.zeros(k.shape, dtype=np.complex128)
        for p in self.pieces:
            for c, r in zip(p.coeffs, p.rates):
                total += c * integrate_exp(r + 1j * k, p.lo, p.hi)
        return total if total.ndim else complex(total)


def single_well_state(center, strength=1.0):
    """``sqrt(mu) exp(-mu |x - center|)`` as a piecewise exponential."""
    a = float(strength)
    amp = math.sqrt(a)
    return PiecewiseExp(
        [
            Piece(-math.inf, center, (amp * math.exp(-a * center),), (a,)),
            Piece(center, math.inf, (amp * math.exp(a * center),), (-a,)),
        ]
    )
