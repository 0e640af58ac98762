"""Symmetric double delta well: bound states and retrapping after the second well appears.

Wells ``-2 delta(x + l) - 2 delta(x)``.  The even state always exists; the odd
one only for ``l > 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from .errors import DomainError, NoBoundStateError
from .piecewise import Piece, PiecewiseExp, single_well_state
from .types import ProbabilityResult

# The odd residual is 2/l - 2 < 0 as alpha -> 0 and coth(l/2) - 1 >= 0 at alpha = 1.
ODD_BRACKET_LO = 1e-300


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"


def even_residual(alpha, l):
    """``alpha (1 + tanh(alpha l / 2)) - 2``."""
    return alpha * (1.0 + np.tanh(0.5 * alpha * l)) - 2.0


def odd_residual(alpha, l):
    """``alpha coth(alpha l / 2) - (2 - alpha)``."""
    return alpha / np.tanh(0.5 * alpha * l) - 2.0 + alpha


def odd_state_exists(l: float) -> bool:
    return l > 1.0


def _residual(parity):
    return even_residual if Parity(parity) is Parity.EVEN else odd_residual


@lru_cache(maxsize=4096)
def solve_alpha(l: float, parity: str | Parity) -> float:
    """Decay rate of the even or odd bound state for separation ``l``.

    Brent's method inside a certified sign-change bracket: ``[1, 2]`` for the
    even root, ``(0, 1]`` for the odd one.  For ``l`` beyond about 36 both roots
    round to exactly 1.
    """
    parity = Parity(parity)
    if not l > 0:
        raise DomainError(f"separation must be positive, got {l!r}")
    if parity is Parity.EVEN:
        lo, hi = 1.0, 2.0
    else:
        if not odd_state_exists(l):
            raise NoBoundStateError(f"no odd bound state for l = {l} <= 1")
        lo, hi = ODD_BRACKET_LO, 1.0
    f = _residual(parity)
    flo, fhi = f(lo, l), f(hi, l)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise NoBoundStateError(f"{parity.value} root not bracketed for l = {l}")
    return optimize.brentq(f, lo, hi, args=(l,), xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _unnormalised(alpha, l, parity):
    # outer tails e^{alpha(x+l)} and e^{-alpha x}; the middle is
    # (e^{alpha x} +- e^{-alpha(x+l)}) / (1 +- e^{-alpha l}), i.e. cosh/sinh ratio
    s = 1.0 if parity is Parity.EVEN else -1.0
    q = math.exp(-alpha * l)
    den = 1.0 + s * q
    return PiecewiseExp(
        [
            Piece(-math.inf, -l, (s * math.exp(alpha * l),), (alpha,)),
            Piece(-l, 0.0, (1.0 / den, s * q / den), (alpha, -alpha)),
            Piece(0.0, math.inf, (1.0,), (-alpha,)),
        ]
    )


@dataclass(frozen=True)
class DwpState:
    """A bound state of the double well; callable as the normalised wavefunction."""

    parity: Parity
    alpha: float
    norm_const: float
    energy: float
    separation: float

    @property
    def profile(self) -> PiecewiseExp:
        """Normalised state as a piecewise exponential."""
        return _unnormalised(self.alpha, self.separation, self.parity).scale(self.norm_const)

    def __call__(self, x):
        return self.profile(x).real

    def derivative_jumps(self):
        """``phi'(x+) - phi'(x-)`` at ``x = -l`` and ``x = 0``, from the closed-form pieces."""
        a, l, c = self.alpha, self.separation, self.norm_const
        s = 1.0 if self.parity is Parity.EVEN else -1.0
        q = math.exp(-a * l)
        den = 1.0 + s * q
        mid_slope = lambda x: c * a * (math.exp(a * x) - s * q * math.exp(-a * x)) / den
        left_slope = s * c * a
        right_slope = -c * a
        return mid_slope(-l) - left_slope, right_slope - mid_slope(0.0)


def bound_state(l: float, parity: str | Parity) -> DwpState:
    """Fully populated bound state; raises :class:`NoBoundStateError` for odd at ``l <= 1``."""
    parity = Parity(parity)
    alpha = solve_alpha(float(l), parity)
    raw = _unnormalised(alpha, l, parity)
    norm2 = (raw * raw).integrate().real
    return DwpState(parity, alpha, 1.0 / math.sqrt(norm2), -alpha * alpha, float(l))


def spectrum(l: float):
    """``(E_ground, E_excited)``; the excited energy is ``None`` when ``l <= 1``."""
    e_ground = -solve_alpha(float(l), Parity.EVEN) ** 2
    e_excited = -solve_alpha(float(l), Parity.ODD) ** 2 if odd_state_exists(l) else None
    return e_ground, e_excited


def retrap_amplitude(l: float, parity: str | Parity) -> float:
    """Overlap of the initial single-well state at ``x = -l`` with a double-well state."""
    state = bound_state(l, parity)
    return (single_well_state(-l) * state.profile).integrate().real


def retrap_probabilities(l: float):
    """Probabilities of landing in the even and odd states (odd is ``None`` for ``l <= 1``)."""
    if not l > 0:
        raise DomainError(f"separation must be positive, got {l!r}")
    p_even = ProbabilityResult.from_amplitude(retrap_amplitude(l, Parity.EVEN), "retrap", l=l, parity="even")
    p_odd = None
    if odd_state_exists(l):
        p_odd = ProbabilityResult.from_amplitude(retrap_amplitude(l, Parity.ODD), "retrap", l=l, parity="odd")
    return p_even, p_odd
