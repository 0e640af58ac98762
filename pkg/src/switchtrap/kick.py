"""Kicks: instantaneous multiplication of a bound state by ``exp(i k x)``.

A kick of momentum ``k`` imparts kinetic energy ``k**2``; physically it is the
same as jerking the trap into motion with velocity ``-2k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .double_well import Parity, bound_state, odd_state_exists
from .errors import DomainError, NoBoundStateError
from .types import ProbabilityResult


@dataclass(frozen=True)
class KickParams:
    k: float
    l: float | None = None

    def __post_init__(self):
        if not math.isfinite(self.k):
            raise DomainError("kick momentum must be finite")
        if self.l is not None and not odd_state_exists(self.l):
            raise NoBoundStateError(f"transitions need l > 1, got {self.l!r}")

    @property
    def kinetic_energy(self) -> float:
        return self.k * self.k

    @property
    def trap_velocity(self) -> float:
        return -2.0 * self.k


def kick_amplitude(k):
    """Single-well holding amplitude ``4 / (4 + k^2)`` (vectorised)."""
    k = np.asarray(k, dtype=float)
    amp = 4.0 / (4.0 + k * k)
    return amp if amp.ndim else float(amp)


def kick_retention(k: float) -> ProbabilityResult:
    return ProbabilityResult.from_amplitude(kick_amplitude(k), "kick-retention", k=k)


def _pair_product(l):
    if not l > 1:
        raise NoBoundStateError(f"kick transitions need both states, i.e. l > 1; got {l!r}")
    even = bound_state(l, Parity.EVEN)
    odd = bound_state(l, Parity.ODD)
    return even.profile * odd.profile


def transition_amplitude(k, l: float):
    """``int exp(i|k|x) phi_even phi_odd dx`` in closed form, vectorised over ``k``.

    The states are real, so ``A(-k) = conj A(k)``; evaluating at ``|k|`` makes
    the probability exactly even in ``k``.
    """
    return _pair_product(l).integrate(np.abs(np.asarray(k, dtype=float)))


def transition_probability(k, l: float):
    return np.abs(transition_amplitude(k, l)) ** 2


def kick_transition(k: float, l: float) -> ProbabilityResult:
    """Probability that a kick moves the particle between the even and odd states."""
    return ProbabilityResult.from_amplitude(
        transition_amplitude(k, l), "kick-transition", k=k, l=l
    )


def transition_optimum(l: float, n_scan: int = 4001):
    """Kinetic energy ``k2_max`` of the most effective kick, ``P_max`` and ``Delta E``.

    Searches ``k`` in ``(0, 4 pi / l]``: a dense scan brackets the peak and a
    bounded Brent step polishes it.
    """
    if not l > 1:
        raise NoBoundStateError(f"kick transitions need l > 1; got {l!r}")
    kcap = 4.0 * math.pi / l
    ks = np.linspace(0.0, kcap, n_scan)
    p = transition_probability(ks, l)
    i = int(np.argmax(p))
    lo, hi = ks[max(i - 1, 0)], ks[min(i + 1, n_scan - 1)]
    res = optimize.minimize_scalar(
        lambda k: -transition_probability(k, l),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-10},
    )
    k_max, p_max = float(res.x), float(-res.fun)
    if p[i] > p_max:
        k_max, p_max = float(ks[i]), float(p[i])
    delta_e = bound_state(l, Parity.EVEN).alpha ** 2 - bound_state(l, Parity.ODD).alpha ** 2
    return k_max * k_max, p_max, delta_e


def transition_extrema(l: float, k_stop: float, n_scan: int = 20001):
    """Local maxima and minima (zeros) of the transition probability on ``(0, k_stop]``.

    Returns two arrays of ``k`` values, each refined by bounded Brent.
    """
    ks = np.linspace(0.0, k_stop, n_scan)
    p = transition_probability(ks, l)
    inner = slice(1, -1)
    is_max = (p[inner] > p[:-2]) & (p[inner] >= p[2:])
    is_min = (p[inner] < p[:-2]) & (p[inner] <= p[2:])

    def refine(idx, sign):
        out = []
        for j in np.nonzero(idx)[0] + 1:
            res = optimize.minimize_scalar(
                lambda k: sign * transition_probability(k, l),
                bounds=(ks[j - 1], ks[j + 1]),
                method="bounded",
                options={"xatol": 1e-10},
            )
            out.append(float(res.x))
        return np.array(out)

    return refine(is_max, -1.0), refine(is_min, 1.0)
