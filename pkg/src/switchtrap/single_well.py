"""Single delta trap: instantaneous hop, free release and delayed re-switch.

Conventions: ``i psi_t = -psi_xx + V psi`` with wells ``-2 mu delta(x - x0)``.
The particle starts in the unit-strength bound state centred at ``x = -l``;
the new well of strength ``mu`` sits at the origin.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import AccuracyWarning, DomainError
from .specfun import moshinsky_function
from .types import ProbabilityResult

# |mu - 1| below this switches to the resolved symmetric-limit formulas.
MU_ONE_THRESHOLD = 1e-4
# Interpolation nodes, in units of the threshold, for the wavefunction near mu = 1.
# The outer four use the general formula, so the result is continuous at the edge.
_MU_ONE_NODES = (-2.0, -1.0, 0.0, 1.0, 2.0)


@dataclass(frozen=True)
class HopScenario:
    """Hop distance ``l``, new-well strength ``mu`` and switch delay ``tau``."""

    l: float
    mu: float = 1.0
    tau: float = 0.0

    def __post_init__(self):
        if not self.l > 0:
            raise DomainError(f"hop distance must be positive, got {self.l!r}")
        if not self.mu > 0:
            raise DomainError(f"well strength must be positive, got {self.mu!r}")
        if not self.tau >= 0:
            raise DomainError(f"delay must be non-negative, got {self.tau!r}")
        if self.tau > 0 and self.mu != 1.0:
            raise DomainError("delayed switching is only defined for mu = 1")


@dataclass(frozen=True)
class BoundState1W:
    """Bound state of one ``-2 mu delta(x - center)`` well."""

    center: float
    strength: float

    def __post_init__(self):
        if not self.strength > 0:
            raise DomainError(f"well strength must be positive, got {self.strength!r}")

    @property
    def decay_rate(self) -> float:
        return self.strength

    @property
    def energy(self) -> float:
        return -self.strength**2

    def __call__(self, x, t=0.0):
        mu = self.strength
        x = np.asarray(x, dtype=float)
        return math.sqrt(mu) * np.exp(-mu * np.abs(x - self.center) + 1j * mu * mu * t)


def initial_state(x, l, t=0.0):
    """Pre-switch bound state ``exp(-|x + l| + i t)``."""
    if l < 0:
        raise DomainError(f"l must be non-negative, got {l!r}")
    x = np.asarray(x, dtype=float)
    return np.exp(-np.abs(x + l) + 1j * t)


def final_state(x, mu, t=0.0):
    """Normalised bound state of the new well, ``sqrt(mu) exp(-mu|x| + i mu^2 t)``."""
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu!r}")
    return BoundState1W(0.0, mu)(x, t)


# ---------------------------------------------------------------------------
# retention after an instantaneous hop
# ---------------------------------------------------------------------------


def _excess_ratio(eps, l):
    # (eps - expm1(-eps*l)) / eps, i.e. (mu e^{-l} - e^{-mu l}) e^{l} / (mu - 1)
    eps = np.asarray(eps, dtype=float)
    small = np.abs(eps) < MU_ONE_THRESHOLD
    safe = np.where(small, 1.0, eps)
    general = 1.0 - np.expm1(-safe * l) / safe
    # -expm1(-y)/eps = l * (1 - y/2 + y^2/6 - ...), y = eps*l
    y = eps * l
    series = np.zeros_like(y)
    term = np.ones_like(y)
    for n in range(1, 9):
        series += term / math.factorial(n)
        term = term * (-y)
    limit = 1.0 + l * series
    return np.where(small, limit, general)


def retention_amplitude(mu, l):
    r"""Overlap ``<psi_in|psi_fin>`` for the instantaneous hop (vectorised in ``mu``).

    Algebraically ``2 sqrt(mu) (mu e^{-l} - e^{-mu l}) / (mu^2 - 1)``, rewritten
    as ``2 sqrt(mu) e^{-l} R(mu - 1) / (mu + 1)`` where ``R`` is evaluated with
    ``expm1`` away from ``mu = 1`` and by its Taylor series near it.
    """
    mu = np.asarray(mu, dtype=float)
    if np.any(~(mu > 0)):
        raise DomainError("mu must be positive")
    if l < 0:
        raise DomainError(f"l must be non-negative, got {l!r}")
    amp = 2.0 * np.sqrt(mu) * math.exp(-l) * _excess_ratio(mu - 1.0, l) / (mu + 1.0)
    return amp if amp.ndim else float(amp)


def retention_probability(mu: float, l: float) -> ProbabilityResult:
    """Probability of staying bound after the well hops by ``l`` and changes to ``mu``."""
    amp = retention_amplitude(mu, l)
    return ProbabilityResult.from_amplitude(amp, "retention", mu=mu, l=l)


def optimal_strength(l: float, rtol: float = 1e-8):
    """Strength ``mu_max`` maximising the retention probability, and ``P(mu_max)``.

    Brackets the peak on a logarithmic grid, then refines with bounded Brent
    in ``log(mu)`` so the tolerance is relative.
    """
    if not l > 0:
        raise DomainError(f"l must be positive, got {l!r}")
    grid = np.logspace(-5, 3, 801)
    p = retention_amplitude(grid, l) ** 2
    i = int(np.argmax(p))
    if i == 0 or i == grid.size - 1:
        raise RuntimeError(f"retention maximum not bracketed for l={l}")
    lo, hi = math.log(grid[i - 1]), math.log(grid[i + 1])
    res = optimize.minimize_scalar(
        lambda s: -retention_amplitude(math.exp(s), l) ** 2,
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": rtol},
    )
    mu_max = math.exp(res.x)
    return mu_max, retention_amplitude(mu_max, l) ** 2


# ---------------------------------------------------------------------------
# exact time-dependent solutions
# ---------------------------------------------------------------------------


def _check_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("t must be positive (use initial_state for t <= 0)")
    return t


def free_evolution(x, t, l):
    """Wavefunction after the trap is removed at ``t = 0`` with nothing switched on.

    Written as ``M(x+l, -i, 2t) + M(-x-l, -i, 2t)``, the same function as the
    erfc closed form but without its overflowing exponentials.
    """
    t = _check_time(t)
    X = np.asarray(x, dtype=float) + l
    return moshinsky_function(X, -1j, 2 * t) + moshinsky_function(-X, -1j, 2 * t)


def _evolve_general(x, t, mu, l):
    ax = np.abs(x)
    el = math.exp(-l)
    tt = 2 * t
    M = moshinsky_function
    d = 1.0 - mu * mu
    return (
        M(x + l, -1j, tt)
        + M(-x - l, -1j, tt)
        + (2 * mu / d) * M(ax + l, 1j * mu, tt)
        - (2 * mu * mu * el / d) * M(ax, 1j * mu, tt)
        - (mu / (1 + mu)) * M(ax + l, -1j, tt)
        - (mu / (1 - mu)) * M(ax + l, 1j, tt)
        + (mu * el / (1 - mu)) * M(ax, 1j, tt)
        - (mu * el / (1 + mu)) * M(ax, -1j, tt)
    )


def _evolve_symmetric(x, t, l):
    # mu = 1 resolution, every erfc term recast as a Moshinsky function
    ax = np.abs(x)
    a = ax + l
    el = math.exp(-l)
    tt = 2 * t
    M = moshinsky_function
    root = np.sqrt(1j * t / math.pi)
    return (
        free_evolution(x, t, l)
        + (0.5 + a - 2j * t) * M(a, 1j, tt)
        - 0.5 * M(a, -1j, tt)
        + el * (0.5 - ax + 2j * t) * M(ax, 1j, tt)
        - 0.5 * el * M(ax, -1j, tt)
        - root * np.exp(0.25j * a * a / t)
        + root * np.exp(0.25j * x * x / t - l)
    )


def evolve_after_switch(x, t, mu, l):
    """Exact ``psi(x, t)`` after the hop, for ``t > 0`` (broadcasts over ``x``, ``t``).

    ``mu = 0`` gives free release.  Within ``MU_ONE_THRESHOLD`` of ``mu = 1`` the
    result is a quartic in ``mu`` through the resolved symmetric solution at
    ``mu = 1`` and the general solution at ``1 +- h`` and ``1 +- 2h``, where ``h``
    is the threshold.  The bound-state phase ``exp(i mu^2 t)`` is divided out
    before interpolating so large ``t`` does not spoil the fit.
    """
    t = _check_time(t)
    if mu < 0:
        raise DomainError(f"mu must be non-negative, got {mu!r}")
    if l < 0:
        raise DomainError(f"l must be non-negative, got {l!r}")
    x = np.asarray(x, dtype=float)
    if mu == 0:
        return free_evolution(x, t, l)
    eps = mu - 1.0
    if abs(eps) >= MU_ONE_THRESHOLD:
        return _evolve_general(x, t, mu, l)
    if eps == 0.0:
        return _evolve_symmetric(x, t, l)
    h = MU_ONE_THRESHOLD
    nodes = [n * h for n in _MU_ONE_NODES]
    out = 0.0
    for j, e_j in enumerate(nodes):
        value = _evolve_symmetric(x, t, l) if e_j == 0 else _evolve_general(x, t, 1.0 + e_j, l)
        weight = math.prod((eps - e_m) / (e_j - e_m) for m, e_m in enumerate(nodes) if m != j)
        out = out + weight * value * np.exp(-1j * (1.0 + e_j) ** 2 * t)
    return out * np.exp(1j * mu * mu * t)


def free_asymptotic(x, t, l):
    """Long-time form of free release; only meaningful for ``t >> |x + l|``."""
    t = _check_time(t)
    X = np.asarray(x, dtype=float) + l
    return (
        t**1.5
        / np.sqrt(1j * math.pi)
        * np.exp(0.25j * X * X / t)
        / (t * t + 0.25 * X * X)
    )


def asymptotic_center_value(l, t):
    """Limit of ``psi(0, t)`` for ``mu = 1`` as ``t -> infinity``: ``e^{it-l}(1+l)``."""
    t = np.asarray(t, dtype=float)
    if np.any(~(t > 0)):
        raise DomainError("t must be positive")
    res = (1 + l) * np.exp(1j * t - l)
    return res if res.ndim else complex(res)


# ---------------------------------------------------------------------------
# propagator route
# ---------------------------------------------------------------------------


def free_kernel(x, xp, t):
    """Free propagator ``exp(i (x-x')^2 / 4t) / (2 sqrt(i pi t))``."""
    t = _check_time(t)
    d = np.asarray(x, dtype=float) - np.asarray(xp, dtype=float)
    return np.exp(0.25j * d * d / t) / (2 * np.sqrt(1j * math.pi * t))


def green_kernel(x, xp, t, mu):
    """Propagator in the presence of ``-2 mu delta(x)``.

    The well's correction ``mu/2 e^{-mu(|x|+|x'|-i mu t)} erfc(...)`` equals
    ``mu * M(|x|+|x'|, i mu, 2t)``, which is how it is evaluated.
    """
    k = free_kernel(x, xp, t)
    if mu == 0:
        return k
    s = np.abs(np.asarray(x, dtype=float)) + np.abs(np.asarray(xp, dtype=float))
    return k + mu * moshinsky_function(s, 1j * mu, 2 * np.asarray(t, dtype=float))


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def propagate_kernel(initial, mu, t, x):
    """Evolve a sampled field to time ``t`` by integrating against the propagator.

    ``initial`` is a :class:`~switchtrap.oracle.WaveField`.  Between nodes the
    field is interpolated linearly; each cell is integrated with 8-point
    Gauss-Legendre so the kernel's chirp is resolved.  Returns ``psi(x, t)``.
    """
    if not t > 0:
        raise DomainError("t must be positive")
    grid = initial.grid
    if grid.dx > 0.05:
        warnings.warn(
            f"grid step {grid.dx} > 0.05; propagator quadrature will be inaccurate",
            AccuracyWarning,
            stacklevel=2,
        )
    nodes = grid.nodes
    vals = np.asarray(initial.values, dtype=np.complex128)
    left, right = nodes[:-1], nodes[1:]
    f_left, f_right = vals[:-1], vals[1:]
    frac = 0.5 * (_GL_NODES + 1.0)
    xs = left[:, None] + grid.dx * frac[None, :]
    fs = f_left[:, None] * (1.0 - frac)[None, :] + f_right[:, None] * frac[None, :]
    wts = 0.5 * grid.dx * _GL_WEIGHTS
    keep = np.abs(fs).max(axis=1) > 0
    xs, fs = xs[keep].ravel(), (fs[keep] * wts[None, :]).ravel()
    xq = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.array([np.sum(green_kernel(xi, xs, t, mu) * fs) for xi in xq])
    return complex(out[0]) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# delayed re-switch (mu = 1)
# ---------------------------------------------------------------------------


def delayed_amplitude(tau, l):
    """Overlap of the freely released state at ``t = tau`` with the new bound state.

    Closed form in Moshinsky functions; ``tau = 0`` returns ``(1 + l) e^{-l}``.
    Delays below ``1e-100`` are treated as zero (the correction is ``O(sqrt(tau))``
    and the closed form would overflow in ``l / tau``).
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise DomainError("tau must be non-negative")
    if l < 0:
        raise DomainError(f"l must be non-negative, got {l!r}")
    zero = tau < 1e-100
    ts = np.where(zero, 1.0, tau)
    tt = 2 * ts
    M = moshinsky_function
    amp = (
        -2j * ts * math.exp(-l) * (M(0.0, -1j, tt) + M(0.0, 1j, tt))
        + (1 - 2j * ts - l) * M(l, -1j, tt)
        - (1 - 2j * ts + l) * M(l, 1j, tt)
        + 2 * np.sqrt(1j * ts / math.pi) * np.exp(0.25j * l * l / ts)
        + (1 + l) * np.exp(1j * ts - l)
    )
    amp = np.where(zero, (1 + l) * math.exp(-l), amp)
    return amp if amp.ndim else complex(amp)


def delayed_probability(tau: float, l: float) -> ProbabilityResult:
    return ProbabilityResult.from_amplitude(
        delayed_amplitude(tau, l), "delay", tau=tau, l=l
    )


def delay_optimum(l: float, tau_cap: float | None = None, n_scan: int = 4001, tol: float = 1e-6):
    """Delay ``tau_star`` in ``[0, tau_cap]`` maximising retrapping, and the peak value.

    ``tau_cap`` defaults to ``10 l^2``: beyond the diffusive time ``l^2`` the
    overlap decays like ``4 / (pi tau)``.  A warning is issued if the value at
    the cap is not well below the peak.
    """
    if not l > 0:
        raise DomainError(f"l must be positive, got {l!r}")
    cap = 10.0 * l * l if tau_cap is None else float(tau_cap)
    taus = np.linspace(0.0, cap, n_scan)
    p = np.abs(delayed_amplitude(taus, l)) ** 2
    i = int(np.argmax(p))
    lo, hi = taus[max(i - 1, 0)], taus[min(i + 1, n_scan - 1)]
    res = optimize.minimize_scalar(
        lambda s: -abs(delayed_amplitude(s, l)) ** 2,
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": tol},
    )
    tau_star, p_star = float(res.x), float(-res.fun)
    if p[i] > p_star:
        tau_star, p_star = float(taus[i]), float(p[i])
    if p[-1] >= 0.5 * p_star:
        warnings.warn(
            f"delay scan cap {cap} may truncate the optimum for l={l}",
            AccuracyWarning,
            stacklevel=2,
        )
    return tau_star, p_star
