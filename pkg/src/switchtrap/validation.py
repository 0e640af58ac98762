"""The ten acceptance checks, shared by ``switchtrap validate`` and the test suite.

Each check returns a :class:`CheckResult`; none of them raises on failure.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from . import double_well as dw
from . import kick, oracle, single_well as sw, specfun
from .errors import BoundaryContaminationWarning, NoBoundStateError

SEED = 20240611
RETENTION_TARGET = 0.21
EVOLVE_TIMES = (0.07, 1.0, 5.0, 15.0)


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    details: list = field(default_factory=list)
    runtime_s: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.title} ({self.runtime_s:.1f} s)"

    def report(self) -> str:
        return "\n".join([self.line()] + [f"    {d}" for d in self.details])


class _Collector:
    def __init__(self):
        self.ok = True
        self.details = []

    def check(self, cond, text):
        cond = bool(cond)
        self.ok &= cond
        self.details.append(("ok   " if cond else "FAIL ") + text)
        return cond


def quad_line(f, a=-40.0, b=40.0, points=(), tol=1e-13):
    """Complex quadrature of a vectorised integrand ``f(x_array)``."""
    return oracle.adaptive_quad(lambda x: f(np.array([x]))[0], a, b, tol, points=list(points))


@lru_cache(maxsize=8)
def hop_oracle_run(mu: float, l: float, times=EVOLVE_TIMES, backend=None):
    """Oracle snapshots of the instantaneous hop on the acceptance grid, with the initial norm."""
    grid = oracle.acceptance_grid()
    psi0 = oracle.WaveField.sample(lambda x: sw.initial_state(x, l), grid)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryContaminationWarning)
        snaps = oracle.tdse_snapshots(psi0, oracle.hop_schedule(mu, l, max(times)), times, backend)
    return psi0.norm(), tuple(snaps)


def density_l2(field_: oracle.WaveField, exact) -> float:
    diff = field_.density() - np.abs(exact) ** 2
    return math.sqrt(np.trapezoid(diff * diff, dx=field_.grid.dx))


def _timed(number, title):
    def wrap(fn):
        def run():
            start = time.perf_counter()
            c = _Collector()
            fn(c)
            return CheckResult(number, title, c.ok, c.details, time.perf_counter() - start)

        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        run.number = number
        return run

    return wrap


@_timed(1, "retention at mu=3, l=1 by three routes")
def check_retention_three_routes(c):
    mu, l = 3.0, 1.0
    p_formula = float(sw.retention_probability(mu, l))
    c.check(abs(p_formula - RETENTION_TARGET) <= 0.01, f"closed form P = {p_formula:.6f}")

    fin = lambda x: sw.final_state(x, mu)
    amp50 = quad_line(lambda x: np.conj(fin(x)) * sw.evolve_after_switch(x, 50.0, mu, l), points=(-l, 0.0))
    c.check(abs(abs(amp50) ** 2 - RETENTION_TARGET) <= 0.01, f"t=50 analytic overlap P = {abs(amp50) ** 2:.6f}")

    _, snaps = hop_oracle_run(mu, l)
    last = snaps[-1]
    p_oracle = abs(oracle.overlap(oracle.WaveField(last.grid, fin(last.x)), last)) ** 2
    c.check(abs(p_oracle - RETENTION_TARGET) <= 0.01, f"oracle t=15 overlap P = {p_oracle:.6f}")


@_timed(2, "large-separation optimum mu ~ 1/(2l), P ~ (2/e)/l")
def check_large_l_asymptotics(c):
    prev = (math.inf, math.inf)
    for l in (8.0, 10.0, 15.0):
        mu_max, p_max = sw.optimal_strength(l)
        e_mu = abs(mu_max * 2 * l - 1)
        e_p = abs(p_max * l * math.e / 2 - 1)
        c.check(e_mu <= 0.15 and e_p <= 0.15, f"l={l:g}: mu_max={mu_max:.5f} (rel err {e_mu:.3%}), P_max={p_max:.5f} (rel err {e_p:.3%})")
        c.check(e_mu < prev[0] and e_p < prev[1], f"l={l:g}: agreement improves on the previous l")
        prev = (e_mu, e_p)


@_timed(3, "mu=1 singular limit and branch continuity")
def check_mu_one_limit(c):
    for l in (0.5, 1.0, 2.0, 5.0):
        exact = (1 + l) ** 2 * math.exp(-2 * l)
        worst = max(abs(float(sw.retention_probability(1 + s * 1e-6, l)) - exact) for s in (-1, 1))
        c.check(worst < 1e-8, f"l={l:g}: |P(1 +- 1e-6) - (1+l)^2 e^-2l| = {worst:.2e}")
    x = np.linspace(-6.0, 6.0, 25)
    th, d = sw.MU_ONE_THRESHOLD, 1e-12
    worst = 0.0
    for t in (0.05, 1.0, 7.0, 40.0):
        for l in (0.5, 1.0, 3.0):
            for edge in (1 + th, 1 - th):
                inner = sw.evolve_after_switch(x, t, edge - math.copysign(d, edge - 1), l)
                outer = sw.evolve_after_switch(x, t, edge + math.copysign(d, edge - 1), l)
                worst = max(worst, float(np.max(np.abs(inner - outer))))
    c.check(worst < 1e-8, f"max jump of psi across |mu-1| = {th:g}: {worst:.2e}")


@_timed(4, "exact vs oracle wavefunction, mu=3, l=1")
def check_exact_vs_oracle(c):
    mu, l = 3.0, 1.0
    norm0, snaps = hop_oracle_run(mu, l)
    for s in snaps:
        err = density_l2(s, sw.evolve_after_switch(s.x, s.time, mu, l))
        c.check(err <= 1e-2, f"t={s.time:g}: L2 of |psi|^2 difference = {err:.2e}")
    drift = max(abs(s.norm() - norm0) for s in snaps)
    c.check(drift < 1e-6, f"oracle norm drift {drift:.2e}")


@_timed(5, "delayed retrapping structure")
def check_delayed(c):
    for l in (0.5, 1.0, 2.0, 5.0):
        diff = abs(abs(sw.delayed_amplitude(1e-8, l)) ** 2 - (1 + l) ** 2 * math.exp(-2 * l))
        c.check(diff < 1e-6, f"l={l:g}: |A(1e-8)|^2 vs (1+l)^2 e^-2l, diff {diff:.1e}")
    for l in (2.0, 3.0, 4.0, 5.0):
        tau_star, p_star = sw.delay_optimum(l)
        p0 = abs(sw.delayed_amplitude(0.0, l)) ** 2
        c.check(p_star > p0, f"l={l:g}: max P = {p_star:.4f} at tau = {tau_star:.3f} > P(0) = {p0:.4f}")
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for tau, l in zip(rng.uniform(0.05, 10.0, 20), rng.uniform(0.2, 5.0, 20)):
        ref = quad_line(lambda x: sw.final_state(x, 1.0) * sw.free_evolution(x, tau, l), points=(-l, 0.0))
        worst = max(worst, abs(ref - sw.delayed_amplitude(tau, l)))
    c.check(worst < 1e-6, f"closed-form amplitude vs overlap quadrature at 20 points: max diff {worst:.1e}")


@_timed(6, "double-well spectrum")
def check_dwp_spectrum(c):
    ls = np.concatenate([np.linspace(0.05, 3.0, 60), [0.999, 1.0, 1.001, 10.0]])
    consistent = True
    for l in ls:
        try:
            dw.solve_alpha(float(l), dw.Parity.ODD)
            has_odd = True
        except NoBoundStateError:
            has_odd = False
        consistent &= has_odd == (l > 1)
    c.check(consistent, "odd root found exactly when l > 1")
    worst = 0.0
    for l in ls:
        a = dw.solve_alpha(float(l), dw.Parity.EVEN)
        worst = max(worst, abs(dw.even_residual(a, l)))
        if l > 1:
            a = dw.solve_alpha(float(l), dw.Parity.ODD)
            worst = max(worst, abs(dw.odd_residual(a, l)))
    c.check(worst < 1e-12, f"max root residual {worst:.1e}")
    a_e, a_o = dw.solve_alpha(10.0, "even"), dw.solve_alpha(10.0, "odd")
    c.check(abs(a_e - 1) < 1e-3 and abs(a_o - 1) < 1e-3, f"l=10: alpha_even-1 = {a_e - 1:.2e}, alpha_odd-1 = {a_o - 1:.2e}")
    grid = oracle.Grid(-30.0, 30.0, 0.002)
    states = oracle.fd_eigenstates([(0.0, 1.0), (-2.0, 1.0)], grid, 3)
    e_even, e_odd = dw.spectrum(2.0)
    c.check(len(states) == 2, f"finite-difference bound states at l=2: {len(states)}")
    if len(states) == 2:
        d1, d2 = abs(states[0][0] - e_even), abs(states[1][0] - e_odd)
        c.check(max(d1, d2) < 1e-4, f"finite-difference energies differ by {d1:.1e}, {d2:.1e}")


@_timed(7, "double-well retrapping probabilities")
def check_retrap(c):
    worst = 0.0
    for l in (0.5, 2.0, 4.5):
        for parity in ("even", "odd"):
            if parity == "odd" and l <= 1:
                continue
            state = dw.bound_state(l, parity)
            ref = quad_line(lambda x: sw.initial_state(x, l).real * state(x), points=(-l, 0.0)).real
            worst = max(worst, abs(ref ** 2 - abs(dw.retrap_amplitude(l, parity)) ** 2))
    c.check(worst < 1e-10, f"closed form vs quadrature: max diff {worst:.1e}")
    pe, po = dw.retrap_probabilities(7.0)
    c.check(abs(pe.value - po.value) < 0.02, f"l=7: p_even={pe.value:.5f}, p_odd={po.value:.5f}")
    total = 0.0
    for l in np.linspace(0.02, 15.0, 300):
        pe, po = dw.retrap_probabilities(float(l))
        total = max(total, pe.value + (po.value if po else 0.0))
    c.check(total <= 1.0, f"max p_even + p_odd over sampled l = {total:.6f}")


@_timed(8, "kick retention")
def check_kick_retention(c):
    worst = 0.0
    for k in np.linspace(0.0, 12.0, 50):
        ref = quad_line(lambda x: np.exp(1j * k * x - 2 * np.abs(x)), points=(0.0,))
        worst = max(worst, abs(abs(ref) ** 2 - kick.kick_retention(k).value))
    c.check(worst < 1e-10, f"closed form vs quadrature at 50 k: max diff {worst:.1e}")
    c.check(kick.kick_retention(0.0).value == 1.0, "P(0) = 1")


@_timed(9, "kick transition structure at l=3")
def check_kick_transition(c):
    l = 3.0
    p0 = kick.kick_transition(0.0, l).value
    c.check(p0 < 1e-12, f"P_trans(0) = {p0:.1e}")
    maxima, zeros = kick.transition_extrema(l, 5.0 * math.pi / l)
    for n, z in enumerate(zeros[:2], start=1):
        target = 2 * math.pi * n / l
        c.check(abs(z / target - 1) <= 0.10, f"zero {n} at k = {z:.4f}, prediction {target:.4f} ({z / target - 1:+.1%})")
    c.check(len(zeros) >= 2, f"{len(zeros)} zeros found")
    first = maxima[0]
    target = math.pi / l
    c.check(abs(first / target - 1) <= 0.10, f"first maximum at k = {first:.4f}, prediction {target:.4f} ({first / target - 1:+.1%})")
    k2, p_max, _ = kick.transition_optimum(l)
    ks = np.arange(0.0, 4 * math.pi / l + 1e-3, 1e-3)
    ps = kick.transition_probability(ks, l)
    k_grid = ks[np.argmax(ps)]
    c.check(
        abs(math.sqrt(k2) - k_grid) <= 1e-3 and p_max >= ps.max() - 1e-12,
        f"optimum k = {math.sqrt(k2):.5f} (P {p_max:.6f}) vs grid k = {k_grid:.3f} (P {ps.max():.6f})",
    )


@_timed(10, "complex erfc and Moshinsky function")
def check_special_functions(c):
    rng = np.random.default_rng(SEED)
    r = 10 * np.sqrt(rng.uniform(0, 1, 1000))
    z = r * np.exp(2j * np.pi * rng.uniform(0, 1, 1000))
    # relative to the larger term: near the imaginary axis |erfc| reaches e^100
    ep, em = specfun.erfc_complex(z), specfun.erfc_complex(-z)
    scale = np.maximum(np.maximum(np.abs(ep), np.abs(em)), 1.0)
    refl = np.max(np.abs(ep + em - 2) / scale)
    c.check(refl < 1e-12, f"reflection on 1000 points, relative: {refl:.1e}")
    x = np.linspace(-6, 6, 2001)
    ref = special.erfc(x)
    rel = np.max(np.abs(specfun.erfc_complex(x + 0j) - ref) / ref)
    c.check(rel < 1e-12, f"real axis vs scipy erfc: max rel {rel:.1e}")
    worst = 0.0
    for _ in range(100):
        xs = rng.uniform(-3.0, 3.0)
        ts = rng.uniform(0.05, 20.0)
        mu = rng.choice([1.0, rng.uniform(0.2, 5.0)])
        ks = 1j * mu * rng.choice([-1.0, 1.0])
        worst = max(worst, abs(oracle.moshinsky_by_quadrature(xs, ks, ts) - specfun.moshinsky_function(xs, ks, ts)))
    c.check(worst < 1e-8, f"Moshinsky vs propagator quadrature, 100 points: max abs diff {worst:.1e}")


CHECKS = (
    check_retention_three_routes,
    check_large_l_asymptotics,
    check_mu_one_limit,
    check_exact_vs_oracle,
    check_delayed,
    check_dwp_spectrum,
    check_retrap,
    check_kick_retention,
    check_kick_transition,
    check_special_functions,
)


def run_all(numbers=None):
    return [chk() for chk in CHECKS if numbers is None or chk.number in numbers]
