import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from conftest import cx
from switchtrap import oracle, single_well as sw
from switchtrap.errors import AccuracyWarning, DomainError


def norm(f, a=-60, b=60, points=(0.0,)):
    return integrate.quad(lambda x: abs(f(x)) ** 2, a, b, points=points, limit=400)[0]


def test_state_values_and_norms():
    assert sw.initial_state(-1.0, 1.0) == 1
    assert abs(sw.initial_state(0.0, 1.0) - math.exp(-1)) < 1e-15
    assert abs(norm(lambda x: sw.initial_state(x, 1.0), points=(-1.0,)) - 1) < 1e-10
    assert sw.final_state(0.0, 1.0) == 1
    assert abs(sw.final_state(0.0, 4.0) - 2) < 1e-15
    for mu in (0.5, 1.0, 3.0):
        assert abs(norm(lambda x: sw.final_state(x, mu)) - 1) < 1e-10


def test_bound_state_type():
    s = sw.BoundState1W(0.0, 3.0)
    assert s.energy == -9 and s.decay_rate == 3
    with pytest.raises(DomainError):
        sw.BoundState1W(0.0, 0.0)
    with pytest.raises(DomainError):
        sw.HopScenario(l=1.0, mu=2.0, tau=0.5)
    with pytest.raises(DomainError):
        sw.HopScenario(l=0.0)


def test_retention_examples():
    assert abs(float(sw.retention_probability(3, 1)) - 0.21) < 0.01
    assert abs(float(sw.retention_probability(1, 0)) - 1) < 1e-15
    assert abs(float(sw.retention_probability(1, 1)) - 4 * math.exp(-2)) < 1e-15


def test_retention_against_frozen_quadrature(frozen):
    for mu, l, ref in frozen["retention"]:
        assert abs(float(sw.retention_probability(mu, l)) - ref) < 1e-12


def test_retention_errors():
    with pytest.raises(DomainError):
        sw.retention_probability(0.0, 1.0)
    with pytest.raises(DomainError):
        sw.retention_probability(-1.0, 1.0)
    with pytest.raises(DomainError):
        sw.optimal_strength(0.0)


@given(st.floats(1e-3, 10), st.floats(1e-3, 10))
def test_probability_bounds(mu, l):
    p = float(sw.retention_probability(mu, l))
    assert 0 <= p < 1


@given(st.floats(0, 50), st.floats(1e-3, 10))
def test_delayed_probability_bounds(tau, l):
    assert 0 <= sw.delayed_probability(tau, l).value <= 1


@pytest.mark.parametrize("l", [1.0, 2.0, 5.0])
def test_retention_vanishes_for_stiff_well(l):
    # P ~ 4 e^{-2l} / mu for mu -> infinity
    for mu in (1e3, 1e5, 1e7):
        assert abs(float(sw.retention_probability(mu, l)) * mu / (4 * math.exp(-2 * l)) - 1) < 2 / mu ** 0.5 + 1e-9
    assert float(sw.retention_probability(1e7, l)) < 1e-6


@pytest.mark.xfail(strict=True, reason="decay is only 1/mu: P(1e3, 1) ~ 5.4e-4; see notes")
def test_retention_literal_stiff_bound():
    assert float(sw.retention_probability(1e3, 1.0)) < 1e-6


@pytest.mark.parametrize("l", [0.5, 1.0, 2.0, 5.0])
def test_mu_one_taylor_consistency(l):
    # near mu = 1 the probability follows its own first derivative to O(eps^2)
    p = lambda m: float(sw.retention_probability(m, l))
    slope = (p(1 + 1e-3) - p(1 - 1e-3)) / 2e-3
    for eps in (1e-6, -1e-6, 5e-5, -5e-5, 1e-4, -1e-4):
        assert abs(p(1 + eps) - p(1) - slope * eps) < 1e-8


@pytest.mark.xfail(strict=True, reason="P genuinely moves by P'(1)*1e-6 ~ 1e-7; see notes on the mu=1 continuity bound")
@pytest.mark.parametrize("l", [0.5, 1.0, 2.0])
def test_mu_one_literal_continuity_bound(l):
    for s in (-1, 1):
        assert abs(float(sw.retention_probability(1 + s * 1e-6, l)) - (1 + l) ** 2 * math.exp(-2 * l)) < 1e-8


def test_optimal_strength_examples():
    mu, p = sw.optimal_strength(10.0)
    assert abs(mu / 0.05 - 1) < 0.15 and abs(p / (2 / math.e / 10) - 1) < 0.15
    mu1, p1 = sw.optimal_strength(1.0)
    assert p1 > float(sw.retention_probability(mu1 / 2, 1.0))
    assert p1 > float(sw.retention_probability(2 * mu1, 1.0))


def test_optimal_strength_matches_grid_scan():
    mu, p = sw.optimal_strength(3.0)
    grid = np.arange(1e-4, 5.0, 1e-4)
    ps = sw.retention_amplitude(grid, 3.0) ** 2
    assert abs(mu - grid[np.argmax(ps)]) <= 1e-4
    assert p >= ps.max() - 1e-14


@pytest.mark.parametrize("x", [-3.0, -1.5, -0.5, 0.4, 2.0])
@pytest.mark.parametrize("mu", [0.5, 3.0])
def test_short_time_continuity(x, mu):
    assert abs(sw.evolve_after_switch(x, 1e-6, mu, 1.0) - sw.initial_state(x, 1.0)) < 1e-3


@pytest.mark.parametrize("x", [-1.0, 0.0])
def test_short_time_change_at_cusps_scales_as_sqrt_t(x):
    # kinks relax like sqrt(t), so the deviation divided by sqrt(t) settles to a constant
    ratios = [abs(sw.evolve_after_switch(x, t, 3.0, 1.0) - sw.initial_state(x, 1.0)) / math.sqrt(t) for t in (1e-8, 1e-7, 1e-6)]
    assert max(ratios) / min(ratios) < 1.05
    assert abs(sw.evolve_after_switch(x, 1e-8, 3.0, 1.0) - sw.initial_state(x, 1.0)) < 1e-3


def test_zero_strength_branch_is_free_release():
    x = np.linspace(-5, 5, 11)
    assert np.array_equal(sw.evolve_after_switch(x, 2.0, 0.0, 1.0), sw.free_evolution(x, 2.0, 1.0))


def test_evolution_against_frozen_high_precision(frozen):
    for x, t, mu, l, ref in frozen["hop_wavefunction"]:
        got = sw.evolve_after_switch(x, t, mu, l)
        assert abs(got - cx(ref)) < 2e-9, (x, t, mu, l)


@pytest.mark.parametrize("t", [0.05, 1.0, 7.0, 40.0])
def test_branch_continuity_across_threshold(t):
    x = np.linspace(-6, 6, 25)
    th = sw.MU_ONE_THRESHOLD
    for edge in (1 + th, 1 - th):
        d = math.copysign(1e-12, edge - 1)
        for l in (0.5, 1.0, 3.0):
            jump = np.abs(sw.evolve_after_switch(x, t, edge - d, l) - sw.evolve_after_switch(x, t, edge + d, l))
            assert jump.max() < 1e-8


def test_symmetric_branch_against_kernel_quadrature():
    # mu = 1 solution versus direct integration of the propagator
    for x, t in ((0.0, 0.3), (-1.5, 2.0), (2.0, 5.0)):
        f = lambda xp: sw.green_kernel(x, xp, t, 1.0) * sw.initial_state(xp, 1.0)
        re = integrate.quad(lambda s: f(s).real, -40, 40, points=(-1.0, 0.0), limit=4000)[0]
        im = integrate.quad(lambda s: f(s).imag, -40, 40, points=(-1.0, 0.0), limit=4000)[0]
        assert abs(sw.evolve_after_switch(x, t, 1.0, 1.0) - complex(re, im)) < 1e-7


def test_propagate_kernel_matches_closed_form():
    grid = oracle.Grid(-20.0, 20.0, 0.005)
    field = oracle.WaveField.sample(lambda x: sw.initial_state(x, 1.0), grid)
    got = sw.propagate_kernel(field, 3.0, 0.07, 0.0)
    assert abs(got - sw.evolve_after_switch(0.0, 0.07, 3.0, 1.0)) < 1e-4
    free = sw.propagate_kernel(field, 0.0, 0.5, np.array([-1.0, 0.5]))
    assert np.max(np.abs(free - sw.free_evolution(np.array([-1.0, 0.5]), 0.5, 1.0))) < 1e-4


def test_propagate_kernel_delta_peak_gives_free_kernel():
    grid = oracle.Grid(-1.0, 1.0, 0.001)
    vals = np.zeros(grid.size, complex)
    vals[grid.index_of(0.0)] = 1.0 / grid.dx  # unit-area hat
    out = sw.propagate_kernel(oracle.WaveField(grid, vals), 0.0, 1.0, 0.7)
    assert abs(out - sw.free_kernel(0.7, 0.0, 1.0)) < 1e-6


def test_propagate_kernel_warns_on_coarse_grid():
    grid = oracle.Grid(-10.0, 10.0, 0.1)
    field = oracle.WaveField.sample(lambda x: sw.initial_state(x, 1.0), grid)
    with pytest.warns(AccuracyWarning):
        sw.propagate_kernel(field, 1.0, 1.0, 0.0)


def test_free_asymptotic():
    exact100 = sw.evolve_after_switch(0.0, 100.0, 0.0, 1.0)
    err100 = abs(sw.free_asymptotic(0.0, 100.0, 1.0) / exact100 - 1)
    err1000 = abs(sw.free_asymptotic(0.0, 1000.0, 1.0) / sw.evolve_after_switch(0.0, 1000.0, 0.0, 1.0) - 1)
    assert err100 < 0.02
    assert err1000 < err100


def test_free_release_decays_like_inverse_time():
    t = np.logspace(2, 4, 9)
    rho = np.array([abs(sw.evolve_after_switch(0.5, ti, 0.0, 1.0)) ** 2 for ti in t])
    slope = np.polyfit(np.log(t), np.log(rho), 1)[0]
    assert abs(slope + 1) < 0.01


def test_asymptotic_center_value():
    assert abs(abs(sw.asymptotic_center_value(1.0, 3.0)) ** 2 - 4 * math.exp(-2)) < 1e-15
    assert abs(abs(sw.asymptotic_center_value(0.0, 3.0)) ** 2 - 1) < 1e-15
    exact = sw.evolve_after_switch(0.0, 50.0, 1.0, 2.0)
    assert abs(abs(exact) / abs(sw.asymptotic_center_value(2.0, 50.0)) - 1) < 0.05


def test_long_time_overlap_matches_retention():
    mu, l = 3.0, 1.0
    f = lambda x: sw.final_state(x, mu) * sw.evolve_after_switch(x, 50.0, mu, l)
    re = integrate.quad(lambda s: f(s).real, -40, 40, points=(-1.0, 0.0), limit=400)[0]
    im = integrate.quad(lambda s: f(s).imag, -40, 40, points=(-1.0, 0.0), limit=400)[0]
    assert abs(abs(complex(re, im)) ** 2 - float(sw.retention_probability(mu, l))) < 2e-2


def test_delayed_amplitude_limits_and_quadrature():
    for l in (0.5, 1.0, 3.0):
        assert abs(sw.delayed_amplitude(1e-8, l) - (1 + l) * math.exp(-l)) < 1e-6
    f = lambda x: sw.final_state(x, 1.0) * sw.free_evolution(x, 1.0, 2.0)
    re = integrate.quad(lambda s: f(s).real, -40, 40, points=(-2.0, 0.0), limit=400)[0]
    im = integrate.quad(lambda s: f(s).imag, -40, 40, points=(-2.0, 0.0), limit=400)[0]
    assert abs(sw.delayed_amplitude(1.0, 2.0) - complex(re, im)) < 1e-9


def test_delay_optimum_examples():
    tau, p = sw.delay_optimum(4.0)
    assert tau > 0 and p > abs(sw.delayed_amplitude(0.0, 4.0)) ** 2
    tau3, p3 = sw.delay_optimum(3.0)
    grid = np.arange(0.0, 90.0, 1e-3)
    ps = np.abs(sw.delayed_amplitude(grid, 3.0)) ** 2
    assert abs(tau3 - grid[np.argmax(ps)]) <= 1e-3
    assert p3 >= ps.max() - 1e-12


def test_delay_optimum_small_shift_is_marginal():
    # at l = 0.5 the best delay is short and buys less than one percent
    tau, p = sw.delay_optimum(0.5)
    p0 = abs(sw.delayed_amplitude(0.0, 0.5)) ** 2
    assert tau < 0.1
    assert p / p0 - 1 < 0.01


@pytest.mark.xfail(strict=True, reason="optimum sits at tau ~ 0.079, about 130 scan steps from zero; see notes")
def test_delay_optimum_small_shift_at_zero():
    tau, _ = sw.delay_optimum(0.5)
    assert tau <= 2 * (10 * 0.5 ** 2) / 4000


@pytest.mark.xfail(strict=True, reason="tail decays like 4/(pi tau), so P(10 l^2) is not below P(0)/10; see notes")
@pytest.mark.parametrize("l", [1.0, 4.0])
def test_delay_cap_tenfold_drop(l):
    cap = 10 * l * l
    assert abs(sw.delayed_amplitude(cap, l)) ** 2 < abs(sw.delayed_amplitude(0.0, l)) ** 2 / 10


def test_delay_cap_below_peak():
    for l in (2.0, 4.0):
        with warnings.catch_warnings():
            warnings.simplefilter("error", AccuracyWarning)
            _, p = sw.delay_optimum(l)
        assert abs(sw.delayed_amplitude(10 * l * l, l)) ** 2 < 0.5 * p


def test_time_domain_errors():
    with pytest.raises(DomainError):
        sw.evolve_after_switch(0.0, 0.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        sw.free_asymptotic(0.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        sw.delayed_amplitude(-1.0, 1.0)
    with pytest.raises(DomainError):
        sw.delay_optimum(0.0)
