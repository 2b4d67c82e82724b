"""Controller dynamics in both frames, parameter assembly, and coupled checks."""

import math

import numpy as np
import pytest

import ueslab as u
from ueslab.controllers import gain_error_term, growth_drift
from ueslab.errors import AssemblyError, CapabilityError


def test_default_frequency_ratios():
    np.testing.assert_allclose(u.default_omega_hat(3), [1.0, 1.5, 2.25])


def test_params_reject_duplicate_ratios(quartic):
    m2 = u.quadratic(q=[1.0, 1.0], theta_star=[0.0, 0.0])
    with pytest.raises(AssemblyError, match="distinct"):
        u.assemble(m2, u.Schedule.nominal(), alpha=1.0, k=1.0, omega=5.0, omega_h=3.0, omega_hat=[2.0, 2.0])


def test_params_reject_nonpositive_entries():
    s = u.Schedule.nominal()
    with pytest.raises(AssemblyError):
        u.EsParams(alpha=[-1.0], k=[1.0], omega=5.0, omega_h=3.0, schedule=s)
    with pytest.raises(AssemblyError):
        u.EsParams(alpha=[1.0], k=[1.0], omega=0.0, omega_h=3.0, schedule=s)


def test_washout_must_outrun_exponential_growth():
    s = u.Schedule.exponential(lam=2.0)
    with pytest.raises(AssemblyError, match="2 lambda"):
        u.EsParams(alpha=[1.0], k=[1.0], omega=5.0, omega_h=3.0, schedule=s)


def test_assemble_broadcasts_scalars():
    m = u.quadratic(q=[1.0, 2.0], theta_star=[0.0, 0.0])
    p = u.assemble(m, u.Schedule.nominal(), alpha=0.5, k=2.0, omega=5.0, omega_h=3.0)
    assert p.n == 2
    np.testing.assert_allclose(p.alpha, [0.5, 0.5])
    np.testing.assert_allclose(p.omegas, [5.0, 7.5])
    with pytest.raises(AssemblyError, match="length-2"):
        u.assemble(m, u.Schedule.nominal(), alpha=[1.0, 1.0, 1.0], k=1.0, omega=5.0, omega_h=3.0)


def test_growth_order_condition(quartic):
    # quartic has kappa = 2: r = 4 makes 2 kappa - r = 0, any v > 0 works
    ok = u.Schedule.asymptotic(beta=0.1, v=1.0 / 3.0, r=4.0)
    u.assemble(quartic, ok, alpha=1.0, k=0.3, omega=5.0, omega_h=3.0)
    with pytest.raises(AssemblyError, match="2 kappa - r >= 0"):
        u.assemble(quartic, u.Schedule.asymptotic(beta=0.1, v=1.0, r=5.0), alpha=1.0, k=0.3, omega=5.0, omega_h=3.0)
    with pytest.raises(AssemblyError, match="v > 2 kappa - r"):
        u.assemble(quartic, u.Schedule.asymptotic(beta=0.1, v=0.3, r=3.5), alpha=1.0, k=0.3, omega=5.0, omega_h=3.0)


def test_exponential_gain_condition(exp_map):
    s = u.Schedule.exponential(lam=0.1)
    # floor is 2*0.1*1*(2+2)/(1*4) = 0.2
    u.assemble(exp_map, s, alpha=1.0, k=0.21, omega=50.0, omega_h=3.0)
    with pytest.raises(AssemblyError, match="gain condition"):
        u.assemble(exp_map, s, alpha=1.0, k=0.1, omega=50.0, omega_h=3.0)
    # flat maps carry no such floor: the quartic assembles at any gain
    u.assemble(u.quartic_paper(), s, alpha=1.0, k=0.01, omega=50.0, omega_h=3.0)


def test_deployed_rhs_pinned_value(quartic):
    p = u.assemble(quartic, u.Schedule.nominal(), alpha=1.0, k=0.3, omega=5.0, omega_h=3.0, omega_hat=[1.0])
    theta_dot, eta_dot = u.es_rhs(p, quartic, u.EsState(theta=[0.0], eta=0.0), 0.0)
    assert theta_dot[0] == pytest.approx(math.sqrt(5.0) * math.cos(0.3 * 17.0), rel=1e-12)
    assert eta_dot == pytest.approx(3.0 * 17.0, rel=1e-12)


def test_phase_term_vanishes_at_optimum(quartic, fig3_params):
    # at theta = theta*, eta = J(theta*) the feedback phase is zero: pure
    # dither at the scheduled amplitude, and no washout drift
    for t in (0.0, 3.7, 12.0):
        td, ed = u.es_rhs(fig3_params, quartic, u.EsState(theta=[2.0], eta=1.0), t)
        s = fig3_params.schedule
        expected = s.nu(t) * math.sqrt(5.0) * math.cos(5.0 * t)
        assert td[0] == pytest.approx(expected, rel=1e-12, abs=1e-15)
        assert ed == 0.0


def test_closed_loop_packing(quartic, fig3_params):
    rhs = u.es_closed_loop(fig3_params, quartic)
    assert rhs.dither_omega_max == 5.0
    out = rhs(np.array([0.0, 0.0]), 0.0)
    td, ed = u.es_rhs(fig3_params, quartic, u.EsState(theta=[0.0], eta=0.0), 0.0)
    np.testing.assert_allclose(out, [td[0], ed])


def test_growth_drift_values():
    assert growth_drift(u.Schedule.nominal(), 3.0) == 0.0
    s = u.Schedule.asymptotic(beta=0.1, v=1.0 / 3.0, r=4.0)
    assert growth_drift(s, 0.0) == pytest.approx(0.3, rel=1e-12)
    assert growth_drift(s, 10.0) == pytest.approx(0.3 / 2.0, rel=1e-12)
    assert growth_drift(u.Schedule.exponential(lam=0.25), 7.0) == 0.25


def test_gain_error_term_log_domain():
    s = u.Schedule.exponential(lam=1.0)
    k = np.array([2.0])
    # at t = 400 the gain multiplier alone overflows ...
    with pytest.raises(OverflowError):
        s.phi(400.0)
    # ... but against a denormal error the product is finite and signed
    expected = 2.0 * math.exp(s.log_phi(400.0) + math.log(1e-300))
    np.testing.assert_allclose(gain_error_term(s, k, 1e-300, 400.0), [expected])
    np.testing.assert_allclose(gain_error_term(s, k, -1e-300, 400.0), [-expected])
    np.testing.assert_array_equal(gain_error_term(s, k, 0.0, 400.0), [0.0])


def test_transformed_rhs_at_origin(quartic, fig3_params):
    # zero transformed error: no cost offset, so the washout rate vanishes and
    # the dither enters at full strength
    td, ed = u.transformed_rhs(fig3_params, quartic, u.TransformedState(theta_f=[0.0], eta_f=0.0), 0.0)
    assert td[0] == pytest.approx(math.sqrt(5.0), rel=1e-12)
    assert ed == 0.0


def test_transformed_frame_needs_growth_and_optimum(quartic):
    p_nom = u.assemble(quartic, u.Schedule.nominal(), alpha=1.0, k=0.3, omega=5.0, omega_h=3.0)
    with pytest.raises(CapabilityError, match="nominal"):
        u.transformed_closed_loop(p_nom, quartic)
    blind = u.CostMap(dim=1, eval=lambda th: 1.0 + (th[0] - 2.0) ** 4, kappa=2)
    p = u.assemble(blind, u.Schedule.asymptotic(beta=0.1, v=1.0 / 3.0, r=4.0), alpha=1.0, k=0.3, omega=5.0, omega_h=3.0)
    with pytest.raises(CapabilityError, match="optimum"):
        u.transformed_closed_loop(p, blind)


def _chain_rule_worst_error(map_, params, schedule, rng, trials=50):
    """Largest deviation between the scaled-frame rates and the derivative of
    the coordinate change applied to the deployed-frame rates."""
    worst = 0.0
    for _ in range(trials):
        t = rng.uniform(0.0, 20.0)
        theta_f = rng.uniform(-1.5, 1.5, map_.dim)
        eta_f = rng.uniform(-1.5, 1.5)
        xi = schedule.xi(t)
        x2k = math.exp(2.0 * map_.kappa * schedule.log_xi(t))
        theta = map_.optimum + theta_f / xi
        eta = map_.optimal_value + eta_f / x2k
        td, ed = u.es_rhs(params, map_, u.EsState(theta=theta, eta=eta), t)
        h = 1e-5 * max(1.0, abs(t))
        dlogxi = (schedule.log_xi(t + h) - schedule.log_xi(t - h)) / (2.0 * h)
        td_ref = dlogxi * xi * (theta - map_.optimum) + xi * td
        ed_ref = 2.0 * map_.kappa * dlogxi * x2k * (eta - map_.optimal_value) + x2k * ed
        tf, ef = u.transformed_rhs(params, map_, u.TransformedState(theta_f=theta_f, eta_f=eta_f), t)
        worst = max(worst, float(np.max(np.abs(tf - td_ref))), abs(ef - ed_ref))
    return worst


def test_transformed_rhs_consistent_by_chain_rule(quartic, fig3_params, exp_map, exp_params):
    rng = np.random.default_rng(3)
    err_asym = _chain_rule_worst_error(quartic, fig3_params, fig3_params.schedule, rng)
    err_expo = _chain_rule_worst_error(exp_map, exp_params, exp_params.schedule, rng)
    assert err_asym < 1e-9
    assert err_expo < 1e-9


def test_with_omega_rebuilds_derived_quantities(fig3_params):
    p = fig3_params.with_omega(50.0)
    assert p.omega == 50.0
    np.testing.assert_allclose(p.omegas, [50.0])
    assert fig3_params.omegas[0] == 5.0
