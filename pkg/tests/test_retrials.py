
import numpy as np
import pytest

from qedstaff.admission import Bernoulli, Delay, Loss, Threshold
from qedstaff.exceptions import ConvergenceError, DomainError
from qedstaff.gaussian import hazard, inverse_hazard
from qedstaff.performance import d_f_r
from qedstaff.retrials import (
    a_inf_prime,
    cohen_residual,
    retrial_measures,
    solve_a_inf,
    solve_cohen,
    solve_scaled,
)


def damped_cohen(s, lam, policy, weight=0.5, iters=20000):
    """Plain relaxation of the retrial fixed point, used as an oracle."""
    omega = 0.0
    for _ in range(iters):
        total = lam + omega
        new = total * d_f_r(s, total, policy)
        step = weight * new + (1 - weight) * omega
        if abs(step - omega) < 1e-15 * max(1.0, omega):
            return step
        omega = step
    return omega


def test_loss_single_server_is_exact():
    sol = solve_cohen(1, 0.5, Loss())
    assert sol.omega == pytest.approx(0.5, abs=1e-10)
    assert sol.residual < 1e-10


def test_omega_is_scaled_rate():
    sol = solve_cohen(100, 80.0, Bernoulli(0.1))
    assert sol.omega == sol.a * 10.0
    assert sol.gamma == pytest.approx(2.0)


def test_matches_damped_iteration():
    pol = Bernoulli(0.1)
    sol = solve_cohen(100, 80.0, pol)
    assert sol.residual < 1e-10
    assert sol.omega == pytest.approx(damped_cohen(100, 80.0, pol), rel=1e-9)


def test_small_load_gives_small_rate():
    rates = [solve_cohen(50, lam, Bernoulli(0.3)).omega for lam in (1.0, 1e-2, 1e-4)]
    assert rates[0] > rates[1] > rates[2] >= 0.0
    assert rates[2] < 1e-10


@pytest.mark.parametrize("policy", [Loss(), Bernoulli(0.3), Threshold(5), Delay()])
@pytest.mark.parametrize("s", [1, 10, 100])
@pytest.mark.parametrize("frac", [0.1, 0.5, 0.9, 0.99])
def test_residual_smoke_grid(policy, s, frac):
    lam = frac * s
    sol = solve_cohen(s, lam, policy)
    assert sol.residual < 1e-10
    assert abs(cohen_residual(s, lam, sol.omega, policy)) < 1e-10
    assert lam + sol.omega < policy.lambda_P(s)


def test_delay_has_no_retrials():
    assert solve_cohen(20, 15.0, Delay()).omega == 0.0


@pytest.mark.parametrize("lam", [0.0, -1.0, 100.0, 120.0])
def test_load_outside_contract(lam):
    with pytest.raises(DomainError):
        solve_cohen(100, lam, Loss())


@pytest.mark.parametrize("policy", [Loss(), Bernoulli(0.5), Threshold(3)])
def test_scaled_solver_reports_missing_fixed_point(policy):
    # carried traffic never exceeds s, so a primary load above s has no balance
    with pytest.raises(ConvergenceError):
        solve_scaled(100, -0.5, policy)


def test_scaled_solver_refuses_unstable_gamma():
    pol = Bernoulli(0.5)
    with pytest.raises(DomainError):
        solve_scaled(100, pol.gamma_P(100) - 0.1, pol)


def test_a_inf_large_gamma_vanishes():
    assert solve_a_inf(10.0) < 1e-12


def test_a_inf_constructive_inversion():
    target = 0.5
    gamma = target + inverse_hazard(target)
    assert solve_a_inf(gamma) == pytest.approx(target, abs=1e-12)


def test_a_inf_residual():
    for g in (0.1, 0.5, 1.0, 2.0, 4.0):
        a = solve_a_inf(g)
        assert abs(a - hazard(g - a)) < 1e-12


def test_gamma_a_inf_decreasing_from_one():
    grid = np.linspace(1e-3, 6.0, 400)
    prod = np.array([g * solve_a_inf(g) for g in grid])
    assert np.all(np.diff(prod) < 0)
    assert 1e-6 * solve_a_inf(1e-6) == pytest.approx(1.0, abs=1e-5)


def test_a_inf_derivative_matches_difference():
    for g in (0.5, 1.0, 2.0):
        h = 1e-6
        fd = (solve_a_inf(g + h) - solve_a_inf(g - h)) / (2 * h)
        assert a_inf_prime(g) == pytest.approx(fd, rel=1e-6)


def test_a_inf_rejects_nonpositive():
    with pytest.raises(DomainError):
        solve_a_inf(0.0)


@pytest.mark.parametrize("gamma", [0.5, 1.0, 2.0])
def test_finite_rate_below_limit_and_converging(gamma):
    pol = Bernoulli(0.1)
    limit = solve_a_inf(gamma)
    gaps = []
    for s in (25, 100, 400, 1600):
        a, _, _ = solve_scaled(s, gamma, pol)
        if s <= 400:
            assert a <= limit
        gaps.append(limit - a)
    ratios = [gaps[i] / gaps[i + 1] for i in range(len(gaps) - 1)]
    # quadrupling s should roughly halve the gap
    for r in ratios:
        assert 1.5 < r < 2.7


def test_retrial_measures_table_row():
    m = retrial_measures(100, 83.359, Bernoulli(0.1))
    assert 10 * m.d_f_r == pytest.approx(0.101, abs=2e-3)


def test_retrial_measures_loss_single_server():
    m = retrial_measures(1, 0.5, Loss())
    assert m.lam == pytest.approx(1.0)
    assert m.d_f_r == pytest.approx(0.5, abs=1e-12)


def test_retrial_measures_tiny_load():
    pol = Bernoulli(0.3)
    m = retrial_measures(10, 1e-6, pol)
    # the fixed point is solved to an absolute tolerance in the scaled rate
    assert abs(m.lam - 1e-6) < 1e-10
    assert m.d_f_r == pytest.approx(d_f_r(10, 1e-6, pol), rel=1e-6)
