"""Retrial rate under slow retrials.

Rejected customers return as an independent Poisson stream of rate ``Omega``
that satisfies the fixed point

    Omega = (lam + Omega) D_F^R(s, lam + Omega).

With ``Omega = a sqrt(s)`` and ``lam = s - gamma sqrt(s)`` this becomes
``a = f_{s,F}^R(gamma - a)``. The map ``a -> f^R(gamma - a) - a`` is strictly
decreasing, so a bracketed Newton iteration in ``a`` is safe.
"""

import math
from dataclasses import dataclass

from ._roots import newton_bisect
from .erlang import _check_servers
from .exceptions import ConvergenceError, DomainError
from .gaussian import hazard, hazard_prime
from .performance import decomposed_measures, d_f_r, f_sF_R_with_derivative


@dataclass(frozen=True)
class CohenSolution:
    omega: float
    a: float
    gamma: float
    residual: float
    iterations: int


def solve_a_inf(gamma, tol=1e-12):
    """Positive root of ``a = hazard(gamma - a)``, the large-``s`` retrial rate."""
    if not gamma > 0:
        raise DomainError(f"solve_a_inf needs gamma > 0, got {gamma!r}")

    def resid(a):
        d = gamma - a
        return hazard(d) - a, -float(hazard_prime(d)) - 1.0

    hi = max(1.0, 2.0 / gamma)
    while resid(hi)[0] > 0:
        hi *= 2.0
    return newton_bisect(resid, 0.0, hi, x0=min(1.0 / gamma, 0.5 * hi), xtol=1e-16, ftol=tol)


def a_inf_prime(gamma, a=None):
    """Derivative ``-gamma a / (1 - gamma a)`` of the large-``s`` retrial rate."""
    if a is None:
        a = solve_a_inf(gamma)
    return -gamma * a / (1.0 - gamma * a)


def solve_scaled(s, gamma, policy, tol=1e-12):
    """Root ``a`` of ``a = f_{s,F}^R(gamma - a)`` for ``gamma < sqrt(s)``.

    The contract range is ``0 < gamma < sqrt(s)``; smaller ``gamma`` above
    ``gamma_P`` is attempted as well and reports a convergence error if no
    fixed point is bracketed. Returns ``(a, residual, evaluations)``.
    """
    _check_servers(s)
    rs = math.sqrt(s)
    if not gamma < rs:
        raise DomainError(f"the retrial fixed point needs gamma < sqrt(s) = {rs!r}, got {gamma!r}")
    calls = 0

    def resid(a):
        nonlocal calls
        calls += 1
        val, deriv = f_sF_R_with_derivative(s, gamma - a, policy)
        return val - a, -deriv - 1.0

    gp = policy.gamma_P(s)
    if gamma <= gp:
        raise DomainError(f"gamma={gamma!r} is not above gamma_P={gp!r}")
    if math.isfinite(gp):
        # gamma - a must stay above gamma_P
        hi = (gamma - gp) * (1.0 - 1e-12)
        if resid(hi)[0] > 0:
            raise ConvergenceError("retrial fixed point not bracketed below the stability boundary")
    else:
        hi = max(1.0, 2.0 / gamma) if gamma > 0 else 1.0
        while resid(hi)[0] > 0:
            hi *= 2.0
            if hi > 1e12:
                raise ConvergenceError("could not bracket the retrial fixed point")
    x0 = min(solve_a_inf(gamma), 0.5 * hi) if gamma > 0 else None
    a = newton_bisect(resid, 0.0, hi, x0=x0, xtol=1e-16, ftol=tol)
    r, dr = resid(a)
    # polish: a flat map turns a small residual into a larger error in a, and
    # a tiny root is only resolved once the iterate is near it in absolute terms
    for _ in range(4):
        if r == 0.0 or dr == 0.0 or not 0.0 <= a - r / dr < hi:
            break
        polished = a - r / dr
        r2, dr2 = resid(polished)
        if not abs(r2) < abs(r):
            break
        a, r, dr = polished, r2, dr2
    return a, abs(r), calls


def solve_cohen(s, lam, policy):
    """Retrial rate ``Omega`` for primary load ``0 < lam < s``."""
    _check_servers(s)
    if not 0 < lam < s:
        raise DomainError(f"the retrial fixed point is defined for 0 < lambda < s, got {lam!r}")
    rs = math.sqrt(s)
    gamma = (s - lam) / rs
    a, residual, calls = solve_scaled(s, gamma, policy)
    return CohenSolution(omega=a * rs, a=a, gamma=gamma, residual=residual, iterations=calls)


def cohen_residual(s, lam, omega, policy):
    """``(lam + Omega) D_F^R(s, lam + Omega) - Omega`` relative to ``max(Omega, 1)``."""
    total = lam + omega
    return (total * d_f_r(s, total, policy) - omega) / max(omega, 1.0)


def retrial_measures(s, lam, policy):
    """All stationary measures at the retrial-inflated load ``lam + Omega``."""
    sol = solve_cohen(s, lam, policy)
    return decomposed_measures(s, lam + sol.omega, policy)
