"""Carried-traffic targets and their multiple solutions.

Two inverse problems are solved here. Without retrials, find ``lam`` with
``lam (1 - D(s, lam)) = epsilon``; for ``D = D_F`` the map vanishes at both
ends of ``(0, lambda_P)`` so small targets have two solutions. With retrials
and pure loss (``F = 0``), the carried traffic in QED coordinates is
``sqrt(s) L_s(gamma)`` where

    L_s(gamma) = (sqrt(s) - gamma)**2 / (sqrt(s) - gamma + a_s(gamma))

is unimodal with maximiser ``gamma_hat(s)``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._roots import bisect, golden_max, newton_bisect
from .admission import AdmissionPolicy, Loss
from .exceptions import ConsistencyError, ConvergenceError, DomainError
from .performance import DF, DFR, carried_traffic
from .retrials import a_inf_prime, solve_a_inf, solve_scaled

_LOSS = Loss()
_FLANK_POINTS = 128
_P_ZERO_CAP = 10.0
GAMMA_HAT_INF_BRACKET = (0.1, 3.0)


@dataclass(frozen=True)
class CarriedTrafficResult:
    """Roots of a carried-traffic equation.

    ``solutions`` are loads in increasing order. ``threshold`` is
    ``sqrt(s) L_max(s)`` for the retrial problem, ``peak`` the largest
    carried traffic seen by the solver, and ``resolution`` states how far the
    root list can be trusted.
    """

    solution_count: int
    solutions: tuple
    threshold: float = None
    gamma_hat: float = None
    peak: float = None
    peak_load: float = None
    resolution: str = ""
    gammas: tuple = field(default=())


def _load_cap(s, policy):
    lam_p = policy.lambda_P(s)
    if math.isfinite(lam_p):
        return lam_p, False
    return _P_ZERO_CAP * s, True


def _flank_roots(func, lo, hi, points):
    """All sign changes of ``func`` on a uniform grid over ``[lo, hi]``, refined."""
    grid = np.linspace(lo, hi, points + 1)
    vals = [func(x) for x in grid]
    roots = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0.0:
            roots.append(float(a))
        elif (fa > 0) != (fb > 0):
            roots.append(float(bisect(func, float(a), float(b), xtol=1e-15)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def solve_problem3(s, epsilon, policy, variant=DF):
    """Loads with ``lam (1 - D(s, lam)) = epsilon`` for ``D = D_F`` or ``D_F^R``."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    if variant == DFR:
        return _problem3_dfr(s, epsilon, policy)
    if variant != DF:
        raise DomainError(f"unknown variant {variant!r}")
    return _problem3_df(s, epsilon, policy)


def _problem3_dfr(s, epsilon, policy):
    if epsilon >= s:
        raise DomainError(f"the rejection variant needs epsilon in (0, s) = (0, {s}), got {epsilon!r}")

    def resid(lam):
        return carried_traffic(s, lam, policy, DFR) - epsilon

    lam_p = policy.lambda_P(s)
    if math.isfinite(lam_p):
        hi = lam_p * (1.0 - 1e-12)
        if resid(hi) < 0:
            raise ConvergenceError(f"carried traffic at the stability edge stays below {epsilon!r}")
    else:
        hi = float(s)
        while resid(hi) < 0:
            hi *= 2.0
            if hi > 1e12 * s:
                raise ConvergenceError("could not bracket the carried-traffic root")
    root = float(bisect(resid, 0.0, hi, xtol=1e-15))
    return CarriedTrafficResult(1, (root,), resolution="unique: carried traffic is increasing")


def _problem3_df(s, epsilon, policy):
    cap, capped = _load_cap(s, policy)

    def carried(lam):
        return carried_traffic(s, lam, policy, DF)

    lo, hi = cap * 1e-6, cap * (1.0 - 1e-6)
    peak_load, peak = golden_max(carried, lo, hi, xtol=1e-12)

    def resid(lam):
        return carried(lam) - epsilon

    left = _flank_roots(resid, 0.0, peak_load, _FLANK_POINTS)
    right = _flank_roots(resid, peak_load, hi, _FLANK_POINTS)
    roots = tuple(sorted(set(left + right)))
    note = (f"golden-section peak; {_FLANK_POINTS}-point scan per flank, "
            f"roots closer than {cap / _FLANK_POINTS:.3g} in load may be missed")
    if capped:
        note += f"; loads searched up to {cap:g} only"
    return CarriedTrafficResult(len(roots), roots, peak=peak, peak_load=peak_load, resolution=note)


def a_s(s, gamma, policy=_LOSS):
    """Retrial rate ``a_s(gamma)`` in QED units (``Omega / sqrt(s)``)."""
    return float(solve_scaled(s, gamma, policy)[0])


def L_s_eval(s, gamma, policy=_LOSS):
    """``(sqrt(s) - gamma)^2 / (sqrt(s) - gamma + a_s(gamma))`` for ``0 < gamma < sqrt(s)``."""
    rs = math.sqrt(s)
    if not 0 < gamma < rs:
        raise DomainError(f"L_s needs 0 < gamma < sqrt(s) = {rs!r}, got {gamma!r}")
    a = a_s(s, gamma, policy)
    d = rs - gamma
    return d * d / (d + a)


def a_s_prime(s, gamma, a=None):
    """Derivative of the loss-system retrial rate in ``gamma``."""
    rs = math.sqrt(s)
    if a is None:
        a = a_s(s, gamma)
    return -a * (gamma + 1.0 / rs) / (1.0 - gamma / rs - gamma * a)


def gamma_hat(s, tol=1e-10):
    """Maximiser of ``L_s``: the root of ``gamma a_s(gamma) = (1 - gamma/sqrt(s)) / 2``."""
    rs = math.sqrt(s)

    def resid(g):
        a = a_s(s, g)
        da = a_s_prime(s, g, a)
        y = 1.0 - g / rs
        val = g * a / y - 0.5
        deriv = (a + g * da) / y + g * a / (rs * y * y)
        return val, deriv

    hi = min(GAMMA_HAT_INF_BRACKET[1], rs * (1.0 - 1e-9))
    lo = min(GAMMA_HAT_INF_BRACKET[0], 0.5 * hi)
    x0 = min(1.0, 0.5 * (lo + hi))
    return newton_bisect(resid, lo, hi, x0=x0, xtol=1e-15, ftol=tol)


def gamma_hat_inf(tol=1e-12):
    """Large-``s`` limit of ``gamma_hat``: the root of ``gamma a_inf(gamma) = 1/2``."""

    def resid(g):
        a = solve_a_inf(g)
        return g * a - 0.5, a + g * a_inf_prime(g, a)

    lo, hi = GAMMA_HAT_INF_BRACKET
    return newton_bisect(resid, lo, hi, x0=1.0, xtol=1e-15, ftol=tol)


def L_max(s, check=True):
    """Peak value ``L_s(gamma_hat)``, checked against a direct search when ``check``."""
    rs = math.sqrt(s)
    g = gamma_hat(s)
    value = g / (g + 0.5 / rs) * (rs - g)
    if check:
        _, direct = golden_max(lambda x: L_s_eval(s, x), rs * 1e-6, rs * (1.0 - 1e-6), xtol=1e-10)
        if abs(direct - value) > 1e-8 * max(1.0, value):
            raise ConsistencyError(f"L_max closed form {value!r} disagrees with direct search {direct!r}")
    return value


def solve_problem4(s, epsilon, tol=1e-9):
    """Loads with ``lam (1 - D_F^R(s, lam + Omega)) = epsilon`` for the loss system."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon!r}")
    rs = math.sqrt(s)
    g_hat = gamma_hat(s)
    threshold = rs * L_max(s, check=False)

    def to_load(g):
        return s - g * rs

    if abs(epsilon - threshold) <= tol * threshold:
        return CarriedTrafficResult(1, (to_load(g_hat),), threshold, g_hat, gammas=(g_hat,),
                                    resolution="tangent root at the peak")
    if epsilon > threshold:
        return CarriedTrafficResult(0, (), threshold, g_hat, resolution="target above the peak")

    def resid(g):
        return rs * L_s_eval(s, g) - epsilon

    lo = 0.5 * min(g_hat, epsilon / s**1.5)
    while resid(lo) > 0:
        lo *= 0.5
        if lo < 1e-12:
            raise ConvergenceError("could not bracket the small-gamma root")
    hi = rs * (1.0 - 1e-12)
    if resid(hi) > 0:
        raise ConvergenceError("could not bracket the large-gamma root")
    g_small = bisect(resid, lo, g_hat, xtol=1e-15)
    g_large = bisect(resid, g_hat, hi, xtol=1e-15)
    # larger gamma means smaller load
    loads = (to_load(g_large), to_load(g_small))
    return CarriedTrafficResult(2, loads, threshold, g_hat, gammas=(g_large, g_small),
                                resolution="exact: L_s is unimodal")


def scan_problem4(s, epsilon, policy, points=512):
    """Experimental grid scan for the retrial carried-traffic equation with any policy.

    Returns every refined sign change of ``sqrt(s) L_{s,F}(gamma) - epsilon``
    on ``points`` interior grid nodes; no completeness claim is made.
    """
    if not isinstance(policy, AdmissionPolicy):
        raise DomainError("policy must be an AdmissionPolicy")
    rs = math.sqrt(s)

    def resid(g):
        return rs * L_s_eval(s, g, policy) - epsilon

    grid = np.linspace(0.0, rs, points + 2)[1:-1]
    roots = _flank_roots(resid, grid[0], grid[-1], points - 1)
    loads = tuple(sorted(s - g * rs for g in roots))
    return CarriedTrafficResult(len(loads), loads, gammas=tuple(roots),
                                resolution=f"experimental {points}-point scan, no completeness claim")


def figure2_data(s, grid_size=256):
    """Pairs ``(delta, L_s(delta sqrt(s)) / sqrt(s))`` on an interior grid of ``(0, 1)``."""
    if grid_size < 2:
        raise DomainError(f"grid_size must be at least 2, got {grid_size!r}")
    rs = math.sqrt(s)
    deltas = np.linspace(0.0, 1.0, grid_size + 2)[1:-1]
    return [(float(d), L_s_eval(s, d * rs) / rs) for d in deltas]
