"""Standard normal kernel and its hazard rate.

The hazard rate ``g(x) = phi(x) / Phi(x)`` is the limiting object behind
every square-root staffing rule in this package. It must stay accurate far
into the lower tail, where both ``phi`` and ``Phi`` underflow, so the lower
tail is routed through ``erfc`` and, below ``MILLS_SWITCH``, through the
asymptotic series of the Mills ratio.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ._roots import newton_bisect
from .exceptions import DomainError

SQRT_2PI = math.sqrt(2.0 * math.pi)
MILLS_SWITCH = -8.0


@dataclass(frozen=True)
class HazardPoint:
    gamma: float
    value: float
    derivative: float

    @classmethod
    def at(cls, gamma):
        return cls(gamma, float(hazard(gamma)), float(hazard_prime(gamma)))


def std_normal_pdf(x):
    return np.exp(-0.5 * np.square(x)) / SQRT_2PI


def std_normal_cdf(x):
    """Phi(x) via erfc, relatively accurate in the lower tail."""
    return 0.5 * special.erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))


def _mills_series(t):
    # Upper-tail Mills ratio (1 - Phi(t)) / phi(t) for t >= 8, summed until
    # the terms of the divergent asymptotic series stop shrinking.
    t2 = t * t
    term = 1.0 / t
    total = term
    k = 1
    while True:
        nxt = -term * (2 * k - 1) / t2
        if abs(nxt) >= abs(term) or abs(nxt) < 1e-17 * abs(total):
            break
        total += nxt
        term = nxt
        k += 1
    return total


def hazard(gamma):
    """Hazard rate ``phi(gamma) / Phi(gamma)`` of the standard normal.

    Strictly decreasing, tends to ``-gamma`` as ``gamma -> -inf`` and to zero
    as ``gamma -> +inf``. Accepts scalars or arrays.
    """
    g = np.asarray(gamma, dtype=float)
    if g.ndim == 0:
        x = float(g)
        if x <= MILLS_SWITCH:
            return 1.0 / _mills_series(-x)
        return float(std_normal_pdf(x) / std_normal_cdf(x))
    out = np.empty_like(g)
    low = g <= MILLS_SWITCH
    out[~low] = std_normal_pdf(g[~low]) / std_normal_cdf(g[~low])
    out[low] = [1.0 / _mills_series(-x) for x in g[low]]
    return out


def log_hazard(gamma):
    """``log(hazard(gamma))`` for scalar ``gamma``, free of underflow in both tails."""
    x = float(gamma)
    if x <= MILLS_SWITCH:
        return -math.log(_mills_series(-x))
    return -0.5 * x * x - math.log(SQRT_2PI) - float(special.log_ndtr(x))


def hazard_prime(gamma):
    """Derivative of the hazard rate, ``-g (gamma + g)``."""
    g = hazard(gamma)
    return -g * (np.asarray(gamma, dtype=float) + g)


def h_inf(gamma):
    """Second-order correction to ``sqrt(s) B(s, s - gamma sqrt(s))``."""
    g = hazard(gamma)
    return -((gamma**3 + (gamma**2 + 2.0) * g) * g) / 3.0


def inverse_hazard(epsilon, tol=1e-12, maxiter=100):
    """The unique ``gamma`` with ``hazard(gamma) == epsilon``."""
    if not epsilon > 0:
        raise DomainError(f"inverse_hazard needs epsilon > 0, got {epsilon!r}")
    lo, hi = -40.0, 40.0
    # Work with log g: it is close to linear in both tails.
    log_eps = math.log(epsilon)
    while log_hazard(lo) < log_eps:
        lo *= 2.0
    while log_hazard(hi) > log_eps:
        hi *= 2.0

    def resid(x):
        return log_hazard(x) - log_eps, -(x + hazard(x))

    gamma = newton_bisect(resid, lo, hi, x0=_initial_guess(epsilon), xtol=1e-15,
                          ftol=0.25 * tol / max(epsilon, 1.0), maxiter=maxiter + 100)
    return gamma


def _initial_guess(epsilon):
    if epsilon >= 1.0:
        return -epsilon
    # phi(x) ~ eps for large x
    return math.sqrt(max(-2.0 * math.log(epsilon * SQRT_2PI), 0.0))
