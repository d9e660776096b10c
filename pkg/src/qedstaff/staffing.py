"""Square-root staffing for targets on ``D_F`` and ``D_F^R``.

Given ``s`` servers and a target ``epsilon``, find the largest load ``lam``
with ``sqrt(s) D(s, lam) = epsilon``, either without retrials or with the
retrial rate folded in. Three answers are produced:

* ``lambda_opt``, the exact root of the finite-``s`` equation;
* ``lambda_star = s - gamma_star sqrt(s)``, from the large-``s`` limit;
* ``lambda_bullet = lambda_star + r_bullet``, corrected at order ``1/sqrt(s)``.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._roots import bisect
from .admission import AdmissionPolicy
from .exceptions import DomainError, NonUniqueRootError
from .gaussian import h_inf, hazard, hazard_prime, inverse_hazard
from .performance import DF, DFR, g_sF, g_sF_R, measure
from .retrials import solve_cohen

_SCAN_POINTS = 256

CONSISTENT = "consistent"
FROZEN = "frozen"


@dataclass(frozen=True)
class StaffingProblem:
    s: int
    epsilon: float
    policy: AdmissionPolicy
    variant: str = DFR
    retrials: bool = False

    def __post_init__(self):
        if self.variant not in (DF, DFR):
            raise DomainError(f"variant must be {DF!r} or {DFR!r}, got {self.variant!r}")
        if self.retrials and self.variant != DFR:
            raise DomainError("with retrials only the rejection target (DFR) is supported")
        lo, hi = epsilon_range(self.s, self.policy, self.variant)
        if not lo < self.epsilon < hi:
            raise DomainError(
                f"epsilon={self.epsilon!r} outside the solvable interval ({lo:g}, {hi:g}) "
                f"for variant {self.variant} with s={self.s}"
            )


@dataclass(frozen=True)
class StaffingSolution:
    lambda_opt: float
    gamma_star: float
    lambda_star: float
    gamma_bullet: float
    lambda_bullet: float
    r_bullet: float
    achieved_opt: float
    achieved_star: float
    achieved_bullet: float
    warnings: tuple = field(default=())


def epsilon_range(s, policy, variant):
    """Open interval of targets with a unique exact solution."""
    rs = math.sqrt(s)
    if variant == DF:
        return 0.0, rs
    return 0.0, (1.0 - min(policy.P, 1.0)) * rs


def h_inf_F(gamma, policy):
    """Order-``1/sqrt(s)`` correction of ``sqrt(s) D_F``."""
    F1, dF1 = _F_data(policy)
    g = hazard(gamma)
    return (1.0 + F1) * h_inf(gamma) - (gamma * dF1 + (1.0 + F1) * F1 * g) * g


def h_inf_F_R(gamma, policy):
    """Order-``1/sqrt(s)`` correction of ``sqrt(s) D_F^R``."""
    F1, _ = _F_data(policy)
    g = hazard(gamma)
    return h_inf(gamma) - (gamma + g) * g * F1


def _F_data(policy):
    if policy.P >= 1.0:
        raise DomainError("corrections need F(1) finite, which fails for P = 1")
    return policy.F(1.0), policy.F_prime_at_1()


def _g_fun(policy, variant):
    return g_sF if variant == DF else g_sF_R


def _gamma_bracket(s, policy, g, epsilon):
    rs = math.sqrt(s)
    gp = policy.gamma_P(s)
    if math.isfinite(gp):
        lo = gp + 1e-9 * (rs - gp)
    else:
        lo = -1.0
        while g(s, lo, policy) <= epsilon:
            lo *= 2.0
            if lo < -1e8:
                raise DomainError("could not bracket the exact staffing root")
    return lo, rs


def solve_gamma(s, epsilon, policy, variant=DFR, xtol=1e-12):
    """Root ``gamma`` of ``g(gamma) = epsilon`` with ``g = g_{s,F}`` or ``g_{s,F}^R``.

    For ``DFR`` a 256-point scan checks monotonicity first; if the function is
    not monotone every sign change on the scan is refined and more than one
    root raises :class:`NonUniqueRootError`.
    """
    g = _g_fun(policy, variant)
    lo, hi = _gamma_bracket(s, policy, g, epsilon)

    def resid(x):
        return g(s, x, policy) - epsilon

    if variant == DFR:
        grid = np.linspace(lo, hi, _SCAN_POINTS)
        vals = np.array([resid(x) for x in grid])
        slack = 1e-12 * np.maximum(np.abs(vals[:-1]) + epsilon, 1.0)
        if np.any(np.diff(vals) > slack):
            warnings.warn(f"D_F^R is not monotone in gamma for {policy} at s={s}",
                          RuntimeWarning, stacklevel=2)
            roots = []
            for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
                if fa == 0.0:
                    roots.append(a)
                elif (fa > 0) != (fb > 0):
                    roots.append(bisect(resid, a, b, xtol=xtol))
            if len(roots) != 1:
                raise NonUniqueRootError(
                    f"{len(roots)} roots of sqrt(s) D_F^R = {epsilon} for {policy} at s={s}", roots)
            return roots[0]
    return bisect(resid, lo, hi, xtol=xtol)


def solve_exact(problem):
    """Exact ``lambda_opt`` of the staffing equation."""
    s, eps, policy = problem.s, problem.epsilon, problem.policy
    rs = math.sqrt(s)
    delta = solve_gamma(s, eps, policy, problem.variant)
    if problem.retrials:
        # eliminate the retrial rate: gamma - a = (gamma - eps) / (1 - eps/sqrt(s))
        gamma = delta + eps - delta * eps / rs
    else:
        gamma = delta
    return s - gamma * rs


def staff_conventional(problem):
    """``(gamma_star, lambda_star)`` from the large-``s`` limit."""
    s, eps, policy = problem.s, problem.epsilon, problem.policy
    if problem.variant == DF:
        F1 = policy.F(1.0) if policy.P < 1.0 else math.inf
        if not math.isfinite(F1):
            raise DomainError("the D_F limit needs F(1) finite")
        gamma_star = inverse_hazard(eps / (1.0 + F1))
    else:
        gamma_star = inverse_hazard(eps)
        if problem.retrials:
            gamma_star += eps
    return gamma_star, s - gamma_star * math.sqrt(s)


def refinement(problem, gamma_star):
    """``r_bullet``, the order-one shift from ``lambda_star`` to ``lambda_bullet``."""
    policy, eps = problem.policy, problem.epsilon
    if problem.variant == DF:
        F1, _ = _F_data(policy)
        return h_inf_F(gamma_star, policy) / ((1.0 + F1) * hazard_prime(gamma_star))
    if problem.retrials:
        d = gamma_star - eps
        return d * eps + h_inf_F_R(d, policy) / hazard_prime(d)
    return h_inf_F_R(gamma_star, policy) / hazard_prime(gamma_star)


def achieved(problem, lam, omega=None):
    """``sqrt(s) D`` at load ``lam``.

    With retrials the load is inflated by ``omega``; when ``omega`` is None
    it is the retrial rate solved at ``lam`` itself.
    """
    s = problem.s
    if lam <= 0:
        return 0.0
    if problem.retrials:
        if omega is None:
            omega = solve_cohen(s, lam, problem.policy).omega
        lam = lam + omega
    return math.sqrt(s) * measure(s, lam, problem.policy, problem.variant)


def staff_refined(problem, retrial_load=CONSISTENT):
    """Exact, conventional and refined staffing levels for one problem.

    ``retrial_load`` only affects the achieved values when retrials are on:
    ``"consistent"`` solves the retrial rate at each load separately,
    ``"frozen"`` reuses the rate solved at ``lambda_opt`` for all three.
    """
    if retrial_load not in (CONSISTENT, FROZEN):
        raise DomainError(f"retrial_load must be {CONSISTENT!r} or {FROZEN!r}, got {retrial_load!r}")
    s = problem.s
    rs = math.sqrt(s)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lam_opt = solve_exact(problem)
    gamma_star, lam_star = staff_conventional(problem)
    r = float(refinement(problem, gamma_star))
    lam_bullet = lam_star + r
    omega = None
    if problem.retrials and retrial_load == FROZEN:
        omega = solve_cohen(s, lam_opt, problem.policy).omega
    return StaffingSolution(
        lambda_opt=lam_opt,
        gamma_star=gamma_star,
        lambda_star=lam_star,
        gamma_bullet=gamma_star - r / rs,
        lambda_bullet=lam_bullet,
        r_bullet=r,
        achieved_opt=achieved(problem, lam_opt, omega),
        achieved_star=achieved(problem, lam_star, omega),
        achieved_bullet=achieved(problem, lam_bullet, omega),
        warnings=tuple(str(w.message) for w in caught),
    )


@dataclass(frozen=True)
class GapRow:
    s: int
    lambda_opt: float
    lambda_star: float
    lambda_bullet: float
    gap_star: float
    gap_bullet: float


def gap_scan(policy, epsilon, variant, retrials, s_list):
    """Optimality gaps ``lambda_opt - lambda_star`` and ``lambda_opt - lambda_bullet`` per ``s``."""
    rows = []
    for s in s_list:
        sol = staff_refined(StaffingProblem(s, epsilon, policy, variant, retrials))
        rows.append(GapRow(s, sol.lambda_opt, sol.lambda_star, sol.lambda_bullet,
                           sol.lambda_opt - sol.lambda_star, sol.lambda_opt - sol.lambda_bullet))
    return rows
