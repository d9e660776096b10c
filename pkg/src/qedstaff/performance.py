"""Stationary measures of the many-server system with admission control.

``d_f`` is the probability that an arrival finds all servers busy and
``d_f_r`` the probability that it is denied service. Both are evaluated from
the ratio forms in ``1/B`` and ``F(lam/s)``; the QED-coordinate functions use
the factorisation into the policy-free ``f_s`` and a factor in ``H_s``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .admission import Delay
from .erlang import erlang_b, erlang_b_inv, erlang_c_inv, f_s, f_s_prime, _check_servers
from .exceptions import ConsistencyError, DivergenceError, DomainError, StabilityError

DF = "DF"
DFR = "DFR"


@dataclass(frozen=True)
class MeasureSet:
    """Erlang B, Erlang C, ``D_F``, ``D_F^R`` and the weight ``q`` at one load."""

    s: int
    lam: float
    b: float
    c: float
    d_f: float
    d_f_r: float
    q: float


@dataclass(frozen=True)
class QEDMeasures:
    f_sF: float
    g_sF: float
    f_sF_R: float
    g_sF_R: float


def _check_load(s, lam, policy):
    _check_servers(s)
    if lam < 0:
        raise DomainError(f"load must be nonnegative, got {lam!r}")
    lam_p = policy.lambda_P(s)
    if isinstance(policy, Delay):
        if lam >= s:
            raise StabilityError(f"the delay system needs lambda < s, got {lam!r}")
    elif lam >= lam_p:
        raise StabilityError(f"lambda={lam!r} is not below lambda_P={lam_p!r}")


def d_f(s, lam, policy):
    """Probability that an arrival finds all ``s`` servers busy."""
    _check_load(s, lam, policy)
    if lam == 0:
        return 0.0
    F = policy.F(lam / s)
    return (1.0 + F) / (erlang_b_inv(s, lam) + F)


def d_f_r(s, lam, policy):
    """Probability that an arrival is rejected."""
    _check_load(s, lam, policy)
    if lam == 0:
        return 0.0
    x = lam / s
    # 1 + (1 - s/lam) F(x), written so that no cancellation occurs
    return policy.rejection_factor(x) / (erlang_b_inv(s, lam) + policy.F(x))


def measure(s, lam, policy, variant):
    if variant == DF:
        return d_f(s, lam, policy)
    if variant == DFR:
        return d_f_r(s, lam, policy)
    raise DomainError(f"unknown variant {variant!r}")


def decomposed_measures(s, lam, policy, rtol=1e-10):
    """All measures at ``(s, lam)`` through the Erlang B/C decomposition.

    ``1/D_F = (1-q)/B + q/C`` and ``1/D_F^R = 1/B + q/(1-q) / C``, with
    ``q/(1-q) = G(x) / R(x)`` and ``R`` the policy's rejection factor. Each is
    checked against the direct ratio forms; disagreement beyond ``rtol``
    raises :class:`ConsistencyError`.
    """
    _check_load(s, lam, policy)
    if not lam > 0:
        raise DomainError(f"decomposition needs lambda > 0, got {lam!r}")
    b_inv = erlang_b_inv(s, lam)
    c_inv = erlang_c_inv(s, lam)
    q = policy.q_lambda(s, lam)
    df = 1.0 / ((1.0 - q) * b_inv + q * c_inv)
    x = lam / s
    reject = policy.rejection_factor(x)
    if reject == 0.0:
        dfr = 0.0
    else:
        dfr = 1.0 / (b_inv + policy.G(x) / reject * c_inv)
    direct_df = d_f(s, lam, policy)
    direct_dfr = d_f_r(s, lam, policy)
    for name, a, b in (("D_F", df, direct_df), ("D_F^R", dfr, direct_dfr)):
        if abs(a - b) > rtol * max(abs(a), abs(b)) and abs(a - b) > 1e-300:
            raise ConsistencyError(f"{name} routes disagree at s={s}, lam={lam}: {a!r} vs {b!r}")
    return MeasureSet(s=s, lam=lam, b=1.0 / b_inv, c=1.0 / c_inv, d_f=df, d_f_r=dfr, q=q)


def _qed_parts(s, gamma, policy):
    rs = math.sqrt(s)
    if gamma > rs:
        raise DomainError(f"gamma must not exceed sqrt(s) = {rs!r}, got {gamma!r}")
    gp = policy.gamma_P(s)
    if gamma <= gp:
        raise DivergenceError(f"gamma={gamma!r} is not above gamma_P={gp!r}")
    y = 1.0 - gamma / rs
    fs = f_s(s, gamma)
    H = policy.H(s, gamma)
    return rs, y, fs, H


def qed_measures(s, gamma, policy):
    """``f_{s,F}``, ``g_{s,F}``, ``f_{s,F}^R``, ``g_{s,F}^R`` at slack ``gamma``."""
    rs, y, fs, H = _qed_parts(s, gamma, policy)
    den = 1.0 + fs * H / rs
    # 1 - gamma H / sqrt(s) without cancellation
    num_r = policy.rejection_factor(y)
    fac = (1.0 + y * H) / den
    fac_r = num_r / den
    gs = rs * erlang_b(s, max(s - gamma * rs, 0.0))
    return QEDMeasures(f_sF=fs * fac, g_sF=gs * fac, f_sF_R=fs * fac_r, g_sF_R=gs * fac_r)


def g_sF(s, gamma, policy):
    return qed_measures(s, gamma, policy).g_sF


def g_sF_R(s, gamma, policy):
    return qed_measures(s, gamma, policy).g_sF_R


def f_sF_R(s, gamma, policy):
    return qed_measures(s, gamma, policy).f_sF_R


def f_sF_R_with_derivative(s, gamma, policy):
    """``f_{s,F}^R(gamma)`` and its derivative in ``gamma``."""
    rs, y, fs, H = _qed_parts(s, gamma, policy)
    dfs = f_s_prime(s, gamma)
    dH = policy.H_prime(s, gamma)
    num = policy.rejection_factor(y)
    dnum = -policy.rejection_factor_prime(y) / rs
    den = 1.0 + fs * H / rs
    dden = (dfs * H + fs * dH) / rs
    val = fs * num / den
    deriv = (dfs * num + fs * dnum) / den - fs * num * dden / den**2
    return val, deriv


def carried_traffic(s, lam, policy, variant=DFR):
    """Throughput ``lam (1 - D)`` for ``D = D_F`` or ``D_F^R``."""
    if lam == 0:
        return 0.0
    return lam * (1.0 - measure(s, lam, policy, variant))


def stationary_oracle(s, lam, policy, tail_tol=1e-16, max_states=10_000_000):
    """Brute-force stationary distribution of the admission-controlled queue.

    Builds ``pi_k`` from the detailed-balance products, birth rate
    ``lam p_k`` (``p_k = 1`` below ``s``) and death rate ``min(k, s)``, and
    truncates once a geometric bound on the remaining mass falls below
    ``tail_tol`` times the accumulated mass.

    Returns ``(pi, d_f, d_f_r)`` with ``d_f = sum_{k>=s} pi_k`` and
    ``d_f_r = sum_{k>=s} pi_k (1 - p_k)``. The rejection summand is
    ``1 - p_k``: with it the tail sum reproduces the closed-form rejection
    probability for every policy (for the loss system it gives ``pi_s = B``),
    whereas ``sum pi_k p_k`` gives the admitted-while-busy mass instead.
    """
    _check_load(s, lam, policy)
    if not lam > 0:
        raise DomainError(f"oracle needs lambda > 0, got {lam!r}")
    # weights relative to state s, built downward then upward
    low = [1.0]
    w = 1.0
    for k in range(s, 0, -1):
        w *= k / lam
        low.append(w)
    low.reverse()  # states 0..s
    x = lam / s
    high = []
    admit = []
    mass = math.fsum(low)
    w = 1.0
    k = s
    while True:
        p = policy.admit_prob(k, s)
        admit.append(p)
        nxt = w * x * p
        if nxt == 0.0:
            break
        high.append(nxt)
        mass += nxt
        w = nxt
        k += 1
        r = x * policy.admit_sup(k, s)
        if r < 1.0 and w * r / (1.0 - r) <= tail_tol * mass:
            admit.append(policy.admit_prob(k, s))
            break
        if len(high) > max_states:
            raise StabilityError("stationary tail did not reach tolerance")
    weights = np.array(low + high)
    total = math.fsum(weights)
    pi = weights / total
    busy = pi[s:]
    p_busy = np.array(admit[: len(busy)])
    df = math.fsum(busy)
    dfr = math.fsum(busy * (1.0 - p_busy))
    return pi, df, dfr


def scan_monotone_dfr(s, policy, lo, hi, points=256):
    """True when ``g_{s,F}^R`` is nonincreasing on a ``points`` grid in ``(lo, hi)``."""
    grid = np.linspace(lo, hi, points + 2)[1:-1]
    vals = np.array([g_sF_R(s, g, policy) for g in grid])
    ok = bool(np.all(np.diff(vals) <= 1e-12 * np.maximum(np.abs(vals[:-1]), 1.0)))
    if not ok:
        warnings.warn(f"D_F^R is not monotone in gamma for policy {policy} at s={s}",
                      RuntimeWarning, stacklevel=2)
    return ok
