"""Erlang B and C formulas and their QED-coordinate wrappers.

Loads are continuous (``lam >= 0``), server counts are integers. All values
come from the inverse recursion

    1/B(k) = 1 + (k / lam) / B(k-1),   1/B(0) = 1,

which only adds positive terms and therefore loses no precision.
"""

import math
from dataclasses import dataclass

from .exceptions import DomainError


@dataclass(frozen=True)
class SystemLoad:
    """Server count ``s`` and load ``lam`` with QED slack ``gamma = (s - lam)/sqrt(s)``."""

    s: int
    lam: float

    def __post_init__(self):
        _check_servers(self.s)
        if self.lam < 0:
            raise DomainError(f"load must be nonnegative, got {self.lam!r}")

    @property
    def gamma(self):
        return (self.s - self.lam) / math.sqrt(self.s)

    @classmethod
    def from_gamma(cls, s, gamma):
        return cls(s, s - gamma * math.sqrt(s))


def _check_servers(s):
    if int(s) != s or s < 1:
        raise DomainError(f"server count must be a positive integer, got {s!r}")


def erlang_b_inv(s, lam):
    """``1 / B(s, lam)``; infinite when ``lam == 0``."""
    _check_servers(s)
    if lam < 0:
        raise DomainError(f"load must be nonnegative, got {lam!r}")
    if lam == 0:
        return math.inf
    inv = 1.0
    for k in range(1, int(s) + 1):
        inv = 1.0 + inv * (k / lam)
    return inv


def erlang_b(s, lam):
    """Blocking probability of the M/M/s/s loss system."""
    return 1.0 / erlang_b_inv(s, lam)


def erlang_c_inv(s, lam):
    """``1 / C(s, lam) = lam/s + (1 - lam/s) / B(s, lam)``."""
    if not lam > 0:
        raise DomainError(f"Erlang C needs lambda > 0, got {lam!r}")
    rho = lam / s
    return rho + (1.0 - rho) * erlang_b_inv(s, lam)


def erlang_c(s, lam):
    """Delay probability of the M/M/s queue.

    For ``lam >= s`` the same algebraic expression is returned; it is then
    not a probability.
    """
    return 1.0 / erlang_c_inv(s, lam)


def g_s(s, gamma):
    """``sqrt(s) B(s, s - gamma sqrt(s))`` for ``gamma <= sqrt(s)``."""
    rs = math.sqrt(s)
    if gamma > rs:
        raise DomainError(f"g_s needs gamma <= sqrt(s) = {rs!r}, got {gamma!r}")
    return rs * erlang_b(s, max(s - gamma * rs, 0.0))


def f_s(s, gamma):
    """``(1 - gamma/sqrt(s)) g_s(gamma) = (sqrt(s) - gamma) B``."""
    rs = math.sqrt(s)
    if gamma > rs:
        raise DomainError(f"f_s needs gamma <= sqrt(s) = {rs!r}, got {gamma!r}")
    return (rs - gamma) * erlang_b(s, max(s - gamma * rs, 0.0))


def f_s_prime(s, gamma):
    """Derivative of ``f_s`` in ``gamma``: ``-B (1 + s - lam + lam B)``."""
    rs = math.sqrt(s)
    lam = max(s - gamma * rs, 0.0)
    b = erlang_b(s, lam)
    return -b * (1.0 + s - lam + lam * b)
