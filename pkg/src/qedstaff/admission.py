"""Admission policies and their generating functions.

A policy is the sequence ``p_k`` (k >= s) of probabilities that an arrival
finding ``k`` customers in the system joins the queue. Everything the
performance formulas need is carried by the coefficient sequence

    q_n = p_s * p_{s+1} * ... * p_{s+n},   n = 0, 1, ...

through the power series ``G(x) = sum_n q_n x**n``. The generating function
used in the stationary formulas is ``F(x) = x G(x)`` and the QED transform is
``H_s(gamma) = G(1 - gamma / sqrt(s))``.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from scipy.special import gamma as gamma_fn, zeta

from .exceptions import DivergenceError, DomainError, StabilityError

HOLDS = "holds"
FAILS = "fails"
LOSS_SPECIAL = "loss-special"

_SERIES_RTOL = 1e-14
_SERIES_MAXTERMS = 10_000_000


def polylog(order, z):
    """``Li_order(z) = sum_{k>=1} z**k / k**order`` for ``0 <= z < 1`` and non-integer ``order``.

    Small ``z`` sums the series. Closer to 1 the expansion in ``mu = log z``,
    ``Gamma(1-order) (-mu)**(order-1) + sum_k zeta(order-k) mu**k / k!``, is
    used; it converges like ``(mu / 2 pi)**k``.
    """
    if not 0.0 <= z < 1.0:
        raise DomainError(f"polylog is evaluated on [0, 1), got {z!r}")
    if order == int(order):
        raise DomainError(f"polylog needs a non-integer order, got {order!r}")
    if z <= 0.5:
        total, term, k = 0.0, 1.0, 0
        while True:
            k += 1
            term = z**k / k**order
            total += term
            if term <= 1e-17 * total:
                return total
    mu = math.log(z)
    total = gamma_fn(1.0 - order) * (-mu) ** (order - 1.0)
    scale = 1.0
    for k in range(80):
        if k:
            scale *= mu / k
        term = float(zeta(order - k)) * scale
        total += term
        if k > 1 and abs(term) <= 1e-17 * abs(total):
            break
    return total


@dataclass(frozen=True)
class PolicyProfile:
    """Radius data of a policy at a fixed server count."""

    P: float
    gamma_P: float
    F_at_1: float
    Fprime_at_1: float
    condA: str


class AdmissionPolicy:
    """Base class. Subclasses provide ``coefficient``, ``G`` and ``G_prime``."""

    #: lim sup of q_n ** (1/(n+1)); the series G converges for x < 1/P
    P = 0.0

    def coefficient(self, n):
        """``q_n``, the probability that n+1 consecutive queue slots admit."""
        raise NotImplementedError

    def admit_prob(self, k, s):
        """``p_k`` for an arrival meeting ``k >= s`` customers."""
        if k < s:
            raise DomainError(f"admission probabilities are defined for k >= s, got k={k}, s={s}")
        n = k - s
        prev = 1.0 if n == 0 else self.coefficient(n - 1)
        if prev == 0.0:
            return 0.0
        return min(1.0, self.coefficient(n) / prev)

    def admit_sup(self, k, s):
        """An upper bound on ``p_j`` for all ``j >= k``; used for tail bounds."""
        return 1.0

    def G(self, x):
        raise NotImplementedError

    def G_prime(self, x):
        raise NotImplementedError

    # -- derived quantities -------------------------------------------------

    def F(self, x):
        """Generating function ``sum_n q_n x**(n+1)``."""
        if x < 0:
            raise DomainError(f"F is evaluated on x >= 0, got {x!r}")
        return x * self.G(x)

    def F_prime(self, x):
        return self.G(x) + x * self.G_prime(x)

    def rejection_factor(self, x):
        """``1 - (1 - x) G(x) = sum_n (q_{n-1} - q_n) x**n`` with ``q_{-1} = 1``.

        This is the numerator of the rejection probability. Every term of the
        series is nonnegative, so subclasses evaluate it without the
        cancellation in the left-hand form.
        """
        return 1.0 - (1.0 - x) * self.G(x)

    def rejection_factor_prime(self, x):
        return self.G(x) - (1.0 - x) * self.G_prime(x)

    def F_prime_at_1(self):
        if self.P >= 1.0:
            raise DomainError("F'(1) requires a policy with radius parameter P < 1")
        return self.F_prime(1.0)

    def H(self, s, gamma):
        """QED transform ``H_s(gamma) = F(y) / y`` with ``y = 1 - gamma/sqrt(s)``."""
        y = 1.0 - gamma / math.sqrt(s)
        if y < 0:
            raise DomainError(f"H_s needs gamma <= sqrt(s), got gamma={gamma!r}, s={s}")
        return self.G(y)

    def H_prime(self, s, gamma):
        """Derivative of ``H_s`` with respect to ``gamma``."""
        rs = math.sqrt(s)
        return -self.G_prime(1.0 - gamma / rs) / rs

    def lambda_P(self, s):
        """Stability boundary ``s / P`` of the arrival rate (``inf`` when P = 0)."""
        return math.inf if self.P == 0 else s / self.P

    def gamma_P(self, s):
        """Stability boundary in QED coordinates (``-inf`` when P = 0)."""
        if self.P == 0:
            return -math.inf
        return -(1.0 - self.P) / self.P * math.sqrt(s)

    def condA(self):
        return HOLDS

    def profile(self, s):
        finite = self.P < 1.0
        return PolicyProfile(
            P=self.P,
            gamma_P=self.gamma_P(s),
            F_at_1=self.F(1.0) if finite else math.inf,
            Fprime_at_1=self.F_prime_at_1() if finite else math.inf,
            condA=self.condA(),
        )

    def q_lambda(self, s, lam):
        """Weight of the Erlang C part in the B/C decomposition of ``D_F``."""
        if not lam > 0:
            raise DomainError(f"q_lambda needs lambda > 0, got {lam!r}")
        if lam >= self.lambda_P(s):
            raise StabilityError(f"lambda={lam!r} is not below lambda_P={self.lambda_P(s)!r}")
        x = lam / s
        g = self.G(x)
        return g / (1.0 + x * g)

    def _check_radius(self, x):
        if self.P > 0 and x * self.P >= 1.0:
            raise DivergenceError(f"F diverges at x={x!r} (radius 1/P = {1.0 / self.P!r})")


@dataclass(frozen=True)
class Loss(AdmissionPolicy):
    """Reject every arrival that finds all servers busy."""

    P = 0.0

    def coefficient(self, n):
        return 0.0

    def admit_sup(self, k, s):
        return 0.0

    def G(self, x):
        return 0.0

    def G_prime(self, x):
        return 0.0

    def rejection_factor(self, x):
        return 1.0

    def rejection_factor_prime(self, x):
        return 0.0

    def condA(self):
        return LOSS_SPECIAL

    def __str__(self):
        return "loss"


@dataclass(frozen=True)
class Delay(AdmissionPolicy):
    """Admit everyone: the M/M/s queue."""

    P = 1.0

    def coefficient(self, n):
        return 1.0

    def G(self, x):
        self._check_radius(x)
        return 1.0 / (1.0 - x)

    def G_prime(self, x):
        self._check_radius(x)
        return 1.0 / (1.0 - x) ** 2

    def rejection_factor(self, x):
        self._check_radius(x)
        return 0.0

    def rejection_factor_prime(self, x):
        self._check_radius(x)
        return 0.0

    def condA(self):
        return FAILS

    def q_lambda(self, s, lam):
        if not lam > 0:
            raise DomainError(f"q_lambda needs lambda > 0, got {lam!r}")
        if lam > s:
            raise StabilityError(f"lambda={lam!r} exceeds s={s} for the delay system")
        return 1.0

    def __str__(self):
        return "delay"


@dataclass(frozen=True)
class Bernoulli(AdmissionPolicy):
    """Admit a fraction ``p`` of the arrivals that find all servers busy."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"Bernoulli admission needs 0 < p < 1, got {self.p!r}")

    @property
    def P(self):
        return self.p

    def coefficient(self, n):
        return self.p ** (n + 1)

    def admit_sup(self, k, s):
        return self.p

    def G(self, x):
        self._check_radius(x)
        return self.p / (1.0 - self.p * x)

    def G_prime(self, x):
        self._check_radius(x)
        return self.p**2 / (1.0 - self.p * x) ** 2

    def rejection_factor(self, x):
        self._check_radius(x)
        return (1.0 - self.p) / (1.0 - self.p * x)

    def rejection_factor_prime(self, x):
        self._check_radius(x)
        return (1.0 - self.p) * self.p / (1.0 - self.p * x) ** 2

    def __str__(self):
        return f"bernoulli:{self.p:g}"


@dataclass(frozen=True)
class Threshold(AdmissionPolicy):
    """Admit while fewer than ``extra_slots`` customers wait, reject beyond."""

    extra_slots: int

    P = 0.0

    def __post_init__(self):
        if int(self.extra_slots) != self.extra_slots or self.extra_slots < 0:
            raise DomainError(f"threshold needs a nonnegative integer, got {self.extra_slots!r}")

    def coefficient(self, n):
        return 1.0 if n <= self.extra_slots else 0.0

    def admit_sup(self, k, s):
        return 1.0 if k <= s + self.extra_slots else 0.0

    def G(self, x):
        m = self.extra_slots
        if x == 1.0:
            return float(m + 1)
        return math.fsum(x**n for n in range(m + 1))

    def G_prime(self, x):
        return math.fsum(n * x ** (n - 1) for n in range(1, self.extra_slots + 1))

    def rejection_factor(self, x):
        return x ** (self.extra_slots + 1)

    def rejection_factor_prime(self, x):
        m = self.extra_slots
        return (m + 1) * x**m

    def condA(self):
        return LOSS_SPECIAL

    def __str__(self):
        return f"threshold:{self.extra_slots}"


@dataclass(frozen=True)
class Series(AdmissionPolicy):
    """Policy given directly by its coefficient sequence ``q_n``.

    ``terms`` is either a finite sequence or a callable ``n -> q_n``. A finite
    sequence is continued geometrically, ``q_n = q_N * P**(n-N)`` beyond its last
    index ``N``, which makes ``F`` diverge at ``1/P``. For a callable the caller
    declares the radius parameter ``P`` and whether ``F`` diverges at ``1/P``;
    the lim sup is never estimated from finitely many terms. Tail bounds for
    callables assume ``q_{n+1} <= P q_n``, which is checked while summing.
    An optional ``log_terms`` callable ``n -> log q_n`` lets long sums near
    ``1/P`` avoid subnormal coefficients, and an optional ``closed_form``
    callable ``x -> (G(x), G'(x))`` or ``None`` replaces the summation where
    it applies.
    """

    terms: object
    declared_P: float
    divergent: Optional[bool] = None
    label: str = field(default="series", compare=False)
    log_terms: object = field(default=None, compare=False)
    closed_form: object = field(default=None, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.declared_P <= 1.0:
            raise DomainError(f"series radius parameter must lie in [0, 1], got {self.declared_P!r}")
        if not callable(self.terms):
            head = tuple(float(q) for q in self.terms)
            if not head:
                raise DomainError("series needs at least one coefficient")
            prev = 1.0
            for q in head:
                if not 0.0 <= q <= prev:
                    raise DomainError("series coefficients must be nonincreasing within [0, 1]")
                prev = q
            object.__setattr__(self, "terms", head)
            if self.divergent is None:
                object.__setattr__(self, "divergent", self.declared_P > 0 and head[-1] > 0)
        elif self.divergent is None:
            raise DomainError("a callable series must declare whether F diverges at 1/P")

    @classmethod
    def power_law(cls, weight, P, alpha):
        """``q_n = weight * P**n / (n+1)**alpha``; F diverges at 1/P iff alpha <= 1."""
        if not (0 < weight < 1 and 0 < P < 1 and alpha > 0):
            raise DomainError("power-law series needs 0<weight<1, 0<P<1, alpha>0")
        log_w, log_p = math.log(weight), math.log(P)

        def closed_form(x):
            # G(x) = w Li_alpha(z) / z with z = P x
            z = P * x
            if z <= 0.5 or alpha == int(alpha) or z >= 1.0:
                return None
            li = polylog(alpha, z)
            li_down = polylog(alpha - 1.0, z)
            return weight * li / z, weight * P * (li_down - li) / (z * z)

        return cls(lambda n: weight * P**n / (n + 1) ** alpha, P, alpha <= 1.0,
                   label=f"power_law({weight:g},{P:g},{alpha:g})",
                   log_terms=lambda n: log_w + n * log_p - alpha * math.log(n + 1),
                   closed_form=closed_form)

    @classmethod
    def from_file(cls, path):
        """Read a ``P=<value>`` header followed by one ``q_n`` per line."""
        P = None
        terms = []
        for raw in Path(path).read_text().splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.upper().startswith("P="):
                P = float(line.split("=", 1)[1])
            else:
                terms.append(float(line))
        if P is None:
            raise DomainError(f"{path}: missing 'P=<value>' header")
        return cls(terms, P, label=f"series:{path}")

    @property
    def P(self):
        return self.declared_P

    def coefficient(self, n):
        if callable(self.terms):
            return float(self.terms(n))
        head = self.terms
        if n < len(head):
            return head[n]
        return head[-1] * self.declared_P ** (n - len(head) + 1)

    def admit_sup(self, k, s):
        if callable(self.terms):
            return max(self.declared_P, self.admit_prob(k, s))
        n = k - s
        ratios = [self.admit_prob(j, s) for j in range(k, s + len(self.terms))]
        return max([self.declared_P] + ratios) if n < len(self.terms) else self.declared_P

    def condA(self):
        if self.declared_P == 0.0:
            return LOSS_SPECIAL
        return HOLDS if self.divergent else FAILS

    def _sum(self, x, power):
        # sum_n n**power q_n x**n  (power 0 or 1)
        self._check_radius(x)
        if not callable(self.terms):
            head = self.terms
            total = math.fsum((n**power) * q * x**n for n, q in enumerate(head))
            N = len(head)
            r = self.declared_P * x
            qN = head[-1]
            if r > 0 and qN > 0:
                # geometric continuation q_{N+j} = qN P**j, j >= 1
                lead = qN * x ** (N - 1)
                if power == 0:
                    total += lead * r / (1 - r)
                else:
                    total += lead * ((N - 1) * r / (1 - r) + r / (1 - r) ** 2)
            return total
        if x == 0.0:
            return self.coefficient(0) if power == 0 else 0.0
        r = self.declared_P * x
        use_logs = self.log_terms is not None and self.declared_P > 0
        log_x = math.log(x) if use_logs else 0.0
        log_p = math.log(self.declared_P) if use_logs else 0.0
        parts = []
        running = 0.0
        prev = None
        for n in range(_SERIES_MAXTERMS):
            if use_logs:
                log_q = self.log_terms(n)
                if prev is not None and log_q > log_p + prev + 1e-12:
                    raise DomainError(f"series ratio q_{n}/q_{n - 1} exceeds declared P")
                prev = log_q
                lead = math.exp(log_q + n * log_x)
                q = lead
            else:
                q = self.coefficient(n)
                if prev is not None and q > self.declared_P * prev * (1 + 1e-12):
                    raise DomainError(f"series ratio q_{n}/q_{n - 1} exceeds declared P")
                prev = q
                lead = q * x**n
            parts.append((n**power) * lead)
            running += parts[-1]
            if q == 0.0:
                break
            # bound on the remaining tail, using q_{n+j} <= q_n P**j
            if power == 0:
                tail = lead * r / (1 - r)
            else:
                tail = lead * (n * r / (1 - r) + r / (1 - r) ** 2)
            if tail <= _SERIES_RTOL * abs(running) or tail == 0.0:
                break
        else:
            raise DivergenceError("series did not reach its tail tolerance")
        return math.fsum(parts)

    def _closed(self, x):
        if self.closed_form is None:
            return None
        self._check_radius(x)
        return self.closed_form(x)

    def G(self, x):
        exact = self._closed(x)
        if exact is not None:
            return exact[0]
        return self._sum(x, 0)

    def rejection_factor(self, x):
        if callable(self.terms):
            return super().rejection_factor(x)
        self._check_radius(x)
        head = self.terms
        prev = (1.0,) + head[:-1]
        total = math.fsum((a - b) * x**n for n, (a, b) in enumerate(zip(prev, head)))
        P = self.declared_P
        if P > 0 and head[-1] > 0:
            # q_{n-1} - q_n = (1 - P) q_{n-1} beyond the listed terms
            N = len(head)
            total += (1.0 - P) * head[-1] * x**N / (1.0 - P * x)
        return total

    def G_prime(self, x):
        if x == 0.0:
            return self.coefficient(1)
        exact = self._closed(x)
        if exact is not None:
            return exact[1]
        return self._sum(x, 1) / x

    def __str__(self):
        return self.label


def parse_policy(spec):
    """Build a policy from ``loss``, ``delay``, ``bernoulli:<p>``, ``threshold:<m>``
    or ``series:<path>``."""
    text = spec.strip()
    kind, _, arg = text.partition(":")
    kind = kind.lower()
    try:
        if kind == "loss" and not arg:
            return Loss()
        if kind == "delay" and not arg:
            return Delay()
        if kind == "bernoulli" and arg:
            return Bernoulli(float(arg))
        if kind == "threshold" and arg:
            m = int(arg)
            return Threshold(m)
        if kind == "series" and arg:
            return Series.from_file(arg)
    except (ValueError, OSError) as exc:
        raise DomainError(f"bad policy spec {spec!r}: {exc}") from exc
    raise DomainError(f"unknown policy spec {spec!r}")


def F_eval(policy, x):
    return policy.F(x)


def F_prime_at_1(policy):
    return policy.F_prime_at_1()


def H_eval(policy, s, gamma):
    gp = policy.gamma_P(s)
    if gamma <= gp:
        raise DivergenceError(f"H_s diverges for gamma <= gamma_P = {gp!r}")
    return policy.H(s, gamma)


def profile(policy, s):
    return policy.profile(s)


def q_lambda(policy, s, lam):
    return policy.q_lambda(s, lam)
