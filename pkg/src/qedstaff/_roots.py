"""Bracketed scalar root finders shared by the solver modules."""

import math

from .exceptions import ConvergenceError


def newton_bisect(func, lo, hi, x0=None, xtol=1e-14, ftol=0.0, maxiter=200):
    """Safeguarded Newton iteration for a root of ``func`` inside ``[lo, hi]``.

    ``func(x)`` returns the pair ``(value, derivative)``. The bracket must
    contain a sign change. A Newton step that leaves the current bracket,
    or fails to halve the residual, is replaced by a bisection step.
    """
    flo, _ = func(lo)
    fhi, _ = func(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ConvergenceError(f"no sign change on [{lo!r}, {hi!r}]")
    x = 0.5 * (lo + hi) if x0 is None or not lo < x0 < hi else x0
    fx_prev = math.inf
    for _ in range(maxiter):
        fx, dfx = func(x)
        if fx == 0.0 or abs(fx) <= ftol:
            return x
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi = x
        if hi - lo <= xtol * max(1.0, abs(x)):
            return x
        step_ok = dfx != 0.0 and math.isfinite(dfx) and abs(fx) < 0.5 * abs(fx_prev)
        x_new = x - fx / dfx if dfx != 0.0 and math.isfinite(dfx) else math.nan
        if not (lo < x_new < hi) or not (step_ok or fx_prev == math.inf):
            x_new = 0.5 * (lo + hi)
        fx_prev = fx
        if x_new == x:
            return x
        x = x_new
    raise ConvergenceError(f"newton_bisect did not converge in {maxiter} iterations")


def bisect(func, lo, hi, xtol=1e-13, maxiter=400):
    """Plain bisection on a sign change of ``func`` over ``[lo, hi]``."""
    flo = func(lo)
    fhi = func(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ConvergenceError(f"no sign change on [{lo!r}, {hi!r}]")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol * max(1.0, abs(mid)) or mid in (lo, hi):
            return mid
        fm = func(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(func, lo, hi, xtol=1e-10, maxiter=500):
    """Maximiser of a unimodal ``func`` on ``[lo, hi]`` by golden-section search."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(maxiter):
        if b - a <= xtol * max(1.0, abs(c)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = func(d)
    return (c, fc) if fc > fd else (d, fd)
