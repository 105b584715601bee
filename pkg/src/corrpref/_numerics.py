"""Small scalar solvers shared across modules."""
import math
import warnings

from scipy import integrate

from .errors import NoRoot, SingularIntegrand

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def bisect(f, lo, hi, xtol=1e-10, maxiter=400, f_lo=None, f_hi=None):
    """Root of a continuous ``f`` on ``[lo, hi]`` by plain bisection.

    Endpoint values may be passed in when they are known in closed form
    (e.g. limits that cannot be evaluated directly).
    """
    f_lo = f(lo) if f_lo is None else f_lo
    f_hi = f(hi) if f_hi is None else f_hi
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise NoRoot(f"bracket [{lo}, {hi}] does not straddle a root "
                     f"(f={f_lo:.3g}, {f_hi:.3g})")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid in (lo, hi):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (f_lo > 0):
            lo, f_lo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def golden_max(f, lo, hi, xtol=1e-6, maxiter=200):
    """Maximize a unimodal ``f`` on ``[lo, hi]`` by golden-section search."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if b - a <= xtol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def quad(f, a, b, tol=1e-10, limit=60):
    """Adaptive Gauss-Kronrod quadrature (QUADPACK) with an error-estimate check.

    ``limit`` caps the number of interval bisections.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=tol, epsrel=1e-13, limit=limit)
    if not math.isfinite(val) or err > max(1e3 * tol, 1e-9 * abs(val)):
        raise SingularIntegrand(f"quadrature on [{a}, {b}] did not converge "
                                f"(value {val:.6g}, error estimate {err:.3g})")
    return val
