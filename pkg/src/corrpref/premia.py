"""Persistence and early-resolution premia.

The persistence premium ``pi(eps)`` is the fraction of future consumption a
decision maker would give up to replace the correlated lottery ``corr(eps)``
by the iid one; the timing premium does the same for gradual versus early
resolution.  Exact values come from bisection on the recursive evaluator;
the approximations expand ``pi`` around ``eps = 1`` through the identities
``f(eps) = g(pi(eps))`` where ``f`` and ``g`` are expected transformed
continuation values.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _numerics
from .errors import CorrprefError, NoRoot, ParamOutOfRange
from .lotteries import corr, corr_perfect, early, gradual, iid, iid_scaled
from .risk_prefs import (KPModel, Linear, arrow_pratt, classify, er_measure,
                         kp_evaluate, present_equivalent)

BISECT_TOL = 1e-10


@dataclass
class PremiumReport:
    epsilon: float
    exact_pi: float = math.nan
    approx_pi: float = math.nan
    terms: tuple = (math.nan, math.nan, math.nan)  # level, slope, curvature
    gap: float = math.nan
    details: dict = field(default_factory=dict)


@lru_cache(maxsize=64)
def _attitudes(phi, beta):
    return classify(phi, beta, grid=(0.05, 50.0, 40))


def _warn_preconditions(model, need_irra=True):
    try:
        c = _attitudes(model.phi, model.beta)
    except (CorrprefError, TypeError):
        return
    missing = [n for n, ok in (("concave", c.concave), ("UPI", c.upi),
                               ("IRRA", c.irra or not need_irra)) if not ok]
    if missing:
        warnings.warn(f"{model.phi} fails {', '.join(missing)}; the premium may not exist",
                      stacklevel=3)


def _solve_premium(value_at, target, tol):
    """pi in [0, 1] with value_at(pi) = target, value_at decreasing."""
    h0 = value_at(0.0) - target
    scale = max(1.0, abs(target))
    if abs(h0) <= 1e-12 * scale:
        return 0.0
    if h0 < 0:
        raise NoRoot(f"the reference lottery is already worth less than the target "
                     f"(gap {h0:.3g}); preconditions are violated")
    hi = 1.0
    try:
        h1 = value_at(hi) - target
    except (CorrprefError, ValueError, ZeroDivisionError):
        hi = 1.0 - 1e-12
        h1 = value_at(hi) - target
    if h1 > 0:
        raise NoRoot("no premium in [0, 1] equates the two lotteries")
    return _numerics.bisect(lambda p: value_at(p) - target, 0.0, hi, xtol=tol,
                            f_lo=h0, f_hi=h1)


def persistence_premium(model: KPModel, c0: float, x: float, y: float, eps: float,
                        tol: float = BISECT_TOL) -> PremiumReport:
    """Exact persistence premium at correlation level ``eps``."""
    _warn_preconditions(model)
    target = kp_evaluate(model, corr(eps, c0, x, y))
    pi = _solve_premium(lambda p: kp_evaluate(model, iid_scaled(p, c0, x, y)), target, tol)
    return PremiumReport(eps, exact_pi=pi)


def timing_premium(model: KPModel, c0: float, k: float, x: float, y: float, eps: float,
                   tol: float = BISECT_TOL) -> PremiumReport:
    """Exact early-resolution premium at signal precision ``eps``."""
    _warn_preconditions(model, need_irra=False)
    target = kp_evaluate(model, gradual(eps, c0, k, x, y))
    pi = _solve_premium(lambda p: kp_evaluate(model, early(p, c0, k, x, y)), target, tol)
    return PremiumReport(eps, exact_pi=pi)


# --------------------------------------------------- Taylor machinery

def _d(phi, v, order):
    return float(phi._deriv(v, order))


def _f_derivs(model, outer, x, y, eps):
    """f(eps) = 1/2 sum_z phi(outer_z + beta phi^{-1}(a_z(eps))) and two derivatives.

    ``a_x`` puts weight (1+eps)/2 on phi(x); ``a_y`` is the mirror image.
    """
    phi, b = model.phi, model.beta
    px, py = _d(phi, x, 0), _d(phi, y, 0)
    D = px - py
    out = np.zeros(3)
    for o, a, da in ((outer[0], (0.5 + eps / 2) * px + (0.5 - eps / 2) * py, D / 2),
                     (outer[1], (0.5 - eps / 2) * px + (0.5 + eps / 2) * py, -D / 2)):
        w = float(phi.inverse(a))
        w1 = da / _d(phi, w, 1)
        w2 = -_d(phi, w, 2) * w1 * w1 / _d(phi, w, 1)
        v = o + b * w
        out += 0.5 * np.array([_d(phi, v, 0),
                               _d(phi, v, 1) * b * w1,
                               _d(phi, v, 2) * (b * w1) ** 2 + _d(phi, v, 1) * b * w2])
    return out


def _g_iid_derivs(model, x, y, pi):
    """g(pi) for the scaled iid lottery with derivatives in pi."""
    phi, b = model.phi, model.beta
    s = 1.0 - pi
    A = 0.5 * (_d(phi, s * x, 0) + _d(phi, s * y, 0))
    A1 = 0.5 * (x * _d(phi, s * x, 1) + y * _d(phi, s * y, 1))
    A2 = 0.5 * (x * x * _d(phi, s * x, 2) + y * y * _d(phi, s * y, 2))
    w = float(phi.inverse(A))
    w1 = A1 / _d(phi, w, 1)
    w2 = (A2 - _d(phi, w, 2) * w1 * w1) / _d(phi, w, 1)
    G = np.zeros(3)
    for z in (x, y):
        v = s * z + b * w
        G += 0.5 * np.array([_d(phi, v, 0),
                             _d(phi, v, 1) * (z + b * w1),
                             _d(phi, v, 2) * (z + b * w1) ** 2 + _d(phi, v, 1) * b * w2])
    # chain rule ds/dpi = -1
    return np.array([G[0], -G[1], G[2]])


def _g_early_derivs(model, k, x, y, pi):
    phi, b = model.phi, model.beta
    s = 1.0 - pi
    out = np.zeros(3)
    for z in (x, y):
        base = k + b * z
        out += 0.5 * np.array([_d(phi, s * base, 0), -base * _d(phi, s * base, 1),
                               base * base * _d(phi, s * base, 2)])
    return out


def _require_linear(model):
    if not isinstance(model.u, Linear):
        raise ParamOutOfRange("the premium expansions are derived for linear felicity")


def persistence_premium_approx(model: KPModel, c0: float, x: float, y: float, eps: float,
                               with_exact: bool = True) -> PremiumReport:
    """Second-order expansion of the persistence premium around ``eps = 1``.

    The expansion is anchored at the exact premium of the perfectly
    persistent lottery, so the error is cubic in ``1 - eps``.  ``details``
    also carries the ingredients of the integral form of the slope, the
    early-resolution measures entering the curvature, and the level term
    linearised at ``pi = 0``.
    """
    _require_linear(model)
    phi, b = model.phi, model.beta
    f1 = _f_derivs(model, (x, y), x, y, 1.0)
    pi1 = persistence_premium(model, c0, x, y, 1.0, tol=1e-14).exact_pi
    g = _g_iid_derivs(model, x, y, pi1)
    g0 = _g_iid_derivs(model, x, y, 0.0)
    dpi = f1[1] / g[1]
    d2pi = (f1[2] - g[2] * dpi * dpi) / g[1]
    e = eps - 1.0
    terms = (pi1, dpi * e, 0.5 * d2pi * e * e)
    approx = sum(terms)

    D = _d(phi, x, 0) - _d(phi, y, 0)

    def slope_integrand(z):
        r = arrow_pratt(phi, z * (1 + b)).R - arrow_pratt(phi, z).R
        return _d(phi, z * (1 + b), 1) / _d(phi, z, 1) * r / z

    details = {
        "f1": f1[0], "f1_prime": f1[1], "f1_second": f1[2],
        "g_at_pi1": g[0], "g_prime_at_pi1": g[1], "g_second_at_pi1": g[2],
        "g0": g0[0], "g0_prime": g0[1], "g0_prime_fd": _g_prime_fd(model, x, y),
        "level_linearized": (f1[0] - g0[0]) / g0[1],
        "slope_integral": _numerics.quad(slope_integrand, y, x),
        "slope_prefactor": -b * D / 4.0,
        "dpi_deps": dpi,
        "er_xx": er_measure(model, x, x), "er_yy": er_measure(model, y, y),
    }
    rep = PremiumReport(eps, approx_pi=approx, terms=terms, details=details)
    if with_exact:
        rep.exact_pi = persistence_premium(model, c0, x, y, eps, tol=1e-14).exact_pi
        rep.gap = rep.exact_pi - approx
    return rep


def _g_prime_fd(model, x, y, h=1e-6):
    return (_g_iid_derivs(model, x, y, h)[0] - _g_iid_derivs(model, x, y, 0.0)[0]) / h


def timing_premium_approx(model: KPModel, c0: float, k: float, x: float, y: float,
                          eps: float, with_exact: bool = True) -> PremiumReport:
    """First-order expansion of the timing premium around ``eps = 1``."""
    _require_linear(model)
    phi, b = model.phi, model.beta
    f1 = _f_derivs(model, (k, k), x, y, 1.0)
    g0 = _g_early_derivs(model, k, x, y, 0.0)
    D = _d(phi, x, 0) - _d(phi, y, 0)
    k1 = -b * D / (4.0 * g0[1])

    def integrand(z):
        return _d(phi, k + b * z, 1) / _d(phi, z, 1) * er_measure(model, z, k)

    J = _numerics.quad(integrand, y, x)
    approx = k1 * J * (1.0 - eps)
    details = {"k1": k1, "integral": J, "f1_prime": f1[1], "g0_prime": g0[1],
               "taylor_slope": f1[1] / g0[1]}
    rep = PremiumReport(eps, approx_pi=approx, terms=(0.0, approx, 0.0), details=details)
    if with_exact:
        rep.exact_pi = timing_premium(model, c0, k, x, y, eps, tol=1e-14).exact_pi
        rep.gap = rep.exact_pi - approx
    return rep


def sweep(fn, model, eps_values, *args):
    """Exact premia over a list of eps values, in input order."""
    return [fn(model, *args, e) for e in eps_values]


# ------------------------------------------------------------ dpos measure

def zero_utility_consumption(u) -> float:
    """Consumption at which the felicity is zero (so period 0 drops out)."""
    return float(u.inverse(0.0))


def dpos_measure(model: KPModel, hi: float, lo: float) -> float:
    """Relative gap between present equivalents of the perfectly correlated and iid lotteries."""
    if not hi > lo > 0:
        raise ParamOutOfRange(f"need hi > lo > 0, got {hi}, {lo}")
    c0 = zero_utility_consumption(model.u)
    ell = {hi: 0.5, lo: 0.5}
    pc = present_equivalent(model, corr_perfect(ell, c0))
    pi = present_equivalent(model, iid(ell, c0))
    return 1.0 - pc / pi
