"""Long-run-risk utilities and premia in closed form, plus calibration helpers.

Consumption growth is ``log c_{t+1} - log c_t = drift + x_t + sigma eps_c``
with a persistent component ``x_{t+1} = a x_t + vol_loading * sigma * eps_x``.
With log felicity and an exponential risk adjustment of parameter ``alpha``
(risk aversion ``1 - alpha``) the time-0 utility has a closed form, both for
the persistent process and for its iid counterpart (``a = 0``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import _numerics
from .errors import NoBracket, UnsupportedRho
from .premia import dpos_measure
from .risk_prefs import EZPower, KPModel, Power, er_measure


@dataclass(frozen=True)
class LrrParams:
    sigma: float = 0.0078
    vol_loading: float = 0.044
    a: float = 0.979
    beta: float = 0.998
    alpha: float = -6.5
    rho: float = 0.0
    x0: float = 0.0
    drift: float = 0.0
    log_c0: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.a < 1.0 and 0.0 < self.beta < 1.0
                and self.sigma >= 0 and self.vol_loading >= 0):
            raise ValueError(f"invalid long-run-risk parameters {self}")

    @classmethod
    def with_risk_aversion(cls, ra: float, **kw) -> "LrrParams":
        return cls(alpha=1.0 - ra, **kw)


def _log_only(p):
    if p.rho != 0.0:
        raise UnsupportedRho(f"closed forms exist only for log felicity (rho=0), got {p.rho}")


def lrr_log_utility(p: LrrParams, persistent: bool = True) -> float:
    """log U0 of the persistent process, or of its iid counterpart."""
    _log_only(p)
    b, s2, v2 = p.beta, p.sigma ** 2, p.vol_loading ** 2
    base = p.log_c0 + b / (1 - b) * p.drift
    if persistent:
        k = 1.0 - b * p.a
        return (base + b / k * p.x0
                + 0.5 * p.alpha * b * s2 / (1 - b) * (1 + v2 * b * b / (k * k)))
    return base + b * p.x0 + 0.5 * p.alpha * b * s2 / (1 - b) * (1 + v2 * b * b)


def lrr_persistence_premium(p: LrrParams, iid_sigma: float | None = None) -> float:
    """Fraction of consumption given up to remove persistence.

    ``iid_sigma`` replaces the shock volatility of the iid leg (used by the
    volatility-matched comparison).
    """
    iid_p = p if iid_sigma is None else replace(p, sigma=iid_sigma)
    return 1.0 - math.exp(lrr_log_utility(p, True) - lrr_log_utility(iid_p, False))


def lrr_timing_premium(p: LrrParams, squared_loading: bool = False) -> float:
    """Closed-form timing premium.

    By default the loading enters linearly, as in the displayed formula;
    ``squared_loading=True`` gives the variant with the loading squared,
    which is how it enters the persistence premium.
    """
    _log_only(p)
    b = p.beta
    load = p.vol_loading ** 2 if squared_loading else p.vol_loading
    expo = 0.5 * p.alpha * b * b * p.sigma ** 2 / (1 - b * b) * (1 + load * b * b / (1 - b * p.a) ** 2)
    return 1.0 - math.exp(expo)


class VolMatch(NamedTuple):
    sigma_iid: float
    premium: float


def match_longrun_volatility(p: LrrParams) -> VolMatch:
    """iid volatility with the same long-run variance, and the premium at that match."""
    _log_only(p)
    v2 = p.vol_loading ** 2
    s_iid = p.sigma * math.sqrt((1 + v2 / (1 - p.a ** 2)) / (1 + v2))
    return VolMatch(s_iid, lrr_persistence_premium(p, iid_sigma=s_iid))


# ---------------------------------------------------------- dpos matching

def dpos_log_closed_form(alpha: float, beta: float = 0.998, hi: float = 10.0,
                         lo: float = 5.0) -> float:
    """Correlation-aversion measure for log felicity, in the published closed form.

    The iid present equivalent uses the exponent ``2 beta`` where the
    recursion gives ``beta (1 + beta)``; see :func:`dpos_measure` with
    :func:`corrpref.risk_prefs.log_felicity_model` for the exact value.
    """
    a = alpha
    num = (0.5 * (lo ** ((1 + beta) * a) + hi ** ((1 + beta) * a))) ** (beta / a)
    den = (0.5 * (lo ** a + hi ** a)) ** (2 * beta / a)
    return 1.0 - num / den


def match_rohde_yu(target_dpos: float, rho: float, beta: float = 0.998, hi: float = 10.0,
                   lo: float = 5.0, alpha_min: float = -60.0, tol: float = 1e-8) -> float:
    """alpha at which the correlation-aversion measure hits ``target_dpos``.

    ``rho > 0`` uses power felicity with the matching power adjustment and
    the recursive evaluator; ``rho = 0`` uses the log closed form.  The
    measure is not monotone in alpha over long ranges, so alpha is scanned
    outward from risk neutrality and the first crossing is refined by
    bisection.
    """
    if not 0.0 < target_dpos < 1.0:
        raise NoBracket(f"target {target_dpos} must lie in (0, 1); alpha = 0 "
                        f"(risk neutrality) is excluded")
    if rho == 0.0:
        fn = lambda a: dpos_log_closed_form(a, beta, hi, lo) - target_dpos
        grid = []
    else:
        fn = lambda a: dpos_measure(KPModel(EZPower(a, rho), Power(rho), beta), hi, lo) - target_dpos
        grid = list(np.linspace(rho, 0.0, 21)[1:-1])
    grid += list(-np.geomspace(1e-9, -alpha_min, 400))
    prev_a, prev_f = grid[0], fn(grid[0])
    for a in grid[1:]:
        f = fn(a)
        if (f > 0) != (prev_f > 0):
            return _numerics.bisect(fn, a, prev_a, xtol=tol, f_lo=f, f_hi=prev_f)
        prev_a, prev_f = a, f
    raise NoBracket(f"no alpha in [{alpha_min}, {grid[0]:.3g}] reaches target {target_dpos}")


# ------------------------------------------------- HARA versus EZ integrals

class HaraIntegrals(NamedTuple):
    er_hara: float
    er_ez: float
    rra_hara: float


def hara_comparison_integrals(hara, ez, u, beta: float, lo: float, hi: float,
                              rra_divisor: float = 5.0, tol: float = 1e-10) -> HaraIntegrals:
    """Integrated early-resolution measures ER(x, x) over [u(lo), u(hi)].

    The third entry integrates the relative risk aversion of the HARA
    adjustment in the published form, ``1 / ((1/(1-gamma) + b/x) * rra_divisor)``.
    """
    a, b = u(lo), u(hi)
    mh, me = KPModel(hara, u, beta), KPModel(ez, u, beta)
    er_h = _numerics.quad(lambda x: er_measure(mh, x, x), a, b, tol=tol)
    er_e = _numerics.quad(lambda x: er_measure(me, x, x), a, b, tol=tol)
    g, bb = hara.gamma, hara.b
    rra = _numerics.quad(lambda x: 1.0 / ((1.0 / (1.0 - g) + bb / x) * rra_divisor), a, b, tol=tol)
    return HaraIntegrals(er_h, er_e, rra)
