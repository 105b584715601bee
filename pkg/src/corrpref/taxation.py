"""Steady-state welfare in a human-capital model with progressive taxation.

Welfare is a sum of seven closed-form terms in the progressivity rate
``tau``.  The optimal rate is found on a coarse grid and refined with a
golden-section search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _numerics
from .errors import DomainViolation, ParamOutOfRange

TAU_MAX = 0.999


@dataclass(frozen=True)
class TaxParams:
    beta: float = 0.2939
    gamma: float = -9.0
    labor_elasticity: float = 0.2
    ability_persistence: float = 0.6
    lambda_: float = 0.625
    mu_labor: float = 0.375
    rho_inv: float = 0.25 / 0.625
    alpha_h: float = 0.35
    k_scale: float = 1.0
    omega: float = 1.0

    @property
    def eta(self) -> float:
        return 1.0 + 1.0 / self.labor_elasticity

    @property
    def sigma_eps(self) -> float:
        return self.omega ** 2

    @property
    def mu_eps(self) -> float:
        return self.omega / 2.0


class WelfareTerms(NamedTuple):
    income: float
    labor: float
    effort: float
    capital: float
    saving: float
    risk: float
    insurance: float

    @property
    def total(self) -> float:
        return float(sum(self))


def _log(v, what):
    if not v > 0:
        raise DomainViolation(f"{what} = {v} must be positive")
    return math.log(v)


def steady_welfare_terms(p: TaxParams, tau: float) -> WelfareTerms:
    """The seven summands of steady-state welfare at progressivity ``tau``."""
    if not 0.0 <= tau < 1.0:
        raise ParamOutOfRange(f"tau must lie in [0, 1), got {tau}")
    if abs(p.ability_persistence) >= 1.0:
        raise ParamOutOfRange("ability persistence must lie in (-1, 1)")
    b, lam, rho, al, om = p.beta, p.lambda_, p.rho_inv, p.alpha_h, p.omega
    me = p.mu_labor / p.eta
    var = om * om / (1.0 - p.ability_persistence ** 2)
    D = 1.0 - b * (al + rho * lam)
    Dt = 1.0 - b * (al + rho * lam * (1.0 - tau))
    gap = 1.0 - al - rho * lam * (1.0 - tau)
    for name, v in (("1 - beta(alpha + rho lambda)", D),
                    ("1 - beta(alpha + rho lambda (1 - tau))", Dt),
                    ("1 - alpha - rho lambda (1 - tau)", gap),
                    ("1 - alpha - rho lambda", 1.0 - al - rho * lam)):
        if not v > 0:
            raise DomainViolation(f"{name} = {v} must be positive")
    l_sav = _log(rho * b * lam, "rho beta lambda") - _log(1.0 - b * al, "1 - beta alpha")
    lab = me * _log(me, "mu / eta") + me * math.log(1.0 - b * al) - me * math.log(Dt)
    disp = tau * (2.0 - tau) * lam * lam * var / (2.0 * gap * gap)

    income = ((1.0 - b) * lam * rho / (D * (1.0 - al - rho * lam))
              * (_log(1.0 - tau, "1 - tau") + l_sav + lab + disp))
    labor = (1.0 - b * al) / D * lab
    effort = -me * (1.0 - b * al) / Dt
    capital = lam * b / D * (_log(p.k_scale, "k") + rho * math.log(1.0 - tau) + rho * l_sav)
    saving = _log(1.0 - (1.0 - tau) * rho * b * lam / (1.0 - b * al), "saving share")
    risk = (p.gamma * b * lam * lam * (1.0 - b) * (1.0 - tau) ** 2 * var
            / (2.0 * (1.0 - b * al - b * rho * lam + b * rho * lam * tau) ** 2))
    insurance = (1.0 - b * al) / D * disp
    return WelfareTerms(income, labor, effort, capital, saving, risk, insurance)


def steady_welfare(p: TaxParams, tau: float) -> float:
    return steady_welfare_terms(p, tau).total


class TaxOptimum(NamedTuple):
    tau_star: float
    welfare: float
    curve: list  # (tau, welfare) pairs


def optimize_tau(p: TaxParams, grid_points: int = 1000, xtol: float = 1e-6,
                 shift: float = 0.0) -> TaxOptimum:
    """Welfare-maximising progressivity on [0, 0.999].

    ``shift`` adds a constant to the objective; it exists so the invariance
    of the argmax can be tested.
    """
    taus = np.linspace(0.0, TAU_MAX, grid_points)
    vals = np.array([steady_welfare(p, t) + shift for t in taus])
    i = int(np.argmax(vals))  # first maximiser, i.e. the smallest tau on ties
    lo, hi = taus[max(i - 1, 0)], taus[min(i + 1, grid_points - 1)]
    t, w = _numerics.golden_max(lambda t: steady_welfare(p, t) + shift, lo, hi, xtol=xtol)
    if vals[i] > w:
        t, w = float(taus[i]), float(vals[i])
    return TaxOptimum(float(t), float(w), list(zip(taus.tolist(), vals.tolist())))
