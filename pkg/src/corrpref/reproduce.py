"""Reference computations with their expected values and tolerances.

Each target returns a list of :class:`Check` rows; the command line prints
them and exits non-zero when any row fails.
"""
from __future__ import annotations

import time
from dataclasses import replace
from typing import NamedTuple

import numpy as np

from .lotteries import leaf, node
from .longrun import (LrrParams, dpos_log_closed_form, hara_comparison_integrals,
                      lrr_persistence_premium, match_longrun_volatility, match_rohde_yu)
from .premia import dpos_measure
from .risk_prefs import HARA, EZPower, Exponential, KPModel, Linear, Power, ScaledPower
from .taxation import TaxParams, optimize_tau
from .variational import duality_gap


class Check(NamedTuple):
    target: str
    name: str
    observed: float
    expected: float
    tol: float
    ok: bool

    @classmethod
    def near(cls, target, name, observed, expected, tol):
        return cls(target, name, float(observed), float(expected), float(tol),
                   bool(abs(observed - expected) <= tol))

    @classmethod
    def below(cls, target, name, observed, bound):
        return cls(target, name, float(observed), float(bound), 0.0, bool(observed <= bound))


def table1_rows():
    """Rows of the long-run-risk calibration with the resulting premium."""
    rows = []
    for a, ra in ((0.0, 7.5), (0.979, 7.5), (0.979, 10.0)):
        p = LrrParams.with_risk_aversion(ra, a=a)
        rows.append({"sigma": p.sigma, "vol_loading": p.vol_loading, "a": a, "beta": p.beta,
                     "risk_aversion": ra, "rho": p.rho, "x0": p.x0,
                     "premium": lrr_persistence_premium(p)})
    return rows


def table1():
    out = []
    for ra, expected in ((7.5, 0.302), (10.0, 0.393)):
        p = LrrParams.with_risk_aversion(ra)
        t = time.perf_counter()
        pi = lrr_persistence_premium(p)
        ms = (time.perf_counter() - t) * 1e3
        out.append(Check.near("table1", f"premium ra={ra}", pi, expected, 1e-3))
        out.append(Check.below("table1", f"runtime_ms ra={ra}", ms, 1.0))
    return out


def vol_match():
    m = match_longrun_volatility(LrrParams.with_risk_aversion(7.5))
    return [Check.near("vol_match", "sigma_iid", m.sigma_iid, 0.0079719, 1e-6),
            Check.near("vol_match", "premium", m.premium, 0.299790, 1e-4)]


def rohde_yu():
    beta = 0.998
    ez = KPModel(EZPower(-0.61 / 3, 1 / 3), Power(1 / 3), beta)
    d = dpos_measure(ez, 10.0, 5.0)
    a = match_rohde_yu(0.008, 0.0, beta)
    prem = lrr_persistence_premium(LrrParams(alpha=a))
    return [Check.near("rohde_yu", "dpos ez rho=1/3", d, 0.008, 1e-3),
            Check.near("rohde_yu", "alpha matched rho=0", a, -0.0345, 1e-3),
            Check.near("rohde_yu", "lrr premium at matched alpha", prem, 0.0019, 2e-4),
            Check.near("rohde_yu", "dpos log closed form at matched alpha",
                       dpos_log_closed_form(a, beta), 0.008, 1e-9)]


def hara():
    beta, u = 0.998, ScaledPower(3.0, 1 / 3)
    h = HARA(-2.0, 0.72)
    ez = EZPower(-9.0, 1 / 3)  # gamma = alpha / rho = -27
    ints = hara_comparison_integrals(h, HARA(-27.0, 0.0), u, beta, 5.0, 10.0)
    return [Check.near("hara", "dpos hara(-2, 0.72)", dpos_measure(KPModel(h, u, beta), 10, 5),
                       0.0341, 5e-4),
            Check.near("hara", "dpos ez gamma=-27",
                       dpos_measure(KPModel(ez, Power(1 / 3), beta), 10, 5), 0.0341, 5e-4),
            Check.near("hara", "integral er hara", ints.er_hara, 0.212242, 1e-3),
            Check.near("hara", "integral er ez", ints.er_ez, 3.23792, 1e-2),
            Check.near("hara", "integral rra hara", ints.rra_hara, 0.581891, 1e-3)]


def tax():
    t = time.perf_counter()
    r0 = optimize_tau(replace(TaxParams(), ability_persistence=0.0))
    r6 = optimize_tau(TaxParams())
    secs = time.perf_counter() - t
    return [Check.near("tax", "tau* persistence 0", r0.tau_star, 0.4525, 5e-3),
            Check.near("tax", "tau* persistence 0.6", r6.tau_star, 0.5172, 5e-3),
            Check("tax", "tau*(0.6) - tau*(0)", r6.tau_star - r0.tau_star, 0.0, 0.0,
                  bool(r6.tau_star > r0.tau_star)),
            Check.below("tax", "runtime_s", secs, 1.0)]


def random_tree(rng, width=3, c_range=(0.1, 5.0)):
    """Two-stage tree with ``width`` branches at each stage and Dirichlet weights."""
    lo, hi = c_range
    return node(1.0, [(p, node(float(rng.uniform(lo, hi)),
                               [(q, leaf(float(rng.uniform(lo, hi))))
                                for q in rng.dirichlet(np.ones(width))]))
                      for p in rng.dirichlet(np.ones(width))])


def duality(n: int = 20, seed: int = 0):
    rng = np.random.default_rng(seed)
    hs = ez = 0.0
    ez_model = KPModel(EZPower(-1.0, 0.5), Power(0.5), 0.95)
    for _ in range(n):
        d = random_tree(rng)
        hs_model = KPModel(Exponential(float(rng.uniform(0.3, 3.0))), Linear(),
                           float(rng.uniform(0.5, 1.0)))
        hs = max(hs, duality_gap(hs_model, d))
        ez = max(ez, duality_gap(ez_model, d))
    return [Check.below("duality", f"max gap hs ({n} trees)", hs, 1e-7),
            Check.below("duality", f"max gap ez ({n} trees)", ez, 1e-6)]


TARGETS = {"table1": table1, "vol_match": vol_match, "rohde_yu": rohde_yu,
           "hara": hara, "tax": tax, "duality": duality}


def run(target: str):
    if target == "all":
        return [c for fn in TARGETS.values() for c in fn()]
    return TARGETS[target]()
