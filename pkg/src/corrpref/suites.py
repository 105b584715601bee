"""Randomized property suites tying the order, preference and premium modules together.

``theorem1_forward`` checks that utility never rises along random chains of
elementary correlation-increasing transformations started at an iid
lottery.  ``theorem1_converse`` builds, from a decreasing-relative-risk-
aversion witness, a two-point lottery family on which more correlation is
strictly preferred.  ``prop1_suite`` compares early and late resolution of
the same risk against the local early-resolution inequality.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import CorrprefError, NoWitness
from .info_order import IecitStep, apply_iecit, iid_form
from .lotteries import corr, iecit_mass_bounds, leaf, node
from .risk_prefs import (KPModel, Linear, Log, Power, RiskAdjustment, arrow_pratt, classify,
                         kp_evaluate, kp_values)

GAP_TOL = 1e-9


@dataclass
class SuiteReport:
    """Outcome of a suite.

    ``violations`` holds ``(instance, observed, expected)`` triples.  For the
    converse suite a violation of correlation aversion is the goal, so
    ``expect_violations`` flips the pass criterion.
    """
    name: str
    cases_run: int
    seed: int | None
    violations: list = field(default_factory=list)
    expect_violations: bool = False
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.violations) == self.expect_violations

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, default=_jsonable)

    @classmethod
    def from_json(cls, s: str) -> "SuiteReport":
        return cls(**json.loads(s))


def _jsonable(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


# ------------------------------------------------------------------ helpers

def _felicities(rng):
    r = float(rng.uniform(0.2, 0.9))
    return [Linear(), Power(r), Log()]


def _tree_in_domain(model, d) -> bool:
    try:
        vals = np.array(list(kp_values(model, d).values()))
    except (CorrprefError, ValueError, FloatingPointError):
        return False
    return bool(np.all(model.phi.in_domain(vals)) and np.all(np.isfinite(vals)))


def random_chain(rng, ell, length):
    """Chain of elementary steps from iid(ell); each shift is a random share of the room left."""
    cf = iid_form(ell)
    support = sorted(ell)
    steps, forms = [], [cf]
    for _ in range(length):
        i, j = rng.choice(len(support), size=2, replace=False)
        c, c2 = support[i], support[j]
        room = iecit_mass_bounds(cf, c, c2)
        if room <= 1e-9:
            continue
        step = IecitStep(c, c2, float(rng.uniform(0.05, 1.0) * room))
        cf = apply_iecit(cf, step)
        steps.append(step)
        forms.append(cf)
    return steps, forms


# ------------------------------------------- correlation aversion, forward

def theorem1_forward(phi: RiskAdjustment, n: int = 500, seed: int = 0,
                     tol: float = GAP_TOL, max_support: int = 4,
                     reference: str = "previous") -> SuiteReport:
    """Utility is nonincreasing along random correlation-increasing chains.

    Instances sample: support size 2-4 with log-uniform points on
    [0.1, 20], Dirichlet weights, chains of 1-5 steps, ``beta`` in
    [0.5, 1] and a felicity among linear, power and log (re-drawn until all
    node values lie in the domain of ``phi``).  With ``reference="iid"``
    each lottery is compared only with the iid starting point instead of
    its predecessor.
    """
    if reference not in ("previous", "iid"):
        raise ValueError(f"reference must be 'previous' or 'iid', got {reference!r}")
    rng = np.random.default_rng(seed)
    rep = SuiteReport("theorem1_forward", 0, seed)
    worst = -math.inf
    for case in range(n):
        k = int(rng.integers(2, max_support + 1))
        pts = np.exp(rng.uniform(math.log(0.1), math.log(20.0), size=k))
        ell = dict(zip(pts.tolist(), rng.dirichlet(np.ones(k)).tolist()))
        beta = float(rng.uniform(0.5, 1.0))
        steps, forms = random_chain(rng, ell, int(rng.integers(1, 6)))
        lots = [f.to_lottery(1.0) for f in forms]
        cands = _felicities(rng)
        model = None
        for j in rng.permutation(len(cands)):
            m = KPModel(phi, cands[j], beta)
            if all(_tree_in_domain(m, d) for d in lots):
                model = m
                break
        if model is None:
            continue
        vals = [kp_evaluate(model, d) for d in lots]
        rep.cases_run += 1
        for s in range(1, len(vals)):
            ref = vals[s - 1] if reference == "previous" else vals[0]
            rise = vals[s] - ref
            worst = max(worst, rise / max(1.0, abs(ref)))
            if rise > tol * max(1.0, abs(ref)):
                inst = {"case": case, "ell": ell, "beta": beta, "u": repr(model.u),
                        "chain": [tuple(st) for st in steps[:s]]}
                rep.violations.append((inst, vals[s], f"<= {ref}"))
    rep.stats["max_relative_rise"] = worst
    return rep


# ------------------------------------------ correlation aversion, converse

def converse_instance(phi: RiskAdjustment, grid=None):
    """(beta, x, y) built from a decreasing-relative-risk-aversion witness."""
    cls = classify(phi, grid=grid)
    if cls.irra_witness is None:
        raise NoWitness(f"{phi} shows no interval of decreasing relative risk aversion")
    z, zbar = cls.irra_witness
    beta = min(1.0, 0.5 * (zbar / z - 1.0))
    return beta, zbar / (1.0 + beta), z


def theorem1_converse(phi: RiskAdjustment, n_eps: int = 200, grid=None,
                      tol: float = GAP_TOL) -> SuiteReport:
    """Look for eps < 1 at which the perfectly correlated lottery beats corr(eps).

    Felicity is linear and period-0 consumption sits at ``y``.
    """
    beta, x, y = converse_instance(phi, grid)
    model = KPModel(phi, Linear(), beta)
    top = kp_evaluate(model, corr(1.0, y, x, y))
    rep = SuiteReport("theorem1_converse", 0, None, expect_violations=True,
                      stats={"beta": beta, "x": x, "y": y, "v_perfect": top})
    best = None
    for eps in np.linspace(0.0, 1.0, n_eps + 1)[:-1]:
        rep.cases_run += 1
        v = kp_evaluate(model, corr(float(eps), y, x, y))
        if top - v > tol * max(1.0, abs(top)) and (best is None or top - v > best[1]):
            best = (float(eps), top - v)
            rep.violations.append(({"eps": float(eps), "beta": beta, "x": x, "y": y},
                                   top, f"<= {v}"))
    rep.stats["largest_gap"] = None if best is None else best[1]
    return rep


# ------------------------------------------------------ early resolution

def early_late_pair(c0, c1, branches, probs):
    """Early and late resolution of the same risk.

    ``branches`` lists ``(c2, [(q, c3), ...])``; in the early lottery the
    branch is revealed at t=1, in the late one at t=2.
    """
    subs = [node(c2, [(q, leaf(c3)) for q, c3 in tail]) for c2, tail in branches]
    early_d = node(c0, [(p, node(c1, [(1.0, s)])) for p, s in zip(probs, subs)])
    late_d = node(c0, [(1.0, node(c1, list(zip(probs, subs))))])
    return early_d, late_d


def _eq3_on(phi, beta, xs, y):
    xs = np.asarray(xs, dtype=float)
    z = beta * xs + y
    if not np.all(phi.in_domain(z)):
        return False
    lhs = beta * arrow_pratt(phi, z).A
    rhs = arrow_pratt(phi, xs).A
    return bool(np.all(lhs <= rhs + 1e-12 * (np.abs(lhs) + np.abs(rhs))))


def prop1_suite(phi: RiskAdjustment, beta: float, n: int = 500, seed: int = 0,
                u=None, c_range=(0.1, 20.0), tol: float = 1e-10) -> SuiteReport:
    """Random early/late pairs checked against the early-resolution inequality.

    The inequality is checked on a grid spanning the realized continuation
    values, with ``y = u(c1)``.  Where it holds, early resolution must be
    weakly preferred; a violation is an instance that contradicts this.
    ``stats["reversals"]`` counts pairs where late resolution wins, whatever
    the inequality says.
    """
    rng = np.random.default_rng(seed)
    u = Linear() if u is None else u
    model = KPModel(phi, u, beta)
    rep = SuiteReport("prop1", 0, seed, stats={"reversals": 0, "max_abs_diff": 0.0})
    lo, hi = c_range
    draw = lambda size=None: rng.uniform(lo, hi, size=size)
    for case in range(n):
        k = int(rng.integers(2, 5))
        branches = []
        for _ in range(k):
            t = int(rng.integers(1, 3))
            branches.append((float(draw()), list(zip(rng.dirichlet(np.ones(t)).tolist(),
                                                     draw(t).tolist()))))
        probs = rng.dirichlet(np.ones(k)).tolist()
        c0, c1 = float(draw()), float(draw())
        try:
            e, l = early_late_pair(c0, c1, branches, probs)
            ve, vl = kp_evaluate(model, e), kp_evaluate(model, l)
            W = [kp_evaluate(model, s) for _, s in l.branches[0][1].branches]
        except CorrprefError:
            continue
        rep.cases_run += 1
        diff = ve - vl
        rep.stats["max_abs_diff"] = max(rep.stats["max_abs_diff"], abs(diff))
        scale = tol * max(1.0, abs(ve))
        if diff < -scale:
            rep.stats["reversals"] += 1
            if _eq3_on(phi, beta, np.linspace(min(W), max(W), 50), float(u(c1))):
                inst = {"case": case, "c0": c0, "c1": c1, "branches": branches, "probs": probs}
                rep.violations.append((inst, ve, f">= {vl}"))
    return rep
