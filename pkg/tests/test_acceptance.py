"""Acceptance gate: one recorded PASS/FAIL line per criterion (see the summary section)."""
import math
import time
from dataclasses import replace

import numpy as np
import pytest

from corrpref.horizon import StationaryLottery, compare_iid_corr, power_adjustment, value_iterate
from corrpref.info_order import check_prop3, is_more_informative
from corrpref.lotteries import leaf, node
from corrpref.longrun import (LrrParams, hara_comparison_integrals, lrr_persistence_premium,
                              match_longrun_volatility, match_rohde_yu)
from corrpref.premia import dpos_measure, persistence_premium_approx, timing_premium_approx
from corrpref.reproduce import random_tree
from corrpref.risk_prefs import (HARA, Custom, EZPower, Exponential, KPModel, Linear, Power,
                                 ScaledPower, caa_closed_form, caa_transform, kp_values)
from corrpref.suites import random_chain, theorem1_converse, theorem1_forward
from corrpref.taxation import TaxParams, optimize_tau
from corrpref.variational import duality_gap, variational_values


def _near(obs, exp, tol):
    return abs(obs - exp) <= tol


# 1 ---------------------------------------------------------------------------

def test_c01_lrr_premia(criterion):
    ok = True
    for ra, exp in ((7.5, 0.302), (10.0, 0.393)):
        p = LrrParams.with_risk_aversion(ra)
        lrr_persistence_premium(p)
        t = time.perf_counter()
        pi = lrr_persistence_premium(p)
        ms = (time.perf_counter() - t) * 1e3
        good = _near(pi, exp, 1e-3) and ms < 1.0
        criterion(1, good, f"ra={ra}: {pi:.6f} vs {exp} ({ms:.3f} ms)")
        ok &= good
    assert ok


# 2 ---------------------------------------------------------------------------

def test_c02_volatility_match(criterion):
    m = match_longrun_volatility(LrrParams.with_risk_aversion(7.5))
    ok = _near(m.sigma_iid, 0.0079719, 1e-6) and _near(m.premium, 0.299790, 1e-4)
    criterion(2, ok, f"sigma_iid={m.sigma_iid:.7f}, premium={m.premium:.6f}")
    assert ok


# 3 ---------------------------------------------------------------------------

def test_c03_rohde_yu(criterion):
    d = dpos_measure(KPModel(EZPower(-0.61 / 3, 1 / 3), Power(1 / 3), 0.998), 10, 5)
    a = match_rohde_yu(0.008, 0.0)
    prem = lrr_persistence_premium(LrrParams(alpha=a))
    ok = _near(d, 0.008, 1e-3) and _near(a, -0.0345, 1e-3) and _near(prem, 0.0019, 2e-4)
    criterion(3, ok, f"dpos={d:.6f}, alpha={a:.6f}, premium={prem:.6f}")
    assert ok


# 4 ---------------------------------------------------------------------------

def test_c04_hara_integrals(criterion):
    u = ScaledPower(3.0, 1 / 3)
    ints = hara_comparison_integrals(HARA(-2.0, 0.72), HARA(-27.0, 0.0), u, 0.998, 5, 10)
    ok = (_near(ints.er_hara, 0.212242, 1e-3) and _near(ints.er_ez, 3.23792, 1e-2)
          and _near(ints.rra_hara, 0.581891, 1e-3))
    criterion(4, ok, f"integrals {ints.er_hara:.6f}, {ints.er_ez:.5f}, {ints.rra_hara:.6f}")
    assert ok


def test_c04_dpos_ez(criterion):
    d = dpos_measure(KPModel(EZPower(-9.0, 1 / 3), Power(1 / 3), 0.998), 10, 5)
    ok = _near(d, 0.0341, 5e-4)
    criterion(4, ok, f"dpos EZ(gamma=-27)={d:.6f}")
    assert ok


def test_c04_dpos_hara(criterion):
    d = dpos_measure(KPModel(HARA(-2.0, 0.72), ScaledPower(3.0, 1 / 3), 0.998), 10, 5)
    ok = _near(d, 0.0341, 5e-4)
    criterion(4, ok, f"dpos HARA(-2, 0.72)={d:.6f} (expected 0.0341)")
    assert ok


# 5 ---------------------------------------------------------------------------

def test_c05_tax(criterion):
    t = time.perf_counter()
    r0 = optimize_tau(replace(TaxParams(), ability_persistence=0.0))
    r6 = optimize_tau(replace(TaxParams(), ability_persistence=0.6))
    secs = time.perf_counter() - t
    ok = (_near(r0.tau_star, 0.4525, 5e-3) and _near(r6.tau_star, 0.5172, 5e-3)
          and r6.tau_star > r0.tau_star and secs < 1.0)
    criterion(5, ok, f"tau*={r0.tau_star:.4f} / {r6.tau_star:.4f} in {secs:.3f} s")
    assert ok


# 6 ---------------------------------------------------------------------------

def test_c06_worked_garblings(criterion):
    d1 = node(1, [(0.5, node(5, [(1.0, leaf(10))])), (0.5, node(5, [(1.0, leaf(0))]))])
    d1p = node(1, [(1.0, node(5, [(0.5, leaf(10)), (0.5, leaf(0))]))])
    w1 = is_more_informative(d1, d1p).witness
    corr3 = node(1, [(0.5, node(1, [(1.0, leaf(1))])), (0.5, node(0, [(1.0, leaf(0))]))])
    half = [(0.5, leaf(1)), (0.5, leaf(0))]
    iid3 = node(1, [(0.5, node(1, half)), (0.5, node(0, half))])
    w3 = is_more_informative(corr3, iid3).witness
    ok = (w1 is not None and w3 is not None
          and np.allclose(w1.G, [[0.5, 0.5]], atol=1e-9) and w1.residual <= 1e-9
          and np.allclose(w3.G, np.full((2, 2), 0.5), atol=1e-9) and w3.residual <= 1e-9
          and not is_more_informative(d1p, d1) and not is_more_informative(iid3, corr3))
    criterion(6, ok, "worked garblings " + ("reproduced" if ok else "NOT reproduced"))
    assert ok


def test_c06_random_chains(criterion):
    rng = np.random.default_rng(2024)
    failures = small = 0
    for _ in range(500):
        k = int(rng.integers(2, 5))
        pts = np.round(np.exp(rng.uniform(math.log(0.1), math.log(20.0), size=k)), 6)
        ell = dict(zip(pts.tolist(), rng.dirichlet(np.ones(k)).tolist()))
        steps, _ = random_chain(rng, ell, int(rng.integers(1, 6)))
        if not check_prop3(ell, steps):
            failures += 1
            small += k == 2
    criterion(6, failures == 0,
              f"random chains: {failures}/500 fail the informativeness order "
              f"({small} on two-point supports)")
    assert failures == 0


# 7 ---------------------------------------------------------------------------

@pytest.mark.parametrize("phi", [Exponential(1.0), EZPower(-1.0, 0.5)], ids=["exp", "ez"])
def test_c07_forward(criterion, phi):
    rep = theorem1_forward(phi, n=500, seed=7)
    criterion(7, rep.passed, f"{phi}: {len(rep.violations)} violations in {rep.cases_run} chains")
    assert rep.passed


def _r_decreasing():
    return Custom("x + log x", (lambda x: x + np.log(x), lambda x: 1 + 1 / x,
                                lambda x: -1 / x ** 2, lambda x: 2 / x ** 3,
                                lambda x: -6 / x ** 4), lower=0.0)


@pytest.mark.parametrize("phi", [HARA(-0.5, -0.4), _r_decreasing()], ids=["hara", "tabulated"])
def test_c07_converse(criterion, phi):
    rep = theorem1_converse(phi)
    criterion(7, rep.passed, f"converse {getattr(phi, 'name', phi)}: "
                             f"largest gap {rep.stats['largest_gap']}")
    assert rep.passed


# 8 ---------------------------------------------------------------------------

HS = np.geomspace(0.02, 0.2, 6)
MODELS = [KPModel(Exponential(1.0), Linear(), 1.0), KPModel(EZPower(-1.0, 0.5), Linear(), 0.95),
          KPModel(Exponential(2.0), Linear(), 0.9)]


def _slope(gaps):
    return np.polyfit(np.log(HS), np.log(np.abs(gaps)), 1)[0]


def test_c08_persistence_order(criterion):
    ok = True
    for m in MODELS:
        s = _slope([persistence_premium_approx(m, 1.0, 2.0, 1.0, 1 - h).gap for h in HS])
        criterion(8, s >= 2.7, f"persistence {m.phi} slope {s:.3f}")
        ok &= s >= 2.7
    assert ok


def test_c08_timing_order(criterion):
    ok = True
    exact = [timing_premium_approx(MODELS[0], 1.0, 1.0, 2.0, 1.0, 1 - h).gap for h in HS]
    ok &= max(abs(g) for g in exact) <= 1e-12
    criterion(8, ok, f"timing {MODELS[0].phi}, beta=1: gap {max(abs(g) for g in exact):.1e}")
    for m in MODELS[1:]:
        s = _slope([timing_premium_approx(m, 1.0, 1.0, 2.0, 1.0, 1 - h).gap for h in HS])
        criterion(8, s >= 1.7, f"timing {m.phi} slope {s:.3f}")
        ok &= s >= 1.7
    assert ok


# 9 ---------------------------------------------------------------------------

def _closed_form_gap(model, d):
    """Recursive values against the log-sum-exp form of the minimised objective."""
    theta, b = model.phi.theta, model.beta
    rec = kp_values(model, d)
    worst = 0.0
    for n in d.nodes():
        if n.is_leaf:
            continue
        v = np.array([rec[id(ch)] for _, ch in n.branches])
        p = np.array([q for q, _ in n.branches])
        lse = -theta * np.log(p @ np.exp(-(v - v.min()) / theta)) + v.min()
        worst = max(worst, abs(rec[id(n)] - (model.u(n.c) + b * lse)))
    return worst


def test_c09_duality(criterion):
    rng = np.random.default_rng(9)
    hs_gap = hs_oracle = ez_gap = 0.0
    ez = KPModel(EZPower(-1.0, 0.5), Power(0.5), 0.95)
    for _ in range(100):
        d = random_tree(rng)
        hs = KPModel(Exponential(float(rng.uniform(0.3, 3.0))), Linear(), float(rng.uniform(0.5, 1)))
        hs_gap = max(hs_gap, duality_gap(hs, d))
        hs_oracle = max(hs_oracle, _closed_form_gap(hs, d))
        ez_gap = max(ez_gap, duality_gap(ez, d))
    ok = hs_gap <= 1e-7 and hs_oracle <= 1e-7 and ez_gap <= 1e-6
    criterion(9, ok, f"HS gap {hs_gap:.1e} (closed form {hs_oracle:.1e}), EZ gap {ez_gap:.1e}")
    assert ok


# 10 --------------------------------------------------------------------------

def test_c10_horizon(criterion):
    rng = np.random.default_rng(10)
    worst_resid, bad = 0.0, 0
    for _ in range(100):
        k = int(rng.integers(2, 5))
        ell = dict(zip(rng.uniform(0.5, 5.0, size=k).tolist(), rng.dirichlet(np.ones(k)).tolist()))
        rho = float(rng.uniform(0.1, 0.9))
        beta = float(rng.uniform(0.5, 0.95))
        lam = float(rng.uniform(-5.0, rho))
        phi = power_adjustment(lam)
        it = value_iterate(phi, rho, beta, StationaryLottery("iid", ell, 1.0))
        worst_resid = max(worst_resid, it.residual)
        bad += not (np.all(it.state_values <= it.start + 1e-12))
        bad += not compare_iid_corr(phi, rho, beta, ell, 1.0).iid_weakly_preferred
    deg = compare_iid_corr(power_adjustment(-1.0), 0.5, 0.9, {2.0: 1.0}, 2.0).values
    eq = abs(deg[0] - deg[1]) / deg[1]
    ok = bad == 0 and worst_resid <= 1e-9 and eq <= 1e-10
    criterion(10, ok, f"{bad} failures, max residual {worst_resid:.1e}, degenerate rel. gap {eq:.1e}")
    assert ok


# 11 --------------------------------------------------------------------------

def test_c11_caa(criterion):
    worst1 = worst2 = 0.0
    for theta in (2.0, 3.0):
        phi = Exponential(theta)
        for x in np.geomspace(0.1, 10.0, 9):
            worst1 = max(worst1, abs(caa_transform(phi, x) - caa_closed_form(phi, x)))
            worst2 = max(worst2, abs(caa_transform(phi, x, power=2) - x))
    ok = worst1 <= 1e-6 and worst2 <= 1e-5
    criterion(11, ok, f"max error {worst1:.1e} (single), {worst2:.1e} (double)")
    assert ok
