import warnings

import numpy as np
import pytest

from corrpref.errors import NoRoot, ParamOutOfRange
from corrpref.lotteries import corr, iid_scaled
from corrpref.premia import (dpos_measure, persistence_premium, persistence_premium_approx,
                             sweep, timing_premium, timing_premium_approx,
                             zero_utility_consumption)
from corrpref.risk_prefs import (Custom, EZPower, Exponential, Identity, KPModel, Linear, Log, Power,
                                 kp_evaluate)

EXP = KPModel(Exponential(1.0), Linear(), 1.0)
EZ = KPModel(EZPower(-1.0, 0.5), Linear(), 0.95)


def test_perfect_persistence_matches_grid_oracle():
    target = kp_evaluate(EXP, corr(1.0, 1.0, 2.0, 1.0))
    grid = np.linspace(0, 1, 2001)
    vals = np.array([kp_evaluate(EXP, iid_scaled(p, 1.0, 2.0, 1.0)) for p in grid])
    oracle = grid[np.argmin(np.abs(vals - target))]
    pi = persistence_premium(EXP, 1.0, 2.0, 1.0, 1.0).exact_pi
    assert pi == pytest.approx(0.0758146, abs=1e-6)
    assert abs(pi - oracle) <= 1e-3


def test_premium_solves_indifference():
    for eps in (0.2, 0.7):
        pi = persistence_premium(EZ, 1.0, 2.0, 1.0, eps).exact_pi
        assert kp_evaluate(EZ, iid_scaled(pi, 1.0, 2.0, 1.0)) == pytest.approx(
            kp_evaluate(EZ, corr(eps, 1.0, 2.0, 1.0)), abs=1e-9)


def test_zero_correlation_has_zero_premium():
    assert persistence_premium(EZ, 1.0, 2.0, 1.0, 0.0).exact_pi == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("model", [EXP, EZ])
def test_persistence_premium_increases_in_eps(model):
    pis = [r.exact_pi for r in sweep(persistence_premium, model, np.linspace(0, 1, 9), 1.0, 2.0, 1.0)]
    assert all(b >= a - 1e-12 for a, b in zip(pis, pis[1:]))


def test_timing_premium_decreases_in_eps():
    pis = [r.exact_pi for r in sweep(timing_premium, EZ, np.linspace(0, 1, 9), 1.0, 1.0, 2.0, 1.0)]
    assert all(b <= a + 1e-12 for a, b in zip(pis, pis[1:]))
    assert pis[-1] == pytest.approx(0.0, abs=1e-9)


def test_expected_utility_has_no_premium():
    m = KPModel(Identity(), Linear(), 0.9)
    assert persistence_premium(m, 1.0, 2.0, 1.0, 0.6).exact_pi == pytest.approx(0.0, abs=1e-9)


def test_risk_seeking_raises_noroot():
    convex = Custom("x^2", (lambda x: x * x, lambda x: 2 * x, lambda x: 2 + 0 * x,
                              lambda x: 0 * x, lambda x: 0 * x), lower=0.0)
    m = KPModel(convex, Linear(), 0.9)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(NoRoot):
            persistence_premium(m, 1.0, 2.0, 1.0, 0.8)


@pytest.mark.parametrize("model", [EXP, EZ])
def test_slope_integral_form(model):
    d = persistence_premium_approx(model, 1.0, 2.0, 1.0, 0.9).details
    assert d["f1_prime"] == pytest.approx(d["slope_prefactor"] * d["slope_integral"], rel=1e-6)


@pytest.mark.parametrize("model", [EXP, EZ])
def test_g_prime_against_finite_difference(model):
    d = persistence_premium_approx(model, 1.0, 2.0, 1.0, 0.9).details
    assert d["g0_prime"] == pytest.approx(d["g0_prime_fd"], rel=1e-4)


def test_expansion_terms_sum():
    r = persistence_premium_approx(EZ, 1.0, 2.0, 1.0, 0.9)
    assert sum(r.terms) == pytest.approx(r.approx_pi)
    assert r.gap == pytest.approx(r.exact_pi - r.approx_pi)


def test_timing_expansion_matches_taylor_slope():
    r = timing_premium_approx(EZ, 1.0, 1.0, 2.0, 1.0, 0.9)
    assert r.approx_pi == pytest.approx(r.details["taylor_slope"] * -0.1, rel=1e-6)


def test_expansions_require_linear_felicity():
    with pytest.raises(ParamOutOfRange):
        persistence_premium_approx(KPModel(EZPower(-1.0, 0.5), Power(0.5), 0.9), 1.0, 2.0, 1.0, 0.9)


def test_zero_utility_consumption():
    assert zero_utility_consumption(Linear()) == 0.0
    assert zero_utility_consumption(Log()) == pytest.approx(1.0)


def test_dpos_sign_and_errors():
    assert dpos_measure(KPModel(EZPower(-1.0, 0.5), Power(0.5), 0.95), 10, 5) > 0
    assert dpos_measure(KPModel(EZPower(0.5, 0.5), Power(0.5), 0.95), 10, 5) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ParamOutOfRange):
        dpos_measure(EZ, 5, 10)
