import math
from dataclasses import replace

import pytest

from corrpref.errors import NoBracket, UnsupportedRho
from corrpref.longrun import (LrrParams, dpos_log_closed_form, hara_comparison_integrals,
                              lrr_log_utility, lrr_persistence_premium, lrr_timing_premium,
                              match_longrun_volatility, match_rohde_yu)
from corrpref.risk_prefs import HARA, Linear


def test_zero_persistence_equals_iid():
    p = LrrParams(a=0.0)
    assert lrr_log_utility(p, True) == pytest.approx(lrr_log_utility(p, False), abs=1e-14)
    assert lrr_persistence_premium(p) == pytest.approx(0.0, abs=1e-14)


def test_risk_neutral_premium_is_zero():
    assert lrr_persistence_premium(LrrParams(alpha=0.0)) == pytest.approx(0.0, abs=1e-14)


def test_premium_rises_with_risk_aversion_and_persistence():
    vals = [lrr_persistence_premium(LrrParams.with_risk_aversion(ra)) for ra in (2, 5, 7.5, 10)]
    assert vals == sorted(vals)
    vals = [lrr_persistence_premium(LrrParams(a=a)) for a in (0.5, 0.9, 0.979)]
    assert vals == sorted(vals)


def test_state_and_drift_shift_both_legs_in_log_utility():
    p = LrrParams()
    q = replace(p, drift=0.01, log_c0=0.3)
    shift = 0.3 + p.beta / (1 - p.beta) * 0.01
    assert lrr_log_utility(q) - lrr_log_utility(p) == pytest.approx(shift)
    assert lrr_log_utility(q, False) - lrr_log_utility(p, False) == pytest.approx(shift)


def test_volatility_match_equates_long_run_variance():
    p = LrrParams.with_risk_aversion(7.5)
    m = match_longrun_volatility(p)
    v2 = p.vol_loading ** 2
    assert m.sigma_iid ** 2 * (1 + v2) == pytest.approx(p.sigma ** 2 * (1 + v2 / (1 - p.a ** 2)))
    assert m.premium < lrr_persistence_premium(p)


def test_timing_variants():
    p = LrrParams()
    assert 0 < lrr_timing_premium(p, squared_loading=True) < lrr_timing_premium(p) < 1


def test_rho_guard():
    with pytest.raises(UnsupportedRho):
        lrr_log_utility(LrrParams(rho=0.5))


def test_rohde_yu_match_hits_target():
    a = match_rohde_yu(0.008, 0.0)
    assert dpos_log_closed_form(a) == pytest.approx(0.008, abs=1e-9)
    with pytest.raises(NoBracket):
        match_rohde_yu(0.0, 0.0)


def test_matching_power_felicity():
    a = match_rohde_yu(0.008, 1 / 3)
    assert a < 0


def test_hara_integrals_ordered():
    ints = hara_comparison_integrals(HARA(-2.0, 0.72), HARA(-27.0, 0.0), Linear(), 0.998, 5, 10)
    assert 0 < ints.er_hara < ints.er_ez
    assert ints.rra_hara > 0
