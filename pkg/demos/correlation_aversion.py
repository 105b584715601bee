"""Persistent versus iid consumption under recursive preferences.

Run with ``python3 demos/correlation_aversion.py``.
"""
import numpy as np

from corrpref.lotteries import corr, corr_perfect, iid
from corrpref.info_order import is_more_informative
from corrpref.premia import persistence_premium, persistence_premium_approx
from corrpref.risk_prefs import EZPower, Identity, KPModel, Linear, classify, kp_evaluate

ell = {2.0: 0.5, 1.0: 0.5}
ez = KPModel(EZPower(-1.0, 0.5), Linear(), 0.95)
eu = KPModel(Identity(), Linear(), 0.95)

# The persistent stream reveals tomorrow's consumption today.
print("persistent more informative than iid:",
      bool(is_more_informative(corr_perfect(ell), iid(ell))))

# Expected utility cannot tell the two apart; recursive utility can.
for name, m in (("expected utility", eu), ("recursive", ez)):
    print(f"{name:>17}: iid {kp_evaluate(m, iid(ell)):.6f}  "
          f"persistent {kp_evaluate(m, corr_perfect(ell)):.6f}")

print(classify(ez.phi, ez.beta))

# Willingness to pay to remove persistence, exact and expanded near eps = 1.
for eps in np.linspace(0.0, 1.0, 5):
    exact = persistence_premium(ez, 1.0, 2.0, 1.0, eps).exact_pi
    approx = persistence_premium_approx(ez, 1.0, 2.0, 1.0, eps, with_exact=False).approx_pi
    print(f"eps={eps:.2f}  premium={exact:.6f}  expansion={approx:.6f}")
