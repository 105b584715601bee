"""Recursive values as worst cases over distorted beliefs.

Run with ``python3 demos/robustness_duality.py``.
"""
import numpy as np

from corrpref.risk_prefs import EZPower, Exponential, KPModel, Linear, Power
from corrpref.variational import hs_tilted, variational_value

v = np.array([1.0, 2.0, 4.0])
m = np.array([0.2, 0.5, 0.3])
for model in (KPModel(Exponential(0.7), Linear(), 0.9), KPModel(EZPower(-1.0, 0.5), Power(0.5), 0.9)):
    val, worst = variational_value(model, v, m)
    print(f"{model.phi}: certainty equivalent {model.phi.certainty_equivalent(v, m):.10f}")
    print(f"{'':>{len(str(model.phi))}}  minimised value      {val:.10f}, beliefs {np.round(worst, 4)}")
print("exponential tilt:", np.round(hs_tilted(v, m, 0.7), 4))
