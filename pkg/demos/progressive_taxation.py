"""Optimal progressivity when ability is inherited.

Run with ``python3 demos/progressive_taxation.py``.
"""
from dataclasses import replace

from corrpref.taxation import TaxParams, optimize_tau

for gamma, label in ((0.0, "log utility"), (-9.0, "risk aversion 10")):
    for phi in (0.0, 0.6):
        p = replace(TaxParams(), gamma=gamma, ability_persistence=phi)
        r = optimize_tau(p)
        print(f"{label:>16}, persistence {phi}: tau* = {r.tau_star:.4f}")
