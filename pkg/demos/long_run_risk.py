"""Cost of persistent growth shocks in a long-run-risk economy.

Run with ``python3 demos/long_run_risk.py``.
"""
from corrpref.longrun import LrrParams, lrr_persistence_premium, match_longrun_volatility
from corrpref.reproduce import table1_rows

for row in table1_rows():
    print(f"a={row['a']:.3f}  risk aversion={row['risk_aversion']:>4}  "
          f"premium={row['premium']:.4f}")

# Give the iid economy the same long-run variance and the premium barely moves.
m = match_longrun_volatility(LrrParams.with_risk_aversion(7.5))
print(f"matched iid volatility {m.sigma_iid:.7f}, premium {m.premium:.4f}")

for a in (0.5, 0.9, 0.95, 0.979):
    print(f"persistence {a:.3f}: premium {lrr_persistence_premium(LrrParams(a=a)):.4f}")
