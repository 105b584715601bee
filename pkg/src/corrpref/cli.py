"""Command-line front end.

Models and tax parameters come from flat ``key = value`` files, lotteries
from JSON.  Results go to standard output as JSON (floats printed with nine
significant digits) or to CSV for sweeps.  Exit status is 0 on success, 1
when a computation fails and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import CorrprefError
from .horizon import compare_iid_corr, power_adjustment
from .info_order import compare
from .lotteries import load_json
from .longrun import LrrParams, lrr_persistence_premium, match_longrun_volatility, match_rohde_yu
from .premia import (dpos_measure, persistence_premium, persistence_premium_approx,
                     timing_premium, timing_premium_approx)
from .risk_prefs import (HARA, EZPower, Exponential, Identity, KPModel, Linear, Log, Power,
                         ScaledPower, arrow_pratt, caa_transform, classify, er_measure,
                         kp_evaluate, present_equivalent)
from .suites import prop1_suite, theorem1_converse, theorem1_forward
from .taxation import TaxParams, optimize_tau, steady_welfare_terms
from .variational import variational_values, duality_gap
from . import reproduce as _repro

MODEL_KEYS = {"family", "alpha", "rho", "theta", "gamma", "b", "beta", "felicity", "scale",
              "felicity_rho"}


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ config

def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {path}")
    out = {}
    for n, line in enumerate(p.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        if k in out:
            raise UsageError(f"{path}:{n}: duplicate key {k!r}")
        out[k] = v
    return out


def _num(cfg, key, default=None):
    if key not in cfg:
        if default is None:
            raise UsageError(f"missing config key {key!r}")
        return default
    try:
        return float(cfg[key])
    except ValueError:
        raise UsageError(f"{key} must be a number, got {cfg[key]!r}") from None


def model_from_config(cfg: dict) -> KPModel:
    unknown = set(cfg) - MODEL_KEYS
    if unknown:
        raise UsageError(f"unknown model keys: {sorted(unknown)}")
    fam = cfg.get("family", "exponential").lower()
    if fam == "identity":
        phi = Identity()
    elif fam == "ezpower":
        phi = EZPower(_num(cfg, "alpha"), _num(cfg, "rho"))
    elif fam == "exponential":
        phi = Exponential(_num(cfg, "theta"))
    elif fam == "hara":
        phi = HARA(_num(cfg, "gamma"), _num(cfg, "b"))
    else:
        raise UsageError(f"unknown family {fam!r}")
    fel = cfg.get("felicity", "linear").lower()
    if fel == "linear":
        u = Linear()
    elif fel == "power":
        u = Power(_num(cfg, "felicity_rho"))
    elif fel == "log":
        u = Log()
    elif fel == "scaled_power":
        u = ScaledPower(_num(cfg, "scale"), _num(cfg, "felicity_rho"))
    else:
        raise UsageError(f"unknown felicity {fel!r}")
    return KPModel(phi, u, _num(cfg, "beta", 1.0))


def tax_params_from_config(cfg: dict) -> TaxParams:
    names = {f.name for f in dataclasses.fields(TaxParams)}
    unknown = set(cfg) - names
    if unknown:
        raise UsageError(f"unknown tax keys: {sorted(unknown)}")
    return TaxParams(**{k: _num(cfg, k) for k in cfg})


# ------------------------------------------------------------------ output

def _round(o):
    if isinstance(o, (float, np.floating)):
        x = float(o)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.9g}")
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.ndarray):
        return _round(o.tolist())
    if isinstance(o, dict):
        return {str(k): _round(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_round(v) for v in o]
    if dataclasses.is_dataclass(o):
        return _round(dataclasses.asdict(o))
    return o


def emit(obj, out=None):
    text = json.dumps(_round(obj), sort_keys=True)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([f"{v:.9g}" if isinstance(v, float) else v for v in r])


def _floats(s: str):
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {s!r}") from None


def _lottery(path):
    if not Path(path).is_file():
        raise UsageError(f"lottery file not found: {path}")
    return load_json(path)


# ---------------------------------------------------------------- commands

def cmd_eval(a):
    m = model_from_config(read_config(a.model))
    d = _lottery(a.lottery)
    out = {"value": kp_evaluate(m, d)}
    try:
        out["present_equivalent"] = present_equivalent(m, d)
    except CorrprefError:
        out["present_equivalent"] = None
    emit(out, a.out)


def cmd_compare(a):
    d1, d2 = _lottery(a.lottery), _lottery(a.other)
    verdict, fwd, back = compare(d1, d2, a.stage)
    out = {"verdict": verdict}
    for tag, c in (("forward", fwd), ("backward", back)):
        if c is not None:
            out[tag] = {"verdict": c.verdict, "reason": c.reason,
                        "G": None if c.witness is None else c.witness.G,
                        "residual": None if c.witness is None else c.witness.residual}
    emit(out, a.out)


def cmd_premium(a):
    m = model_from_config(read_config(a.model))
    eps_values = _floats(a.eps)
    reports = []
    for e in eps_values:
        if a.kind == "persistence":
            r = (persistence_premium_approx(m, a.c0, a.x, a.y, e) if a.approx
                 else persistence_premium(m, a.c0, a.x, a.y, e))
        else:
            if a.k is None:
                raise UsageError("timing premium needs --k")
            r = (timing_premium_approx(m, a.c0, a.k, a.x, a.y, e) if a.approx
                 else timing_premium(m, a.c0, a.k, a.x, a.y, e))
        reports.append(r)
    if a.csv:
        write_csv(a.csv, ["eps", "exact_pi", "approx_pi"],
                  [(r.epsilon, r.exact_pi, r.approx_pi) for r in reports])
    emit(reports[0] if len(reports) == 1 else reports, a.out)


def cmd_measure(a):
    m = model_from_config(read_config(a.model))
    if a.what == "classify":
        out = classify(m.phi, m.beta)
    elif a.what == "arrow_pratt":
        out = arrow_pratt(m.phi, a.x)._asdict()
    elif a.what == "er":
        out = {"er": er_measure(m, a.x, a.y)}
    elif a.what == "dpos":
        out = {"dpos": dpos_measure(m, a.hi, a.lo)}
    else:
        out = {"caa": caa_transform(m.phi, a.x, a.power)}
    emit(out, a.out)


def cmd_calibrate(a):
    if a.what == "table1":
        out = _repro.table1_rows()
    elif a.what == "premium":
        out = {"premium": lrr_persistence_premium(LrrParams.with_risk_aversion(a.ra))}
    elif a.what == "vol_match":
        out = match_longrun_volatility(LrrParams.with_risk_aversion(a.ra))._asdict()
    else:
        out = {"alpha": match_rohde_yu(a.target, a.rho, a.beta)}
    emit(out, a.out)


def cmd_tax(a):
    p = tax_params_from_config(read_config(a.params)) if a.params else TaxParams()
    if a.what == "welfare":
        emit(steady_welfare_terms(p, a.tau)._asdict(), a.out)
        return
    r = optimize_tau(p)
    if a.curve:
        write_csv(a.curve, ["tau", "welfare"], r.curve)
    emit({"tau_star": r.tau_star, "welfare": r.welfare}, a.out)


def cmd_variational(a):
    m = model_from_config(read_config(a.model))
    d = _lottery(a.lottery)
    vals = variational_values(m, d, a.seed)
    nodes = []
    for i, n in enumerate(d.nodes()):
        if not n.is_leaf:
            nodes.append({"index": i, "c": n.c, "value": vals[id(n)][0],
                          "minimiser": vals[id(n)][1]})
    emit({"gap": duality_gap(m, d, a.seed), "nodes": nodes}, a.out)


def cmd_horizon(a):
    cfg = read_config(a.model)
    unknown = set(cfg) - {"alpha", "felicity_rho", "beta"}
    if unknown:
        raise UsageError(f"unknown horizon keys: {sorted(unknown)}")
    dist_path = Path(a.dist)
    if not dist_path.is_file():
        raise UsageError(f"distribution file not found: {a.dist}")
    ell = {float(k): float(v) for k, v in json.loads(dist_path.read_text()).items()}
    r = compare_iid_corr(power_adjustment(_num(cfg, "alpha")), _num(cfg, "felicity_rho"),
                         _num(cfg, "beta"), ell, a.c0)
    emit({"iid_weakly_preferred": r.iid_weakly_preferred, "values": list(r.values)}, a.out)


def cmd_suite(a):
    m = model_from_config(read_config(a.model))
    if a.which == "theorem1":
        rep = theorem1_forward(m.phi, a.n, a.seed)
    elif a.which == "theorem1_converse":
        rep = theorem1_converse(m.phi)
    else:
        rep = prop1_suite(m.phi, m.beta, a.n, a.seed)
    out = dataclasses.asdict(rep)
    out["passed"] = rep.passed
    emit(out, a.out)


def cmd_reproduce(a):
    checks = _repro.run(a.target)
    rows = []
    for c in checks:
        row = {"target": c.target, "name": c.name, "status": "PASS" if c.ok else "FAIL",
               "observed": c.observed, "expected": c.expected, "tol": c.tol}
        if c.name.startswith("runtime"):
            # timings vary run to run; keep stdout deterministic
            print(f"{c.target}: {c.name} = {c.observed:.3g}", file=sys.stderr)
            row["observed"] = None
        rows.append(row)
    out = {"checks": rows, "passed": all(c.ok for c in checks)}
    if a.target in ("table1", "all"):
        out["table1"] = _repro.table1_rows()
    emit(out, a.out)
    return 0 if out["passed"] else 1


# ------------------------------------------------------------------ parser

def build_parser():
    p = argparse.ArgumentParser(prog="corrpref", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(fn=fn)
        sp.add_argument("--out", help="write JSON here instead of standard output")
        return sp

    sp = add("eval", cmd_eval, "value of a lottery")
    sp.add_argument("--model", required=True)
    sp.add_argument("--lottery", required=True)

    sp = add("compare", cmd_compare, "informativeness comparison of two lotteries")
    sp.add_argument("--lottery", required=True)
    sp.add_argument("--other", required=True)
    sp.add_argument("--stage", type=int, default=0)

    sp = add("premium", cmd_premium, "persistence or timing premium")
    sp.add_argument("kind", choices=["persistence", "timing"])
    sp.add_argument("--model", required=True)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--y", type=float, required=True)
    sp.add_argument("--k", type=float)
    sp.add_argument("--c0", type=float, default=1.0)
    sp.add_argument("--eps", required=True, help="value or comma-separated list")
    sp.add_argument("--approx", action="store_true", help="also compute the expansion")
    sp.add_argument("--csv", help="write the sweep as CSV")

    sp = add("measure", cmd_measure, "risk attitudes and correlation measures")
    sp.add_argument("what", choices=["classify", "arrow_pratt", "er", "dpos", "caa"])
    sp.add_argument("--model", required=True)
    sp.add_argument("--x", type=float, default=1.0)
    sp.add_argument("--y", type=float, default=1.0)
    sp.add_argument("--hi", type=float, default=10.0)
    sp.add_argument("--lo", type=float, default=5.0)
    sp.add_argument("--power", type=int, default=1, choices=[1, 2])

    sp = add("calibrate", cmd_calibrate, "long-run-risk calibration")
    sp.add_argument("what", choices=["table1", "premium", "vol_match", "rohde_yu"])
    sp.add_argument("--ra", type=float, default=7.5)
    sp.add_argument("--target", type=float, default=0.008)
    sp.add_argument("--rho", type=float, default=0.0)
    sp.add_argument("--beta", type=float, default=0.998)

    sp = add("tax", cmd_tax, "welfare and optimal progressivity")
    sp.add_argument("what", choices=["optimize", "welfare"])
    sp.add_argument("--params")
    sp.add_argument("--tau", type=float, default=0.5)
    sp.add_argument("--curve", help="CSV file for the welfare curve")

    sp = add("variational", cmd_variational, "variational form versus recursion")
    sp.add_argument("what", choices=["check"])
    sp.add_argument("--model", required=True)
    sp.add_argument("--lottery", required=True)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("horizon", cmd_horizon, "infinite-horizon iid versus persistent streams")
    sp.add_argument("what", choices=["compare"])
    sp.add_argument("--model", required=True, help="keys: alpha, felicity_rho, beta")
    sp.add_argument("--dist", required=True, help="JSON {consumption: probability}")
    sp.add_argument("--c0", type=float, default=1.0)

    sp = add("suite", cmd_suite, "randomized property suites")
    sp.add_argument("which", choices=["theorem1", "theorem1_converse", "prop1"])
    sp.add_argument("--model", required=True)
    sp.add_argument("--n", type=int, default=500)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("reproduce", cmd_reproduce, "reference numbers with pass/fail")
    sp.add_argument("target", choices=sorted(_repro.TARGETS) + ["all"])
    return p


def _threads():
    raw = os.environ.get("CORRPREF_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"CORRPREF_THREADS must be a positive integer, got {raw!r}")
    return n


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        _threads()  # all work is sequential, so any cap is honoured
        rc = args.fn(args)
        return int(rc or 0)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except CorrprefError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
