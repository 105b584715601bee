"""Finite-support temporal lotteries.

A temporal lottery is a tree: each node carries the consumption of its period
and a finite distribution over the subtrees of the next period.  All leaves
sit at the same depth (the horizon ``T``).  Trees are immutable; use
:func:`canonicalize` (or :func:`node`, which calls it) to obtain the
canonical representative used for equality, hashing and matrix extraction.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import (MalformedLottery, NegativeConsumption, NonStochastic, NotInMStar,
                     ParamOutOfRange, RaggedHorizon, StageOutOfRange)

PROB_TOL = 1e-12
KEY_DECIMALS = 12


@dataclass(frozen=True, eq=False)
class TemporalLottery:
    """Node of a temporal lottery: consumption ``c`` and weighted children."""

    c: float
    branches: tuple = ()

    @cached_property
    def key(self) -> tuple:
        """Structural key: consumption plus rounded (probability, child key) pairs."""
        return (self.c, tuple((round(p, KEY_DECIMALS), ch.key) for p, ch in self.branches))

    @property
    def is_leaf(self) -> bool:
        return not self.branches

    @cached_property
    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + self.branches[0][1].depth

    def __eq__(self, other):
        if not isinstance(other, TemporalLottery):
            return NotImplemented
        return self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        if self.is_leaf:
            return f"leaf({self.c!r})"
        inner = ", ".join(f"{p:.6g}: {ch!r}" for p, ch in self.branches)
        return f"({self.c!r}; {inner})"

    def nodes(self):
        """Yield every node, parents before children."""
        yield self
        for _, ch in self.branches:
            yield from ch.nodes()

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"c": self.c}
        return {"c": self.c, "next": [{"p": p, "node": ch.to_dict()} for p, ch in self.branches]}


def leaf(c: float) -> TemporalLottery:
    c = float(c)
    if not c >= 0.0:
        raise NegativeConsumption(f"consumption {c} < 0")
    return TemporalLottery(c)


def node(c: float, branches: Iterable) -> TemporalLottery:
    """Build and canonicalize a node from ``(probability, child)`` pairs."""
    return canonicalize(TemporalLottery(float(c), tuple((float(p), ch) for p, ch in branches)))


def canonicalize(d: TemporalLottery) -> TemporalLottery:
    """Validate ``d`` and return its canonical form.

    Zero-probability branches are dropped, identical children merged and the
    remaining branches sorted by child key.  Raises ``NonStochastic``,
    ``RaggedHorizon`` or ``NegativeConsumption``.
    """
    out = _canon(d)
    _check_depth(out)
    return out


def _canon(d):
    if not (isinstance(d.c, (int, float)) and d.c >= 0.0):
        raise NegativeConsumption(f"consumption {d.c} is negative or not a number")
    if not d.branches:
        return TemporalLottery(float(d.c))
    total = 0.0
    merged: dict = {}
    for p, ch in d.branches:
        if not (p >= 0.0 and p <= 1.0 + PROB_TOL):
            raise NonStochastic(f"branch probability {p} outside [0, 1]")
        total += p
        if p == 0.0:
            continue
        ch = _canon(ch)
        if ch.key in merged:
            merged[ch.key] = (merged[ch.key][0] + p, ch)
        else:
            merged[ch.key] = (p, ch)
    if abs(total - 1.0) > PROB_TOL:
        raise NonStochastic(f"branch probabilities sum to {total!r}, not 1")
    ordered = tuple(merged[k] for k in sorted(merged))
    return TemporalLottery(float(d.c), ordered)


def _check_depth(d):
    depths = {ch.depth for _, ch in d.branches}
    if len(depths) > 1:
        raise RaggedHorizon(f"children of node c={d.c} have depths {sorted(depths)}")
    for _, ch in d.branches:
        _check_depth(ch)


def from_dict(obj: Mapping) -> TemporalLottery:
    """Load a lottery from the JSON object layout and canonicalize it."""
    return canonicalize(_raw_from_dict(obj))


def _raw_from_dict(obj):
    try:
        extra = set(obj) - {"c", "next"}
        if extra:
            raise ValueError(f"unknown keys {sorted(extra)}")
        c = float(obj["c"])
        nxt = obj.get("next", [])
        for b in nxt:
            if set(b) - {"p", "node"}:
                raise ValueError(f"unknown branch keys {sorted(set(b) - {'p', 'node'})}")
        branches = tuple((float(b["p"]), _raw_from_dict(b["node"])) for b in nxt)
    except MalformedLottery:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise MalformedLottery(f"malformed lottery JSON: {exc}") from exc
    return TemporalLottery(c, branches)


def load_json(path) -> TemporalLottery:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MalformedLottery(f"{path}: {exc}") from exc
    return from_dict(obj)


def dump_json(d: TemporalLottery, path=None, indent=None):
    text = json.dumps(d.to_dict(), indent=indent)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def deterministic(*stream: float) -> TemporalLottery:
    """Deterministic consumption stream (c0, c1, ..., cT)."""
    d = leaf(stream[-1])
    for c in reversed(stream[:-1]):
        d = node(c, [(1.0, d)])
    return d


# ---------------------------------------------------------------- matrix pair

class MatrixPair(NamedTuple):
    """Two-stage lottery as a stochastic matrix plus a row distribution.

    ``rows`` holds the consumption of each support element so the
    period-(t+1) consumption marginal can be compared across lotteries.
    """
    outcomes: tuple
    M: np.ndarray
    mu: np.ndarray
    rows: tuple

    def consumption_marginal(self) -> dict:
        out: dict = {}
        for c, p in zip(self.rows, self.mu):
            out[c] = out.get(c, 0.0) + float(p)
        return out


def stage_node(d: TemporalLottery, stage: int) -> TemporalLottery:
    """Node reached after ``stage`` deterministic steps from the root."""
    if stage < 0 or stage > d.depth - 2:
        raise StageOutOfRange(f"stage {stage} outside [0, {d.depth - 2}] for horizon {d.depth}")
    cur = d
    for t in range(stage):
        if len(cur.branches) != 1:
            raise StageOutOfRange(f"lottery is random at period {t + 1}, before stage {stage}")
        cur = cur.branches[0][1]
    return cur


def to_matrix_pair(d: TemporalLottery, stage: int = 0) -> MatrixPair:
    """Matrix-vector pair of the distribution drawn at ``stage``.

    Rows are the support elements (next-period node), columns the canonical
    keys of their continuations, in ascending key order.
    """
    at = stage_node(d, stage)
    children = [(p, ch) for p, ch in at.branches if p > 0.0]
    outcomes = sorted({g.key for _, ch in children for _, g in ch.branches})
    col = {k: j for j, k in enumerate(outcomes)}
    M = np.zeros((len(children), len(outcomes)))
    for i, (_, ch) in enumerate(children):
        for q, g in ch.branches:
            M[i, col[g.key]] += q
    mu = np.array([p for p, _ in children])
    return MatrixPair(tuple(outcomes), M, mu, tuple(ch.c for _, ch in children))


# ------------------------------------------------------- conditional form

@dataclass(frozen=True)
class ConditionalForm:
    """Two-period lottery in M* described by (m1, m2).

    ``m1`` maps t=1 consumption to probability; ``m2[c]`` maps t=2
    consumption to its probability given c.
    """
    m1: Mapping = field(default_factory=dict)
    m2: Mapping = field(default_factory=dict)

    def __post_init__(self):
        m1 = {float(c): float(p) for c, p in self.m1.items() if p != 0.0}
        m2 = {float(c): {float(k): float(q) for k, q in self.m2[c].items()} for c in self.m1
              if self.m1[c] != 0.0}
        for name, dist in [("m1", m1)] + [(f"m2(.|{c})", v) for c, v in m2.items()]:
            if any(p < 0 for p in dist.values()) or abs(sum(dist.values()) - 1.0) > PROB_TOL:
                raise NonStochastic(f"{name} is not a probability distribution: {dist}")
        object.__setattr__(self, "m1", m1)
        object.__setattr__(self, "m2", m2)

    def p2(self, c_next, c) -> float:
        return self.m2[c].get(c_next, 0.0)

    def support(self) -> list:
        """Sorted union of t=1 and t=2 consumption levels."""
        pts = set(self.m1)
        for v in self.m2.values():
            pts.update(v)
        return sorted(pts)

    def to_lottery(self, c0: float = 1.0) -> TemporalLottery:
        return node(c0, [(p, node(c, [(q, leaf(k)) for k, q in self.m2[c].items()]))
                         for c, p in self.m1.items()])

    def close_to(self, other: "ConditionalForm", tol: float = 1e-9) -> bool:
        if set(self.m1) != set(other.m1):
            return False
        for c in self.m1:
            if abs(self.m1[c] - other.m1[c]) > tol:
                return False
            keys = set(self.m2[c]) | set(other.m2[c])
            if any(abs(self.p2(k, c) - other.p2(k, c)) > tol for k in keys):
                return False
        return True


def to_conditional_form(d: TemporalLottery) -> ConditionalForm:
    """(m1, m2) description of a two-period lottery whose continuation is a function of c1."""
    if d.depth != 2:
        raise StageOutOfRange(f"conditional form needs horizon 2, got {d.depth}")
    m1: dict = {}
    m2: dict = {}
    for p, ch in d.branches:
        cont = {g.c: q for q, g in ch.branches}
        if ch.c in m2 and m2[ch.c] != cont:
            raise NotInMStar(f"consumption {ch.c} at t=1 has two different continuations")
        m1[ch.c] = m1.get(ch.c, 0.0) + p
        m2[ch.c] = cont
    return ConditionalForm(m1, m2)


# ------------------------------------------------------- parametric families

def _check_unit(name, v):
    if not 0.0 <= v <= 1.0:
        raise ParamOutOfRange(f"{name}={v} outside [0, 1]")


def _check_xy(x, y):
    if not x > y > 0.0:
        raise ParamOutOfRange(f"need x > y > 0, got x={x}, y={y}")


def _normalize(ell: Mapping) -> dict:
    ell = {float(c): float(p) for c, p in ell.items() if p != 0.0}
    if any(p < 0 for p in ell.values()) or abs(sum(ell.values()) - 1.0) > PROB_TOL:
        raise NonStochastic(f"not a probability distribution: {ell}")
    return ell


def iid(ell: Mapping, c0: float = 1.0) -> TemporalLottery:
    """Two-period lottery drawing consumption from ``ell`` independently each period."""
    ell = _normalize(ell)
    cont = [(q, leaf(k)) for k, q in ell.items()]
    return node(c0, [(p, node(c, cont)) for c, p in ell.items()])


def corr_perfect(ell: Mapping, c0: float = 1.0) -> TemporalLottery:
    """Draw once from ``ell`` and repeat the same consumption next period."""
    ell = _normalize(ell)
    return node(c0, [(p, node(c, [(1.0, leaf(c))])) for c, p in ell.items()])


def neg_corr(x: float, y: float, c0: float = 1.0) -> TemporalLottery:
    """Perfectly negatively correlated half-half lottery on {x, y}."""
    return node(c0, [(0.5, node(x, [(1.0, leaf(y))])), (0.5, node(y, [(1.0, leaf(x))]))])


def corr(eps: float, c0: float, x: float, y: float) -> TemporalLottery:
    """Half-half lottery whose second draw repeats the first with extra weight ``eps/2``."""
    _check_unit("eps", eps)
    _check_xy(x, y)
    hi, lo = 0.5 + eps / 2, 0.5 - eps / 2
    return node(c0, [(0.5, node(x, [(hi, leaf(x)), (lo, leaf(y))])),
                     (0.5, node(y, [(lo, leaf(x)), (hi, leaf(y))]))])


def iid_scaled(pi: float, c0: float, x: float, y: float) -> TemporalLottery:
    """iid half-half lottery on {x, y} with future consumption cut by the fraction ``pi``."""
    _check_unit("pi", pi)
    _check_xy(x, y)
    s = 1.0 - pi
    cont = [(0.5, leaf(x * s)), (0.5, leaf(y * s))]
    return node(c0, [(0.5, node(x * s, cont)), (0.5, node(y * s, cont))])


def gradual(eps: float, c0: float, k: float, x: float, y: float) -> TemporalLottery:
    """Fixed consumption ``k`` at t=1 with a signal of precision ``eps`` about the t=2 draw."""
    _check_unit("eps", eps)
    _check_xy(x, y)
    hi, lo = 0.5 + eps / 2, 0.5 - eps / 2
    return node(c0, [(0.5, node(k, [(hi, leaf(x)), (lo, leaf(y))])),
                     (0.5, node(k, [(lo, leaf(x)), (hi, leaf(y))]))])


def early(pi: float, c0: float, k: float, x: float, y: float) -> TemporalLottery:
    """Risk about t=2 resolved at t=1, with periods 1 and 2 scaled by ``1 - pi``."""
    _check_unit("pi", pi)
    _check_xy(x, y)
    s = 1.0 - pi
    return node(c0, [(0.5, node(k * s, [(1.0, leaf(x * s))])),
                     (0.5, node(k * s, [(1.0, leaf(y * s))]))])


_BUILDERS = {
    "iid": iid, "corr": corr, "iid_scaled": iid_scaled, "gradual": gradual,
    "early": early, "corr_perfect": corr_perfect, "neg_corr": neg_corr,
}


def build_parametric(kind: str, **params) -> TemporalLottery:
    """Dispatch to one of the named lottery families by name."""
    try:
        fn = _BUILDERS[kind]
    except KeyError:
        raise ParamOutOfRange(f"unknown lottery family {kind!r}; "
                              f"choose from {sorted(_BUILDERS)}") from None
    return fn(**params)


def iecit_mass_bounds(cf: ConditionalForm, c: float, c2: float) -> float:
    """Largest shift that an elementary transformation on (c, c2) can apply."""
    return min(cf.m1[c] * cf.p2(c2, c), cf.m1[c2] * cf.p2(c, c2))
