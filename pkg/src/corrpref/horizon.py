"""Infinite-horizon recursive utility for stationary lotteries.

Utility solves ``V(c)^rho = c^rho + beta * CE(V(c'))^rho`` where the
certainty equivalent is taken under the risk adjustment ``phi``.  For an
iid lottery or a perfectly correlated one the value function lives on the
support of ``l``, so the iteration runs on a vector.  It starts from the
expected-utility fixed point (``phi(v) = v^rho``), which is computed by a
linear solve, and the iterates must decrease monotonically.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .errors import IterationCap, NonContraction, ParamOutOfRange
from .risk_prefs import EZPower, RiskAdjustment

MAX_ITER = 1_000_000


def power_adjustment(lam: float) -> EZPower:
    """phi(x) = x^lam / lam, the adjustment used on the infinite horizon."""
    return EZPower(lam, 1.0)


@dataclass(frozen=True)
class StationaryLottery:
    kind: str  # "iid" | "corr"
    ell: Mapping
    c0: float = 1.0

    def __post_init__(self):
        if self.kind not in ("iid", "corr"):
            raise ParamOutOfRange(f"kind must be 'iid' or 'corr', got {self.kind!r}")
        ell = {float(c): float(p) for c, p in self.ell.items() if p > 0}
        if not ell or any(c <= 0 for c in ell) or abs(sum(ell.values()) - 1.0) > 1e-12:
            raise ParamOutOfRange(f"ell must be a distribution on positive consumption: {self.ell}")
        if self.c0 <= 0:
            raise ParamOutOfRange("c0 must be positive")
        object.__setattr__(self, "ell", dict(sorted(ell.items())))

    @property
    def support(self) -> np.ndarray:
        return np.array(list(self.ell))

    @property
    def probs(self) -> np.ndarray:
        return np.array(list(self.ell.values()))

    def transition(self) -> np.ndarray:
        n = len(self.ell)
        return np.tile(self.probs, (n, 1)) if self.kind == "iid" else np.eye(n)


class IterationResult(NamedTuple):
    value: float  # V(c0)
    state_values: np.ndarray  # V on the support of ell
    iterations: int
    residual: float
    start: np.ndarray
    monotone: bool


def _check(rho, beta):
    if not 0.0 < rho < 1.0:
        raise ParamOutOfRange(f"rho must lie in (0, 1), got {rho}")
    if not 0.0 < beta < 1.0:
        raise ParamOutOfRange(f"beta must lie in (0, 1), got {beta}")


def expected_utility_start(rho: float, beta: float, sl: StationaryLottery) -> np.ndarray:
    """Fixed point with phi(v) = v^rho, where W = V^rho solves a linear system."""
    c, P = sl.support, sl.transition()
    W = np.linalg.solve(np.eye(len(c)) - beta * P, c ** rho)
    return W ** (1.0 / rho)


def _ces(c, ce, rho, beta):
    return (c ** rho + beta * ce ** rho) ** (1.0 / rho)


def _bellman(phi, rho, beta, sl, V):
    c, P = sl.support, sl.transition()
    ce = np.array([phi.certainty_equivalent(V, row) for row in P])
    return _ces(c, ce, rho, beta)


def value_iterate(phi: RiskAdjustment, rho: float, beta: float, sl: StationaryLottery,
                  tol: float = 1e-10, max_iter: int = MAX_ITER) -> IterationResult:
    """Monotone value iteration from the expected-utility fixed point.

    If the first step from that point goes up (``phi`` less concave than
    ``v^rho``), the iteration restarts from the constant upper bound
    ``max(c) / (1 - beta)^(1/rho)``, from which the iterates always fall.
    """
    _check(rho, beta)
    V = expected_utility_start(rho, beta, sl)
    TV = _bellman(phi, rho, beta, sl, V)
    if (TV > V * (1 + 1e-12)).any():
        V = np.full_like(V, sl.support.max() / (1.0 - beta) ** (1.0 / rho))
        TV = _bellman(phi, rho, beta, sl, V)
    start = V.copy()
    for it in range(1, max_iter + 1):
        if (TV > V * (1 + 1e-12)).any() or (TV < 0).any():
            raise NonContraction(f"iterate {it} rose above its predecessor")
        diff = np.abs(TV - V).max()
        V = TV
        if diff < tol:
            break
        TV = _bellman(phi, rho, beta, sl, V)
    else:
        raise IterationCap(f"no convergence within {max_iter} sweeps")
    resid = float(np.abs(_bellman(phi, rho, beta, sl, V) - V).max())
    c0 = _ces(sl.c0, phi.certainty_equivalent(V, sl.probs), rho, beta)
    return IterationResult(float(c0), V, it, resid, start, True)


def corr_value_closed_form(rho: float, beta: float, c: float) -> float:
    """Value of consuming ``c`` forever."""
    return c / (1.0 - beta) ** (1.0 / rho)


class IidCorrComparison(NamedTuple):
    iid_weakly_preferred: bool
    values: tuple  # (iid, corr)


def compare_iid_corr(phi: RiskAdjustment, rho: float, beta: float, ell: Mapping,
                     c0: float = 1.0, tol: float = 1e-10) -> IidCorrComparison:
    """Value of the iid stream against the perfectly persistent one from ``c0``."""
    _check(rho, beta)
    sl = StationaryLottery("iid", ell, c0)
    v_iid = value_iterate(phi, rho, beta, sl, tol).value
    W = np.array([corr_value_closed_form(rho, beta, c) for c in sl.support])
    v_corr = _ces(c0, phi.certainty_equivalent(W, sl.probs), rho, beta)
    slack = 10 * tol * max(1.0, abs(v_corr))
    return IidCorrComparison(bool(v_iid >= v_corr - slack), (float(v_iid), float(v_corr)))
