"""Informativeness order via garbling, and correlation-increasing transformations.

``d`` is more informative than ``d2`` when the two-stage lottery drawn by
``d2`` is a garbling of the one drawn by ``d``: there is a row-stochastic
``G`` with ``M2 = G M`` and ``mu2 G = mu``.  Feasibility of ``G`` is decided
with a small dense phase-1 simplex.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, MassOverflow, ParamOutOfRange, ZeroMarginal
from .lotteries import ConditionalForm, TemporalLottery, to_matrix_pair

FEAS_TOL = 1e-9
MARGINAL_TOL = 1e-9


# ------------------------------------------------------------------ simplex

def phase1(A: np.ndarray, b: np.ndarray, tol: float = FEAS_TOL, max_pivots: int = 10_000):
    """Find ``x >= 0`` with ``A x = b``, or return ``None`` if none exists.

    Dense tableau with one artificial variable per row.  Entering columns
    follow Dantzig's rule, switching to Bland's rule after a run of
    degenerate pivots so the method cannot cycle; ties in the ratio test go
    to the largest pivot element.  The final basic solution is re-solved
    against the original ``A`` to shed accumulated roundoff.  Returns
    ``(x or None, infeasibility)``.
    """
    A0 = np.array(A, dtype=float)
    b0 = np.array(b, dtype=float)
    m, n = A0.shape
    sign = np.where(b0 < 0, -1.0, 1.0)
    A1, b1 = A0 * sign[:, None], b0 * sign
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A1
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b1
    T[m, :n] = -A1.sum(axis=0)
    T[m, -1] = -b1.sum()
    basis = list(range(n, n + m))
    piv_eps, cost_eps = 1e-10, 1e-12
    degenerate_run = 0
    for _ in range(max_pivots):
        red = T[m, :n + m]
        if degenerate_run > 50:
            cand = np.flatnonzero(red < -cost_eps)
            entering = int(cand[0]) if cand.size else None
        else:
            j = int(np.argmin(red))
            entering = j if red[j] < -cost_eps else None
        if entering is None:
            break
        col = T[:m, entering]
        ok = col > piv_eps
        if not ok.any():
            break
        rhs = np.maximum(T[:m, -1], 0.0)
        ratios = np.where(ok, rhs / np.where(ok, col, 1.0), np.inf)
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12 * (1.0 + abs(best)))
        if degenerate_run > 50:
            r = int(min(ties, key=lambda i: basis[i]))
        else:
            r = int(ties[np.argmax(col[ties])])
        degenerate_run = degenerate_run + 1 if best <= 1e-14 else 0
        T[r] /= T[r, entering]
        others = np.arange(m + 1) != r
        T[others] -= np.outer(T[others, entering], T[r])
        basis[r] = entering
        T[:m, -1] = np.maximum(T[:m, -1], 0.0)
    infeas = max(-T[m, -1], 0.0)
    real = [j for j in basis if j < n]
    x = np.zeros(n)
    if real:
        sol, *_ = np.linalg.lstsq(A0[:, real], b0, rcond=None)
        x[real] = sol
    resid = float(np.abs(A0 @ x - b0).max()) if m else 0.0
    feasible = infeas <= tol and resid <= tol and x.min(initial=0.0) >= -tol
    return (np.clip(x, 0.0, None) if feasible else None), max(infeas, resid)


# ----------------------------------------------------------------- garbling

class GarblingWitness(NamedTuple):
    G: np.ndarray
    residual: float


@dataclass(frozen=True)
class Comparison:
    verdict: str  # "yes" | "no" | "incomparable_marginals"
    witness: Optional[GarblingWitness] = None
    reason: str = ""

    def __bool__(self):
        return self.verdict == "yes"


def garbling_residual(G, M, mu, M2, mu2) -> float:
    return float(max(np.abs(M2 - G @ M).max(), np.abs(mu2 @ G - mu).max(),
                     np.abs(G.sum(axis=1) - 1.0).max()))


def find_garbling(M, mu, M2, mu2, tol: float = FEAS_TOL) -> Optional[GarblingWitness]:
    """Row-stochastic G with ``M2 = G M`` and ``mu2 G = mu``, if one exists."""
    M, mu, M2, mu2 = (np.asarray(a, dtype=float) for a in (M, mu, M2, mu2))
    n, K = M.shape
    n2 = M2.shape[0]
    if M2.shape[1] != K or mu.shape != (n,) or mu2.shape != (n2,):
        raise DimensionMismatch(f"shapes M{M.shape}, mu{mu.shape}, M2{M2.shape}, mu2{mu2.shape}")
    nv = n2 * n  # G[i, j] -> variable i * n + j
    rows, rhs = [], []
    for i in range(n2):
        for k in range(K):
            r = np.zeros(nv)
            r[i * n:(i + 1) * n] = M[:, k]
            rows.append(r)
            rhs.append(M2[i, k])
    for j in range(n):
        r = np.zeros(nv)
        r[j::n] = mu2
        rows.append(r)
        rhs.append(mu[j])
    for i in range(n2):
        r = np.zeros(nv)
        r[i * n:(i + 1) * n] = 1.0
        rows.append(r)
        rhs.append(1.0)
    x, _ = phase1(np.array(rows), np.array(rhs), tol)
    if x is None:
        return None
    G = np.clip(x.reshape(n2, n), 0.0, None)
    res = garbling_residual(G, M, mu, M2, mu2)
    if res > tol:
        return None
    return GarblingWitness(G, res)


def _prefix(d, stage):
    out, cur = [d.c], d
    for _ in range(stage):
        cur = cur.branches[0][1]
        out.append(cur.c)
    return out


def is_more_informative(d: TemporalLottery, d2: TemporalLottery, stage: int = 0) -> Comparison:
    """Is ``d`` at least as informative as ``d2`` at ``stage``?"""
    if d.depth != d2.depth:
        raise DimensionMismatch(f"horizons differ: {d.depth} vs {d2.depth}")
    a, b = to_matrix_pair(d, stage), to_matrix_pair(d2, stage)
    if _prefix(d, stage) != _prefix(d2, stage):
        return Comparison("incomparable_marginals", reason="deterministic prefixes differ")
    if a.outcomes != b.outcomes:
        return Comparison("incomparable_marginals", reason="continuation outcomes differ")
    ma, mb = a.consumption_marginal(), b.consumption_marginal()
    if set(ma) != set(mb) or any(abs(ma[c] - mb[c]) > MARGINAL_TOL for c in ma):
        return Comparison("incomparable_marginals", reason="consumption marginals differ")
    w = find_garbling(a.M, a.mu, b.M, b.mu)
    if w is None:
        return Comparison("no")
    return Comparison("yes", w)


def compare(d: TemporalLottery, d2: TemporalLottery, stage: int = 0):
    """Two-sided comparison: more_informative, less, equal or incomparable."""
    fwd = is_more_informative(d, d2, stage)
    if fwd.verdict == "incomparable_marginals":
        return "incomparable", fwd, None
    back = is_more_informative(d2, d, stage)
    if fwd and back:
        return "equal", fwd, back
    if fwd:
        return "more_informative", fwd, back
    if back:
        return "less", fwd, back
    return "incomparable", fwd, back


# -------------------------------------------------------------------- IECIT

class IecitStep(NamedTuple):
    """Shift ``epsilon`` of joint mass onto the diagonal at (c, c2)."""
    c: float
    c2: float
    epsilon: float


def apply_iecit(cf: ConditionalForm, step: IecitStep) -> ConditionalForm:
    c, c2, eps = float(step.c), float(step.c2), float(step.epsilon)
    if c == c2:
        raise ParamOutOfRange("an elementary transformation needs two distinct levels")
    if eps < 0:
        raise ParamOutOfRange(f"negative shift {eps}")
    p, p2 = cf.m1.get(c, 0.0), cf.m1.get(c2, 0.0)
    if p <= 0 or p2 <= 0:
        raise ZeroMarginal(f"m1({c})={p}, m1({c2})={p2}")
    m2 = {k: dict(v) for k, v in cf.m2.items()}
    for row, col, delta in ((c, c, eps / p), (c, c2, -eps / p),
                            (c2, c2, eps / p2), (c2, c, -eps / p2)):
        new = m2[row].get(col, 0.0) + delta
        if new < -1e-12 or new > 1.0 + 1e-12:
            raise MassOverflow(f"m2({col}|{row}) would become {new}")
        m2[row][col] = min(max(new, 0.0), 1.0)
    return ConditionalForm(dict(cf.m1), m2)


def apply_chain(cf: ConditionalForm, chain: Sequence[IecitStep]) -> list:
    """All intermediate forms, starting with ``cf`` itself."""
    out = [cf]
    for step in chain:
        out.append(apply_iecit(out[-1], step))
    return out


def iid_form(ell) -> ConditionalForm:
    ell = {float(c): float(p) for c, p in ell.items() if p > 0}
    return ConditionalForm(ell, {c: dict(ell) for c in ell})


def verify_corr_chain(target: ConditionalForm, base: ConditionalForm,
                      chain: Sequence[IecitStep]) -> bool:
    """True iff replaying ``chain`` on ``base`` lands on ``target`` (within 1e-9)."""
    cur = base
    try:
        for step in chain:
            cur = apply_iecit(cur, step)
    except (MassOverflow, ZeroMarginal, ParamOutOfRange):
        return False
    return cur.close_to(target, 1e-9)


def check_prop3(ell, chain: Sequence[IecitStep], c0: float = 1.0) -> bool:
    """Each prefix of ``chain`` applied to iid(ell) is more informative than every shorter one."""
    forms = apply_chain(iid_form(ell), chain)
    lots = [f.to_lottery(c0) for f in forms]
    for j in range(1, len(lots)):
        for i in range(j):
            if not is_more_informative(lots[j], lots[i]):
                return False
    return True

