"""Variational (statistical-distance) form of the certainty equivalent.

For the exponential adjustment the certainty equivalent of continuation
values ``V`` under ``m`` equals ``min_l E_l V + theta KL(l || m)``; for the
power adjustment with ``alpha < 0 < rho`` it equals the minimum of
``E_l V + I(l || m)`` where ``I`` is built from the Renyi divergence of
order ``q = alpha / (alpha - rho)``.  The minimum is found numerically on
the simplex and compared with the recursive evaluator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from .errors import DegenerateQ, NonConvergence, ParamOutOfRange
from .lotteries import TemporalLottery
from .risk_prefs import EZPower, Exponential, Identity, KPModel, kp_values

N_RESTARTS = 20


@dataclass(frozen=True)
class DiscreteDistortion:
    base: np.ndarray
    alt: np.ndarray

    def __post_init__(self):
        base = np.asarray(self.base, dtype=float)
        alt = np.asarray(self.alt, dtype=float)
        if base.shape != alt.shape or base.ndim != 1:
            raise ParamOutOfRange("base and alt must be vectors of equal length")
        for name, v in (("base", base), ("alt", alt)):
            if (v < 0).any() or abs(v.sum() - 1.0) > 1e-12:
                raise ParamOutOfRange(f"{name} is not a probability vector")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "alt", alt)

    @property
    def absolutely_continuous(self) -> bool:
        return not ((self.base == 0) & (self.alt > 0)).any()

    @property
    def likelihood_ratio(self) -> np.ndarray:
        """dl/dm on the support of ``base`` (zero elsewhere)."""
        out = np.zeros_like(self.base)
        s = self.base > 0
        out[s] = self.alt[s] / self.base[s]
        return out


def cost_relative_entropy(dd: DiscreteDistortion, theta: float) -> float:
    """theta * KL(alt || base); infinite without absolute continuity."""
    if theta <= 0:
        raise ParamOutOfRange(f"theta must be positive, got {theta}")
    if not dd.absolutely_continuous:
        return math.inf
    s = dd.alt > 0
    return float(theta * np.sum(dd.alt[s] * np.log(dd.alt[s] / dd.base[s])))


def renyi_order(alpha: float, rho: float) -> float:
    if not alpha < 0 < rho < 1:
        raise ParamOutOfRange(f"the Renyi cost needs alpha < 0 < rho < 1, got {alpha}, {rho}")
    q = alpha / (alpha - rho)
    if q in (0.0, 1.0):
        raise DegenerateQ(f"q = {q}")
    return q


def renyi_divergence(dd: DiscreteDistortion, q: float) -> float:
    if q in (0.0, 1.0):
        raise DegenerateQ(f"q = {q}")
    if not dd.absolutely_continuous:
        return math.inf
    s = dd.base > 0
    L = dd.likelihood_ratio[s]
    return math.log(float(np.sum(dd.base[s] * L ** q))) / (q - 1.0)


def cost_ez_renyi(dd: DiscreteDistortion, continuation_values, alpha: float, rho: float) -> float:
    """E_alt V * (exp(((1-q)/q) R_q(alt || base)) - 1)."""
    q = renyi_order(alpha, rho)
    v = np.asarray(continuation_values, dtype=float)
    if (v <= 0).any():
        raise ParamOutOfRange("continuation values must be positive")
    R = renyi_divergence(dd, q)
    if math.isinf(R):
        return math.inf
    return float(dd.alt @ v) * math.expm1((1.0 - q) / q * R)


# ------------------------------------------------------------ minimisation

def _hs_objective(z, v, logm, theta):
    logl = z - logsumexp(z)
    l = np.exp(logl)
    f = l @ v + theta * (l @ (logl - logm))
    g = v + theta * (logl - logm + 1.0)
    return f, l * (g - l @ g)


def _ez_objective(z, v, m, q):
    l = softmax(z)
    A = l @ v
    w = m ** (1.0 - q) * l ** q
    B = w.sum()
    scale = B ** (-1.0 / q)
    f = A * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        extra = np.where(l > 0, A * w / (l * B), 0.0)
    g = scale * (v - extra)
    return f, l * (g - l @ g)


def variational_value(model: KPModel, node_values, base, seed: int = 0,
                      tol: float = 1e-9):
    """Minimise ``E_l V + I(l || base)`` over the simplex.

    Only the support of ``base`` is searched, since the cost is infinite
    off it.  Returns ``(value, minimiser)``.
    """
    v = np.asarray(node_values, dtype=float)
    m = np.asarray(base, dtype=float)
    if v.shape != m.shape:
        raise ParamOutOfRange("values and base probabilities differ in length")
    phi = model.phi
    s = m > 0
    if isinstance(phi, Identity) or s.sum() == 1:
        return float(m @ v), m.copy()
    vs, ms = v[s], m[s]
    if isinstance(phi, Exponential):
        if phi.theta <= 0:
            raise ParamOutOfRange("the relative-entropy cost needs theta > 0")
        fun = lambda z: _hs_objective(z, vs, np.log(ms), phi.theta)
    elif isinstance(phi, EZPower):
        q = renyi_order(phi.alpha, phi.rho)
        if (vs <= 0).any():
            raise ParamOutOfRange("continuation values must be positive")
        fun = lambda z: _ez_objective(z, vs, ms, q)
    else:
        raise ParamOutOfRange(f"no closed-form cost for {phi}")

    rng = np.random.default_rng(seed)
    starts = [np.log(ms)] + [rng.normal(scale=2.0, size=ms.size) for _ in range(N_RESTARTS)]
    best = None
    for z0 in starts:
        res = minimize(fun, z0, jac=True, method="BFGS", options={"gtol": 1e-10, "maxiter": 500})
        if not np.isfinite(res.fun):
            continue
        if best is None or res.fun < best.fun - 1e-15:
            best = res
    if best is None:
        raise NonConvergence("no restart produced a finite objective")
    grad = fun(best.x)[1]
    if np.abs(grad).max() > max(1e-6, tol * 1e3):
        raise NonConvergence(f"gradient norm {np.abs(grad).max():.3g} after {len(starts)} starts")
    l = np.zeros_like(m)
    l[s] = softmax(best.x)
    return float(best.fun), l


def hs_tilted(node_values, base, theta: float) -> np.ndarray:
    """Exponentially tilted minimiser for the relative-entropy cost."""
    v = np.asarray(node_values, dtype=float)
    m = np.asarray(base, dtype=float)
    w = np.where(m > 0, np.log(np.where(m > 0, m, 1.0)) - v / theta, -np.inf)
    return softmax(w)


def variational_values(model: KPModel, d: TemporalLottery, seed: int = 0) -> dict:
    """Node values from the variational recursion, with minimisers.

    Returns ``{id(node): (value, minimiser or None)}``.
    """
    out = {}

    def walk(n):
        here = model.u(n.c)
        if n.is_leaf:
            out[id(n)] = (here, None)
            return here
        vals = [walk(ch) for _, ch in n.branches]
        probs = [p for p, _ in n.branches]
        ce, l = variational_value(model, vals, probs, seed=seed)
        v = here + model.beta * ce
        out[id(n)] = (v, l)
        return v

    walk(d)
    return out


def duality_gap(model: KPModel, d: TemporalLottery, seed: int = 0) -> float:
    """Largest |recursive - variational| value over interior nodes."""
    rec = kp_values(model, d)
    var = variational_values(model, d, seed)
    gaps = [abs(rec[id(n)] - var[id(n)][0]) for n in d.nodes() if not n.is_leaf]
    return max(gaps, default=0.0)
