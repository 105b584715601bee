"""Risk adjustments, felicities and the Kreps-Porteus evaluator.

A preference is a triple ``(phi, u, beta)``: values are computed backwards by
``V = u(c) + beta * phi^{-1}(E[phi(V')])``.  The four closed families of
risk adjustment carry analytic derivatives up to order four; a
:class:`Custom` adjustment can be built from user-supplied callables and is
classified on a grid only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.special import logsumexp

from . import _numerics
from .errors import (DomainViolation, ParamOutOfRange, RangeViolation,
                     SingularIntegrand)
from .lotteries import TemporalLottery


def _falling(g, k):
    """g (g-1) ... (g-k+1)."""
    out = 1.0
    for j in range(k):
        out *= g - j
    return out


class RiskAdjustment:
    """Increasing transformation applied to continuation values."""

    lower: float = -math.inf
    upper: float = math.inf
    lower_closed: bool = False
    closed_family: bool = True

    # -- interface -------------------------------------------------------
    def _deriv(self, x, order):  # pragma: no cover - abstract
        raise NotImplementedError

    def _inverse(self, y):  # pragma: no cover - abstract
        raise NotImplementedError

    def in_domain(self, x):
        x = np.asarray(x, dtype=float)
        above = x >= self.lower if self.lower_closed else x > self.lower
        return above & (x < self.upper)

    def __call__(self, x):
        return phi_eval(self, x, 0)

    def certainty_equivalent(self, values, probs) -> float:
        """phi^{-1}(sum p phi(v)), computed in a numerically stable way."""
        v = np.asarray(values, dtype=float)
        p = np.asarray(probs, dtype=float)
        return float(self.inverse(np.dot(p, self._deriv(v, 0))))

    def inverse(self, y):
        return self._inverse(y)


@dataclass(frozen=True)
class Identity(RiskAdjustment):
    """Risk-neutral adjustment phi(x) = x."""

    def _deriv(self, x, order):
        x = np.asarray(x, dtype=float)
        if order == 0:
            return x
        return np.full_like(x, 1.0 if order == 1 else 0.0)

    def _inverse(self, y):
        return y

    def certainty_equivalent(self, values, probs):
        return float(np.dot(probs, values))


@dataclass(frozen=True)
class EZPower(RiskAdjustment):
    """phi(x) = (1/alpha) (rho x)^(alpha/rho): constant relative risk aversion 1 - alpha/rho."""

    alpha: float
    rho: float
    lower = 0.0
    lower_closed = True

    def __post_init__(self):
        if not (self.alpha != 0.0 and self.alpha < 1.0 and 0.0 < self.rho <= 1.0
                and self.alpha <= self.rho):
            raise ParamOutOfRange(f"EZPower needs 0 != alpha < 1, 0 < rho <= 1, alpha <= rho; "
                                  f"got alpha={self.alpha}, rho={self.rho}")

    @property
    def gamma(self):
        return self.alpha / self.rho

    def _deriv(self, x, order):
        g = self.gamma
        coef = _falling(g, order) * self.rho ** order / self.alpha
        with np.errstate(divide="ignore"):
            return coef * np.power(self.rho * np.asarray(x, dtype=float), g - order)

    def _inverse(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(self.alpha * y < 0):
            raise RangeViolation(f"{y} outside the range of {self}")
        with np.errstate(divide="ignore"):
            return np.power(self.alpha * y, 1.0 / self.gamma) / self.rho

    def certainty_equivalent(self, values, probs):
        v = np.asarray(values, dtype=float)
        return _power_mean(v, np.asarray(probs, dtype=float), self.gamma)

    def _ap(self, x):
        k = 1.0 - self.gamma
        z = np.zeros_like(x)
        return k / x, np.full_like(x, k), -k / x ** 2, z, z


@dataclass(frozen=True)
class Exponential(RiskAdjustment):
    """phi(x) = -exp(-x/theta): constant absolute risk aversion 1/theta."""

    theta: float

    def __post_init__(self):
        if not self.theta > 0.0:
            raise ParamOutOfRange(f"Exponential needs theta > 0, got {self.theta}")

    def _deriv(self, x, order):
        x = np.asarray(x, dtype=float)
        return -((-1.0 / self.theta) ** order) * np.exp(-x / self.theta)

    def _inverse(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y >= 0):
            raise RangeViolation(f"{y} outside the range (-inf, 0) of {self}")
        return -self.theta * np.log(-y)

    def certainty_equivalent(self, values, probs):
        v = np.asarray(values, dtype=float)
        p = np.asarray(probs, dtype=float)
        return float(-self.theta * logsumexp(-v / self.theta, b=p))

    def _ap(self, x):
        t = self.theta
        z = np.zeros_like(x)
        return np.full_like(x, 1.0 / t), x / t, z, np.full_like(x, 1.0 / t), z


@dataclass(frozen=True)
class HARA(RiskAdjustment):
    """phi(x) = ((1-gamma)/gamma) (x/(1-gamma) + b)^gamma."""

    gamma: float
    b: float

    def __post_init__(self):
        g = self.gamma
        if not (g != 0.0 and g < 1.0 and self.b >= 1.0 / (g - 1.0)):
            raise ParamOutOfRange(f"HARA needs 0 != gamma < 1 and b >= 1/(gamma-1); "
                                  f"got gamma={g}, b={self.b}")

    @property
    def lower(self):
        return -self.b * (1.0 - self.gamma)

    @property
    def lower_closed(self):
        return self.gamma > 0

    def _s(self, x):
        return np.asarray(x, dtype=float) / (1.0 - self.gamma) + self.b

    def _deriv(self, x, order):
        g = self.gamma
        coef = (1.0 - g) / g * _falling(g, order) * (1.0 - g) ** (-order)
        with np.errstate(divide="ignore"):
            return coef * np.power(self._s(x), g - order)

    def _inverse(self, y):
        g = self.gamma
        z = g * np.asarray(y, dtype=float) / (1.0 - g)
        if np.any(z < 0):
            raise RangeViolation(f"{y} outside the range of {self}")
        with np.errstate(divide="ignore"):
            return (1.0 - g) * (np.power(z, 1.0 / g) - self.b)

    def certainty_equivalent(self, values, probs):
        s = self._s(values)
        m = _power_mean(s, np.asarray(probs, dtype=float), self.gamma)
        return (1.0 - self.gamma) * (m - self.b)

    def _ap(self, x):
        k, b = 1.0 - self.gamma, self.b
        s = self._s(x)
        return 1.0 / s, x / s, -1.0 / (k * s * s), b / (s * s), -2.0 * b / (k * s ** 3)


@dataclass(frozen=True)
class Custom(RiskAdjustment):
    """User-supplied adjustment.

    ``derivs`` lists callables for phi and its derivatives (at least up to
    order 2; missing orders 3-4 fall back to central differences).  The
    domain must be declared.  Without ``inverse`` a safeguarded Newton
    iteration is used.
    """

    name: str
    derivs: tuple
    lower: float = -math.inf
    upper: float = math.inf
    lower_closed: bool = False
    inverse_fn: Optional[Callable] = None
    closed_family = False

    def _deriv(self, x, order):
        x = np.asarray(x, dtype=float)
        if order < len(self.derivs) and self.derivs[order] is not None:
            return np.asarray(self.derivs[order](x), dtype=float)
        h = 1e-4 * np.maximum(1.0, np.abs(x))
        return (self._deriv(x + h, order - 1) - self._deriv(x - h, order - 1)) / (2 * h)

    def _inverse(self, y):
        if self.inverse_fn is not None:
            return self.inverse_fn(y)
        y = np.asarray(y, dtype=float)
        if y.ndim:
            return np.array([self._inverse(v) for v in y])
        return _newton_inverse(self, float(y))


def _power_mean(v, p, g):
    """(sum p v^g)^(1/g) for v >= 0, scaled to avoid overflow."""
    if np.any(v < 0):
        raise DomainViolation(f"negative argument {v.min()} for a power adjustment")
    top = v.max()
    if top == 0.0:
        return 0.0
    if g < 0 and np.any(v[p > 0] == 0.0):
        return 0.0
    with np.errstate(divide="ignore"):
        return float(top * np.dot(p, (v / top) ** g) ** (1.0 / g))


def _newton_inverse(phi, y, maxiter=200, rtol=1e-12):
    """Solve phi(x) = y with Newton steps kept inside an expanding bracket."""
    lo = phi.lower if math.isfinite(phi.lower) else -1.0
    hi = phi.upper if math.isfinite(phi.upper) else 1.0
    if not math.isfinite(phi.lower):
        while float(phi._deriv(lo, 0)) > y:
            lo = 2 * lo - 1
            if lo < -1e300:
                raise RangeViolation(f"{y} below the range of {phi.name}")
    if not math.isfinite(phi.upper):
        while float(phi._deriv(hi, 0)) < y:
            hi = 2 * hi + 1
            if hi > 1e300:
                raise RangeViolation(f"{y} above the range of {phi.name}")
    f = lambda t: float(phi._deriv(t, 0)) - y
    with np.errstate(all="ignore"):
        flo, fhi = f(lo), f(hi)
    if flo > 0 or fhi < 0:
        raise RangeViolation(f"{y} outside the range of {phi.name}")
    x = 0.5 * (lo + hi)
    for _ in range(maxiter):
        fx = f(x)
        if fx == 0.0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        d = float(phi._deriv(x, 1))
        step = x - fx / d if d > 0 else 0.5 * (lo + hi)
        x_new = step if lo < step < hi else 0.5 * (lo + hi)
        if abs(x_new - x) <= rtol * max(1.0, abs(x)):
            return x_new
        x = x_new
    return x


def phi_eval(phi: RiskAdjustment, x, order: int = 0):
    """Value of the ``order``-th derivative of phi at ``x`` (analytic for closed families)."""
    if not 0 <= order <= 4:
        raise ValueError("order must be between 0 and 4")
    if not np.all(phi.in_domain(x)):
        raise DomainViolation(f"{x} outside the domain of {phi}")
    out = phi._deriv(x, order)
    return float(out) if np.ndim(out) == 0 else out


def phi_inverse(phi: RiskAdjustment, y):
    out = phi.inverse(y)
    return float(out) if np.ndim(out) == 0 else out


# ------------------------------------------------------------ felicities

class Felicity:
    """Period utility u(c)."""

    strict_positive = False

    def _check(self, c):
        c = np.asarray(c, dtype=float)
        bad = c <= 0 if self.strict_positive else c < 0
        if np.any(bad):
            raise DomainViolation(f"consumption {c} outside the domain of {self}")
        return c

    def __call__(self, c):
        out = self._value(self._check(c))
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Linear(Felicity):
    def _value(self, c):
        return c

    def inverse(self, v):
        return v


@dataclass(frozen=True)
class Power(Felicity):
    """u(c) = c^rho / rho."""

    rho: float

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ParamOutOfRange(f"Power felicity needs 0 < rho < 1, got {self.rho}")

    def _value(self, c):
        return c ** self.rho / self.rho

    def inverse(self, v):
        if v < 0:
            raise RangeViolation(f"{v} is not a value of {self}")
        return (self.rho * v) ** (1.0 / self.rho)


@dataclass(frozen=True)
class Log(Felicity):
    strict_positive = True

    def _value(self, c):
        return np.log(c)

    def inverse(self, v):
        return math.exp(v)


@dataclass(frozen=True)
class ScaledPower(Felicity):
    """u(c) = scale * c^rho."""

    scale: float
    rho: float

    def __post_init__(self):
        if not (self.scale > 0 and 0.0 < self.rho < 1.0):
            raise ParamOutOfRange(f"ScaledPower needs scale > 0 and 0 < rho < 1")

    def _value(self, c):
        return self.scale * c ** self.rho

    def inverse(self, v):
        if v < 0:
            raise RangeViolation(f"{v} is not a value of {self}")
        return (v / self.scale) ** (1.0 / self.rho)


# ------------------------------------------------------------ the model

@dataclass(frozen=True)
class KPModel:
    phi: RiskAdjustment
    u: Felicity = field(default_factory=Linear)
    beta: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.beta <= 1.0:
            raise ParamOutOfRange(f"beta must lie in (0, 1], got {self.beta}")


def log_felicity_model(alpha: float, beta: float) -> KPModel:
    """Log felicity with phi(x) = -exp(alpha x): the rho -> 0 pairing."""
    if not alpha < 0:
        raise ParamOutOfRange(f"log-felicity pairing needs alpha < 0, got {alpha}")
    return KPModel(Exponential(-1.0 / alpha), Log(), beta)


def _ce(phi, values, probs):
    v = np.asarray(values, dtype=float)
    if v.size == 1 or np.all(v == v[0]):
        if not phi.in_domain(v[0]):
            raise DomainViolation(f"value {v[0]} outside the domain of {phi}")
        return float(v[0])
    if not np.all(phi.in_domain(v)):
        raise DomainViolation(f"values {v} leave the domain of {phi}")
    return phi.certainty_equivalent(v, probs)


def kp_evaluate(model: KPModel, d: TemporalLottery) -> float:
    """Time-0 value of ``d`` by backward recursion."""
    return _kp(model, d)


def _kp(model, d):
    here = model.u(d.c)
    if d.is_leaf:
        return here
    vals = [_kp(model, ch) for _, ch in d.branches]
    probs = [p for p, _ in d.branches]
    return here + model.beta * _ce(model.phi, vals, probs)


def kp_values(model: KPModel, d: TemporalLottery) -> dict:
    """Value of every node, keyed by ``id`` of the node object."""
    out = {}

    def walk(n):
        here = model.u(n.c)
        if n.is_leaf:
            out[id(n)] = here
            return here
        vals = [walk(ch) for _, ch in n.branches]
        v = here + model.beta * _ce(model.phi, vals, [p for p, _ in n.branches])
        out[id(n)] = v
        return v

    walk(d)
    return out


def present_equivalent(model: KPModel, d: TemporalLottery) -> float:
    """Constant consumption whose felicity equals V0(d)."""
    return model.u.inverse(kp_evaluate(model, d))


# ------------------------------------------------------ risk attitudes

class ArrowPratt(NamedTuple):
    A: float
    R: float
    Aprime: float
    Rprime: float
    Rsecond: float


def arrow_pratt(phi: RiskAdjustment, x):
    """Absolute/relative risk aversion and derivatives at ``x``.

    Closed families supply these directly; otherwise they are built from
    the first four derivatives of phi.
    """
    if hasattr(phi, "_ap"):
        if not np.all(phi.in_domain(x)):
            raise DomainViolation(f"{x} outside the domain of {phi}")
        xa = np.asarray(x, dtype=float)
        vals = phi._ap(xa)
        if np.ndim(x) == 0:
            return ArrowPratt(*(float(v) for v in vals))
        return ArrowPratt(*vals)
    d1, d2, d3, d4 = (phi_eval(phi, x, k) for k in (1, 2, 3, 4))
    a = np.asarray(d2) / d1
    a1 = np.asarray(d3) / d1 - a * a
    a2 = np.asarray(d4) / d1 - a * np.asarray(d3) / d1 - 2 * a * a1
    x = np.asarray(x, dtype=float)
    A, A1, A2 = -a, -a1, -a2
    out = ArrowPratt(A, x * A, A1, A + x * A1, 2 * A1 + x * A2)
    if np.ndim(x) == 0:
        return ArrowPratt(*(float(v) for v in out))
    return out


def er_measure(model: KPModel, x, y):
    """Local strength of preference for early resolution at (x, y)."""
    phi, b = model.phi, model.beta
    z = b * np.asarray(x, dtype=float) + y
    out = (-np.asarray(phi_eval(phi, x, 2)) / phi_eval(phi, x, 1)
           + b * np.asarray(phi_eval(phi, z, 2)) / phi_eval(phi, z, 1))
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class Classification:
    dara: bool
    irra: bool
    sca: bool
    upi: bool
    concave: bool
    method: str
    eq3_holds: bool = True
    eq3_violation: Optional[tuple] = None
    irra_witness: Optional[tuple] = None


def _grid(phi, grid):
    lo, hi, n = grid if grid is not None else (0.05, 50.0, 200)
    if phi.lower > -math.inf:
        pad = 1e-6 * max(1.0, abs(phi.lower))
        lo = max(lo, phi.lower + pad)
    if phi.upper < math.inf:
        hi = min(hi, phi.upper - 1e-6 * max(1.0, abs(phi.upper)))
    if lo > 0:
        return np.geomspace(lo, hi, int(n))
    return np.linspace(lo, hi, int(n))


def _decreasing_run(xs, rp):
    """First maximal interval of grid points where R' < 0."""
    neg = rp < 0
    if not neg.any():
        return None
    i = int(np.argmax(neg))
    j = i
    while j + 1 < len(xs) and neg[j + 1]:
        j += 1
    if j == i:
        j = min(i + 1, len(xs) - 1)
        i = max(i - 1, 0)
    return float(xs[i]), float(xs[j])


def classify(phi: RiskAdjustment, beta: float = 1.0, grid=None) -> Classification:
    """Risk attitudes of ``phi``.

    Closed families are decided analytically; custom adjustments are decided
    on the grid ``(lo, hi, n)`` (log-spaced when ``lo > 0``).  In both cases
    the early-resolution inequality is checked on the grid with ``beta`` and
    the first violating ``(x, y)`` is reported.
    """
    xs = _grid(phi, grid)
    ap = arrow_pratt(phi, xs)
    # Eq.(3) on the product grid: A(x) >= beta A(beta x + y)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    Z = beta * X + Y
    ok_dom = phi.in_domain(Z)
    Zs = np.where(ok_dom, Z, xs[0])
    Az = -phi._deriv(Zs, 2) / phi._deriv(Zs, 1)
    Ax = ap.A[:, None] * np.ones_like(Y)
    slack = Ax - beta * Az
    tol = 1e-12 * (np.abs(Ax) + np.abs(beta * Az))
    bad = ok_dom & (slack < -tol)
    violation = None
    if bad.any():
        i, j = np.unravel_index(int(np.argmax(bad.ravel())), bad.shape)
        violation = (float(xs[i]), float(xs[j]))
    eq3 = violation is None
    witness = _decreasing_run(xs, np.asarray(ap.Rprime))

    if isinstance(phi, (Identity, EZPower, Exponential)):
        res = Classification(True, True, True, True, True, "analytic")
    elif isinstance(phi, HARA):
        b = phi.b
        res = Classification(True, b >= 0, b == 0, b >= 0, True, "analytic")
    else:
        scale = 1e-9
        A = np.asarray(ap.A)
        dara = bool(np.all(np.diff(A) <= scale * np.abs(A[1:]) + 1e-14))
        irra = bool(np.all(np.asarray(ap.Rprime) >= -1e-10))
        sca = irra and bool(np.all(np.asarray(ap.Rsecond) >= -1e-8))
        concave = bool(np.all(phi._deriv(xs, 2) <= 1e-14))
        res = Classification(dara, irra, sca, eq3 and dara, concave, "grid-verified")
    res.eq3_holds = eq3
    res.eq3_violation = violation
    res.irra_witness = None if res.irra else witness
    return res


def hedging_compare(model: KPModel, x: float, y: float) -> str:
    """Attitude toward intertemporal hedging on the two-point lotteries over {x, y}."""
    from .lotteries import corr_perfect, neg_corr
    if x == y:
        raise ParamOutOfRange("x and y must differ")
    c0 = min(x, y)
    pos = kp_evaluate(model, corr_perfect({x: 0.5, y: 0.5}, c0))
    neg = kp_evaluate(model, neg_corr(x, y, c0))
    if abs(pos - neg) <= 1e-12 * max(1.0, abs(pos), abs(neg)):
        return "indifferent"
    return "prefers_negative" if neg > pos else "prefers_positive"


# ------------------------------------------------------------ CAA transform

def caa_closed_form(phi: RiskAdjustment, x: float) -> Optional[float]:
    """Closed form of the CAA transform where one is known, else None."""
    if isinstance(phi, (Identity, EZPower)):
        return float(x)
    if isinstance(phi, Exponential):
        k = 1.0 - 1.0 / phi.theta
        return x ** k / k
    return None


def caa_transform(phi: RiskAdjustment, x: float, power: int = 1, tol: float = 1e-10) -> float:
    """CAA transform of phi at ``x`` by nested quadrature; ``power=2`` applies it twice.

    The inner integral of R'(s)/s is anchored at s = 1, which only rescales
    the result by a positive constant.  Both integrals run in log-space.
    """
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    if not x > 0:
        raise DomainViolation("CAA transform needs x > 0")
    if phi.lower > 0 or (phi.lower == 0 and not phi.lower_closed and isinstance(phi, Custom)):
        raise SingularIntegrand(f"domain of {phi} does not reach 0")
    field_ = "Rprime" if power == 1 else "Rsecond"

    tiny = max(phi.lower, 0.0) + 1e-12

    def r(s):
        return getattr(arrow_pratt(phi, max(s, tiny)), field_)

    if r(tiny) >= 1.0:
        raise SingularIntegrand(f"CAA integrand of {phi} is not integrable at 0")

    def inner(w):
        return _numerics.quad(lambda u: r(math.exp(u)), 0.0, w, tol=tol) if w != 0 else 0.0

    return _numerics.quad(lambda w: math.exp(w - inner(w)), -math.inf, math.log(x), tol=tol,
                          limit=200)
