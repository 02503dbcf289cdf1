"""End-buyer valuation distributions.

A valuation ``V`` is a non-negative random variable. The solvers only ever ask
a handful of questions about it: the survival ``Pr[V >= v]``, the partial
expectation ``E[V; V >= t]``, and the means of the smaller and larger of two
i.i.d. draws. Each kind answers these in closed form. The ``quad_*``
functions give a second, purely numerical route from the density, used as
an independent check on the closed forms.

All queries accept scalars or numpy arrays and return the same shape.
"""
from __future__ import annotations

import functools
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special

from .errors import DomainError, UndefinedConditionalError, UnsupportedOrderError
from .rng import make_rng

SEARCH_QUANTILE = 0.9999


def _nonneg(x, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{what} must be >= 0, got {x!r}")
    return arr


def _shape_like(arr: np.ndarray, like):
    return float(arr) if np.ndim(like) == 0 else arr


class ValuationDistribution(ABC):
    """Law of the end-buyer valuation ``V`` (support within ``[0, inf)``)."""

    kind: str = ""
    is_discrete: bool = False

    # -- per-kind closed forms, all vectorised over float arrays -----------
    @abstractmethod
    def _survival(self, v: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def _tail(self, t: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def mean(self) -> float: ...

    @abstractmethod
    def variance(self) -> float: ...

    @abstractmethod
    def quantile(self, q: float) -> float: ...

    @abstractmethod
    def _order_stat_means(self) -> tuple[float, float]: ...

    def _pdf(self, v: np.ndarray) -> np.ndarray:
        raise DomainError(f"{self.kind} has no density; use mass()")

    # -- public queries -----------------------------------------------------
    def pdf(self, v):
        arr = _nonneg(v, "valuation")
        return _shape_like(self._pdf(arr), v)

    def mass(self, v):
        """Point mass ``Pr[V = v]``; zero everywhere for continuous kinds."""
        arr = _nonneg(v, "valuation")
        return _shape_like(np.zeros_like(arr), v)

    def survival(self, v):
        """``Pr[V >= v]``."""
        arr = _nonneg(v, "valuation")
        return _shape_like(self._survival(arr), v)

    def cdf(self, v):
        """``Pr[V <= v]``."""
        arr = _nonneg(v, "valuation")
        return _shape_like(1.0 - self._survival(arr) + self._mass(arr), v)

    def _mass(self, v: np.ndarray) -> np.ndarray:
        return np.zeros_like(v)

    def tail_expectation(self, t):
        """``E[V; V >= t]``, i.e. the integral of ``v f(v)`` over ``[t, inf)``."""
        arr = _nonneg(t, "threshold")
        return _shape_like(self._tail(arr), t)

    def conditional_mean_above(self, t):
        """``E[V | V >= t]``."""
        arr = _nonneg(t, "threshold")
        s = self._survival(arr)
        if np.any(s <= 0):
            raise UndefinedConditionalError(f"Pr[V >= {t!r}] = 0; conditional mean undefined")
        return _shape_like(self._tail(arr) / s, t)

    def std(self) -> float:
        return math.sqrt(self.variance())

    def second_moment(self) -> float:
        return self.variance() + self.mean() ** 2

    def order_stat_mean(self, k: int, n: int = 2) -> float:
        """Mean of the k-th smallest of ``n`` i.i.d. draws (only ``n = 2``)."""
        if n != 2:
            raise UnsupportedOrderError(f"only pairs of draws are supported, got n={n}")
        if k not in (1, 2):
            raise DomainError(f"order index must be 1 or 2, got {k}")
        return self._order_stat_means()[k - 1]

    def survival_min2(self, v):
        """``Pr[min(V1, V2) >= v]`` for two i.i.d. draws."""
        return self.survival(v) ** 2

    def survival_max2(self, v):
        """``Pr[max(V1, V2) >= v]`` for two i.i.d. draws."""
        return 1.0 - (1.0 - self.survival(v)) ** 2

    def search_bound(self) -> float:
        """Upper end of the price range scanned by the solvers."""
        return self.quantile(SEARCH_QUANTILE)

    def sample(self, seed, count: int) -> np.ndarray:
        """``count`` i.i.d. draws by inverse transform of Philox uniforms."""
        if count < 1:
            raise ValueError(f"count must be >= 1, got {count}")
        rng = make_rng(seed)
        return self._from_uniform(rng.random(int(count)))

    @abstractmethod
    def _from_uniform(self, u: np.ndarray) -> np.ndarray: ...

    def _quad_upper(self, t: float) -> float:
        return max(t, self.quantile(SEARCH_QUANTILE)) + 40.0 * self.std()

    def params(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class TwoPoint(ValuationDistribution):
    """``V = v_high`` with probability ``p_high``, else ``v_low``."""

    v_low: float
    v_high: float
    p_high: float = 0.5

    kind = "twopoint"
    is_discrete = True

    def __post_init__(self):
        if not (self.v_low > 0):
            raise DomainError(f"v_low must be > 0, got {self.v_low}")
        if not (self.v_high > self.v_low):
            raise DomainError(f"v_high must exceed v_low, got {self.v_low}, {self.v_high}")
        if not (0.0 <= self.p_high <= 1.0):
            raise DomainError(f"p_high must be a probability, got {self.p_high}")

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        return ((self.v_low, 1.0 - self.p_high), (self.v_high, self.p_high))

    def _survival(self, v):
        return np.where(v <= self.v_low, 1.0, np.where(v <= self.v_high, self.p_high, 0.0))

    def _mass(self, v):
        return np.where(v == self.v_low, 1.0 - self.p_high, 0.0) + np.where(
            v == self.v_high, self.p_high, 0.0
        )

    def mass(self, v):
        arr = _nonneg(v, "valuation")
        return _shape_like(self._mass(arr), v)

    def _tail(self, t):
        lo = np.where(t <= self.v_low, self.v_low * (1.0 - self.p_high), 0.0)
        hi = np.where(t <= self.v_high, self.v_high * self.p_high, 0.0)
        return lo + hi

    def mean(self):
        return self.v_low * (1.0 - self.p_high) + self.v_high * self.p_high

    def variance(self):
        return self.p_high * (1.0 - self.p_high) * (self.v_high - self.v_low) ** 2

    def quantile(self, q):
        return self.v_low if q <= 1.0 - self.p_high else self.v_high

    def search_bound(self):
        return self.v_high

    def _order_stat_means(self):
        gap = self.v_high - self.v_low
        e_min = self.v_low + gap * self.p_high**2
        e_max = self.v_low + gap * (1.0 - (1.0 - self.p_high) ** 2)
        return e_min, e_max

    def _from_uniform(self, u):
        return np.where(u < self.p_high, self.v_high, self.v_low)

    def params(self):
        return {"vL": self.v_low, "vH": self.v_high, "pHigh": self.p_high}


@dataclass(frozen=True)
class Uniform(ValuationDistribution):
    """Uniform on ``[a, b]`` with ``0 <= a < b``."""

    a: float
    b: float

    kind = "uniform"

    def __post_init__(self):
        if not (self.a >= 0):
            raise DomainError(f"a must be >= 0, got {self.a}")
        if not (self.b > self.a):
            raise DomainError(f"b must exceed a, got a={self.a}, b={self.b}")

    def _pdf(self, v):
        return np.where((v >= self.a) & (v <= self.b), 1.0 / (self.b - self.a), 0.0)

    def _survival(self, v):
        return np.clip((self.b - v) / (self.b - self.a), 0.0, 1.0)

    def _tail(self, t):
        tc = np.clip(t, self.a, self.b)
        return (self.b**2 - tc**2) / (2.0 * (self.b - self.a))

    def mean(self):
        return 0.5 * (self.a + self.b)

    def variance(self):
        return (self.b - self.a) ** 2 / 12.0

    def quantile(self, q):
        return self.a + q * (self.b - self.a)

    def _order_stat_means(self):
        w = self.b - self.a
        return self.a + w / 3.0, self.a + 2.0 * w / 3.0

    def _from_uniform(self, u):
        return self.a + u * (self.b - self.a)

    def _quad_upper(self, t):
        return self.b

    def params(self):
        return {"a": self.a, "b": self.b}


@dataclass(frozen=True)
class Exponential(ValuationDistribution):
    """Exponential with rate ``lam`` (mean ``1/lam``)."""

    lam: float

    kind = "exp"

    def __post_init__(self):
        if not (self.lam > 0):
            raise DomainError(f"rate must be > 0, got {self.lam}")

    def _pdf(self, v):
        return self.lam * np.exp(-self.lam * v)

    def _survival(self, v):
        return np.exp(-self.lam * v)

    def _tail(self, t):
        with np.errstate(invalid="ignore"):
            out = (t + 1.0 / self.lam) * np.exp(-self.lam * t)
        return np.where(np.isinf(t), 0.0, out)

    def mean(self):
        return 1.0 / self.lam

    def variance(self):
        return 1.0 / self.lam**2

    def quantile(self, q):
        return -math.log1p(-q) / self.lam

    def _order_stat_means(self):
        # min of two i.i.d. Exp(lam) is Exp(2 lam)
        e_min = 1.0 / (2.0 * self.lam)
        return e_min, 2.0 / self.lam - e_min

    def _from_uniform(self, u):
        return -np.log1p(-u) / self.lam

    def params(self):
        return {"lambda": self.lam}


@dataclass(frozen=True)
class NormalNonNeg(ValuationDistribution):
    """Normal(``mu``, ``sigma``) truncated to ``[0, inf)`` and renormalised.

    ``mu`` and ``sigma`` are the parameters of the parent normal, not the
    moments of the truncated law.
    """

    mu: float
    sigma: float

    kind = "normal"

    def __post_init__(self):
        if not (self.sigma > 0):
            raise DomainError(f"sigma must be > 0, got {self.sigma}")
        if not math.isfinite(self.mu):
            raise DomainError(f"mu must be finite, got {self.mu}")
        if special.ndtr(self.mu / self.sigma) <= 0:
            raise DomainError("truncation leaves no probability mass")

    @property
    def _z(self) -> float:
        return float(special.ndtr(self.mu / self.sigma))

    def _phi(self, v):
        x = (v - self.mu) / self.sigma
        return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)

    def _pdf(self, v):
        return self._phi(v) / (self.sigma * self._z)

    def _survival(self, v):
        return special.ndtr((self.mu - v) / self.sigma) / self._z

    def _tail(self, t):
        upper = self.mu * special.ndtr((self.mu - t) / self.sigma) + self.sigma * self._phi(t)
        return upper / self._z

    def mean(self):
        return float(self._tail(np.float64(0.0)))

    def variance(self):
        m2 = ((self.mu**2 + self.sigma**2) * self._z + self.sigma * self.mu * float(self._phi(0.0))) / self._z
        return m2 - self.mean() ** 2

    def quantile(self, q):
        return float(self.mu - self.sigma * special.ndtri((1.0 - q) * self._z))

    def _order_stat_means(self):
        return _normal_order_stat_means(self.mu, self.sigma)

    def _from_uniform(self, u):
        return np.maximum(self.mu - self.sigma * special.ndtri((1.0 - u) * self._z), 0.0)

    def _quad_upper(self, t):
        return max(t, self.mu, 0.0) + 40.0 * self.sigma

    def params(self):
        return {"mu": self.mu, "sigma": self.sigma}


@functools.lru_cache(maxsize=256)
def _normal_order_stat_means(mu: float, sigma: float) -> tuple[float, float]:
    # No elementary closed form; integrate the pair survival functions once per law.
    d = NormalNonNeg(mu, sigma)
    return quad_order_stat_mean(d, 1), quad_order_stat_mean(d, 2)


KINDS = {"twopoint": TwoPoint, "uniform": Uniform, "exp": Exponential, "normal": NormalNonNeg}


def make_distribution(kind: str, **params) -> ValuationDistribution:
    """Build a distribution from a kind name and its flag-style parameters.

    ``twopoint``: vL, vH, pHigh (default 0.5); ``uniform``: a, b;
    ``exp``: lambda; ``normal``: mu, sigma.
    """
    kind = kind.lower()
    try:
        if kind == "twopoint":
            return TwoPoint(float(params["vL"]), float(params["vH"]), float(params.get("pHigh", 0.5)))
        if kind == "uniform":
            return Uniform(float(params["a"]), float(params["b"]))
        if kind in ("exp", "exponential"):
            return Exponential(float(params["lambda"]))
        if kind == "normal":
            return NormalNonNeg(float(params["mu"]), float(params["sigma"]))
    except KeyError as exc:
        raise DomainError(f"distribution '{kind}' needs parameter {exc.args[0]}") from None
    raise DomainError(f"unknown distribution kind '{kind}'")


# -- independent numerical route ----------------------------------------------

_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-12, limit=200)


def _breakpoints(d: ValuationDistribution, lo: float, hi: float) -> Optional[list]:
    if isinstance(d, Uniform):
        pts = [x for x in (d.a, d.b) if lo < x < hi]
        return pts or None
    return None


def quad_tail_expectation(d: ValuationDistribution, t: float) -> float:
    """``E[V; V >= t]`` by adaptive quadrature of ``v f(v)`` (atoms are summed)."""
    if t < 0:
        raise DomainError(f"threshold must be >= 0, got {t}")
    if d.is_discrete:
        return float(sum(v * p for v, p in d.atoms if v >= t))
    hi = d._quad_upper(t)
    if hi <= t:
        return 0.0
    val, _ = integrate.quad(lambda v: v * float(d._pdf(np.float64(v))), t, hi,
                            points=_breakpoints(d, t, hi), **_QUAD_OPTS)
    return float(val)


def quad_order_stat_mean(d: ValuationDistribution, k: int) -> float:
    """Mean of the min (k=1) or max (k=2) of two draws, as the integral of its survival."""
    if k not in (1, 2):
        raise DomainError(f"order index must be 1 or 2, got {k}")
    if d.is_discrete:
        atoms = d.atoms
        pick = min if k == 1 else max
        return float(sum(p1 * p2 * pick(v1, v2) for v1, p1 in atoms for v2, p2 in atoms))
    hi = d._quad_upper(0.0)
    if k == 1:
        g = lambda v: float(d._survival(np.float64(v))) ** 2  # noqa: E731
    else:
        g = lambda v: 1.0 - (1.0 - float(d._survival(np.float64(v)))) ** 2  # noqa: E731
    val, _ = integrate.quad(g, 0.0, hi, points=_breakpoints(d, 0.0, hi), **_QUAD_OPTS)
    return float(val)


def quad_total_mass(d: ValuationDistribution) -> float:
    """Integral of the density over the support; 1 up to quadrature error."""
    if d.is_discrete:
        return float(sum(p for _, p in d.atoms))
    hi = d._quad_upper(0.0)
    val, _ = integrate.quad(lambda v: float(d._pdf(np.float64(v))), 0.0, hi,
                            points=_breakpoints(d, 0.0, hi), **_QUAD_OPTS)
    return float(val)


# -- non-degeneracy -------------------------------------------------------------

@dataclass(frozen=True)
class NonDegeneracyWitness:
    """Two separated positive points, each with positive mass within ``epsilon``."""

    v1: float
    v2: float
    epsilon: float
    mass_low: float
    mass_high: float


def _interval_mass(d: ValuationDistribution, lo: float, hi: float) -> float:
    """``Pr[lo < V < hi]``."""
    lo = max(lo, 0.0)
    if d.is_discrete:
        return float(sum(p for v, p in d.atoms if lo < v < hi))
    return float(d._survival(np.float64(lo)) - d._survival(np.float64(hi)))


def is_non_degenerate(d: ValuationDistribution) -> Optional[NonDegeneracyWitness]:
    """A witness that ``V`` sits on two strictly positive points, or ``None``."""
    if isinstance(d, TwoPoint):
        v1, v2 = d.v_low, d.v_high
    elif isinstance(d, Exponential):
        v1, v2 = 0.5 / d.lam, 2.0 / d.lam
    elif isinstance(d, Uniform):
        w = d.b - d.a
        v1, v2 = d.a + 0.25 * w, d.a + 0.75 * w
    else:
        v1, v2 = d.quantile(0.25), d.quantile(0.75)
    if not (0.0 < v1 < v2):
        return None
    eps = (v2 - v1) / 4.0
    m1 = _interval_mass(d, v1 - eps, v1 + eps)
    m2 = _interval_mass(d, v2 - eps, v2 + eps)
    if m1 <= 0 or m2 <= 0:
        return None
    return NonDegeneracyWitness(v1, v2, eps, m1, m2)
