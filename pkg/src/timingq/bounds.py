"""Capacity bounds for the bufferless timing queue.

Three related quantities, all in nats per unit time unless noted:

* `rate_R`: the achievable rate of the exponential-service queue driven at
  arrival rate lam, equal to the inter-departure entropy gain over the
  service entropy divided by the mean renewal cycle.
* `universal_bound` / `universal_bound_at`: a converse that holds for any
  service law with a density, obtained by relaxing the maximal mutual
  information over mean-constrained nonnegative inputs (`c_upper`) with the
  max-entropy inequality.  The `_at` form is parametrized by arrival rate;
  its supremum over arrival rates is the closed two-case form.
* `cas_bound`: a tighter converse specific to Poisson arrivals, where the
  idle time is exactly exponential: mutual information between idle time
  and inter-departure time per mean cycle.

`sweep` tabulates the normalized curves on a rho = lam/mu grid and
`maximize_rate` locates the peak of the normalized rate, which lands at
0.3340 nats per mean service time for the exponential-service queue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import _output
from .distributions import (
    Deterministic,
    Exponential,
    NumericalConvolution,
    QuadratureError,
    hypoexp_entropy,
)

__all__ = [
    "rate_R",
    "rate_R_normalized",
    "universal_bound",
    "universal_bound_at",
    "c_upper",
    "cas_bound",
    "g_rho",
    "hypoexp_entropy_rewritten",
    "sweep",
    "maximize_rate",
    "per_service_time",
    "BoundCurve",
    "OptimumReport",
]

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def per_service_time(rate_per_unit_time: float, service) -> float:
    """Convert nats per unit time to nats per mean service time."""
    mean = service.mean() if hasattr(service, "mean") else float(service)
    return rate_per_unit_time * mean


def rate_R(lam: float, mu: float) -> float:
    """Achievable rate of the exponential-service queue, nats per unit time.

    Numerator: entropy of the inter-departure time (idle + service, the
    two-rate sum law) minus the exponential service entropy 1 - log mu.
    Denominator: the mean renewal cycle 1/lam + 1/mu.
    """
    if lam <= 0 or mu <= 0:
        raise ValueError("rates must be positive")
    return (hypoexp_entropy(lam, mu) - 1.0 + math.log(mu)) / (1.0 / lam + 1.0 / mu)


def rate_R_normalized(lam: float, mu: float) -> float:
    """`rate_R` in nats per mean service time (divide by mu)."""
    return rate_R(lam, mu) / mu


def c_upper(a: float, service) -> float:
    """Upper bound, in nats, on the maximal mutual information I(X; X+S)
    over nonnegative inputs X with mean at most a.

    Equals 1 + log(a + E[S]) - h(S): the output X+S has mean a + E[S], and
    among positive variables of that mean the exponential maximizes
    entropy.  Monotone increasing and concave in a.
    """
    if a < 0:
        raise ValueError(f"input mean budget must be nonnegative, got {a}")
    return 1.0 + math.log(a + service.mean()) - service.entropy()


def universal_bound_at(lam: float, service) -> float:
    """Converse rate at arrival rate lam, nats per unit time, any service.

    The sender's idle times have mean at most the mean arrival gap 1/lam,
    so the rate is at most c_upper(1/lam)/(1/lam + E[S]).
    """
    if lam <= 0:
        raise ValueError(f"arrival rate must be positive, got {lam}")
    cycle = 1.0 / lam + service.mean()
    return c_upper(1.0 / lam, service) / cycle


def universal_bound(service) -> float:
    """Service-only converse: sup over arrival rates of `universal_bound_at`,
    in closed form.  Nats per unit time.

    With m = E[S] and h = h(S), the supremum over the input-mean budget a
    of [1 + log(a + m) - h]/(a + m) sits at a = e^h - m.  When h < log m
    that point is infeasible (a < 0) and the bound decreases in a, so a = 0
    is optimal: value (1 + log m - h)/m.  Otherwise the interior optimum
    gives exp(-h).
    """
    mean = service.mean()
    h = service.entropy()
    if h < math.log(mean):
        return (1.0 + math.log(mean) - h) / mean
    return math.exp(-h)


def cas_bound(lam: float, service) -> float:
    """Poisson-arrival converse, nats per unit time.

    Mutual information between the (exponential, rate lam) idle time and
    the inter-departure time, divided by the mean cycle:
    [h(W+S) - h(S)] / (1/lam + E[S]).  h(W+S) always goes through the
    numerical convolution so that analytic special cases remain genuine
    cross-checks rather than identities.

    A point-mass service makes the channel from idle time to departure
    time noiseless, so the bound is +inf (and vacuous).
    """
    if lam <= 0:
        raise ValueError(f"arrival rate must be positive, got {lam}")
    if isinstance(service, Deterministic):
        return math.inf
    gain = NumericalConvolution(lam, service).entropy() - service.entropy()
    return gain / (1.0 / lam + service.mean())


# ---------------------------------------------------------------------------
# reparametrized entropy: the normalized curves depend on rho = lam/mu only
# ---------------------------------------------------------------------------


def g_rho(rho: float, abs_tol: float = 1e-8) -> float:
    """Shape integral of the two-rate sum law's entropy, a function of
    rho = lam/mu alone.

    Written over t in (0, inf) with q(t) = 1 - exp(-t), the integral has a
    different stable form on each side of rho = 1:

        rho < 1:  -∫ exp(-t rho/(1-rho)) q(t) (t + log q(t)) dt
        rho > 1:  -∫ exp(-t/(rho-1)) q(t) log q(t) dt

    The branch split is pinned by requiring `hypoexp_entropy_rewritten` to
    agree with the direct quadrature `hypoexp_entropy` (see the tests);
    rho = 1 is excluded and handled by the equal-rates path upstream.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if rho == 1.0:
        raise ValueError("rho = 1 is handled by the equal-rates entropy path")

    if rho < 1.0:
        decay = rho / (1.0 - rho)

        def integrand(t):
            q = -math.expm1(-t)
            return -math.exp(-decay * t) * q * (t + math.log(q))
    else:
        decay = 1.0 / (rho - 1.0)

        def integrand(t):
            q = -math.expm1(-t)
            return -math.exp(-decay * t) * q * math.log(q)

    value, err = integrate.quad(integrand, 0.0, np.inf,
                                epsabs=abs_tol * 1e-2, epsrel=1e-12, limit=400)
    if err > abs_tol:
        raise QuadratureError("shape integral did not converge", err)
    return value


def hypoexp_entropy_rewritten(lam: float, mu: float) -> float:
    """Entropy of the two-rate sum law via the shape integral, in nats.

    Independent route from `hypoexp_entropy` (different integrand and
    variable), used as a cross-check:

        h = -log mu + 1 + 1/rho - log(rho/|1-rho|) + rho/(1-rho)^2 * g(rho)
    """
    if lam <= 0 or mu <= 0:
        raise ValueError("rates must be positive")
    rho = lam / mu
    if rho == 1.0:
        raise ValueError("rho = 1 is handled by the equal-rates entropy path")
    return (-math.log(mu) + 1.0 + 1.0 / rho - math.log(rho / abs(1.0 - rho))
            + rho / (1.0 - rho) ** 2 * g_rho(rho))


# ---------------------------------------------------------------------------
# curve tabulation and the rate optimum
# ---------------------------------------------------------------------------


@dataclass
class BoundCurve:
    """Normalized bound curves tabulated on a rho grid.

    All columns are in nats per mean service time.  rate_R_norm is the
    exponential-service achievable rate; universal_norm and cas_norm are
    the two converses evaluated for `service_kind`.
    """

    rho_grid: np.ndarray
    mu: float
    service_kind: str
    rate_R_norm: np.ndarray
    universal_norm: np.ndarray
    cas_norm: np.ndarray

    def validate(self) -> None:
        cols = (self.rate_R_norm, self.universal_norm, self.cas_norm)
        if any(len(c) != len(self.rho_grid) for c in cols):
            raise ValueError("column lengths disagree with the grid")
        for c in cols:
            if np.any(np.asarray(c) < 0):
                raise ValueError("bounds must be nonnegative")
        if np.any(self.rate_R_norm > self.universal_norm):
            raise ValueError("achievable rate exceeded the universal bound")

    def to_csv(self, config: dict | None = None) -> str:
        rows = zip(self.rho_grid, self.rate_R_norm,
                   self.universal_norm, self.cas_norm)
        return _output.csv_text(
            ["rho", "rate_R_norm", "universal_norm", "cas_norm"], rows, config)


def sweep(rho_grid, mu: float, service=None, include_cas: bool = True) -> BoundCurve:
    """Tabulate normalized rate and converse curves over rho = lam/mu.

    `service` defaults to exponential with rate mu.  The cas column is the
    slowest (numerical convolution per grid point) and can be skipped, in
    which case it is filled with NaN.
    """
    rho = np.asarray(rho_grid, dtype=float)
    if rho.ndim != 1 or rho.size == 0 or np.any(rho <= 0):
        raise ValueError("rho grid must be one-dimensional and positive")
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if service is None:
        service = Exponential(mu)
    mean = service.mean()

    rate = np.array([rate_R(r * mu, mu) / mu for r in rho])
    universal = np.array([universal_bound_at(r * mu, service) * mean for r in rho])
    if include_cas:
        cas = np.array([cas_bound(r * mu, service) * mean for r in rho])
    else:
        cas = np.full(rho.shape, np.nan)

    curve = BoundCurve(rho_grid=rho, mu=mu,
                       service_kind=type(service).__name__,
                       rate_R_norm=rate, universal_norm=universal, cas_norm=cas)
    curve.validate()
    return curve


@dataclass
class OptimumReport:
    """Result of maximizing the normalized rate over rho."""

    rho_star: float
    value: float
    bracket: tuple[float, float]
    tolerance: float

    def as_dict(self) -> dict:
        return {
            "rho_star": self.rho_star,
            "value": self.value,
            "bracket": list(self.bracket),
            "tolerance": self.tolerance,
        }


def _golden_section_max(f, lo: float, hi: float, tol: float):
    """Standard golden-section search for a maximum on [lo, hi]."""
    a, b = lo, hi
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def maximize_rate(mu: float, bracket: tuple[float, float] = (0.01, 2.0),
                  tol: float = 1e-6) -> OptimumReport:
    """Locate the rho maximizing the normalized rate within `bracket`.

    A coarse grid scan at step 0.01 brackets the peak first (no
    unimodality is assumed), then golden-section refines to `tol` in rho.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0 < lo < hi):
        raise ValueError(f"bracket must satisfy 0 < lo < hi, got {bracket}")
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")

    def f(rho: float) -> float:
        return rate_R(rho * mu, mu) / mu

    grid = np.arange(lo, hi + 0.005, 0.01)
    grid = grid[(grid >= lo) & (grid <= hi)]
    values = [f(r) for r in grid]
    peak = int(np.argmax(values))
    if peak in (0, len(grid) - 1):
        raise ValueError(f"no interior maximum inside bracket {bracket}")

    rho_star, value = _golden_section_max(
        f, grid[peak - 1], grid[peak + 1], tol)
    if values[peak] > value:
        rho_star, value = float(grid[peak]), float(values[peak])
    return OptimumReport(rho_star=float(rho_star), value=float(value),
                         bracket=(lo, hi), tolerance=tol)
