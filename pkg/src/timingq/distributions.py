"""Probability models for service, inter-arrival, and inter-departure durations.

Service distributions expose sampling, exact log-densities, means, and
differential entropies (analytic where a closed form exists, adaptive
quadrature otherwise).  Inter-departure models describe D = W + S, the sum
of an exponential idle period and a service duration: the exponential /
exponential case has the classic hypoexponential density, every other
service law goes through numerical convolution.

All entropies and log-densities are in nats.  Durations are abstract time
units; every distribution here lives on the nonnegative half-line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate, optimize, stats
from scipy.special import gammaln, logsumexp

__all__ = [
    "QuadratureError",
    "Exponential",
    "Deterministic",
    "Erlang",
    "Uniform",
    "PoissonProcess",
    "RenewalProcess",
    "Hypoexponential",
    "NumericalConvolution",
    "hypoexp_entropy",
]

# Absolute-error target for every entropy quadrature in this module.
ENTROPY_ABS_TOL = 1e-8

# Below this relative rate separation the hypoexponential density is a 0/0
# form and we switch to its Erlang-2 limit.
_EQUAL_RATE_REL_TOL = 1e-9

# Survival-probability level defining the upper integration limit for
# entropy quadratures: [0, Q] with P[D > Q] <= _TAIL_MASS.
_TAIL_MASS = 1e-12


class QuadratureError(RuntimeError):
    """Numerical integration failed to certify the requested tolerance.

    Attributes
    ----------
    achieved : float
        The error estimate that was actually obtained.
    """

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


def _as_float_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _maybe_scalar(out, scalar):
    if not scalar:
        return out
    return float(np.asarray(out).item())


@lru_cache(maxsize=8)
def _gl_rule(order: int):
    nodes, weights = leggauss(order)
    return nodes, weights


def _neg_f_log_f(log_pdf, x):
    """-f(x) log f(x) with the convention 0 log 0 = 0, vectorized."""
    lp = log_pdf(x)
    out = np.zeros_like(lp)
    finite = np.isfinite(lp)
    out[finite] = -np.exp(lp[finite]) * lp[finite]
    return out


def _entropy_quad(log_pdf, upper, points=(), abs_tol=ENTROPY_ABS_TOL,
                  tail_estimate=0.0):
    """Adaptive quadrature of -f log f on [0, upper] with certified error.

    `points` marks known fast-scale features or kinks.  The reported error
    is QUADPACK's estimate plus `tail_estimate` for the truncated
    exponential tail; exceeding `abs_tol` raises QuadratureError.
    """

    def integrand(d):
        return float(_neg_f_log_f(log_pdf, np.array([d]))[0])

    pts = sorted({p for p in points if 0.0 < p < upper})
    value, err = integrate.quad(integrand, 0.0, upper, points=pts or None,
                                epsabs=abs_tol * 1e-2, epsrel=1e-12, limit=800)
    total_err = err + tail_estimate
    if total_err > abs_tol:
        raise QuadratureError("entropy quadrature did not converge", total_err)
    return value, total_err


# ---------------------------------------------------------------------------
# service-time distributions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Exponential:
    """Exponential duration with the given rate (mean 1/rate)."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    def mean(self) -> float:
        return 1.0 / self.rate

    def support(self) -> tuple[float, float]:
        return (0.0, math.inf)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.exponential(1.0 / self.rate, size=size)

    def log_pdf(self, x):
        x, scalar = _as_float_array(x)
        out = np.where(x >= 0, math.log(self.rate) - self.rate * x, -np.inf)
        return _maybe_scalar(out, scalar)

    def entropy(self) -> float:
        # differential entropy log e + log(1/rate), exactly
        return 1.0 - math.log(self.rate)

    def ppf(self, q):
        q, scalar = _as_float_array(q)
        return _maybe_scalar(-np.log1p(-q) / self.rate, scalar)

    def quantile(self, q: float) -> float:
        return float(self.ppf(q))


@dataclass(frozen=True)
class Deterministic:
    """Point mass: the duration is always `value`."""

    value: float

    def __post_init__(self):
        if not self.value > 0:
            raise ValueError(f"value must be positive, got {self.value}")

    def mean(self) -> float:
        return self.value

    def support(self) -> tuple[float, float]:
        return (self.value, self.value)

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return self.value
        return np.full(size, self.value)

    def log_pdf(self, x):
        # Generalized density of a point mass: +inf on the atom, -inf off it.
        x, scalar = _as_float_array(x)
        out = np.where(x == self.value, np.inf, -np.inf)
        return _maybe_scalar(out, scalar)

    def entropy(self) -> float:
        raise ValueError("a point mass has no differential entropy")

    def ppf(self, q):
        q, scalar = _as_float_array(q)
        return _maybe_scalar(np.full_like(q, self.value), scalar)

    def quantile(self, q: float) -> float:
        return self.value


@dataclass(frozen=True)
class Erlang:
    """Erlang duration: sum of `shape` iid exponentials of the given rate."""

    shape: int
    rate: float

    def __post_init__(self):
        if int(self.shape) != self.shape or self.shape < 1:
            raise ValueError(f"shape must be a positive integer, got {self.shape}")
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    def mean(self) -> float:
        return self.shape / self.rate

    def support(self) -> tuple[float, float]:
        return (0.0, math.inf)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.gamma(float(self.shape), 1.0 / self.rate, size=size)

    def log_pdf(self, x):
        x, scalar = _as_float_array(x)
        k, beta = self.shape, self.rate
        out = np.full(x.shape, -np.inf)
        if k == 1:
            ok = x >= 0
            out[ok] = math.log(beta) - beta * x[ok]
        else:
            ok = x > 0
            out[ok] = (k * math.log(beta) + (k - 1) * np.log(x[ok])
                       - beta * x[ok] - gammaln(k))
        return _maybe_scalar(out, scalar)

    def entropy(self) -> float:
        # no closed form used here on purpose: quadrature path, checked in
        # tests against the analytic gamma entropy
        upper = self.quantile(1.0 - _TAIL_MASS)
        mode = max((self.shape - 1) / self.rate, 1e-12)
        value, _ = _entropy_quad(self.log_pdf, upper,
                                 points=(mode, 5.0 * mode),
                                 tail_estimate=_TAIL_MASS * (self.rate * upper + 40.0))
        return value

    def ppf(self, q):
        return stats.gamma.ppf(q, a=self.shape, scale=1.0 / self.rate)

    def quantile(self, q: float) -> float:
        return float(self.ppf(q))


@dataclass(frozen=True)
class Uniform:
    """Uniform duration on [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if self.lo < 0:
            raise ValueError(f"lo must be nonnegative, got {self.lo}")
        if not self.hi > self.lo:
            raise ValueError(f"hi must exceed lo, got [{self.lo}, {self.hi}]")

    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.uniform(self.lo, self.hi, size=size)

    def log_pdf(self, x):
        x, scalar = _as_float_array(x)
        inside = (x >= self.lo) & (x <= self.hi)
        out = np.where(inside, -math.log(self.hi - self.lo), -np.inf)
        return _maybe_scalar(out, scalar)

    def entropy(self) -> float:
        return math.log(self.hi - self.lo)

    def ppf(self, q):
        q, scalar = _as_float_array(q)
        return _maybe_scalar(self.lo + q * (self.hi - self.lo), scalar)

    def quantile(self, q: float) -> float:
        return float(self.ppf(q))


# ---------------------------------------------------------------------------
# arrival processes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PoissonProcess:
    """Poisson arrivals: iid exponential(rate) inter-arrival gaps."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")

    @property
    def inter_arrival(self) -> Exponential:
        return Exponential(self.rate)


@dataclass(frozen=True)
class RenewalProcess:
    """Renewal arrivals with iid inter-arrival gaps from any duration model."""

    inter_arrival: object

    def __post_init__(self):
        lo, hi = self.inter_arrival.support()
        if lo < 0 or hi <= 0:
            raise ValueError("inter-arrival gaps must be positive durations")


def _inter_arrival_law(arrival):
    """Accept a rate, an arrival process, or a bare duration model."""
    if isinstance(arrival, (int, float)):
        return Exponential(float(arrival))
    if isinstance(arrival, (PoissonProcess, RenewalProcess)):
        return arrival.inter_arrival
    return arrival


# ---------------------------------------------------------------------------
# inter-departure models: D = W + S with W ~ Exp(lam)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Hypoexponential:
    """Sum of independent Exponential(lam) and Exponential(mu).

    The density is lam*mu/(mu-lam) * (exp(-lam d) - exp(-mu d)) for d >= 0,
    symmetric in (lam, mu).  When the two rates agree to within 1e-9
    relative, the Erlang-2 limit mu^2 d exp(-mu d) is used instead.
    """

    lam: float
    mu: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")

    def _rates(self) -> tuple[float, float]:
        return min(self.lam, self.mu), max(self.lam, self.mu)

    def _equal_rates(self) -> bool:
        a, b = self._rates()
        return (b - a) / b < _EQUAL_RATE_REL_TOL

    def mean(self) -> float:
        return 1.0 / self.lam + 1.0 / self.mu

    def sample(self, rng: np.random.Generator, size=None):
        return (rng.exponential(1.0 / self.lam, size=size)
                + rng.exponential(1.0 / self.mu, size=size))

    def log_pdf(self, d):
        d, scalar = _as_float_array(d)
        out = np.full(d.shape, -np.inf)
        pos = d > 0
        dp = d[pos]
        a, b = self._rates()
        if self._equal_rates():
            r = 0.5 * (a + b)
            out[pos] = 2.0 * math.log(r) + np.log(dp) - r * dp
        else:
            # log f = log(ab) - log(b-a) - a d + log(1 - exp(-(b-a) d)),
            # stable for both tiny and large (b-a) d
            out[pos] = (math.log(a) + math.log(b) - math.log(b - a)
                        - a * dp + np.log(-np.expm1(-(b - a) * dp)))
        return _maybe_scalar(out, scalar)

    def sf(self, d):
        d, scalar = _as_float_array(d)
        a, b = self._rates()
        if self._equal_rates():
            r = 0.5 * (a + b)
            out = np.exp(-r * d) * (1.0 + r * d)
        else:
            out = (b * np.exp(-a * d) - a * np.exp(-b * d)) / (b - a)
        return _maybe_scalar(np.where(d <= 0, 1.0, out), scalar)

    def quantile(self, q: float) -> float:
        if not 0 < q < 1:
            raise ValueError("quantile level must be in (0, 1)")
        hi = 1.0
        while self.sf(hi) > 1.0 - q:
            hi *= 2.0
        return optimize.brentq(lambda d: self.sf(d) - (1.0 - q), 0.0, hi,
                               xtol=1e-12, rtol=8.9e-16)

    def entropy(self) -> float:
        return hypoexp_entropy(self.lam, self.mu)


def hypoexp_entropy(lam: float, mu: float) -> float:
    """Differential entropy of Exponential(lam) + Exponential(mu), in nats.

    Adaptive quadrature of -f log f over [0, Q] with Q the 1 - 1e-12
    quantile; the discarded exponential tail enters the error budget as an
    analytic envelope estimate.  Absolute error is certified to 1e-8 or a
    QuadratureError is raised.  The equal-rate limit is the Erlang-2
    density, handled on its own branch.
    """
    model = Hypoexponential(lam, mu)
    a, b = model._rates()
    upper = model.quantile(1.0 - _TAIL_MASS)
    # beyond Q the integrand is below f * (a d + const); its integral is
    # bounded by the tail mass times the log-density magnitude at Q plus
    # one extra unit of linear growth per 1/a
    tail = _TAIL_MASS * (abs(float(model.log_pdf(upper))) + 2.0)
    # breakpoints resolve the fast scale 1/b when the rates are far apart
    points = (0.5 / b, 2.0 / b, 10.0 / b, 30.0 / b, 1.0 / a, 5.0 / a)
    value, _ = _entropy_quad(model.log_pdf, upper, points=points,
                             tail_estimate=tail)
    return value


class NumericalConvolution:
    """Density of D = W + S for W ~ Exp(lam) independent of service S.

    The density f_D(d) = integral of lam e^(-lam w) f_S(d - w) over the
    window where both factors live, evaluated with fixed-order
    Gauss-Legendre quadrature in log space.  A point-mass service is the
    one special case: the sum is then just a shifted exponential and both
    the density and the entropy are exact.
    """

    _GL_ORDER = 256

    def __init__(self, lam: float, service):
        if not lam > 0:
            raise ValueError(f"lam must be positive, got {lam}")
        self.lam = float(lam)
        self.service = service
        self._shift = service.value if isinstance(service, Deterministic) else None

    def mean(self) -> float:
        return 1.0 / self.lam + self.service.mean()

    def sample(self, rng: np.random.Generator, size=None):
        return rng.exponential(1.0 / self.lam, size=size) + self.service.sample(rng, size=size)

    def log_pdf(self, d, _chunk=20_000):
        d, scalar = _as_float_array(d)
        if self._shift is not None:
            x = d - self._shift
            out = np.where(x > 0, math.log(self.lam) - self.lam * x, -np.inf)
            return _maybe_scalar(out, scalar)
        flat = np.atleast_1d(d).ravel()
        out = np.empty(flat.shape)
        for start in range(0, flat.size, _chunk):
            out[start:start + _chunk] = self._log_pdf_block(flat[start:start + _chunk])
        out = out.reshape(np.atleast_1d(d).shape)
        return _maybe_scalar(out, scalar)

    def _log_pdf_block(self, d):
        s_lo, s_hi = self.service.support()
        lo = np.maximum(0.0, d - s_hi) if math.isfinite(s_hi) else np.zeros_like(d)
        hi = np.minimum(d - s_lo, d)
        # tighten the window where either factor is negligible, else the
        # fixed-order rule can straddle a huge span and miss the narrow
        # service peak (relative truncation error ~1e-14, below rule error)
        span = s_hi if math.isfinite(s_hi) else self.service.quantile(1.0 - 1e-14)
        tight_lo = np.maximum(lo, d - span)
        tight_hi = np.minimum(hi, 700.0 / self.lam)
        keep = tight_hi > tight_lo
        lo = np.where(keep, tight_lo, lo)
        hi = np.where(keep, tight_hi, hi)
        out = np.full(d.shape, -np.inf)
        good = hi > lo
        if not good.any():
            return out
        nodes, weights = _gl_rule(self._GL_ORDER)
        mid = 0.5 * (lo[good] + hi[good])
        half = 0.5 * (hi[good] - lo[good])
        w = mid[:, None] + half[:, None] * nodes[None, :]
        log_terms = (math.log(self.lam) - self.lam * w
                     + self.service.log_pdf(d[good][:, None] - w))
        out[good] = logsumexp(log_terms, b=weights[None, :] * half[:, None], axis=1)
        return out

    def quantile_bound(self, q: float) -> float:
        """An upper bound for the q-quantile of D (union bound on W and S)."""
        split = 1.0 - 0.5 * (1.0 - q)
        w_tail = -math.log1p(-split) / self.lam
        return w_tail + self.service.quantile(split)

    def entropy(self, abs_tol: float = ENTROPY_ABS_TOL) -> float:
        """Differential entropy of D by composite Gauss-Legendre panels.

        The error estimate is the difference between 32- and 64-node
        evaluations of every panel plus the truncated-tail envelope;
        QuadratureError if it exceeds abs_tol.
        """
        if self._shift is not None:
            # shifting does not change differential entropy
            return 1.0 - math.log(self.lam)
        upper = self.quantile_bound(1.0 - _TAIL_MASS)
        s_lo, s_hi = self.service.support()
        knots = {0.0, upper}
        for k in (s_lo, s_hi):
            if math.isfinite(k) and 0.0 < k < upper:
                knots.add(k)
        edges = np.unique(np.concatenate([
            np.array(sorted(knots)),
            np.geomspace(upper * 1e-8, upper, 48),
        ]))
        edges = edges[edges <= upper]

        def panel_sum(order):
            nodes, weights = _gl_rule(order)
            mid = 0.5 * (edges[:-1] + edges[1:])
            half = 0.5 * np.diff(edges)
            x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
            vals = _neg_f_log_f(self.log_pdf, x).reshape(len(half), order)
            return float(np.sum(vals @ weights * half))

        coarse, fine = panel_sum(32), panel_sum(64)
        tail_lp = float(self.log_pdf(upper))
        tail = _TAIL_MASS * (abs(tail_lp) + 2.0) if math.isfinite(tail_lp) else 0.0
        err = abs(fine - coarse) + tail
        if err > abs_tol:
            raise QuadratureError("convolution entropy did not converge", err)
        return fine
