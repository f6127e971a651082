"""Offspring laws, their step laws, and the supercritical-to-subcritical dual.

An offspring law mu lives on the non-negative integers.  Four families are
supported: explicit finite-support laws, geometric(p) with
mu(i) = p(1-p)^i, Poisson(lambda), and critical/subcritical power-tail
laws with mu(i) = c * i^-(alpha+1) for i >= 1.  Parametric families expose
pmf/tail lazily through closed forms; only finite laws store their atoms.

The step law nu of the associated queue-length walk is the index shift
nu(i) = mu(i+1), supported on {-1, 0, 1, ...}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammainc, gammaln, zeta

__all__ = [
    "OffspringDistribution",
    "StepDistribution",
    "classify",
    "extinction_probability",
    "dual",
    "step_distribution",
    "make_power_tail",
    "power_tail_constant",
    "finite_support",
    "geometric",
    "poisson",
    "critical_binary",
    "geometric_critical",
    "poisson_critical",
    "power_critical",
    "near_four_variance",
    "catalog",
    "distribution_from_spec",
    "distribution_to_spec",
    "InfeasiblePowerTail",
]

MEAN_TOL = 1e-12          # criticality tolerance on the mean
MASS_TOL = 1e-12          # pmf normalization tolerance


class InfeasiblePowerTail(ValueError):
    """No power-tail coefficient achieves the requested mean with mu(0) >= 0."""


@dataclass(frozen=True)
class OffspringDistribution:
    """Immutable offspring law; construct via the factory functions below.

    family_tag is one of "finite-support", "geometric", "poisson",
    "power-tail"; params is the family-specific parameter tuple.
    """

    family_tag: str
    params: tuple

    # -- basic scalars ----------------------------------------------------

    @property
    def mean(self) -> float:
        if self.family_tag == "finite-support":
            return math.fsum(i * p for i, p in self.params)
        if self.family_tag == "geometric":
            (p,) = self.params
            return (1.0 - p) / p
        if self.family_tag == "poisson":
            return self.params[0]
        alpha, c = self.params
        return c * float(zeta(alpha, 1))

    @property
    def variance(self) -> float:
        """Var of the child count; +inf when the second moment diverges."""
        if self.family_tag == "finite-support":
            m = self.mean
            return math.fsum(i * i * p for i, p in self.params) - m * m
        if self.family_tag == "geometric":
            (p,) = self.params
            return (1.0 - p) / (p * p)
        if self.family_tag == "poisson":
            return self.params[0]
        alpha, _ = self.params
        return math.inf if alpha <= 2.0 else 0.0  # constructor caps alpha at 2

    @property
    def factorial_second_moment(self) -> float:
        """v = sum_i i(i-1) mu(i); equals the step variance for critical laws."""
        if self.family_tag == "power-tail":
            return math.inf
        if self.family_tag == "finite-support":
            return math.fsum(i * (i - 1) * p for i, p in self.params)
        return self.variance + self.mean * self.mean - self.mean

    @property
    def p0(self) -> float:
        return self.pmf(0)

    @property
    def p1(self) -> float:
        return self.pmf(1)

    @property
    def support_max(self):
        """Largest atom for finite laws, None for unbounded families."""
        if self.family_tag == "finite-support":
            return self.params[-1][0]
        return None

    # -- pointwise access -------------------------------------------------

    def pmf(self, i):
        i = np.asarray(i)
        if self.family_tag == "finite-support":
            keys = np.array([k for k, _ in self.params])
            vals = np.array([v for _, v in self.params])
            pos = np.searchsorted(keys, i)
            pos_c = np.clip(pos, 0, len(keys) - 1)
            out = np.where(keys[pos_c] == i, vals[pos_c], 0.0)
            out = np.where(i < 0, 0.0, out)
            return out if out.ndim else float(out)
        if self.family_tag == "geometric":
            (p,) = self.params
            out = np.where(i >= 0, p * np.power(1.0 - p, np.maximum(i, 0)), 0.0)
            return out if out.ndim else float(out)
        if self.family_tag == "poisson":
            lam = self.params[0]
            ii = np.maximum(i, 0)
            out = np.exp(-lam + ii * math.log(lam) - gammaln(ii + 1.0))
            out = np.where(i >= 0, out, 0.0)
            return out if out.ndim else float(out)
        alpha, c = self.params
        out = np.where(i >= 1, c * np.power(np.maximum(i, 1), -(alpha + 1.0)), 0.0)
        out = np.where(i == 0, 1.0 - c * float(zeta(alpha + 1.0, 1)), out)
        out = np.where(i < 0, 0.0, out)
        return out if out.ndim else float(out)

    def tail(self, i):
        """mu([i, infinity)); tail(0) = 1 and tail is nonincreasing."""
        i = np.asarray(i)
        if self.family_tag == "finite-support":
            keys = np.array([k for k, _ in self.params])
            suffix = np.concatenate(
                [np.cumsum([v for _, v in self.params][::-1])[::-1], [0.0]]
            )
            pos = np.searchsorted(keys, i, side="left")
            out = np.where(i <= keys[0], 1.0, suffix[np.minimum(pos, len(keys))])
            return out if out.ndim else float(out)
        if self.family_tag == "geometric":
            (p,) = self.params
            out = np.power(1.0 - p, np.maximum(i, 0))
            return out if out.ndim else float(out)
        if self.family_tag == "poisson":
            lam = self.params[0]
            # P(X >= i) = regularized lower gamma P(i, lam) for i >= 1
            out = np.where(i >= 1, gammainc(np.maximum(i, 1), lam), 1.0)
            return out if out.ndim else float(out)
        alpha, c = self.params
        out = np.where(i >= 1, c * zeta(alpha + 1.0, np.maximum(i, 1)), 1.0)
        return out if out.ndim else float(out)

    def pgf(self, q: float) -> float:
        """f(q) = E[q^xi] for q in [0, 1]."""
        if self.family_tag == "finite-support":
            return math.fsum(p * q**i for i, p in self.params)
        if self.family_tag == "geometric":
            (p,) = self.params
            return p / (1.0 - (1.0 - p) * q)
        if self.family_tag == "poisson":
            lam = self.params[0]
            return math.exp(lam * (q - 1.0))
        alpha, c = self.params
        mu0 = 1.0 - c * float(zeta(alpha + 1.0, 1))
        if q == 0.0:
            return mu0
        return mu0 + c * _polylog(alpha + 1.0, q)

    # -- misc ---------------------------------------------------------------

    def second_moment_partial(self, n: int) -> float:
        """sum_{i<=n} i^2 mu(i); diverges (in n) iff the variance is infinite."""
        if self.family_tag == "finite-support":
            return math.fsum(i * i * p for i, p in self.params if i <= n)
        i = np.arange(1, n + 1)
        return float(np.sum(i.astype(float) ** 2 * self.pmf(i)))

    def spec_dict(self) -> dict:
        return distribution_to_spec(self)

    def label(self) -> str:
        if self.family_tag == "finite-support":
            inner = ",".join(f"{i}:{p:g}" for i, p in self.params)
            return f"finite{{{inner}}}"
        if self.family_tag == "geometric":
            return f"geometric(p={self.params[0]:g})"
        if self.family_tag == "poisson":
            return f"poisson({self.params[0]:g})"
        return f"power(alpha={self.params[0]:g})"


@dataclass(frozen=True)
class StepDistribution:
    """Walk step law nu(i) = mu(i+1) on {-1} u N for a source law mu."""

    offspring: OffspringDistribution

    @property
    def mean(self) -> float:
        return self.offspring.mean - 1.0

    @property
    def variance(self) -> float:
        return self.offspring.variance

    def pmf(self, j):
        return self.offspring.pmf(np.asarray(j) + 1)

    def tail(self, j):
        """nu([j, infinity))."""
        return self.offspring.tail(np.asarray(j) + 1)

    @property
    def p_minus1(self) -> float:
        """P(X = -1) = mu(0)."""
        return self.offspring.p0

    @property
    def p_zero(self) -> float:
        """p0 = P(X = 0) = mu(1); the 1/(1-p0) scalings use this."""
        return self.offspring.p1


# ---------------------------------------------------------------------------
# factories


def finite_support(pmf: dict) -> OffspringDistribution:
    """Finite-support law from {child count: probability}."""
    atoms = tuple(sorted((int(i), float(p)) for i, p in pmf.items() if p != 0.0))
    if not atoms or any(i < 0 for i, _ in atoms):
        raise ValueError("support must be non-negative integers")
    if any(p < 0 for _, p in atoms):
        raise ValueError("probabilities must be non-negative")
    total = math.fsum(p for _, p in atoms)
    if abs(total - 1.0) > MASS_TOL:
        raise ValueError(f"pmf mass {total!r} is not 1 within {MASS_TOL}")
    return OffspringDistribution("finite-support", atoms)


def geometric(p: float) -> OffspringDistribution:
    if not 0.0 < p < 1.0:
        raise ValueError("geometric parameter must lie in (0,1)")
    return OffspringDistribution("geometric", (float(p),))


def poisson(mean: float) -> OffspringDistribution:
    if mean <= 0.0:
        raise ValueError("poisson mean must be positive")
    return OffspringDistribution("poisson", (float(mean),))


def make_power_tail(alpha: float, target="critical") -> OffspringDistribution:
    """Power-tail law mu(i) = c i^-(alpha+1) (i >= 1) with prescribed mean.

    target is "critical" (mean 1) or a subcritical mean in (0, 1).  The
    coefficient is solved by bisection to 1e-12 on the mean; infeasible
    targets (mu(0) < 0) raise InfeasiblePowerTail.
    """
    if not 1.0 < alpha <= 2.0:
        raise ValueError("alpha must lie in (1, 2]")
    m_target = 1.0 if target == "critical" else float(target)
    if not 0.0 < m_target <= 1.0:
        raise ValueError("target mean must be critical or subcritical")
    z_a = float(zeta(alpha, 1))
    z_a1 = float(zeta(alpha + 1.0, 1))
    lo, hi = 0.0, 1.0
    while 1.0 * hi * z_a < m_target:  # pragma: no cover - z_a > 1 always
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid * z_a < m_target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-18:
            break
    c = 0.5 * (lo + hi)
    if abs(c * z_a - m_target) > MEAN_TOL:
        raise InfeasiblePowerTail("bisection failed to match the target mean")
    if 1.0 - c * z_a1 < -MASS_TOL:
        raise InfeasiblePowerTail("coefficient would force mu(0) < 0")
    return OffspringDistribution("power-tail", (float(alpha), c))


def power_tail_constant(d: OffspringDistribution, imax: int = 10**6) -> float:
    """Realized tail constant: sup_{1<=i<=imax} i^alpha * tail(i)."""
    if d.family_tag != "power-tail":
        raise ValueError("tail constant only defined for power-tail laws")
    alpha, _ = d.params
    best = 0.0
    for start in range(1, imax + 1, 2**18):
        i = np.arange(start, min(start + 2**18, imax + 1), dtype=np.float64)
        best = max(best, float(np.max(i**alpha * d.tail(i.astype(np.int64)))))
    return best


# ---------------------------------------------------------------------------
# classification / extinction / dual


def classify(d: OffspringDistribution) -> str:
    """"subcritical", "critical", or "supercritical" by the mean (tol 1e-12)."""
    m = d.mean
    if m > 1.0 + MEAN_TOL:
        return "supercritical"
    if m < 1.0 - MEAN_TOL:
        return "subcritical"
    return "critical"


def extinction_probability(d: OffspringDistribution) -> float:
    """Smallest fixed point q of the pgf on [0, 1].

    Forced to 1 for critical/subcritical laws; otherwise located by
    monotone fixed-point iteration from 0 (tolerance 1e-14) and polished
    by bisection on f(q) - q.
    """
    if classify(d) != "supercritical":
        return 1.0
    q = 0.0
    for _ in range(100000):
        q_next = d.pgf(q)
        if abs(q_next - q) < 1e-14:
            q = q_next
            break
        q = q_next
    # polish: f(x) > x on [0, q*), f(x) < x on (q*, 1)
    lo = max(0.0, q - 1e-6)
    hi = min(1.0 - 1e-15, q + 1e-6)
    while d.pgf(hi) - hi > 0 and hi < 1.0 - 1e-12:
        hi = min(1.0 - 1e-15, hi + (hi - lo))
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if d.pgf(mid) - mid > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dual(d: OffspringDistribution) -> OffspringDistribution:
    """The conjugate law mu_hat(i) = mu(i) q^(i-1), q the extinction prob.

    Conditioning a supercritical tree on finiteness yields GW(mu_hat);
    mu_hat is critical or subcritical and mu_hat(1) = mu(1).  For
    critical/subcritical d this is d itself (q = 1).
    """
    if classify(d) != "supercritical":
        return d
    if d.p0 <= 0.0:
        raise ValueError("supercritical law with mu(0)=0 has q=0; dual undefined")
    q = extinction_probability(d)
    if d.family_tag == "finite-support":
        atoms = {i: p * q ** (i - 1) for i, p in d.params}
        return finite_support(atoms)
    if d.family_tag == "geometric":
        # q = p/(1-p); mu_hat is geometric(1-p) exactly
        (p,) = d.params
        return geometric(1.0 - p)
    if d.family_tag == "poisson":
        # mu_hat(i) = e^-lam lam^i q^(i-1)/i! = Poisson(lam*q) since q=e^(lam(q-1))
        lam = d.params[0]
        return poisson(lam * q)
    raise ValueError("power-tail laws are never supercritical here")


def step_distribution(d: OffspringDistribution) -> StepDistribution:
    return StepDistribution(d)


# ---------------------------------------------------------------------------
# catalog


def critical_binary() -> OffspringDistribution:
    return finite_support({0: 0.5, 2: 0.5})


def geometric_critical() -> OffspringDistribution:
    return geometric(0.5)


def poisson_critical() -> OffspringDistribution:
    return poisson(1.0)


def power_critical(alpha: float = 1.5) -> OffspringDistribution:
    return make_power_tail(alpha, "critical")


def near_four_variance() -> OffspringDistribution:
    """Critical law with v = 4.5 and dyadic masses (cheap exact sampling)."""
    return finite_support({0: 8 / 16, 1: 7 / 16, 9: 1 / 16})


def catalog() -> dict:
    return {
        "critical-binary": critical_binary(),
        "geometric-critical": geometric_critical(),
        "poisson-1": poisson_critical(),
        "power-1.5": power_critical(1.5),
    }


# ---------------------------------------------------------------------------
# config-file representation


def distribution_from_spec(spec: dict) -> OffspringDistribution:
    """Parse {"family": ...} config dicts (see README for the schema)."""
    fam = spec["family"]
    if fam == "finite":
        return finite_support({int(k): float(v) for k, v in spec["pmf"].items()})
    if fam == "geometric":
        return geometric(float(spec["p"]))
    if fam == "poisson":
        return poisson(float(spec["mean"]))
    if fam == "power":
        target = spec.get("target", "critical")
        if target != "critical":
            target = float(target)
        return make_power_tail(float(spec["alpha"]), target)
    raise ValueError(f"unknown distribution family {fam!r}")


def distribution_to_spec(d: OffspringDistribution) -> dict:
    if d.family_tag == "finite-support":
        return {"family": "finite", "pmf": {str(i): p for i, p in d.params}}
    if d.family_tag == "geometric":
        return {"family": "geometric", "p": d.params[0]}
    if d.family_tag == "poisson":
        return {"family": "poisson", "mean": d.params[0]}
    alpha, c = d.params
    return {"family": "power", "alpha": alpha, "target": c * float(zeta(alpha, 1))
            if abs(c * float(zeta(alpha, 1)) - 1.0) > MEAN_TOL else "critical"}


# ---------------------------------------------------------------------------
# polylog Li_s(z) for s in (2, 3], z in (0, 1) -- pgf of power-tail laws


@lru_cache(maxsize=None)
def _eta(s: float, n: int = 36) -> float:
    """Alternating zeta sum_{k>=1} (-1)^(k-1) k^-s, CVZ-accelerated (s > 0)."""
    d = ((3.0 + math.sqrt(8.0)) ** n + (3.0 - math.sqrt(8.0)) ** n) / 2.0
    b, c, acc = -1.0, -d, 0.0
    for k in range(n):
        c = b - c
        acc += c / (k + 1.0) ** s
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0))
    return acc / d


@lru_cache(maxsize=None)
def _zeta_any(s: float) -> float:
    """Riemann zeta for real s != 1 (reflection below 0, eta on (0,1))."""
    if s > 1.0:
        return float(zeta(s, 1))
    if s == 0.0:
        return -0.5
    if s > 0.0:
        return _eta(s) / (1.0 - 2.0 ** (1.0 - s))
    # zeta(s) = 2^s pi^(s-1) sin(pi s/2) Gamma(1-s) zeta(1-s)
    return (
        2.0**s
        * math.pi ** (s - 1.0)
        * math.sin(math.pi * s / 2.0)
        * math.gamma(1.0 - s)
        * float(zeta(1.0 - s, 1))
    )


def _polylog(s: float, z: float) -> float:
    if not 0.0 <= z < 1.0:
        if z == 1.0:
            return float(zeta(s, 1))
        raise ValueError("polylog evaluated outside [0, 1]")
    if z <= 0.5 or float(s).is_integer():
        # direct series; for integer s near z=1 the tail is cut adaptively
        total, k = 0.0, 1
        while k < 10**8:
            block = np.arange(k, k + 65536, dtype=np.float64)
            terms = z**block / block**s
            total += float(terms.sum())
            k += 65536
            if terms[-1] < 1e-18 * max(total, 1e-30):
                break
        return total
    # expansion around z = 1: Li_s(e^mu) = Gamma(1-s)(-mu)^(s-1) + sum zeta(s-k) mu^k/k!
    mu = math.log(z)
    total = math.gamma(1.0 - s) * (-mu) ** (s - 1.0)
    fact = 1.0
    for k in range(0, 60):
        if k > 0:
            fact *= k
        term = _zeta_any(s - k) * mu**k / fact
        total += term
        if k > 4 and abs(term) < 1e-18:
            break
    return total
