"""Beta process construction as a superposition of simulable rounds.

A beta process with concentration c(w) > 0 and finite base measure mu has
Levy measure

    nu(dp, dw) = c(w) p^(-1) (1-p)^(c(w)-1) dp mu(dw),   p in (0, 1),

which is infinite, so it cannot be simulated directly.  It splits exactly
into rounds k = 0, 1, 2, ... where round k is a finite Poisson process:

    nu_k(dp, dw) = Beta(p | 1, c(w)+k) dp mu_k(dw),
    mu_k(dw)     = c(w) / (c(w)+k) mu(dw).

Summing the round densities over k recovers nu, and simulating rounds
0..K and superposing the atoms gives a truncated draw whose error decays
like c/(c+K+1) (see the truncation module).

The stable-beta variant adds a discount sigma in [0, 1); its rounds carry
Beta(1-sigma, c+sigma+k) jumps with gamma-function mass factors, and the
Indian buffet construction appears as the N-object finite approximation
whose Levy density converges to the beta process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import (
    BaseMeasure,
    Domain,
    DomainError,
    PiecewiseConst,
    PointMeasure,
    WeightedAtom,
    _sample_locations,
    positive_function,
)
from .streams import RandomStream


class BetaProcessParams:
    """Concentration function c(w) and base measure mu of a beta process."""

    __slots__ = ("concentration", "base")

    def __init__(self, concentration, base: BaseMeasure):
        self.base = base
        self.concentration = positive_function(
            concentration, base.domain, "concentration"
        )
        if not np.isfinite(base.total_mass) or base.total_mass <= 0:
            raise ValueError("base measure must have finite positive mass")

    @classmethod
    def homogeneous(
        cls, c: float, mass: float, domain: Domain | None = None
    ) -> "BetaProcessParams":
        """Constant concentration c and uniform base with the given mass."""
        domain = domain or Domain.unit_interval()
        return cls(float(c), BaseMeasure.uniform(domain, mass))

    @property
    def domain(self) -> Domain:
        return self.base.domain

    @property
    def total_base_mass(self) -> float:
        return self.base.total_mass


@dataclass(frozen=True)
class BetaRound:
    """Round k of the decomposition: a finite Poisson process.

    Atom count is Poisson(measure total), locations follow the normalized
    round measure, and the jump at w is Beta(jump_a, jump_b(w)).
    """

    k: int
    measure: BaseMeasure
    jump_shape_a: float
    jump_shape_b: PiecewiseConst

    @property
    def rate(self) -> float:
        return self.measure.total_mass


def round_measure(params: BetaProcessParams, k: int) -> BetaRound:
    """Round k: jumps Beta(1, c+k), locations from mu_k = c/(c+k) mu."""
    if k < 0:
        raise ValueError("round index must be >= 0")
    c = params.concentration
    mu_k = params.base.scaled(c.map(lambda v: v / (v + k)))
    return BetaRound(
        k=k, measure=mu_k, jump_shape_a=1.0, jump_shape_b=c.map(lambda v: v + k)
    )


def simulate_round(
    params: BetaProcessParams, k: int, stream: RandomStream
) -> PointMeasure:
    """Draw the atoms of round k.

    Randomness comes from ``stream.child(k)``; the draw order is the atom
    count, then all locations, then all jumps, so the result is a pure
    function of (seed, path, params, k).
    """
    rnd = round_measure(params, k)
    cur = stream.child(k).cursor()
    n = cur.poisson(rnd.rate)
    if n == 0:
        return PointMeasure(params.domain, [])
    locs = _sample_locations(rnd.measure, n, cur)
    b = rnd.jump_shape_b.at(locs)
    u = cur.uniforms(n)
    jumps = -np.expm1(np.log1p(-u) / b)
    atoms = [
        WeightedAtom(tuple(locs[i]), float(jumps[i]), round_k=k)
        for i in range(n)
    ]
    return PointMeasure(params.domain, atoms)


def simulate_beta_process(
    params: BetaProcessParams, K: int, stream: RandomStream
) -> PointMeasure:
    """Superpose rounds 0..K (inclusive) into one truncated draw.

    Equals the concatenation of ``simulate_round(params, k, stream)`` for
    k in order, so raising K never changes earlier atoms.
    """
    if K < 0:
        raise ValueError("truncation round K must be >= 0")
    out = PointMeasure(params.domain, [])
    for k in range(K + 1):
        out = out + simulate_round(params, k, stream)
    return out


def round_mean_and_variance(
    params: BetaProcessParams, k: int, boxes=None
) -> tuple[float, float]:
    """Exact mean and variance of round k's mass on a region.

    By the Poisson-process moment formulas,

        E    = int_A c/((c+k)(c+k+1))          mu(dw)
        Var  = int_A 2c/((c+k)(c+k+1)(c+k+2))  mu(dw).
    """
    c = params.concentration
    f_mean = c.map(lambda v: v / ((v + k) * (v + k + 1)))
    f_var = c.map(lambda v: 2 * v / ((v + k) * (v + k + 1) * (v + k + 2)))
    return (
        params.base.integral_against(f_mean, boxes),
        params.base.integral_against(f_var, boxes),
    )


def cumulative_round_moments(
    params: BetaProcessParams, K: int, boxes=None
) -> tuple[float, float]:
    """Sum of round means and variances over rounds 0..K (inclusive).

    Both sums telescope:

        sum E   = int_A (1 - c/(c+K+1)) mu(dw)
        sum Var = int_A (1/(c+1) - c/((c+K+1)(c+K+2))) mu(dw)

    recovering int_A mu and the full-process variance as K grows.
    """
    if K < 0:
        raise ValueError("truncation round K must be >= 0")
    kk = K + 1
    c = params.concentration
    f_mean = c.map(lambda v: 1 - v / (v + kk))
    f_var = c.map(lambda v: 1 / (v + 1) - v / ((v + kk) * (v + kk + 1)))
    return (
        params.base.integral_against(f_mean, boxes),
        params.base.integral_against(f_var, boxes),
    )


class StableBetaParams:
    """Stable-beta process: a beta process plus a discount sigma in (0, 1)."""

    __slots__ = ("base", "sigma")

    def __init__(self, base: BetaProcessParams, sigma: float):
        if not (0.0 < sigma < 1.0):
            raise ValueError("sigma must lie in (0, 1)")
        self.base = base
        self.sigma = float(sigma)

    @property
    def domain(self) -> Domain:
        return self.base.domain


def stable_round_measure(params: StableBetaParams, k: int) -> BetaRound:
    """Round k of the stable-beta decomposition.

    Jumps are Beta(1-sigma, c+sigma+k) and the round base is mu scaled
    cell-wise by

        Gamma(c+sigma+k) Gamma(c+1) / (Gamma(c+k+1) Gamma(c+sigma)),

    computed in log space; the factor reduces to c/(c+k) as sigma -> 0.
    """
    if k < 0:
        raise ValueError("round index must be >= 0")
    s = params.sigma
    c = params.base.concentration

    def factor(v):
        return np.exp(
            _lgamma(v + s + k) + _lgamma(v + 1) - _lgamma(v + k + 1) - _lgamma(v + s)
        )

    mu_k = params.base.base.scaled(c.map(factor))
    return BetaRound(
        k=k,
        measure=mu_k,
        jump_shape_a=1.0 - s,
        jump_shape_b=c.map(lambda v: v + s + k),
    )


def _lgamma(x):
    return np.vectorize(math.lgamma)(x)


def ibp_levy_density(num_objects: int, c: float, mass: float, pi):
    """Levy density of the N-object Indian buffet approximation.

    The N-object construction draws feature probabilities from
    Beta(c*mass/N, c) at intensity N/mass per unit base measure, so the
    density over pi is (N/mass) Beta(pi | c*mass/N, c).  As N grows this
    converges pointwise to c pi^(-1) (1-pi)^(c-1), the beta process Levy
    density per unit base mass, with error O(1/N).
    """
    if num_objects < 1:
        raise ValueError("need at least one object")
    if c <= 0 or mass <= 0:
        raise ValueError("c and mass must be positive")
    pi = np.asarray(pi, dtype=np.float64)
    if np.any((pi <= 0) | (pi >= 1)):
        raise DomainError("pi must lie strictly inside (0, 1)")
    a = c * mass / num_objects
    log_norm = _lgamma(a + c) - _lgamma(a) - _lgamma(c)
    logpdf = log_norm + (a - 1) * np.log(pi) + (c - 1) * np.log1p(-pi)
    return num_objects / mass * np.exp(logpdf)
