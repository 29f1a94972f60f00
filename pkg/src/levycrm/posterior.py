"""Beta-process posterior: conjugate update and round-based resampling.

Observing M Bernoulli-process draws from a beta process B with constant
concentration c and base mu leaves B conjugate:

    B | data ~ BP(c + M,  c mu/(c+M) + sum_i m_i delta_{w_i}/(c+M)),

where m_i counts how many of the M draws switched atom i on.  Because the
posterior is again a beta process with a mixed base measure, the round
decomposition applies verbatim: posterior round k has jump law
Beta(1, c+M+k) and location measure c mu/(c+M+k) + sum_i m_i/(c+M+k).

The atomic part supports two samplers:

* an observed atom's jump is resampled as a Poisson sum: for each round
  k, draw H_k ~ Poisson(m_i/(c+M+k)) jumps Beta(1, c+M+k) and add them
  all up.  Truncating the round sum at K biases the mean down by exactly
  m_i/(c+M+K+1); the truncated expectation m_i (1/(c+M) - 1/(c+M+K+1))
  is reported alongside so callers can size K.  The sum is not clamped:
  it can exceed 1 with small probability, and callers should track that
  frequency rather than hide it.
* a new (unobserved) jump draws its round index k with weight
  1/(c+M+k), k = 0..K, then the jump from Beta(1, c+M+k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beta import BetaProcessParams, BetaRound, round_measure
from .measures import (
    BaseMeasure,
    PointMeasure,
    UnsupportedParameterError,
)
from .streams import (
    _POISSON_CHUNK,
    RandomStream,
    _poisson_invert,
    _words_to_uniform,
    batch_words,
)


class InvalidPriorError(ValueError):
    """The supplied prior draw violates the family's jump support."""


@dataclass(frozen=True)
class ObservationSet:
    """Counts from M Bernoulli-process draws over a fixed atom set.

    ``locations`` is (n, dim); ``counts[i]`` in [0, M] is how many of the
    M draws hit atom i.  Zero-count atoms are kept so downstream code
    sees the full atom set.
    """

    M: int
    locations: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        locs = np.atleast_2d(np.asarray(self.locations, dtype=np.float64))
        counts = np.atleast_1d(np.asarray(self.counts, dtype=np.int64))
        if locs.shape[0] != counts.shape[0]:
            raise ValueError("locations and counts must align")
        if self.M < 0:
            raise ValueError("M must be >= 0")
        if np.any(counts < 0) or np.any(counts > self.M):
            raise ValueError("every count must lie in [0, M]")
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "counts", counts)

    def __len__(self):
        return self.counts.shape[0]


@dataclass(frozen=True)
class PosteriorBetaParams:
    """Posterior concentration c+M and mixed base measure."""

    c_post: float
    base_post: BaseMeasure

    def as_process(self) -> BetaProcessParams:
        return BetaProcessParams(self.c_post, self.base_post)


def sample_bernoulli_data(
    prior_draw: PointMeasure, M: int, stream: RandomStream
) -> ObservationSet:
    """M independent Bernoulli-process draws over a beta-process draw.

    Atom i with jump pi_i is switched on by each draw independently with
    probability pi_i; the returned counts are the per-atom totals.  Jumps
    outside (0, 1) make the prior invalid for Bernoulli marking.
    """
    if M < 0:
        raise ValueError("M must be >= 0")
    jumps = prior_draw.jumps()
    if jumps.size and (jumps.min() <= 0.0 or jumps.max() >= 1.0):
        raise InvalidPriorError("every prior jump must lie strictly in (0, 1)")
    locs = prior_draw.locations()
    counts = np.zeros(len(prior_draw), dtype=np.int64)
    cur = stream.cursor()
    for i, pi in enumerate(jumps):
        if M > 0:
            counts[i] = int((cur.uniforms(M) < pi).sum())
    return ObservationSet(M=M, locations=locs, counts=counts)


def posterior_params(
    prior: BetaProcessParams, obs: ObservationSet
) -> PosteriorBetaParams:
    """Conjugate posterior parameters given Bernoulli counts.

    Requires constant concentration; the posterior base has continuous
    part c mu/(c+M) and an atom of mass m_i/(c+M) at each observed
    location with m_i > 0 (zero-count atoms contribute nothing).
    """
    if not prior.concentration.is_constant:
        raise UnsupportedParameterError(
            "posterior updates require a constant concentration"
        )
    c = float(prior.concentration.values.flat[0])
    M = obs.M
    c_post = c + M
    density = prior.base.density.map(lambda v: v * (c / c_post))
    keep = obs.counts > 0
    if prior.base.atom_masses.size:
        raise UnsupportedParameterError(
            "priors with fixed base atoms are not supported in the update"
        )
    base_post = BaseMeasure(
        density,
        obs.locations[keep],
        obs.counts[keep].astype(np.float64) / c_post,
    )
    return PosteriorBetaParams(c_post=c_post, base_post=base_post)


def posterior_round_measure(pp: PosteriorBetaParams, k: int) -> BetaRound:
    """Round k of the posterior decomposition.

    Jump law Beta(1, c+M+k); location measure c mu/(c+M+k) plus atoms
    m_i/(c+M+k).  This is the prior round machinery applied to the
    posterior parameters, so M = 0 reproduces prior rounds exactly.
    """
    return round_measure(pp.as_process(), k)


def resample_observed_jump(
    c: float, M: int, m_i: int, K: int, stream: RandomStream
) -> float:
    """One posterior draw of an observed atom's jump, rounds 0..K.

    The target is a sum over rounds k = 0..K of H_k independent
    Beta(1, c+M+k) jumps with H_k ~ Poisson(m_i/(c+M+k)).  Independent
    Poisson counts superpose: the grand count is Poisson of the summed
    rates, and each arrival falls in round k with probability
    proportional to its rate.  Drawing that way is the same law and
    needs a handful of uniforms instead of one per round.

    The result is nonnegative and occasionally exceeds 1; see the
    module docstring.  Counts m_i > M are accepted: the formulas only
    need m_i >= 0.
    """
    if m_i < 0:
        raise ValueError("m_i must be >= 0")
    if K < 0:
        raise ValueError("K must be >= 0")
    if m_i == 0:
        return 0.0
    cur = stream.cursor()
    b = c + M + np.arange(K + 1, dtype=np.float64)
    cum = np.cumsum(m_i / b)
    n = cur.poisson(float(cum[-1]))
    if n == 0:
        return 0.0
    u = cur.uniforms(n) * cum[-1]
    ks = np.minimum(np.searchsorted(cum, u, side="left"), K)
    v = cur.uniforms(n)
    return float(np.sum(-np.expm1(np.log1p(-v) / b[ks])))


def resample_observed_jumps(
    c: float,
    M: int,
    m_i: int,
    K: int,
    stream: RandomStream,
    draws: int,
    _batch: int = 8192,
) -> np.ndarray:
    """Many resampled jumps at once, one per child stream of ``stream``.

    Entry ``d`` equals ``resample_observed_jump(c, M, m_i, K,
    stream.child(d))`` bit for bit; the draws are fused into large
    generator calls so Monte Carlo studies with 1e5+ draws stay cheap.
    """
    if draws < 0:
        raise ValueError("draws must be >= 0")
    if m_i < 0:
        raise ValueError("m_i must be >= 0")
    if K < 0:
        raise ValueError("K must be >= 0")
    out = np.zeros(draws, dtype=np.float64)
    if m_i == 0 or draws == 0:
        return out
    b = c + M + np.arange(K + 1, dtype=np.float64)
    cum = np.cumsum(m_i / b)
    lam = float(cum[-1])
    m = max(1, math.ceil(lam / _POISSON_CHUNK))
    for lo in range(0, draws, _batch):
        hi = min(lo + _batch, draws)
        k0s, k1s = stream.child_keys(np.arange(lo, hi))
        head = _words_to_uniform(batch_words(k0s, k1s, m))
        counts = np.zeros(hi - lo, dtype=np.int64)
        for j in range(m):
            counts += _poisson_invert(np.full(hi - lo, lam / m), head[:, j])
        nmax = int(counts.max())
        if nmax == 0:
            continue
        w = _words_to_uniform(batch_words(k0s, k1s, m + 2 * nmax))
        rows = np.repeat(np.arange(hi - lo), counts)
        ends = np.cumsum(counts)
        starts = ends - counts
        within = np.arange(int(ends[-1])) - np.repeat(starts, counts)
        cat_u = w[rows, m + within] * cum[-1]
        ks = np.minimum(np.searchsorted(cum, cat_u, side="left"), K)
        jump_u = w[rows, m + counts[rows] + within]
        vals = -np.expm1(np.log1p(-jump_u) / b[ks])
        for d in range(hi - lo):
            # per-draw reduction kept separate so the sum order matches
            # the one-stream function exactly
            if counts[d]:
                out[lo + d] = float(np.sum(vals[starts[d]:ends[d]]))
    return out


def resample_truncated_expectation(c: float, M: int, m_i: int, K: int) -> float:
    """Mean of the truncated resampling sum: m_i (1/(c+M) - 1/(c+M+K+1)).

    Converges to the exact posterior mean m_i/(c+M) as K grows.
    """
    if m_i < 0:
        raise ValueError("m_i must be >= 0")
    if K < 0:
        raise ValueError("K must be >= 0")
    # grouped as one quotient: 1/a - 1/(a+K+1) cancels badly in floats
    a = c + M
    return m_i * (K + 1.0) / (a * (a + K + 1.0))


def sample_new_jump(
    c: float, M: int, K: int, stream: RandomStream
) -> tuple[int, float]:
    """One draw of a previously unobserved posterior jump.

    The round index k is drawn from weights 1/(c+M+k), k = 0..K,
    normalized; the jump from Beta(1, c+M+k).
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    cur = stream.cursor()
    w = 1.0 / (c + M + np.arange(K + 1, dtype=np.float64))
    cum = np.cumsum(w)
    u = cur.uniform() * cum[-1]
    k = min(int(np.searchsorted(cum, u, side="left")), K)
    jump = cur.beta_one(c + M + k)
    return k, jump


def sample_new_jumps(
    c: float, M: int, K: int, stream: RandomStream, draws: int
) -> tuple[np.ndarray, np.ndarray]:
    """Many new-jump draws at once, one per child stream of ``stream``.

    Returns (round indices, jumps); entry ``d`` equals
    ``sample_new_jump(c, M, K, stream.child(d))`` bit for bit.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    if draws < 0:
        raise ValueError("draws must be >= 0")
    if draws == 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
    w = 1.0 / (c + M + np.arange(K + 1, dtype=np.float64))
    cum = np.cumsum(w)
    k0s, k1s = stream.child_keys(np.arange(draws))
    words = _words_to_uniform(batch_words(k0s, k1s, 2))
    u = words[:, 0] * cum[-1]
    ks = np.minimum(np.searchsorted(cum, u, side="left"), K)
    jumps = -np.expm1(np.log1p(-words[:, 1]) / (c + M + ks))
    return ks.astype(np.int64), jumps
