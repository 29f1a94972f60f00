"""Closed-form truncation error bounds and atom-budget accounting.

Simulating rounds 0..K of a beta process (or subrounds k <= K, h <= H of
a gamma process) leaves out an infinite tail.  The formulas here quantify
that tail exactly:

* beta superposition: the L1 distance between the truncated and full
  normalized Levy measures is (1/gamma) int c/(c+K+1) mu(dw), reducing to
  c/(c+K+1) for constant c;
* beta stick-breaking (for comparison): (c/(c+1))^(K+1);
* data-marginal bound: observing M Bernoulli draws, the marginal
  likelihoods of truncated and full priors differ by at most
  1 - exp(-M int c/(c+K+1) mu(dw));
* gamma superposition: 1/(K+1), plus sum_{k<=K} 1/(k (k+1)^(H+1)) when
  the subround index is also truncated at H.

Everything in this module is exact arithmetic on the closed forms; Monte
Carlo validation of the same quantities lives in the test suite, clearly
separated so formula and simulation evidence stay distinguishable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .beta import BetaProcessParams
from .measures import UnsupportedParameterError


@dataclass(frozen=True)
class TruncationReport:
    """One row of a truncation table."""

    family: str
    K: int
    H: int | float | None
    l1_error: float
    marginal_bound: float | None
    expected_atoms: float


def beta_l1_error(params: BetaProcessParams, K: int) -> float:
    """L1 distance left after superposing rounds 0..K.

    Equals int c/(c+K+1) mu(dw) / gamma; c/(c+K+1) for constant c.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    f = params.concentration.map(lambda v: v / (v + K + 1))
    return params.base.integral_against(f) / params.total_base_mass


def beta_marginal_bound(params: BetaProcessParams, K: int, M: int) -> float:
    """Bound on the marginal-likelihood gap for M observations.

        1 - exp(-M int c/(c+K+1) mu(dw))
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    if M < 1:
        raise ValueError("M must be >= 1")
    f = params.concentration.map(lambda v: v / (v + K + 1))
    tail_mass = params.base.integral_against(f)
    return -math.expm1(-M * tail_mass)


def _require_constant_c(c) -> float:
    if hasattr(c, "is_constant"):
        if not c.is_constant:
            raise UnsupportedParameterError(
                "stick-breaking bounds require a constant concentration"
            )
        return float(c.values.flat[0])
    return float(c)


def stick_breaking_bounds(
    c, gamma_mass: float, K: int, M: int | None = None
) -> tuple[float, float | None]:
    """Truncation bounds of the stick-breaking beta construction.

    Returns the L1 distance (c/(c+1))^(K+1) and, when M is given, the
    marginal bound 1 - exp(-M gamma (c/(c+1))^(K+1)).  Constant c only.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    cv = _require_constant_c(c)
    l1 = (cv / (cv + 1.0)) ** (K + 1)
    marginal = None if M is None else -math.expm1(-M * gamma_mass * l1)
    return l1, marginal


def gamma_l1_error(K: int, H: int | float | None = None) -> float:
    """L1 distance left after subrounds k <= K, h <= H.

    1/(K+1) for the full subround family (H infinite); a finite H adds
    sum_{k=1}^{K} 1/(k (k+1)^(H+1)).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if H is None or H == math.inf:
        return 1.0 / (K + 1)
    H = int(H)
    if H < 1:
        raise ValueError("H must be >= 1 (or infinite)")
    extra = 0.0
    for k in range(1, K + 1):
        extra += math.exp(-math.log(k) - (H + 1) * math.log1p(k))
    return 1.0 / (K + 1) + extra


def expected_atoms_and_round_budget(
    c: float, gamma_mass: float, K: int
) -> tuple[float, str]:
    """Expected atom count of rounds 0..K and a note on the round budget.

        E(I_K) = sum_{k=0}^{K} c gamma / (c + k)

    The sum grows like c gamma log K, so the number of rounds needed for
    a given atom budget grows exponentially in that budget; the note
    states the tabulated relationship rather than asserting a rate.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    if c <= 0 or gamma_mass <= 0:
        raise ValueError("c and gamma_mass must be positive")
    e = c * gamma_mass * math.fsum(1.0 / (c + k) for k in range(K + 1))
    note = (
        f"rounds 0..{K} contribute {e:.6g} expected atoms; "
        f"the round count needed scales like exp(E/(c*gamma)) as the "
        f"atom budget E grows"
    )
    return e, note


def gamma_expected_atoms(gamma_mass: float, K: int, H: int | float | None = None):
    """Expected atom count of gamma subrounds k <= K, h <= H.

    Summing the subround rates gives gamma sum_{k=1}^{K} log((k+1)/k)
    = gamma log(K+1) at H infinite; finite H subtracts each k's
    series tail, accumulated term by term until it underflows.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if H is None or H == math.inf:
        return gamma_mass * math.log(K + 1.0)
    H = int(H)
    if H < 1:
        raise ValueError("H must be >= 1 (or infinite)")
    total = 0.0
    for k in range(1, K + 1):
        x = 1.0 / (k + 1.0)
        term = x
        s = term
        for h in range(2, H + 1):
            term *= x * (h - 1) / h
            s += term
            if term < 1e-300:
                break
        total += s
    return gamma_mass * total


def beta_truncation_report(
    params: BetaProcessParams, K: int, M: int | None = None
) -> TruncationReport:
    """Superposition-construction row: bounds plus expected atoms.

    The expected atom count sums the round masses int c/(c+k) mu(dw),
    valid for piecewise c as well.
    """
    mass = params.total_base_mass
    expected = 0.0
    for k in range(K + 1):
        f = params.concentration.map(lambda v, kk=k: v / (v + kk))
        expected += params.base.integral_against(f)
    return TruncationReport(
        family="beta-superposition",
        K=K,
        H=None,
        l1_error=beta_l1_error(params, K),
        marginal_bound=None if M is None else beta_marginal_bound(params, K, M),
        expected_atoms=expected,
    )


def stick_breaking_report(
    c: float, gamma_mass: float, K: int, M: int | None = None
) -> TruncationReport:
    """Stick-breaking-construction row.

    That construction draws gamma Poisson(gamma) atoms per round, so
    rounds 0..K carry (K+1) gamma expected atoms.
    """
    l1, marginal = stick_breaking_bounds(c, gamma_mass, K, M)
    return TruncationReport(
        family="beta-stick-breaking",
        K=K,
        H=None,
        l1_error=l1,
        marginal_bound=marginal,
        expected_atoms=(K + 1) * gamma_mass,
    )


def gamma_truncation_report(
    gamma_mass: float, K: int, H: int | float | None = None
) -> TruncationReport:
    return TruncationReport(
        family="gamma-superposition",
        K=K,
        H=math.inf if H is None else H,
        l1_error=gamma_l1_error(K, H),
        marginal_bound=None,
        expected_atoms=gamma_expected_atoms(gamma_mass, K, H),
    )


def crossover_ranges(c: float, K_max: int) -> list[tuple[int, int, str]]:
    """Maximal K ranges on which each beta bound is the smaller one.

    Compares the superposition bound c/(c+K+1) with the stick-breaking
    bound (c/(c+1))^(K+1) for K = 0..K_max and reports contiguous ranges
    labeled by the winner ('superposition', 'stick-breaking', or 'tie').
    No global ordering holds; the label can change with K.
    """
    if K_max < 0:
        raise ValueError("K_max must be >= 0")

    def winner(K):
        sup = c / (c + K + 1.0)
        stick = (c / (c + 1.0)) ** (K + 1)
        if sup < stick:
            return "superposition"
        if stick < sup:
            return "stick-breaking"
        return "tie"

    ranges = []
    start = 0
    label = winner(0)
    for K in range(1, K_max + 1):
        w = winner(K)
        if w != label:
            ranges.append((start, K - 1, label))
            start, label = K, w
    ranges.append((start, K_max, label))
    return ranges
