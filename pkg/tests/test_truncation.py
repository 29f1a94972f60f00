"""Truncation error bounds: exact values, monotonicity, MC validation.

The Monte Carlo check at the bottom simulates the residual rounds
directly and compares their mean mass against the difference of L1
bounds, tying the closed forms to the simulator.
"""

import math

import numpy as np
import pytest

from levycrm import beta, truncation
from levycrm.measures import (
    BaseMeasure,
    Domain,
    PiecewiseConst,
    UnsupportedParameterError,
)
from levycrm.streams import (
    RandomStream,
    _absorb_arr,
    _words_to_uniform,
    batch_poisson,
    batch_words,
)

UNIT = Domain.unit_interval()


def homog(c, mass):
    return beta.BetaProcessParams.homogeneous(c, mass)


def piecewise_params():
    pw = PiecewiseConst(UNIT, [np.array([0.0, 0.5, 1.0])], np.array([1.0, 3.0]))
    return beta.BetaProcessParams(pw, BaseMeasure.uniform(UNIT, 1.0))


def test_beta_l1_examples():
    assert truncation.beta_l1_error(homog(1.0, 1.0), 0) == pytest.approx(0.5, rel=1e-15)
    assert truncation.beta_l1_error(homog(1.0, 5.0), 9) == pytest.approx(
        1.0 / 11.0, rel=1e-15
    )
    # piecewise c = {1, 3}: (1/3 + 3/5)/2 = 7/15
    assert truncation.beta_l1_error(piecewise_params(), 1) == pytest.approx(
        7.0 / 15.0, rel=1e-12
    )
    with pytest.raises(ValueError):
        truncation.beta_l1_error(homog(1.0, 1.0), -1)


def test_beta_l1_strictly_decreasing():
    p = homog(2.0, 3.0)
    vals = [truncation.beta_l1_error(p, K) for K in range(31)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_beta_marginal_bound():
    p = homog(1.0, 1.0)
    assert truncation.beta_marginal_bound(p, 0, 1) == pytest.approx(
        -math.expm1(-0.5), rel=1e-15
    )
    assert truncation.beta_marginal_bound(p, 0, 1) == pytest.approx(0.3935, abs=5e-5)
    # huge M saturates the bound at 1
    assert truncation.beta_marginal_bound(p, 0, 10**6) == pytest.approx(1.0, abs=1e-12)
    assert truncation.beta_marginal_bound(p, 0, 1) < truncation.beta_marginal_bound(p, 0, 5)
    assert truncation.beta_marginal_bound(p, 9, 3) < truncation.beta_marginal_bound(p, 1, 3)
    with pytest.raises(ValueError):
        truncation.beta_marginal_bound(p, 1, 0)


def test_stick_breaking_bounds():
    l1, marginal = truncation.stick_breaking_bounds(1.0, 1.0, 9)
    assert l1 == 0.0009765625
    assert marginal is None
    l1, marginal = truncation.stick_breaking_bounds(1.0, 2.0, 9, M=3)
    assert marginal == pytest.approx(-math.expm1(-3 * 2.0 * 2.0**-10), rel=1e-12)
    # at K = 0 both constructions leave the same L1 distance
    assert truncation.stick_breaking_bounds(1.0, 1.0, 0)[0] == (
        truncation.beta_l1_error(homog(1.0, 1.0), 0)
    )
    # c = 9, K = 9: the geometric bound has already fallen below c/(c+K+1)
    assert truncation.stick_breaking_bounds(9.0, 1.0, 9)[0] == pytest.approx(
        0.9**10, rel=1e-15
    )
    assert 0.9**10 < 9.0 / 19.0
    const = PiecewiseConst.constant(UNIT, 2.0)
    assert truncation.stick_breaking_bounds(const, 1.0, 3)[0] == (
        truncation.stick_breaking_bounds(2.0, 1.0, 3)[0]
    )
    with pytest.raises(UnsupportedParameterError):
        truncation.stick_breaking_bounds(piecewise_params().concentration, 1.0, 3)


def test_gamma_l1_examples():
    assert truncation.gamma_l1_error(9) == pytest.approx(0.1, rel=1e-15)
    assert truncation.gamma_l1_error(1, None) == 0.5
    assert truncation.gamma_l1_error(1, math.inf) == 0.5
    assert truncation.gamma_l1_error(1, 1) == pytest.approx(0.75, rel=1e-15)
    with pytest.raises(ValueError):
        truncation.gamma_l1_error(0)
    with pytest.raises(ValueError):
        truncation.gamma_l1_error(2, 0)


def test_gamma_l1_subround_gap():
    # finite H adds exactly sum_k 1/(k (k+1)^(H+1))
    gap = truncation.gamma_l1_error(3, 2) - truncation.gamma_l1_error(3)
    exact = math.fsum(1.0 / (k * (k + 1) ** 3) for k in range(1, 4))
    assert gap == pytest.approx(exact, rel=1e-12)
    # the gap shrinks at least geometrically in H
    gaps = [
        truncation.gamma_l1_error(5, H) - truncation.gamma_l1_error(5)
        for H in range(1, 12)
    ]
    for a, b in zip(gaps, gaps[1:]):
        assert b <= 0.5 * a
    ks = [truncation.gamma_l1_error(K, 10) for K in range(1, 30)]
    assert all(b < a for a, b in zip(ks, ks[1:]))


def test_expected_atoms_and_round_budget():
    e, note = truncation.expected_atoms_and_round_budget(1.0, 1.0, 0)
    assert e == 1.0
    e, _ = truncation.expected_atoms_and_round_budget(1.0, 1.0, 2)
    assert e == pytest.approx(11.0 / 6.0, rel=1e-15)
    e, note = truncation.expected_atoms_and_round_budget(1.0, 10.0, 9)
    assert e == pytest.approx(29.289682539682538, rel=1e-13)
    assert "rounds 0..9" in note
    with pytest.raises(ValueError):
        truncation.expected_atoms_and_round_budget(0.0, 1.0, 3)


def test_gamma_expected_atoms():
    assert truncation.gamma_expected_atoms(1.0, 9) == pytest.approx(
        math.log(10.0), rel=1e-15
    )
    assert truncation.gamma_expected_atoms(1.0, 9, 60) == pytest.approx(
        math.log(10.0), abs=1e-9
    )
    # H = 1 keeps only the first subround of each round
    assert truncation.gamma_expected_atoms(1.0, 9, 1) == pytest.approx(
        math.fsum(1.0 / (k + 1.0) for k in range(1, 10)), rel=1e-12
    )
    assert truncation.gamma_expected_atoms(2.0, 9) == pytest.approx(
        2.0 * math.log(10.0), rel=1e-15
    )
    with pytest.raises(ValueError):
        truncation.gamma_expected_atoms(1.0, 0)


def test_truncation_reports():
    rep = truncation.beta_truncation_report(homog(1.0, 10.0), 9, M=3)
    assert rep.family == "beta-superposition"
    assert rep.K == 9 and rep.H is None
    assert rep.l1_error == truncation.beta_l1_error(homog(1.0, 10.0), 9)
    assert rep.marginal_bound == truncation.beta_marginal_bound(homog(1.0, 10.0), 9, 3)
    assert rep.expected_atoms == pytest.approx(29.289682539682538, rel=1e-12)
    # round 0 mass is the full base mass whatever c is
    assert truncation.beta_truncation_report(piecewise_params(), 0).expected_atoms == (
        pytest.approx(1.0, rel=1e-12)
    )
    rep = truncation.stick_breaking_report(1.0, 2.0, 9)
    assert rep.family == "beta-stick-breaking"
    assert rep.expected_atoms == 20.0
    assert rep.marginal_bound is None
    rep = truncation.gamma_truncation_report(1.0, 9)
    assert rep.family == "gamma-superposition"
    assert rep.H == math.inf
    assert rep.l1_error == pytest.approx(0.1, rel=1e-15)
    assert rep.expected_atoms == pytest.approx(math.log(10.0), rel=1e-15)


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 5.0])
def test_crossover_ranges(c):
    K_max = 40
    ranges = truncation.crossover_ranges(c, K_max)
    # contiguous cover of 0..K_max
    assert ranges[0][0] == 0 and ranges[-1][1] == K_max
    for (_, e1, _), (s2, _, _) in zip(ranges, ranges[1:]):
        assert s2 == e1 + 1
    # labels agree with a direct comparison at every K
    for start, end, label in ranges:
        for K in range(start, end + 1):
            sup = c / (c + K + 1.0)
            stick = (c / (c + 1.0)) ** (K + 1)
            want = "superposition" if sup < stick else (
                "stick-breaking" if stick < sup else "tie"
            )
            assert label == want
    # the bounds coincide at K = 0 and the geometric one wins afterwards
    assert ranges[0] == (0, 0, "tie")
    assert ranges[1][2] == "stick-breaking"


def _residual_round_totals(c, mass, ks, seed, reps):
    """Summed mass of rounds ``ks`` per replica, batched across streams.

    Row r reproduces, jump for jump, what summing simulate_round over
    ``ks`` under RandomStream(seed, (r,)) yields; constant c, uniform
    one-cell base.  Word layout per round: one count word, then per atom
    a cell-choice word and a position word, then the jump words.
    """
    ks = np.asarray(ks)
    root = RandomStream(seed)
    k0r, k1r = root.child_keys(np.arange(reps))
    g0, g1 = _absorb_arr(k0r[:, None], k1r[:, None], ks[None, :].astype(np.uint64))
    rates = np.broadcast_to(mass * c / (c + ks.astype(float)), g0.shape)
    counts = batch_poisson(rates, g0, g1)
    nz = counts > 0
    n = counts[nz]
    if n.size == 0:
        return np.zeros(reps)
    b = np.broadcast_to(c + ks.astype(float), g0.shape)[nz]
    repl = np.broadcast_to(np.arange(reps)[:, None], g0.shape)[nz]
    w = _words_to_uniform(batch_words(g0[nz], g1[nz], int(1 + 3 * n.max())))
    rows = np.repeat(np.arange(n.size), n)
    ends = np.cumsum(n)
    within = np.arange(ends[-1]) - np.repeat(ends - n, n)
    u = w[rows, 1 + 2 * n[rows] + within]
    jumps = -np.expm1(np.log1p(-u) / b[rows])
    return np.bincount(repl[rows], weights=jumps, minlength=reps)


def test_residual_helper_matches_simulate_round():
    c, mass = 1.0, 10.0
    p = homog(c, mass)
    ks = np.arange(5, 15)
    got = _residual_round_totals(c, mass, ks, seed=31, reps=30)
    want = np.array(
        [
            math.fsum(
                beta.simulate_round(p, int(k), RandomStream(31, (r,))).total_mass
                for k in ks
            )
            for r in range(30)
        ]
    )
    assert np.allclose(got, want, rtol=0.0, atol=1e-12)
    assert (want > 0).all()


@pytest.mark.parametrize("K", [4, 9, 19])
def test_monte_carlo_residual_mass(K):
    # rounds K+1..K+200 carry mass gamma*(l1(K) - l1(K+200)) on average
    c, mass, tail = 1.0, 10.0, 200
    p = homog(c, mass)
    ks = np.arange(K + 1, K + 1 + tail)
    totals = _residual_round_totals(c, mass, ks, seed=700 + K, reps=2000)
    target = mass * (
        truncation.beta_l1_error(p, K) - truncation.beta_l1_error(p, K + tail)
    )
    assert abs(totals.mean() - target) < 0.05 * target
