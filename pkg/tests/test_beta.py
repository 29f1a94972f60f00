"""Beta-process decomposition: round measures, moments, simulation.

Round k of the decomposition is a finite Poisson process with base
c/(c+k) mu and jumps Beta(1, c+k); the checks here pin the exact round
arithmetic, the telescoping identities, the stable-beta factors, the IBP
density limit, and the Monte Carlo behaviour of the simulator.
"""

import math

import numpy as np
import pytest

from levycrm import beta, verify
from levycrm.measures import BaseMeasure, Domain, DomainError, PiecewiseConst
from levycrm.streams import RandomStream

UNIT = Domain.unit_interval()


def homog(c, mass):
    return beta.BetaProcessParams.homogeneous(c, mass)


def piecewise_c(values, mass=1.0):
    pw = PiecewiseConst(UNIT, [np.array([0.0, 0.5, 1.0])], np.asarray(values, float))
    return beta.BetaProcessParams(pw, BaseMeasure.uniform(UNIT, mass))


def test_round_measure_masses():
    assert beta.round_measure(homog(1.0, 1.0), 0).measure.total_mass == 1.0
    assert beta.round_measure(homog(2.0, 3.0), 4).measure.total_mass == pytest.approx(1.0)
    # piecewise c = {1, 3}: 1*(1/2)*1 + (3/4)*1 = 1.25 on a mass-2 uniform base
    assert beta.round_measure(piecewise_c([1.0, 3.0], 2.0), 1).measure.total_mass == (
        pytest.approx(1.25, rel=1e-15)
    )
    with pytest.raises(ValueError):
        beta.round_measure(homog(1.0, 1.0), -1)


def test_round_jump_law_fields():
    rnd = beta.round_measure(homog(2.0, 1.0), 3)
    assert rnd.jump_shape_a == 1.0
    assert float(rnd.jump_shape_b.values.flat[0]) == 5.0
    # inhomogeneous c evaluates cell-wise
    rnd = beta.round_measure(piecewise_c([1.0, 3.0]), 2)
    assert rnd.jump_shape_b.at(np.array([[0.25]]))[0] == 3.0
    assert rnd.jump_shape_b.at(np.array([[0.75]]))[0] == 5.0


def test_round_mean_and_variance_examples():
    m, v = beta.round_mean_and_variance(homog(1.0, 1.0), 0)
    assert m == pytest.approx(0.5, rel=1e-15)
    assert v == pytest.approx(1.0 / 3.0, rel=1e-15)
    m, _ = beta.round_mean_and_variance(homog(2.0, 3.0), 4)
    assert m == pytest.approx(1.0 / 7.0, rel=1e-15)


@pytest.mark.parametrize("c,mass,K", [(1.0, 1.0, 0), (1.0, 1.0, 50), (3.0, 2.0, 1000)])
def test_telescoping_mean(c, mass, K):
    total = math.fsum(
        beta.round_mean_and_variance(homog(c, mass), k)[0] for k in range(K + 1)
    )
    closed = mass * (1.0 - c / (c + K + 1.0))
    assert total == pytest.approx(closed, rel=1e-12)
    cm, _ = beta.cumulative_round_moments(homog(c, mass), K)
    assert cm == pytest.approx(closed, rel=1e-12)


def test_variance_sum_matches_quadrature_oracle():
    # Eq-loop closure: summed round variances vs the independent oracle
    for c in (1.0, 3.0):
        p = homog(c, 1.0)
        for boxes in (None, [(0.0, 0.3)]):
            total = math.fsum(
                beta.round_mean_and_variance(p, k, boxes)[1] for k in range(2001)
            )
            oracle = verify.moment_oracle("beta", p, A=boxes, r=2)
            assert total == pytest.approx(oracle, rel=1e-3)


def test_stable_round_factors():
    sp = beta.StableBetaParams(homog(1.0, 1.0), 0.5)
    assert beta.stable_round_measure(sp, 0).measure.total_mass == pytest.approx(1.0)
    # Gamma(3.5)Gamma(2)/(Gamma(4)Gamma(1.5)) = 2.5*1.5/6
    assert beta.stable_round_measure(sp, 2).measure.total_mass == pytest.approx(
        0.625, rel=1e-12
    )
    rnd = beta.stable_round_measure(sp, 2)
    assert rnd.jump_shape_a == 0.5
    assert float(rnd.jump_shape_b.values.flat[0]) == pytest.approx(3.5)


def test_stable_sigma_to_zero_recovers_plain_rounds():
    p = homog(1.5, 2.0)
    sp = beta.StableBetaParams(p, 1e-8)
    for k in (0, 1, 5):
        got = beta.stable_round_measure(sp, k).measure.total_mass
        want = beta.round_measure(p, k).measure.total_mass
        assert got == pytest.approx(want, rel=1e-6)


def test_stable_sigma_validation():
    with pytest.raises(ValueError):
        beta.StableBetaParams(homog(1.0, 1.0), 0.0)
    with pytest.raises(ValueError):
        beta.StableBetaParams(homog(1.0, 1.0), 1.0)


def test_ibp_density_limit():
    assert verify.levy_density("beta", {"c": 1.0}, 0.5) == 2.0
    val = beta.ibp_levy_density(10**6, 1.0, 1.0, 0.5)
    assert val == pytest.approx(2.0, rel=1e-3)
    errs = [
        abs(beta.ibp_levy_density(n, 1.0, 1.0, 0.5) - 2.0) / 2.0
        for n in (10**3, 10**4, 10**5, 10**6)
    ]
    assert errs == sorted(errs, reverse=True)
    with pytest.raises(DomainError):
        beta.ibp_levy_density(10, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        beta.ibp_levy_density(0, 1.0, 1.0, 0.5)


def test_simulate_round_empty_and_tags():
    p = homog(1.0, 1.0)
    assert beta.simulate_round(p, 9, RandomStream(0)).atoms == []
    pm = beta.simulate_round(homog(1.0, 20.0), 2, RandomStream(1))
    assert len(pm.atoms) > 0
    for a in pm.atoms:
        assert 0.0 < a.jump < 1.0
        assert a.round_k == 2
        assert a.subround_h == 0
        assert 0.0 <= a.location[0] <= 1.0


def test_simulate_process_extends_by_round():
    # raising K appends rounds without disturbing earlier atoms
    p = homog(1.0, 5.0)
    s = RandomStream(33)
    two = beta.simulate_beta_process(p, 2, s)
    three = beta.simulate_beta_process(p, 3, s)
    assert three.atoms[: len(two.atoms)] == two.atoms
    assert three.atoms[len(two.atoms) :] == beta.simulate_round(p, 3, s).atoms
    assert beta.simulate_beta_process(p, 0, s).atoms == beta.simulate_round(p, 0, s).atoms
    with pytest.raises(ValueError):
        beta.simulate_beta_process(p, -1, s)


def test_round_zero_monte_carlo_moments():
    # 1e4 replicas of round 0 at c=1, gamma=1: mean 1/2, variance 1/3
    p = homog(1.0, 1.0)
    totals = np.array(
        [beta.simulate_round(p, 0, RandomStream(500, (r,))).total_mass
         for r in range(10_000)]
    )
    ms = verify.monte_carlo_moments(totals)
    assert abs(ms.mean - 0.5) < 4 * ms.se_mean
    assert abs(ms.variance - 1.0 / 3.0) < 4 * ms.se_variance


def test_round_count_monte_carlo():
    # n_3 ~ Poisson(c*gamma/(c+3)) = Poisson(2.5) at c=1, gamma=10
    p = homog(1.0, 10.0)
    counts = np.array(
        [len(beta.simulate_round(p, 3, RandomStream(501, (r,))).atoms)
         for r in range(10_000)]
    )
    assert abs(counts.mean() - 2.5) < 3.0 * math.sqrt(2.5 / counts.size)


def test_round_jump_mean():
    # one large round supplies 1e5 Beta(1,1) jumps
    pm = beta.simulate_round(homog(1.0, 1e5), 0, RandomStream(502))
    j = pm.jumps()
    assert j.size > 50_000
    se = j.std(ddof=1) / math.sqrt(j.size)
    assert abs(j.mean() - 0.5) < 3 * se
