"""Local maximal operator, A1 constants, weight constructors, N-norm bounds."""
import math

import numpy as np
import pytest

from capflow.capacity import (CapacityOracle, CapacityParams, SetMask,
                              grid_problem, identity_problem, l1c_norm)
from capflow.grid import make_grid
from capflow.measure import DiscreteMeasureSpace, Field, LorentzExponents
from capflow.weights import (WEIGHT_FLOOR, WeightConfig,
                             a1loc_constant, average_weights, level_sum_check,
                             local_maximal, maximal_boundedness_probe,
                             n_norm_upper, potential_weight)

PARAMS = CapacityParams(alpha=1.0, s=2.0, tol=1e-6)


@pytest.fixture(scope="module")
def grid():
    return make_grid(1, 4.0, 16)  # h = 1/4: radius set {1/4, 1/2, 3/4, 1}


@pytest.fixture(scope="module")
def fine_oracle():
    g = make_grid(1, 16.0, 256)
    params = CapacityParams(alpha=0.5, s=2.0, tol=1e-6)
    return CapacityOracle(grid_problem(g, params), params)


def test_constants_fixed_exactly(grid):
    for c in (0.3, 1.0, 7.5):
        out = local_maximal(grid, Field.of(grid, np.full(grid.size, c)))
        assert np.abs(out.values - c).max() <= 1e-12


def test_single_cell_average(grid):
    # one lit cell, h = 1/4: best ball is radius h with 3 cells
    f = np.zeros(grid.size)
    f[7] = 1.0
    out = local_maximal(grid, Field.of(grid, f))
    assert out.values[7] == pytest.approx(1.0 / 3.0, rel=1e-12)


def test_sup_bound_and_sublinearity(grid):
    rng = np.random.default_rng(4)
    for _ in range(20):
        f = rng.standard_normal(grid.size)
        g = rng.standard_normal(grid.size)
        mf = local_maximal(grid, Field.of(grid, f)).values
        assert mf.max() <= np.abs(f).max() * (1 + 1e-12)
        msum = local_maximal(grid, Field.of(grid, f + g)).values
        mg = local_maximal(grid, Field.of(grid, g)).values
        assert np.all(msum <= mf + mg + 1e-12)
        # positive homogeneity is exact
        m2 = local_maximal(grid, Field.of(grid, 2.5 * f)).values
        assert np.abs(m2 - 2.5 * mf).max() <= 1e-12 * max(1.0, mf.max())


def test_plane_maximal_constants_and_average():
    g2 = make_grid(2, 4.0, 16)
    out = local_maximal(g2, Field.of(g2, np.full(g2.size, 1.7)))
    assert np.abs(out.values - 1.7).max() <= 1e-12
    # one lit cell, h = 1/4: the radius-h ball holds the 5-cell plus pattern
    f = np.zeros(g2.size)
    j = 8 * 16 + 8
    f[j] = 1.0
    got = local_maximal(g2, Field.of(g2, f))
    assert got.values[j] == pytest.approx(1.0 / 5.0, rel=1e-12)


def test_finite_model_degenerates_to_abs():
    sp = DiscreteMeasureSpace([1.0, 2.0])
    f = Field.of(sp, [-3.0, 1.0])
    assert np.array_equal(local_maximal(sp, f).values, [3.0, 1.0])
    assert a1loc_constant(sp, Field.of(sp, [1.0, 5.0])) == 1.0


def test_a1_constant_basics(grid):
    ones = Field.of(grid, np.ones(grid.size))
    assert a1loc_constant(grid, ones) == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(8)
    for _ in range(10):
        w = Field.of(grid, rng.lognormal(0, 1, grid.size))
        assert a1loc_constant(grid, w) >= 1.0 - 1e-12
    # a floored indicator has a huge constant (mass leaks into the floor)
    chi = np.zeros(grid.size)
    chi[3] = 1.0
    assert a1loc_constant(grid, Field.of(grid, chi)) > 1e6


def test_potential_weight_identity_model():
    sp = DiscreteMeasureSpace(np.ones(3))
    oracle = CapacityOracle(identity_problem(sp), PARAMS)
    mask = SetMask.from_indices(sp, [1])
    w = potential_weight(oracle, mask, WeightConfig(delta=1.0))
    # the potential is the indicator, so the weight is it, floored
    assert w.values[1] == pytest.approx(1.0)   # 1/cap({atom}) with cap = 1
    assert w.values[0] == WEIGHT_FLOOR
    assert w.provenance == "potential"
    # recorded two-sided ratio: the layer cake of V^delta equals the capacity
    est = l1c_norm(Field.of(sp, np.array([0.0, 1.0, 0.0])), oracle)
    assert est.value / oracle.value(mask) == pytest.approx(1.0)


def test_potential_weight_on_grid(fine_oracle):
    g = fine_oracle.space
    x = g.coords()[:, 0]
    mask = SetMask(g, np.abs(x) <= 1.0)
    cfg = WeightConfig(delta=0.5, l1c_levels=12)
    w = potential_weight(fine_oracle, mask, cfg)
    cap = fine_oracle.value(mask)
    band = 10 * fine_oracle.params.tol
    # on E the potential is within band of one, so the weight clears 1/cap
    assert w.values[mask.bools].min() >= (1 - band) ** cfg.delta / cap * (1 - 1e-12)
    assert w.a1_constant >= 1.0
    assert w.l1c_estimate.mode in ("exact", "upper-bound")


def test_average_weights(fine_oracle):
    g = fine_oracle.space
    x = g.coords()[:, 0]
    cfg = WeightConfig(delta=0.5, l1c_levels=10)
    w1 = potential_weight(fine_oracle, SetMask(g, np.abs(x) <= 0.7), cfg)
    w2 = potential_weight(fine_oracle, SetMask(g, np.abs(x - 2) <= 0.7), cfg)
    same = average_weights([(2.0, w1)], fine_oracle, cfg)
    assert np.abs(same.values - w1.values).max() <= 1e-15
    dup = average_weights([(1.0, w1), (1.0, w1)], fine_oracle, cfg)
    assert np.abs(dup.values - w1.values).max() <= 1e-15
    mixed = average_weights([(0.3, w1), (0.7, w2)], fine_oracle, cfg)
    assert mixed.a1_constant <= max(w1.a1_constant, w2.a1_constant) + 1e-10
    assert mixed.provenance == "average"
    with pytest.raises(ValueError):
        average_weights([], fine_oracle, cfg)
    with pytest.raises(ValueError):
        average_weights([(0.0, w1)], fine_oracle, cfg)


def test_n_norm_upper_properties(fine_oracle):
    g = fine_oracle.space
    x = g.coords()[:, 0]
    cfg = WeightConfig(delta=0.5, l1c_levels=10)
    cands = [potential_weight(fine_oracle, SetMask(g, np.abs(x - c) <= 0.8), cfg)
             for c in (0.0, 1.5)]
    e = LorentzExponents(2.0, 2.0)
    zero = Field.of(g, np.zeros(g.size))
    assert n_norm_upper(zero, e, cands, refine=False).value == 0.0
    f = Field.of(g, np.exp(-x ** 2))
    est = n_norm_upper(f, e, cands, refine=False)
    assert est.mode == "upper-bound"
    # the estimate is a minimum: adding candidates never increases it
    more = cands + [potential_weight(
        fine_oracle, SetMask(g, np.abs(x + 2) <= 0.6), cfg)]
    est2 = n_norm_upper(f, e, more, refine=False)
    assert est2.value <= est.value * (1 + 1e-15)
    # every individually admissible candidate dominates the minimum
    for w in cands:
        scale = max(w.l1c_estimate.hi, WEIGHT_FLOOR)
        normalized = w.values / scale
        from capflow.measure import lorentz_norm
        single = lorentz_norm(Field.of(g, f.values * normalized ** (-0.5)), e)
        assert est.value <= single * (1 + 1e-12)
    with pytest.raises(ValueError):
        n_norm_upper(f, e, [], refine=False)
    with pytest.raises(ValueError):
        n_norm_upper(f, LorentzExponents(2.0, math.inf), cands, refine=False)


def test_n_norm_refinement_never_worse():
    # convex re-averaging of the two best candidates is accepted only on
    # strict improvement, so refinement cannot raise the estimate
    sp = DiscreteMeasureSpace(np.ones(8))
    rng = np.random.default_rng(5)
    B = rng.random((8, 8))
    from capflow.capacity import finite_problem
    prob = finite_problem(sp, (B + B.T) / 2 + np.eye(8))
    oracle = CapacityOracle(prob, PARAMS)
    cfg = WeightConfig(delta=0.5)
    cands = [potential_weight(oracle, SetMask.from_indices(sp, idx), cfg)
             for idx in ([0, 1, 2], [4, 5], [2, 3, 6])]
    f = Field.of(sp, np.abs(rng.standard_normal(8)) + 0.1)
    e = LorentzExponents(2.0, 2.0)
    plain = n_norm_upper(f, e, cands, refine=False)
    refined = n_norm_upper(f, e, cands, oracle=oracle, refine=True)
    assert refined.value <= plain.value * (1 + 1e-12)


def test_n_norm_bound_for_supported_field(fine_oracle):
    # f supported in E against the potential weight of E: the weighted norm
    # is at most [cap(E) * scale / (1-band)^delta]^(1/q') times ||f||_{p,q}
    g = fine_oracle.space
    x = g.coords()[:, 0]
    E = SetMask(g, np.abs(x) <= 1.0)
    cfg = WeightConfig(delta=0.5, l1c_levels=10)
    wgt = potential_weight(fine_oracle, E, cfg)
    f = Field.of(g, np.where(E.bools, np.exp(-x ** 2), 0.0))
    e = LorentzExponents(2.0, 2.0)
    est = n_norm_upper(f, e, [wgt], refine=False)
    from capflow.measure import lorentz_norm
    cap = fine_oracle.value(E)
    scale = wgt.l1c_estimate.hi
    band = 10 * fine_oracle.params.tol
    bound = (cap * scale / (1 - band) ** cfg.delta) ** (1 / e.q_conj) * \
        lorentz_norm(f, e)
    assert est.value <= bound * (1 + 1e-12)


def test_level_sum_examples():
    sp = DiscreteMeasureSpace(np.ones(4))
    oracle = CapacityOracle(identity_problem(sp), PARAMS)
    chi = Field.of(sp, [0.0, 1.0, 1.0, 0.0])
    rep = level_sum_check(chi, oracle)
    assert rep.ratio == pytest.approx(1.0, rel=1e-12)
    zero = level_sum_check(Field.of(sp, np.zeros(4)), oracle)
    assert zero.level_sum == 0.0 and zero.l1c_value == 0.0
    rng = np.random.default_rng(3)
    for _ in range(10):
        w = Field.of(sp, rng.lognormal(0, 1.5, 4))
        rep = level_sum_check(w, oracle)
        assert rep.ratio <= 4.0 * (1 + 1e-12)


def test_probe_constant_field(fine_oracle):
    g = fine_oracle.space
    ones = Field.of(g, np.ones(g.size))

    def fake_est(f):
        from capflow.capacity import NormEstimate
        return NormEstimate(float(np.abs(f.values).max()), "lower-bound")

    rep = maximal_boundedness_probe(g, [ones], fake_est)
    assert rep.m_max <= 1.0 + 1e-10
