"""Multiplier-norm estimates: exactness on finite models, families, localization."""
import math

import numpy as np
import pytest

from capflow.capacity import (CapacityOracle, CapacityParams, SetMask,
                              grid_problem, identity_problem)
from capflow.grid import make_grid
from capflow.measure import DiscreteMeasureSpace, Field, LorentzExponents
from capflow.multiplier import (TestSetFamily, char_m_via_weights,
                                default_grid_family, m_norm, m_norm_local,
                                script_m_norm, weak_script_m_norm)

PARAMS = CapacityParams(alpha=1.0, s=2.0, tol=1e-6)


@pytest.fixture()
def counting():
    sp = DiscreteMeasureSpace(np.ones(4))
    return sp, CapacityOracle(identity_problem(sp), PARAMS)


def test_family_determinism_and_cap(counting):
    sp, _ = counting
    fam = TestSetFamily.random_unions(8, seed=123)
    a = [m.key for m in fam.sets(sp)]
    b = [m.key for m in fam.sets(sp)]
    assert a == b
    assert len(TestSetFamily.all_subsets().sets(sp)) == 15
    with pytest.raises(ValueError):
        TestSetFamily.all_subsets().sets(DiscreteMeasureSpace(np.ones(21)))


def test_indicator_norm_is_one_on_counting_model(counting):
    sp, oracle = counting
    A = SetMask.from_indices(sp, [0, 2])
    chi = Field.of(sp, A.bools.astype(float))
    for p in (1.5, 2.0, 3.0):
        est = m_norm(chi, LorentzExponents(p, p), TestSetFamily.all_subsets(),
                     oracle)
        assert est.value == pytest.approx(1.0, rel=1e-12)
        assert est.mode == "exact"
        assert est.witness.issubset(A)


def test_zero_field_and_single_set_family(counting):
    sp, oracle = counting
    e = LorentzExponents(2.0, 1.5)
    zero = Field.of(sp, np.zeros(4))
    assert m_norm(zero, e, TestSetFamily.all_subsets(), oracle).value == 0.0
    A = SetMask.from_indices(sp, [1, 2])
    chi = Field.of(sp, A.bools.astype(float))
    est = m_norm(chi, e, TestSetFamily.explicit([A]), oracle)
    want = (e.p / e.q) ** (1 / e.q) * 2 ** (1 / e.p) / 2 ** (1 / e.q)
    assert est.value == pytest.approx(want, rel=1e-12)
    assert est.mode == "lower-bound"


def test_script_norm_coincides_at_p_equal_q(counting):
    sp, oracle = counting
    rng = np.random.default_rng(0)
    f = Field.of(sp, rng.standard_normal(4))
    fam = TestSetFamily.all_subsets()
    e = LorentzExponents(2.0, 2.0)
    assert m_norm(f, e, fam, oracle).value == \
        script_m_norm(f, e, fam, oracle).value


def test_script_embedding_direction(counting):
    # raising the secondary exponent shrinks norms by at most the constant
    # (r/p)^(1/r - 1/q): the weak bound t^(1/p) f*(t) <= (r/p)^(1/r) ||f||_{p,r}
    # interpolated into the q-integral; per set, hence for the suprema
    sp, oracle = counting
    rng = np.random.default_rng(1)
    fam = TestSetFamily.all_subsets()
    p, r, q = 2.0, 1.2, 2.5
    c = (r / p) ** (1.0 / r - 1.0 / q)
    for _ in range(10):
        f = Field.of(sp, rng.standard_normal(4))
        lo = script_m_norm(f, LorentzExponents(p, r), fam, oracle).value
        hi = script_m_norm(f, LorentzExponents(p, q), fam, oracle).value
        assert hi <= c * lo * (1 + 1e-12)


def test_weak_norm_two_forms_agree(counting):
    sp, oracle = counting
    f = Field.of(sp, [2.0, 1.0, 0.0, 1.0])
    est = weak_script_m_norm(f, 2.0, TestSetFamily.all_subsets(), oracle)
    assert est.value > 0
    c = Field.of(sp, [0.0, 3.0, 3.0, 0.0])
    single = weak_script_m_norm(c, 2.0, TestSetFamily.all_subsets(), oracle)
    A = SetMask(sp, c.values > 0)
    want = 3.0 * m_norm(Field.of(sp, A.bools.astype(float)),
                        LorentzExponents(2.0, 2.0),
                        TestSetFamily.all_subsets(), oracle).value
    assert single.value == pytest.approx(want, rel=1e-12)


def test_exactness_requires_finite_model():
    grid = make_grid(1, 16.0, 256)
    params = CapacityParams(alpha=0.5, s=2.0, tol=1e-6)
    oracle = CapacityOracle(grid_problem(grid, params), params)
    f = Field.of(grid, np.exp(-grid.coords()[:, 0] ** 2))
    est = m_norm(f, LorentzExponents(2, 2), TestSetFamily.dyadic((2, 3)), oracle)
    assert est.mode == "lower-bound"
    assert est.lo <= est.value <= est.hi


def test_family_monotone_and_diam_cap(counting):
    sp, oracle = counting
    rng = np.random.default_rng(2)
    f = Field.of(sp, rng.standard_normal(4))
    e = LorentzExponents(2.0, 2.0)
    small = TestSetFamily.explicit([SetMask.from_indices(sp, [0])])
    grown = small + TestSetFamily.all_subsets()
    assert m_norm(f, e, small, oracle).value <= \
        m_norm(f, e, grown, oracle).value * (1 + 1e-15)

    grid = make_grid(1, 16.0, 256)
    fam = TestSetFamily.dyadic((0, 4)).with_diameter_cap(1.0)
    for mask in fam.sets(grid):
        assert mask.diameter() <= 1.0 + 1e-12


def test_local_vs_global_on_grid():
    grid = make_grid(1, 16.0, 256)
    params = CapacityParams(alpha=0.5, s=2.0, tol=1e-6)
    oracle = CapacityOracle(grid_problem(grid, params), params)
    x = grid.coords()[:, 0]
    f = Field.of(grid, np.where(np.abs(x - 0.5) <= 0.35,
                                np.exp(-(x - 0.5) ** 2), 0.0))
    rep = m_norm_local(f, LorentzExponents(2, 2), oracle)
    assert rep.local.value <= rep.global_.value * (1 + 1e-12)
    assert rep.ratio == pytest.approx(1.0, abs=1e-3)
    # two far-separated bumps: localization is lossy, ratio at least one
    g = Field.of(grid, np.exp(-(x + 3) ** 2 / 0.1) + np.exp(-(x - 3) ** 2 / 0.1))
    rep2 = m_norm_local(g, LorentzExponents(2, 2), oracle)
    assert rep2.ratio >= 1.0 - 1e-12 and math.isfinite(rep2.ratio)


def test_char_via_weights_banded_lower_bound():
    grid = make_grid(1, 16.0, 256)
    params = CapacityParams(alpha=0.5, s=2.0, tol=1e-6)
    oracle = CapacityOracle(grid_problem(grid, params), params)
    x = grid.coords()[:, 0]
    masks = [SetMask(grid, np.abs(x) <= 0.8),
             SetMask(grid, np.abs(x - 2.0) <= 0.5)]
    f = Field.of(grid, np.exp(-x ** 2 / 2))
    rep = char_m_via_weights(f, LorentzExponents(2.0, 2.0), masks, oracle)
    assert rep.per_set_margin >= -1e-9 * max(rep.sets_form, 1.0)
    assert rep.weights_form > 0 and rep.sets_form > 0
    with pytest.raises(ValueError):
        char_m_via_weights(f, LorentzExponents(2.0, 3.0), masks, oracle)


def test_default_grid_family_contents():
    grid = make_grid(1, 16.0, 256)
    f = Field.of(grid, np.exp(-grid.coords()[:, 0] ** 2))
    sets = default_grid_family(f).sets(grid, f)
    assert len(sets) > 31  # dyadic generations 0..4 plus superlevel sets
