"""Capacity-normalized multiplier norms as certified supremum estimates.

The defining suprema range over all compact sets, which is not computable
on a discretized model; estimates here are mode-tagged.  A family of test
sets yields a certified lower bound with the best set as witness, and the
tag 'exact' is reserved for all-subsets families on finite models, where
the enumeration provably exhausts the supremum (discretely, every set is
compact and measurable-set and compact suprema coincide).

Families are generated deterministically from a fixed seed; enlarging a
family never decreases an estimate, and the all-subsets family dominates
every other family on the same finite model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .capacity import CapacityOracle, NormEstimate, SetMask, unit_cover
from .grid import Grid
from .measure import (DiscreteMeasureSpace, Field, LorentzExponents,
                      lorentz_norm, weak_lorentz_norm)
from .weights import Weight, WeightConfig, potential_weight

__all__ = [
    "DEFAULT_SEED",
    "TestSetFamily",
    "default_grid_family",
    "m_norm",
    "script_m_norm",
    "weak_script_m_norm",
    "m_norm_local",
    "char_m_via_weights",
]

DEFAULT_SEED = 0x5EED
_ALL_SUBSETS_LIMIT = 20


# ---------------------------------------------------------------------------
# Test-set families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestSetFamily:
    """Deterministic generator of test sets for supremum estimates.

    kind in {'all-subsets', 'dyadic-cubes', 'superlevels', 'random-unions',
    'explicit', 'union'}; generation is reproducible given the seed.  An
    optional diameter cap keeps only sets of diameter <= diam_cap (grid
    models).
    """

    kind: str
    seed: int = DEFAULT_SEED
    size_cap: Optional[int] = None
    diam_cap: Optional[float] = None
    generations: tuple = (0, 1, 2, 3, 4)
    count: int = 32
    members: tuple = ()

    __test__ = False  # not a pytest collection target

    # -- constructors --------------------------------------------------------
    @staticmethod
    def all_subsets() -> "TestSetFamily":
        return TestSetFamily("all-subsets")

    @staticmethod
    def dyadic(generations=(0, 1, 2, 3, 4)) -> "TestSetFamily":
        return TestSetFamily("dyadic-cubes", generations=tuple(generations))

    @staticmethod
    def superlevels(size_cap: Optional[int] = None) -> "TestSetFamily":
        return TestSetFamily("superlevels", size_cap=size_cap)

    @staticmethod
    def random_unions(count: int, seed: int = DEFAULT_SEED) -> "TestSetFamily":
        return TestSetFamily("random-unions", count=count, seed=seed)

    @staticmethod
    def explicit(masks: Sequence[SetMask]) -> "TestSetFamily":
        return TestSetFamily("explicit", members=tuple(masks))

    def __add__(self, other: "TestSetFamily") -> "TestSetFamily":
        return TestSetFamily("union", members=(self, other),
                             diam_cap=None)

    def with_diameter_cap(self, cap: float) -> "TestSetFamily":
        return replace(self, diam_cap=cap)

    # -- generation ----------------------------------------------------------
    def sets(self, space, f: Optional[Field] = None) -> list:
        out = self._raw_sets(space, f)
        if self.diam_cap is not None:
            out = [m for m in out if m.diameter() <= self.diam_cap + 1e-12]
        seen, unique = set(), []
        for m in out:
            if not m.is_empty and m.key not in seen:
                seen.add(m.key)
                unique.append(m)
        return unique

    def _raw_sets(self, space, f) -> list:
        if self.kind == "union":
            out = []
            for fam in self.members:
                out.extend(fam._raw_sets(space, f))
            return out
        if self.kind == "explicit":
            return list(self.members)
        if self.kind == "all-subsets":
            m = space.size
            if m > _ALL_SUBSETS_LIMIT:
                raise ValueError(
                    f"all-subsets family limited to {_ALL_SUBSETS_LIMIT} atoms, "
                    f"space has {m}")
            return [SetMask(space, np.array(
                [(b >> i) & 1 for i in range(m)], dtype=bool))
                for b in range(1, 1 << m)]
        if self.kind == "dyadic-cubes":
            if not isinstance(space, Grid):
                raise ValueError("dyadic cubes need a grid model")
            return self._dyadic(space)
        if self.kind == "superlevels":
            if f is None:
                raise ValueError("superlevel family needs the base field")
            vals = np.abs(f.values)
            levels = np.unique(vals[vals > 0.0])[::-1]
            if self.size_cap is not None and levels.size > self.size_cap:
                idx = np.unique(np.linspace(0, levels.size - 1,
                                            self.size_cap).round().astype(int))
                levels = levels[idx]
            return [SetMask(space, vals >= u) for u in levels]
        if self.kind == "random-unions":
            return self._random_unions(space)
        raise ValueError(f"unknown family kind {self.kind!r}")

    def _dyadic(self, grid: Grid) -> list:
        out = []
        idx = np.arange(grid.size)
        if grid.n == 1:
            rows = idx
            cols = np.zeros_like(idx)
        else:
            rows, cols = divmod(idx, grid.N)
        for g in self.generations:
            blocks = 2 ** g
            if blocks > grid.N:
                continue
            width = grid.N // blocks
            bi, bj = rows // width, cols // width
            for a in range(blocks):
                for b in range(blocks if grid.n == 2 else 1):
                    out.append(SetMask(grid, (bi == a) & (bj == b)))
        return out

    def _random_unions(self, space) -> list:
        rng = np.random.default_rng(self.seed)
        out = []
        if isinstance(space, Grid):
            pool = TestSetFamily.dyadic((1, 2, 3, 4))._dyadic(space)
            for _ in range(self.count):
                k = int(rng.integers(1, 5))
                picks = rng.integers(0, len(pool), size=k)
                acc = np.zeros(space.size, dtype=bool)
                for p in picks:
                    acc |= pool[p].bools
                out.append(SetMask(space, acc))
        else:
            for _ in range(self.count):
                density = rng.uniform(0.1, 0.6)
                b = rng.random(space.size) < density
                if not b.any():
                    b[int(rng.integers(0, space.size))] = True
                out.append(SetMask(space, b))
        return out


def default_grid_family(f: Optional[Field] = None,
                        seed: int = DEFAULT_SEED) -> TestSetFamily:
    """Dyadic cubes of generations 0..4 plus the superlevel sets of |f|."""
    fam = TestSetFamily.dyadic((0, 1, 2, 3, 4))
    fam = replace(fam, seed=seed)
    if f is not None:
        fam = fam + TestSetFamily.superlevels(size_cap=16)
    return fam


# ---------------------------------------------------------------------------
# Supremum estimates
# ---------------------------------------------------------------------------

def _sup_over_family(f: Field, e: LorentzExponents, family: TestSetFamily,
                     oracle: CapacityOracle, cap_exponent: float,
                     weak: bool = False) -> NormEstimate:
    sets = family.sets(oracle.space, f)
    if not sets:
        raise ValueError("empty effective test-set family")
    best = -1.0
    lo_sup = 0.0   # certified lower bound of the family supremum
    hi_sup = 0.0   # certified upper bound of the family supremum
    witness = None
    worst_gap = 0.0
    seen_positive = False
    for mask in sets:
        res = oracle.result(mask)
        if res.value <= 0.0:
            continue  # zero-capacity sets are skipped
        seen_positive = True
        if weak:
            num = weak_lorentz_norm(f.restrict(mask), e.p)
        else:
            num = lorentz_norm(f.restrict(mask), e)
        ratio = num / res.value ** cap_exponent
        if ratio > best:
            best = ratio
            witness = mask
        lo_sup = max(lo_sup, num / res.upper ** cap_exponent)
        hi_sup = max(hi_sup, num / max(res.lower, 1e-300) ** cap_exponent)
        worst_gap = max(worst_gap, res.gap)
    if not seen_positive:
        raise ValueError("every set in the family has zero capacity")
    exact = (family.kind == "all-subsets"
             and isinstance(oracle.space, DiscreteMeasureSpace))
    mode = "exact" if exact else "lower-bound"
    return NormEstimate(max(best, 0.0), mode, witness=witness,
                        lo=lo_sup, hi=hi_sup, max_gap=worst_gap)


def m_norm(f: Field, e: LorentzExponents, family: TestSetFamily,
           oracle: CapacityOracle) -> NormEstimate:
    """sup over test sets of ||f chi_K||_{p,q} / cap(K)^(1/q)."""
    if not (1.0 < e.p < math.inf) or not (1.0 < e.q < math.inf):
        raise ValueError("multiplier norm needs 1 < p, q < inf")
    return _sup_over_family(f, e, family, oracle, 1.0 / e.q)


def script_m_norm(f: Field, e: LorentzExponents, family: TestSetFamily,
                  oracle: CapacityOracle) -> NormEstimate:
    """sup over test sets of ||f chi_K||_{p,q} / cap(K)^(1/p) (coincides
    with m_norm when p = q)."""
    if not (1.0 < e.p < math.inf) or not (1.0 < e.q < math.inf):
        raise ValueError("multiplier norm needs 1 < p, q < inf")
    return _sup_over_family(f, e, family, oracle, 1.0 / e.p)


def weak_script_m_norm(f: Field, p: float, family: TestSetFamily,
                       oracle: CapacityOracle) -> NormEstimate:
    """Weak multiplier norm, evaluated in both equivalent forms.

    Form A takes the weak Lorentz norm per test set; form B sweeps the
    breakpoints t and takes t times the (p, p)-estimate of the indicator of
    {|f| > t}.  Both reduce to the same double supremum over (set, level)
    pairs, so they must agree to roundoff given identical cached
    capacities; disagreement raises.
    """
    if not (1.0 < p < math.inf):
        raise ValueError("weak multiplier norm needs 1 < p < inf")
    e = LorentzExponents(p, p)
    form_a = _sup_over_family(f, e, family, oracle, 1.0 / p, weak=True)

    vals = np.abs(f.values)
    levels = np.unique(vals[vals > 0.0])[::-1]
    form_b = 0.0
    for u in levels:
        ind = Field(f.space, (vals >= u).astype(float))
        est = _sup_over_family(ind, e, family, oracle, 1.0 / p)
        form_b = max(form_b, u * est.value)
    scale = max(form_a.value, form_b, 1e-300)
    if abs(form_a.value - form_b) > 1e-9 * scale:
        raise AssertionError(
            f"weak-norm forms disagree: {form_a.value} vs {form_b}")
    return form_a


@dataclass
class LocalizationReport:
    local: NormEstimate
    global_: NormEstimate
    ratio: float


def m_norm_local(f: Field, e: LorentzExponents, oracle: CapacityOracle,
                 family: Optional[TestSetFamily] = None) -> LocalizationReport:
    """Unit-diameter-localized estimate against the unrestricted one.

    The local family is the unrestricted family screened to diameter <= 1,
    enlarged with the unit-cover tiles and the tile pieces of each test
    set; the global family contains the local one, so local <= global holds
    exactly.  The reverse ratio is recorded (finite over the suites'
    corpora, no constant asserted).
    """
    grid = oracle.space
    if not isinstance(grid, Grid):
        raise ValueError("localization needs a grid model")
    if family is None:
        family = default_grid_family(f)
    base = family.sets(grid, f)
    tiles = unit_cover(grid)
    local_masks = [m for m in base if m.diameter() <= 1.0 + 1e-12]
    local_masks.extend(t for t in tiles)
    for m in base:
        if m.diameter() > 1.0:
            for t in tiles:
                local_masks.append(m.intersect(t))
    local_fam = TestSetFamily.explicit(local_masks)
    global_fam = TestSetFamily.explicit(list(base) + local_masks)
    loc = m_norm(f, e, local_fam, oracle)
    glo = m_norm(f, e, global_fam, oracle)
    ratio = glo.value / loc.value if loc.value > 0 else math.inf
    return LocalizationReport(loc, glo, ratio)


# ---------------------------------------------------------------------------
# Weight characterization
# ---------------------------------------------------------------------------

@dataclass
class WeightCharReport:
    weights_form: float
    sets_form: float
    per_set_margin: float   # min over sets of banded slack (>= 0 on pass)
    ratio_ws: float
    ratio_sw: float
    band: float


def char_m_via_weights(f: Field, e: LorentzExponents, masks: Sequence[SetMask],
                       oracle: CapacityOracle,
                       cfg: WeightConfig = WeightConfig(),
                       weight_for=None) -> WeightCharReport:
    """Two-sided comparison of the weight form with the set form.

    For each test set K the potential weight w_K = (V^K)^delta / cap(K)
    dominates b^delta / cap(K) on K, where b is the measured minimum of the
    potential on K; hence

        ||f (chi_K / cap(K))^(1/q)|| <= b^(-delta/q) ||f w_K^(1/q)||

    holds exactly with the measured constant.  The report carries the worst
    banded margin together with the two supremum forms and their mutual
    ratios.
    """
    if not (1.0 < e.q <= e.p < math.inf):
        raise ValueError("weight characterization needs 1 < q <= p < inf")
    if not masks:
        raise ValueError("need at least one test set")
    if weight_for is None:
        weight_for = lambda mask: potential_weight(oracle, mask, cfg)
    weights_form = 0.0
    sets_form = 0.0
    margin = math.inf
    worst_band = 0.0
    for mask in masks:
        res = oracle.result(mask)
        if res.value <= 0.0:
            continue
        wgt = weight_for(mask)
        # measured potential floor on K, recovered from the weight
        b = float((wgt.values[mask.bools] * res.value).min()) ** (1.0 / cfg.delta)
        lhs = lorentz_norm(f.restrict(mask), e) / res.value ** (1.0 / e.q)
        rhs = lorentz_norm(Field(f.space, f.values * wgt.values ** (1.0 / e.q)), e)
        weights_form = max(weights_form, rhs)
        sets_form = max(sets_form, lhs)
        margin = min(margin, b ** (-cfg.delta / e.q) * rhs - lhs)
        worst_band = max(worst_band, abs(1.0 - b))
    ratio_ws = weights_form / sets_form if sets_form > 0 else math.inf
    ratio_sw = sets_form / weights_form if weights_form > 0 else math.inf
    return WeightCharReport(weights_form, sets_form, margin,
                            ratio_ws, ratio_sw, worst_band)
