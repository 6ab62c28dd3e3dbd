"""Named, reproducible verification campaigns with machine-readable verdicts.

Every campaign binds the computational modules to a finitely checkable
inequality or constructive procedure and emits one verdict per check:
'pass'/'fail' for contracts with explicit constants, 'recorded' for
finiteness-only claims whose measured constant is reported but not bounded.
Determinism is part of the contract: identical config and seeds reproduce
identical verdict tables, byte for byte.

A static claims registry names every finitely checkable statement the
artifact covers; the self-audit check fails if any registered claim is not
exercised by at least one check.
"""
from __future__ import annotations

import configparser
import csv
import io
import json
import math
import zlib
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import blocks as bl
from . import multiplier as mn
from . import weights as wt
from .capacity import (CapacityOracle, CapacityParams, CapacityProblem,
                       SetMask, capacitary_lorentz_norm, capacity,
                       equilibrium_checks, finite_problem, grid_problem,
                       identity_problem, l1c_norm,
                       lebesgue_lower_bound_check, nonlinear_potential,
                       strichartz_check)
from .grid import Grid, bessel_kernel, convolve, make_grid
from .measure import (DiscreteMeasureSpace, Field, LorentzExponents,
                      distribution_function, gamma_norm, gamma_sandwich_bound,
                      lorentz_norm, pairing, power_identity_check)

__all__ = [
    "CapflowConfig",
    "SuiteSpec",
    "Verdict",
    "run_suite",
    "emit_report",
    "REQUIRED_CLAIMS",
    "SUITES",
    "CHECKS",
]


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CapflowConfig:
    """Knobs for the verification campaigns (defaults are desk scale)."""

    grid_N: int = 256
    grid_L: float = 16.0
    grid2_N: int = 128
    grid2_L: float = 12.0
    alpha: float = 0.5
    s: float = 2.0
    tol: float = 1e-6
    delta: float = 0.5
    slack: float = 1.25
    master_seed: int = 20260808
    scale_models: int = 50
    scale_fields: int = 200
    scale_gamma: int = 100
    scale_pairs: int = 100
    scale_trace: int = 100
    scale_tuples: int = 50
    scale_grid_sets: int = 4
    scale_kothe: int = 20
    l1c_levels: int = 16

    _FILE_KEYS = {
        ("grid", "N"): ("grid_N", int),
        ("grid", "L"): ("grid_L", float),
        ("grid2", "N"): ("grid2_N", int),
        ("grid2", "L"): ("grid2_L", float),
        ("cap", "alpha"): ("alpha", float),
        ("cap", "s"): ("s", float),
        ("cap", "tol"): ("tol", float),
        ("weights", "delta"): ("delta", float),
        ("weights", "slack"): ("slack", float),
        ("seeds", "master"): ("master_seed", int),
        ("scale", "models"): ("scale_models", int),
        ("scale", "fields"): ("scale_fields", int),
        ("scale", "gamma"): ("scale_gamma", int),
        ("scale", "pairs"): ("scale_pairs", int),
        ("scale", "trace"): ("scale_trace", int),
        ("scale", "tuples"): ("scale_tuples", int),
        ("scale", "grid_sets"): ("scale_grid_sets", int),
        ("scale", "kothe"): ("scale_kothe", int),
        ("scale", "l1c_levels"): ("l1c_levels", int),
    }

    @staticmethod
    def from_file(path) -> "CapflowConfig":
        parser = configparser.ConfigParser()
        parser.optionxform = str  # keys are case-sensitive (grid.N)
        with open(path) as fh:
            parser.read_file(fh)
        kwargs = {}
        for section in parser.sections():
            for key, raw in parser.items(section):
                spec = CapflowConfig._FILE_KEYS.get((section, key))
                if spec is None:
                    raise ValueError(f"unknown config key [{section}] {key}")
                name, conv = spec
                kwargs[name] = conv(raw)
        return CapflowConfig(**kwargs)

    def quick(self) -> "CapflowConfig":
        """Reduced-scale variant used by the determinism round trip."""
        return replace(self, scale_models=8, scale_fields=30, scale_gamma=8,
                       scale_pairs=10, scale_trace=10, scale_tuples=6,
                       scale_grid_sets=2, scale_kothe=4)

    def to_dict(self) -> Dict:
        return {f.name: getattr(self, f.name) for f in fields(self)
                if not f.name.startswith("_")}


@dataclass(frozen=True)
class SuiteSpec:
    """A named campaign bound to a config and an output location."""

    suite: str
    config: CapflowConfig = CapflowConfig()
    out: Optional[str] = None


@dataclass
class Verdict:
    check_id: str
    status: str          # pass | fail | recorded
    measured: float
    claim: str
    details: str = ""

    def __post_init__(self):
        if self.status not in ("pass", "fail", "recorded"):
            raise ValueError(f"unknown verdict status {self.status!r}")


def _fmt(x: float) -> str:
    if x != x:
        return "nan"
    if x == math.inf:
        return "inf"
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# Shared corpus builders
# ---------------------------------------------------------------------------

class RunContext:
    """Per-run caches: oracles, corpora, and calibration constants."""

    def __init__(self, cfg: CapflowConfig):
        self.cfg = cfg
        self._oracles: Dict = {}
        self._finite_corpus = None
        self.calibration: Dict[str, float] = {}

    def rng(self, tag: str) -> np.random.Generator:
        # crc32, not hash(): stable across processes for byte-identical reruns
        return np.random.default_rng([self.cfg.master_seed,
                                      zlib.crc32(tag.encode())])

    def grid_oracle(self, n: int = 1, alpha: Optional[float] = None,
                    s: Optional[float] = None, N: Optional[int] = None,
                    L: Optional[float] = None) -> CapacityOracle:
        cfg = self.cfg
        alpha = cfg.alpha if alpha is None else alpha
        s = cfg.s if s is None else s
        if n == 1:
            N = cfg.grid_N if N is None else N
            L = cfg.grid_L if L is None else L
        else:
            N = cfg.grid2_N if N is None else N
            L = cfg.grid2_L if L is None else L
        key = (n, L, N, alpha, s, cfg.tol)
        oracle = self._oracles.get(key)
        if oracle is None:
            grid = make_grid(n, L, N)
            params = CapacityParams(alpha=alpha, s=s, tol=cfg.tol)
            oracle = CapacityOracle(grid_problem(grid, params), params)
            self._oracles[key] = oracle
        return oracle

    def finite_corpus(self) -> List:
        """Deterministic corpus of random finite-model capacity instances."""
        if self._finite_corpus is None:
            rng = self.rng("finite-corpus")
            out = []
            s_cycle = (1.5, 2.0, 3.0)
            for i in range(self.cfg.scale_models):
                m = int(rng.integers(4, 65))
                problem = _random_finite_problem(rng, m)
                params = CapacityParams(alpha=1.0, s=s_cycle[i % 3],
                                           tol=self.cfg.tol)
                mask = _random_mask(rng, problem.space)
                out.append((problem, params, mask))
            self._finite_corpus = out
        return self._finite_corpus


def _random_finite_problem(rng, m: int) -> CapacityProblem:
    B = rng.random((m, m))
    M = (B + B.T) / 2.0 + np.diag(rng.random(m) + 0.5)
    w = rng.random(m) + 0.25
    return finite_problem(DiscreteMeasureSpace(w), M)


def _random_mask(rng, space) -> SetMask:
    b = rng.random(space.size) < rng.uniform(0.2, 0.6)
    if not b.any():
        b[int(rng.integers(0, space.size))] = True
    return SetMask(space, b)


def _random_field(rng, space, signed: bool = True,
                  levels: Optional[int] = None) -> Field:
    v = rng.lognormal(0.0, 1.0, space.size)
    if levels is not None:
        qs = np.quantile(v, np.linspace(0.0, 1.0, levels + 1)[1:])
        v = qs[np.searchsorted(qs, v, side="left").clip(0, levels - 1)]
        v = v * (rng.random(space.size) > 0.2)
    if signed:
        v = v * rng.choice([-1.0, 1.0], space.size)
    return Field(space, v)


def _interval_mask(grid: Grid, center: float, half: float) -> SetMask:
    """Interval on the line; disc of that radius on the plane."""
    if grid.n == 1:
        return SetMask(grid, np.abs(grid.coords()[:, 0] - center) <= half)
    c = grid.coords()
    return SetMask(grid, np.sqrt(((c - center) ** 2).sum(axis=1)) <= half)


def _grid_set_corpus(rng, grid: Grid, count: int) -> List[SetMask]:
    """Compact random sets respecting the wrap-around support margin."""
    reach = (grid.L - 8.0) / 2.0
    if reach <= 0.0:
        raise ValueError(f"box L={grid.L} leaves no room for test supports")
    out = []
    for _ in range(count):
        kind = rng.integers(0, 3)
        if kind == 0:
            c = rng.uniform(-reach * 0.5, reach * 0.5)
            out.append(_interval_mask(grid, c, rng.uniform(0.3, 1.5)))
        elif kind == 1:
            far = max(reach - 1.0, 0.6)
            a = _interval_mask(grid, rng.uniform(-far, -0.5), rng.uniform(0.2, 0.8))
            b = _interval_mask(grid, rng.uniform(0.5, far), rng.uniform(0.2, 0.8))
            out.append(a.union(b))
        else:
            c = rng.uniform(-reach * 0.5, reach * 0.5)
            base = _interval_mask(grid, c, rng.uniform(0.5, 1.8))
            keep = rng.random(grid.size) < 0.7
            bools = base.bools & keep
            if not bools.any():
                bools = base.bools
            out.append(SetMask(grid, bools))
    for mask in out:
        grid.check_support_margin(mask.diameter())
    return out


def _bump_field(grid: Grid, center: float, width: float,
                height: float = 1.0) -> Field:
    x = grid.coords()
    d2 = ((x - center) ** 2).sum(axis=1)
    return Field(grid, height * np.exp(-d2 / (2.0 * width ** 2)))


# ---------------------------------------------------------------------------
# Checks
# ---------------------------------------------------------------------------

def check_capacity_certificates(ctx: RunContext) -> List[Verdict]:
    cid = "C01-capacity-certificates"
    cfg = ctx.cfg
    verdicts = []
    failures = []

    # analytic: counting capacity on a weighted identity model
    rng = ctx.rng("c01-analytic")
    space = DiscreteMeasureSpace(rng.random(5) + 0.5)
    oracle = CapacityOracle(identity_problem(space),
                               CapacityParams(1.0, 2.0, tol=cfg.tol))
    for _ in range(5):
        mask = _random_mask(rng, space)
        if abs(oracle.value(mask) - mask.measure) > 1e-12:
            failures.append("identity-counting")
    # analytic: uniform optimum under the all-ones kernel
    for m, s in ((4, 2.0), (4, 3.0), (6, 1.5)):
        sp = DiscreteMeasureSpace(np.ones(m))
        prob = finite_problem(sp, np.ones((m, m)))
        res = capacity(prob, SetMask.from_indices(sp, [0, 1]),
                          CapacityParams(1.0, s, tol=cfg.tol))
        if abs(res.value - m ** (1.0 - s)) > 1e-6 * m ** (1.0 - s):
            failures.append(f"all-ones m={m} s={s}")
    # analytic: the symmetric strictly convex 2x2 instance
    sp2 = DiscreteMeasureSpace([1.0, 1.0])
    prob2 = finite_problem(sp2, [[1.0, 0.5], [0.5, 1.0]])
    res2 = capacity(prob2, SetMask.full(sp2),
                       CapacityParams(1.0, 2.0, tol=cfg.tol))
    if abs(res2.value - 8.0 / 9.0) > 1e-6:
        failures.append("2x2 value")
    if np.abs(res2.optimizer - 2.0 / 3.0).max() > 1e-4:
        failures.append("2x2 optimizer")

    worst_gap = 0.0
    for problem, params, mask in ctx.finite_corpus():
        res = capacity(problem, mask, params)
        worst_gap = max(worst_gap, res.gap)
        if not res.converged or res.gap > params.tol:
            failures.append(f"gap {res.gap:.2e}")
        if not (res.lower <= res.value <= res.upper * (1 + 1e-15)):
            failures.append("certificate ordering")
        if res.dual_measure is not None and \
                np.any(res.dual_measure[~mask.bools] != 0.0):
            failures.append("dual mass off the set")
    status = "fail" if failures else "pass"
    verdicts.append(Verdict(cid, status, worst_gap, "capacity-definition",
                            "; ".join(failures[:4]) or
                            f"{cfg.scale_models} models, max gap"))
    verdicts.append(Verdict(cid + "/certificates", status, worst_gap,
                            "capacity-duality-certificate",
                            "lower <= value <= upper with relative gap"))
    return verdicts


def check_equilibrium(ctx: RunContext) -> List[Verdict]:
    cid = "C02-equilibrium-identities"
    cfg = ctx.cfg
    worst = 0.0
    worst_band = 0.0
    failures = []
    instances = []
    for problem, params, mask in ctx.finite_corpus():
        instances.append((problem, params, mask))
    g1 = ctx.grid_oracle(1)
    grid = g1.space
    instances.append((g1.problem, g1.params, _interval_mask(grid, 0.0, 1.5)))
    instances.append((g1.problem, g1.params,
                      _interval_mask(grid, -2.0, 0.5).union(
                          _interval_mask(grid, 2.0, 0.5))))
    for problem, params, mask in instances:
        res = capacity(problem, mask, params)
        if not res.converged:
            failures.append("non-convergence")
            continue
        resid = equilibrium_checks(problem, res)
        worst = max(worst, *resid.values())
        if max(resid.values()) > 50.0 * params.tol:
            failures.append(f"residual {max(resid.values()):.2e}")
        pot = nonlinear_potential(problem, params, res.dual_measure).field
        band = 10.0 * params.tol
        low = float(pot.values[mask.bools].min())
        supp = res.dual_measure > 0.0
        high = float(pot.values[supp].max()) if supp.any() else 1.0
        worst_band = max(worst_band, abs(1.0 - low), abs(high - 1.0))
        if low < 1.0 - band:
            failures.append(f"potential floor {low:.8f}")
        if high > 1.0 + band:
            failures.append(f"potential ceiling {high:.8f}")
    status = "fail" if failures else "pass"
    return [
        Verdict(cid, status, worst, "equilibrium-identities",
                "; ".join(failures[:4]) or "mass/energy/self-pairing residuals"),
        Verdict(cid + "/potential-band", status, worst_band,
                "nonlinear-potential", "potential within band on E and supp"),
    ]


def check_set_function_axioms(ctx: RunContext) -> List[Verdict]:
    cid = "C03-monotone-subadditive"
    cfg = ctx.cfg
    rng = ctx.rng("c03")
    failures = []
    prob = _random_finite_problem(rng, 24)
    params = CapacityParams(1.0, 2.0, tol=cfg.tol)
    oracle = CapacityOracle(prob, params)
    space = prob.space
    for _ in range(cfg.scale_pairs):
        small = _random_mask(rng, space)
        grow = small.bools | (rng.random(space.size) < 0.3)
        big = SetMask(space, grow)
        if oracle.result(small).lower > oracle.result(big).upper * (1 + 1e-12):
            failures.append("monotonicity")
    for _ in range(cfg.scale_pairs):
        a = _random_mask(rng, space)
        b = _random_mask(rng, space)
        u = oracle.result(a.union(b))
        if u.lower > (oracle.result(a).upper + oracle.result(b).upper) * (1 + 1e-12):
            failures.append("subadditivity")
    # absolute continuity on the discrete model: zero capacity iff empty
    if capacity(prob, SetMask.empty(space), params).value != 0.0:
        failures.append("empty set")
    if oracle.value(SetMask.from_indices(space, [0])) <= 0.0:
        failures.append("null nonempty set")
    status = "fail" if failures else "pass"
    return [Verdict(cid, status, float(len(failures)),
                    "capacity-set-function-axioms",
                    "; ".join(sorted(set(failures))) or
                    f"{2 * cfg.scale_pairs} certified comparisons")]


def check_lorentz_engine(ctx: RunContext) -> List[Verdict]:
    cid = "C04-lorentz-engine"
    cfg = ctx.cfg
    rng = ctx.rng("c04")
    from scipy.integrate import quad
    lattice = [(2.0, 2.0), (2.0, 1.0), (3.0, 1.5), (1.5, 2.0), (0.8, 1.3)]
    worst_quad = 0.0
    worst_pq = 0.0
    worst_power = 0.0
    failures = []
    for i in range(cfg.scale_fields):
        m = int(rng.integers(2, 65))
        space = DiscreteMeasureSpace(rng.random(m) + 0.1)
        f = _random_field(rng, space)
        p, q = lattice[i % len(lattice)]
        e = LorentzExponents(p, q)
        closed = lorentz_norm(f, e)
        dist = distribution_function(f)
        pieces = np.concatenate([[0.0], dist.breakpoints])
        acc = 0.0
        for a, b in zip(pieces[:-1], pieces[1:]):
            val, _ = quad(lambda t: dist(t) ** (q / p) * t ** (q - 1.0), a, b,
                          epsabs=0.0, epsrel=1e-12)
            acc += val
        oracle_val = (p * acc) ** (1.0 / q)
        rel = abs(closed - oracle_val) / max(oracle_val, 1e-300)
        worst_quad = max(worst_quad, rel)
        if rel > 1e-9:
            failures.append(f"quadrature {rel:.2e}")
        # p = q collapses to the plain integral norm
        pp = float(rng.uniform(1.0, 3.0))
        plain = float((space.weights * np.abs(f.values) ** pp).sum()) ** (1 / pp)
        got = lorentz_norm(f, LorentzExponents(pp, pp))
        relpq = abs(got - plain) / max(plain, 1e-300)
        worst_pq = max(worst_pq, relpq)
        if relpq > 1e-12:
            failures.append("p=q reduction")
        r = (0.5, 2.0, 1.0 / 3.0)[i % 3]
        resid = power_identity_check(f, e, r)
        scale = max(lorentz_norm(Field(space, np.abs(f.values) ** r), e), 1.0)
        worst_power = max(worst_power, resid / scale)
        if resid > 1e-12 * scale:
            failures.append("power identity")
    status = "fail" if failures else "pass"
    return [
        Verdict(cid, status, worst_quad, "lorentz-norm-definition",
                "; ".join(sorted(set(failures))) or
                f"{cfg.scale_fields} fields vs layer-cake quadrature"),
        Verdict(cid + "/power-identity", status, worst_power, "power-identity",
                "|||f|^r|| = ||f||^r in closed form"),
    ]


def check_gamma_sandwich(ctx: RunContext) -> List[Verdict]:
    cid = "C05-gamma-sandwich"
    cfg = ctx.cfg
    rng = ctx.rng("c05")
    lattice = [(2.0, 2.0, 1.0), (2.0, 1.0, 1.0), (3.0, 1.5, 0.5),
               (1.5, 1.0, 0.75)]
    worst_low = 0.0   # how far Gamma dips below the norm (should be <= 0)
    worst_up = 0.0
    worst_tri = 0.0
    failures = []
    for i in range(cfg.scale_gamma):
        m = int(rng.integers(2, 33))
        space = DiscreteMeasureSpace(rng.random(m) + 0.2)
        f = _random_field(rng, space)
        for p, q, r in lattice:
            e = LorentzExponents(p, q)
            base = lorentz_norm(f, e)
            gam = gamma_norm(f, e, r)
            slack = 1e-6 * max(1.0, base)
            low_gap = base - gam            # <= slack
            up_gap = gam - gamma_sandwich_bound(e, r) * base  # <= slack
            worst_low = max(worst_low, low_gap)
            worst_up = max(worst_up, up_gap)
            if low_gap > slack or up_gap > slack:
                failures.append(f"(p,q,r)=({p},{q},{r})")
        # r = 1 renorming is a genuine norm: triangle inequality holds
        g = _random_field(rng, space)
        e1 = LorentzExponents(2.0, 1.5)
        both = gamma_norm(Field(space, f.values + g.values), e1, 1.0)
        apart = gamma_norm(f, e1, 1.0) + gamma_norm(g, e1, 1.0)
        worst_tri = max(worst_tri, both / apart if apart > 0 else 0.0)
        if both > apart * (1 + 1e-7):
            failures.append("triangle r=1")
    status = "fail" if failures else "pass"
    return [
        Verdict(cid, status, max(worst_low, worst_up), "gamma-normability",
                "; ".join(sorted(set(failures))) or
                f"{cfg.scale_gamma} fields x {len(lattice)} exponent triples"),
        Verdict(cid + "/triangle", status, worst_tri, "gamma-normability",
                "r=1 renorming satisfies the triangle inequality"),
    ]


def check_capacitary_embeddings(ctx: RunContext) -> List[Verdict]:
    cid = "C06-capacitary-embeddings"
    cfg = ctx.cfg
    rng = ctx.rng("c06")
    worst = -math.inf
    failures = []
    cases = []
    for _ in range(10):
        m = int(rng.integers(2, 17))
        space = DiscreteMeasureSpace(rng.random(m) + 0.2)
        oracle = CapacityOracle(identity_problem(space),
                                   CapacityParams(1.0, 2.0, tol=cfg.tol))
        cases.append((oracle, _random_field(rng, space, levels=6)))
    g1 = ctx.grid_oracle(1)
    grid = g1.space
    for _ in range(4):
        c = rng.uniform(-2.0, 2.0)
        f = _bump_field(grid, c, rng.uniform(0.4, 1.0))
        v = np.round(f.values * 5.0) / 5.0  # few distinct levels
        cases.append((g1, Field(grid, v)))
    for oracle, f in cases:
        for q in (0.5, 0.75, 1.0):
            strong = capacitary_lorentz_norm(f, LorentzExponents(1.0, q), oracle)
            weak = capacitary_lorentz_norm(
                f, LorentzExponents(1.0, math.inf), oracle)
            l1c = l1c_norm(Field(f.space, np.abs(f.values)), oracle)
            slack = 1.0 + 50.0 * max(strong.max_gap, weak.max_gap, l1c.max_gap)
            bound_weak = q ** (1.0 / q) * strong.value * slack + 1e-30
            bound_l1 = q ** ((1.0 - q) / q) * strong.value * slack + 1e-30
            worst = max(worst,
                        weak.value / bound_weak if bound_weak else 0.0,
                        l1c.value / bound_l1 if bound_l1 else 0.0)
            if weak.value > bound_weak:
                failures.append(f"weak q={q}")
            if l1c.value > bound_l1:
                failures.append(f"l1c q={q}")
    status = "fail" if failures else "pass"
    return [
        Verdict(cid, status, worst, "capacitary-embedding-constants",
                "; ".join(sorted(set(failures))) or
                "q^(1/q) and q^((1-q)/q) constants, q in {1/2, 3/4, 1}"),
        Verdict(cid + "/spaces", status, worst, "capacitary-lorentz-spaces",
                "capacitary layer cakes over nested superlevel sets"),
        Verdict(cid + "/l1c", status, worst, "l1c-norm",
                "layer-cake capacity integral"),
    ]


def check_strichartz(ctx: RunContext) -> List[Verdict]:
    cid = "C07-strichartz-localization"
    cfg = ctx.cfg
    rng = ctx.rng("c07")
    coarse = ctx.grid_oracle(1)
    fine = ctx.grid_oracle(1, N=cfg.grid_N * 2)
    failures = []
    max_ratio = 0.0
    max_drift = 0.0
    sets = _grid_set_corpus(rng, coarse.space, cfg.scale_grid_sets + 2)
    for mask in sets:
        rep = strichartz_check(coarse, mask)
        if not rep.subadditive_ok:
            failures.append("subadditivity")
        if not math.isfinite(rep.ratio):
            failures.append("ratio infinite")
        max_ratio = max(max_ratio, rep.ratio)
        fine_mask = _refine_mask(coarse.space, fine.space, mask)
        rep_f = strichartz_check(fine, fine_mask)
        drift = rep_f.ratio / rep.ratio if rep.ratio > 0 else math.inf
        max_drift = max(max_drift, drift, 1.0 / drift)
        if not (0.5 <= drift <= 2.0):
            failures.append(f"refinement drift {drift:.3f}")
    status = "fail" if failures else "pass"
    return [
        Verdict(cid, status, max_ratio, "strichartz-localization",
                "; ".join(sorted(set(failures))) or
                "cap(E) <= sum over unit cover; reverse ratio recorded"),
        Verdict(cid + "/reverse-constant", "recorded", max_ratio,
                "strichartz-localization",
                f"max localized-sum ratio; drift {max_drift:.3f}"),
    ]


def _refine_mask(coarse: Grid, fine: Grid, mask: SetMask) -> SetMask:
    factor = fine.N // coarse.N
    if coarse.n == 1:
        return SetMask(fine, np.repeat(mask.bools, factor))
    b = mask.bools.reshape(coarse.N, coarse.N)
    return SetMask(fine, np.kron(b, np.ones((factor, factor), dtype=bool)).ravel())


def check_sobolev_bounds(ctx: RunContext) -> List[Verdict]:
    cid = "C08-sobolev-lower-bounds"
    cfg = ctx.cfg
    rng = ctx.rng("c08")
    failures = []
    recorded = []
    configs = [
        (1, cfg.alpha, 2.0, (0.5, 1.0)),            # alpha*s = n
        (1, cfg.alpha, 1.5, (0.25, 0.5, 1.0)),      # alpha*s < n, window floor 1/4
    ]
    for n, alpha, s, eps_list in configs:
        coarse = ctx.grid_oracle(n, alpha=alpha, s=s)
        fine = ctx.grid_oracle(n, alpha=alpha, s=s, N=cfg.grid_N * 2)
        sets = _grid_set_corpus(rng, coarse.space, cfg.scale_grid_sets)
        for mask in sets:
            for eps in eps_list:
                rep = lebesgue_lower_bound_check(coarse, mask, eps)
                if not math.isfinite(rep.ratio):
                    failures.append("ratio infinite")
                rep_f = lebesgue_lower_bound_check(
                    fine, _refine_mask(coarse.space, fine.space, mask), eps)
                drift = rep_f.ratio / rep.ratio if rep.ratio > 0 else math.inf
                if not (0.5 <= drift <= 2.0):
                    failures.append(f"drift {drift:.3f} (eps={eps})")
                recorded.append(rep.ratio)
    # window enforcement: epsilon below the admissible floor must be rejected
    o = ctx.grid_oracle(1, alpha=cfg.alpha, s=1.5)
    try:
        lebesgue_lower_bound_check(o, _interval_mask(o.space, 0.0, 1.0), 0.1)
        failures.append("window not enforced")
    except ValueError:
        pass
    # square set on the plane: ratio recorded with one refinement
    o2 = ctx.grid_oracle(2, alpha=1.0, s=2.0)
    sq = _square_mask(o2.space, 1.0)
    rep2 = lebesgue_lower_bound_check(o2, sq, 0.5)
    o2f = ctx.grid_oracle(2, alpha=1.0, s=2.0, N=cfg.grid2_N * 2)
    rep2f = lebesgue_lower_bound_check(
        o2f, _refine_mask(o2.space, o2f.space, sq), 0.5)
    drift2 = rep2f.ratio / rep2.ratio if rep2.ratio > 0 else math.inf
    if not (0.5 <= drift2 <= 2.0):
        failures.append(f"plane drift {drift2:.3f}")
    status = "fail" if failures else "pass"
    return [
        Verdict(cid, status, max(recorded) if recorded else 0.0,
                "sobolev-lower-bounds",
                "; ".join(sorted(set(failures))) or
                "|E|^eps / cap(E) finite and refinement-stable"),
        Verdict(cid + "/plane", status, rep2.ratio, "sobolev-lower-bounds",
                f"unit square, eps=1/2, drift {drift2:.3f}"),
    ]


def _square_mask(grid: Grid, side: float) -> SetMask:
    c = grid.coords()
    return SetMask(grid, np.all(np.abs(c) <= side / 2.0, axis=1))


def _covering_dictionary(space, seed: int) -> mn.TestSetFamily:
    """Random unions plus singletons, so greedy peeling always terminates."""
    singles = mn.TestSetFamily.explicit(
        [SetMask.from_indices(space, [i]) for i in range(space.size)])
    return mn.TestSetFamily.random_unions(6, seed=seed) + singles


def check_pairing(ctx: RunContext) -> List[Verdict]:
    cid = "C09-pairing-inequalities"
    cfg = ctx.cfg
    failures = []
    verdicts = []

    def corpus_ratios(seed_tag: str, p: float, q: float, count: int):
        """Grouped corpora drive the pairing harness, one oracle per group."""
        rng = ctx.rng(seed_tag)
        e = LorentzExponents(p, q)
        e_dual = LorentzExponents(e.p_conj, e.q_conj)
        ratios = []
        worst_gap = 0.0
        remaining = count
        group_index = 0
        while remaining > 0:
            batch = min(10, remaining)
            remaining -= batch
            m = int(rng.integers(4, 17))
            if group_index % 2 == 0:
                problem = identity_problem(
                    DiscreteMeasureSpace(rng.random(m) + 0.2))
            else:
                problem = _random_finite_problem(rng, m)
            group_index += 1
            space = problem.space
            oracle = CapacityOracle(problem,
                                    CapacityParams(1.0, 2.0, tol=cfg.tol))
            pairs = []
            for _ in range(batch):
                f = _random_field(rng, space)
                g = _random_field(rng, space)
                dictionary = _covering_dictionary(space,
                                                  int(rng.integers(2**31)))
                pairs.append((f, bl.block_norm_upper_greedy(
                    g, e_dual, dictionary, oracle)))

            def m_est(f, fam, _oracle=oracle, _e=e):
                return mn.m_norm(f, _e, fam, _oracle)

            rep = bl.pairing_inequality_suite(pairs, e, oracle, m_est)
            ratios.extend(rep.block_ratios)
            worst_gap = max(worst_gap, rep.max_gap)
        return ratios, worst_gap

    ratios22, gap22 = corpus_ratios("c09-22-a", 2.0, 2.0, cfg.scale_pairs)
    if not ratios22:
        failures.append("empty corpus")
    bound = 1.0 + 10.0 * max(gap22, 1e-12)
    bad = [r for r in ratios22 if r > bound]
    if bad:
        failures.append(f"p=q=2 ratio {max(bad):.6f}")
    verdicts.append(Verdict(cid, "fail" if failures else "pass",
                            max(ratios22, default=0.0), "pairing-estimate",
                            "; ".join(failures[:3]) or
                            f"{len(ratios22)} pairs at p=q=2, bound 1+10*gap"))

    stab_fail = []
    for (p, q) in ((3.0, 2.0), (2.0, 3.0)):
        r_a, _ = corpus_ratios(f"c09-{p}-{q}-a", p, q, max(cfg.scale_pairs // 4, 5))
        r_b, _ = corpus_ratios(f"c09-{p}-{q}-b", p, q, max(cfg.scale_pairs // 4, 5))
        hi_a, hi_b = max(r_a), max(r_b)
        ratio = hi_a / hi_b if hi_b > 0 else math.inf
        if not (0.5 <= ratio <= 2.0):
            stab_fail.append(f"(p,q)=({p},{q})")
        verdicts.append(Verdict(f"{cid}/recorded-p{p}-q{q}", "recorded",
                                max(hi_a, hi_b), "pairing-estimate",
                                f"corpus maxima {hi_a:.4f}/{hi_b:.4f}"))
    if stab_fail:
        verdicts.append(Verdict(cid + "/seed-stability", "fail",
                                float(len(stab_fail)), "pairing-estimate",
                                "; ".join(stab_fail)))
    else:
        verdicts.append(Verdict(cid + "/seed-stability", "pass", 1.0,
                                "pairing-estimate", "maxima within 2x across seeds"))

    # weak route: script blocks with q <= 1 against the weak estimate
    rng = ctx.rng("c09-weak")
    p, qb = 2.0, 1.0
    weak_ratios = []
    for _ in range(max(cfg.scale_pairs // 25, 2)):
        m = int(rng.integers(4, 13))
        space = DiscreteMeasureSpace(rng.random(m) + 0.2)
        oracle = CapacityOracle(identity_problem(space),
                                   CapacityParams(1.0, 2.0, tol=cfg.tol))
        e_blocks = LorentzExponents(p / (p - 1.0), qb)
        pairs = []
        for _ in range(5):
            f = _random_field(rng, space)
            g = _random_field(rng, space)
            pairs.append((f, bl.block_norm_upper_greedy(
                g, e_blocks,
                _covering_dictionary(space, int(rng.integers(2**31))),
                oracle, norm_type="scriptB")))

        def weak_est(f, fam, _oracle=oracle):
            return mn.weak_script_m_norm(f, p, fam, _oracle)

        rep = bl.pairing_inequality_suite(
            [], LorentzExponents(p, p), oracle,
            weak_pairs=pairs, weak_estimator=weak_est)
        weak_ratios.extend(rep.weak_ratios)
    verdicts.append(Verdict(cid + "/weak-blocks", "recorded",
                            max(weak_ratios) if weak_ratios else 0.0,
                            "pairing-direction-weak",
                            f"{len(weak_ratios)} script-block pairs, q=1"))

    # weighted-infimum route: pair against the upper estimate of the dual norm
    rng = ctx.rng("c09-n")
    n_ratios = []
    for _ in range(max(cfg.scale_pairs // 25, 2)):
        m = int(rng.integers(4, 13))
        # positive kernels keep the potentials off the weight floor
        problem = _random_finite_problem(rng, m)
        space = problem.space
        oracle = CapacityOracle(problem, CapacityParams(1.0, 2.0, tol=cfg.tol))
        e = LorentzExponents(2.0, 2.0)
        cands = [wt.potential_weight(oracle, _random_mask(rng, space),
                                     wt.WeightConfig(delta=cfg.delta))
                 for _ in range(3)]
        triples = []
        for _ in range(5):
            f = _random_field(rng, space)
            g = _random_field(rng, space)
            n_est = wt.n_norm_upper(Field(space, np.abs(g.values)), e, cands,
                                    oracle=oracle, refine=False)
            triples.append((f, g, n_est))
        fam = (mn.TestSetFamily.all_subsets() if m <= 10
               else mn.TestSetFamily.random_unions(8))

        def m_est(f, _fam, _oracle=oracle, _family=fam):
            return mn.m_norm(f, e, _family, _oracle)

        rep = bl.pairing_inequality_suite([], e, oracle, m_est,
                                          nnorm_pairs=triples)
        n_ratios.extend(rep.nnorm_ratios)
    verdicts.append(Verdict(cid + "/n-route", "recorded",
                            max(n_ratios) if n_ratios else 0.0,
                            "pairing-direction-n",
                            f"{len(n_ratios)} pairs vs weighted upper bounds"))
    return verdicts


def check_block_decomposition(ctx: RunContext) -> List[Verdict]:
    cid = "C10-block-decomposition"
    cfg = ctx.cfg
    rng = ctx.rng("c10")
    failures = []
    worst_norm_dev = 0.0
    worst_resid = 0.0
    sum_ratios = []
    level_ratios = []
    wcfg = wt.WeightConfig(delta=cfg.delta, l1c_levels=cfg.l1c_levels)

    def run_instance(oracle, f, omega_weight, e):
        nonlocal worst_norm_dev, worst_resid
        decomp = bl.block_norm_upper_constructive(f, e, omega_weight, oracle)
        for lam, blk in decomp.terms:
            worst_norm_dev = max(worst_norm_dev, abs(blk.normalization - 1.0))
            if abs(blk.normalization - 1.0) > 1e-12:
                failures.append("block not tight")
        scale = float(np.abs(f.values).max(initial=0.0))
        worst_resid = max(worst_resid, decomp.residual / max(scale, 1e-300))
        if decomp.residual > 1e-9 * max(scale, 1e-300):
            failures.append("reconstruction")
        return decomp

    # finite models
    for _ in range(8):
        m = int(rng.integers(6, 25))
        space = DiscreteMeasureSpace(rng.random(m) + 0.2)
        oracle = CapacityOracle(identity_problem(space),
                                   CapacityParams(1.0, 2.0, tol=cfg.tol))
        wgt = wt.potential_weight(oracle, _random_mask(rng, space), wcfg)
        f = _random_field(rng, space)
        e = LorentzExponents(1.5, 2.5)   # p < q: the guaranteed window
        decomp = run_instance(oracle, f, wgt, e)
        scale_est = max(wgt.l1c_estimate.hi, wt.WEIGHT_FLOOR)
        normalized = wgt.values / scale_est
        denom = lorentz_norm(
            Field(space, f.values * normalized ** (-1.0 / e.q_conj)), e)
        if denom > 0:
            sum_ratios.append(decomp.sum_lambda / denom)
        rep = wt.level_sum_check(wgt.field, oracle, l1c_levels=cfg.l1c_levels)
        slack = 1.0 + 50.0 * max(oracle.params.tol, 1e-12)
        level_ratios.append(rep.ratio)
        if rep.ratio > 4.0 * slack:
            failures.append(f"level sum {rep.ratio:.3f}")

    # grid instance
    g1 = ctx.grid_oracle(1)
    grid = g1.space
    wgt = wt.potential_weight(g1, _interval_mask(grid, 0.0, 1.0), wcfg)
    f = Field(grid, np.round(_bump_field(grid, 1.0, 0.7).values * 4.0) / 4.0)
    decomp = run_instance(g1, f, wgt, LorentzExponents(1.5, 2.5))
    rep = wt.level_sum_check(wgt.field, g1, l1c_levels=cfg.l1c_levels)
    level_ratios.append(rep.ratio)
    if rep.ratio > 4.0 * (1.0 + 50.0 * cfg.tol):
        failures.append(f"grid level sum {rep.ratio:.3f}")

    # greedy route: a tight block in the dictionary peels in one step
    space = DiscreteMeasureSpace(np.ones(8))
    oracle = CapacityOracle(identity_problem(space),
                               CapacityParams(1.0, 2.0, tol=cfg.tol))
    e = LorentzExponents(2.0, 2.0)
    support = SetMask.from_indices(space, [1, 2, 3])
    b = np.zeros(8)
    b[1:4] = 1.0
    bf = Field(space, b)
    tight = Field(space, b / (oracle.value(support) ** (1.0 / e.q_conj)
                              * lorentz_norm(bf, e)))
    dictionary = mn.TestSetFamily.explicit([support, SetMask.full(space)])
    gdec = bl.block_norm_upper_greedy(tight, e, dictionary, oracle)
    if gdec.sum_lambda > 1.0 + 1e-9:
        failures.append("greedy tight block")

    # solidity transport
    f = _random_field(rng, space)
    decomp_f = bl.block_norm_upper_greedy(
        f, e, mn.TestSetFamily.all_subsets(), oracle)
    damp = rng.uniform(0.0, 1.0, space.size)
    g = Field(space, f.values * damp)
    moved = bl.transport_decomposition(decomp_f, g, oracle)
    if moved.sum_lambda > decomp_f.sum_lambda * (1.0 + 1e-12):
        failures.append("transport coefficients")

    status = "fail" if failures else "pass"
    return [
        Verdict(cid, status, worst_norm_dev, "block-decomposition-constructive",
                "; ".join(sorted(set(failures))) or
                "tight blocks, exact reconstruction"),
        Verdict(cid + "/definitions", status, worst_resid,
                "block-space-definitions",
                "support and normalization validated per block"),
        Verdict(cid + "/sum-ratio", "recorded",
                max(sum_ratios) if sum_ratios else 0.0, "block-decomposition-constructive",
                "sum|lambda| / weighted norm, p < q corpus"),
        Verdict(cid + "/level-sum", status,
                max(level_ratios) if level_ratios else 0.0, "level-sum-bound",
                "dyadic level sum <= 4x the layer-cake norm"),
        Verdict(cid + "/solidity", status, 0.0, "block-solidity",
                "transported decompositions keep coefficients"),
    ]


def check_weight_characterization(ctx: RunContext) -> List[Verdict]:
    cid = "C11-weight-characterization"
    cfg = ctx.cfg
    failures = []
    worst_margin = math.inf
    ratios = {}
    wcfg = wt.WeightConfig(delta=cfg.delta, slack=cfg.slack,
                           l1c_levels=cfg.l1c_levels)
    g1 = ctx.grid_oracle(1)
    grid = g1.space
    weight_cache = {}

    def cached_weight(mask):
        hit = weight_cache.get(mask.key)
        if hit is None:
            hit = wt.potential_weight(g1, mask, wcfg)
            weight_cache[mask.key] = hit
        return hit

    ratios_back = {}
    for tag in ("a", "b"):
        rng = ctx.rng(f"c11-{tag}")
        masks = _grid_set_corpus(rng, grid, 3)
        f = _bump_field(grid, rng.uniform(-1.5, 1.5), rng.uniform(0.5, 1.2))
        for (p, q) in ((2.0, 2.0), (3.0, 2.0)):
            rep = mn.char_m_via_weights(f, LorentzExponents(p, q), masks, g1,
                                        wcfg, weight_for=cached_weight)
            worst_margin = min(worst_margin, rep.per_set_margin)
            if rep.per_set_margin < -1e-9 * max(rep.sets_form, 1.0):
                failures.append(f"margin (p,q)=({p},{q})")
            ratios.setdefault((p, q), []).append(rep.ratio_ws)
            ratios_back.setdefault((p, q), []).append(rep.ratio_sw)
    for key, pair in ratios.items():
        r = pair[0] / pair[1] if pair[1] > 0 else math.inf
        if not (0.5 <= r <= 2.0):
            failures.append(f"seed stability {key}")

    # averaging keeps the sublinearity bound on the local-A1 constant
    rng = ctx.rng("c11-avg")
    avg_fail = 0
    for _ in range(6):
        m1 = _grid_set_corpus(rng, grid, 1)[0]
        m2 = _grid_set_corpus(rng, grid, 1)[0]
        w1 = cached_weight(m1)
        w2 = cached_weight(m2)
        lam = float(rng.uniform(0.2, 0.8))
        mixed = wt.average_weights([(lam, w1), (1.0 - lam, w2)], g1, wcfg)
        if mixed.a1_constant > max(w1.a1_constant, w2.a1_constant) + 1e-10:
            avg_fail += 1
    if avg_fail:
        failures.append("averaging constant")
    status = "fail" if failures else "pass"
    sup_ratio = max(max(v) for v in ratios.values())
    return [
        Verdict(cid, status, worst_margin, "weight-characterization",
                "; ".join(sorted(set(failures))) or
                "per-set potential-weight lower bound, banded"),
        Verdict(cid + "/forms-ratio", "recorded", sup_ratio,
                "weight-characterization",
                "two-sided: w/s max "
                f"{sup_ratio:.4f}, s/w max "
                f"{max(max(v) for v in ratios_back.values()):.4f}"),
        Verdict(cid + "/averaging", "pass" if not avg_fail else "fail",
                float(avg_fail), "weight-averaging",
                "a1 of convex averages below the max of the parts"),
    ]


def check_trace_formula(ctx: RunContext) -> List[Verdict]:
    cid = "C12-trace-formula"
    cfg = ctx.cfg
    rng = ctx.rng("c12")
    failures = []
    worst = 0.0
    for i in range(cfg.scale_trace):
        if i % 5 == 4:
            m = int(rng.integers(3, 8))
            problem = _random_finite_problem(rng, m)
        else:
            m = int(rng.integers(2, 13))
            problem = identity_problem(
                DiscreteMeasureSpace(rng.random(m) + 0.2))
        oracle = CapacityOracle(problem, CapacityParams(1.0, 2.0, tol=cfg.tol))
        masses = rng.standard_normal(problem.space.size) * 3.0
        mu = bl.AtomicMeasure(problem.space, masses)
        sup_form = bl.trace_norm(mu, mn.TestSetFamily.all_subsets(), oracle)
        inf_form = bl.trace_norm_inf_form(mu, oracle)
        gap_slack = 10.0 * sup_form.max_gap * max(sup_form.value, 1.0)
        dev = abs(sup_form.value - inf_form)
        worst = max(worst, dev)
        if dev > 1e-9 * max(sup_form.value, 1.0) + gap_slack:
            failures.append(f"dev {dev:.2e}")
    status = "fail" if failures else "pass"
    return [
        Verdict(cid, status, worst, "trace-threshold-equality",
                "; ".join(failures[:3]) or
                f"{cfg.scale_trace} measures, sup form vs threshold form"),
        Verdict(cid + "/class", status, worst, "trace-class",
                "total-variation-to-capacity suprema"),
    ]


def check_kothe_oracle(ctx: RunContext) -> List[Verdict]:
    cid = "C13-kothe-oracle"
    cfg = ctx.cfg
    failures = []
    worst = 0.0
    ratio_stats = []
    for tag in ("a", "b"):
        rng = ctx.rng(f"c13-{tag}")
        ratios = []
        for i in range(max(cfg.scale_kothe // 2, 2)):
            m = int(rng.integers(2, 7))
            space = DiscreteMeasureSpace(rng.random(m) + 0.2)
            f = _random_field(rng, space)
            if float(np.abs(f.values).max()) == 0.0:
                continue
            p = (2.0, 3.0)[i % 2]
            e = LorentzExponents(p, p)
            dual = bl.kothe_dual_norm_bruteforce(
                f, bl.lorentz_norm_batch(space, LorentzExponents(
                    e.p_conj, e.p_conj)), seed=int(rng.integers(2**31)))
            target = lorentz_norm(f, e)
            dev = abs(dual.value - target) / max(target, 1e-300)
            worst = max(worst, dev)
            if dev > 1e-6:
                failures.append(f"sharpness {dev:.2e}")
            # p != q: two-sided comparison constants are recorded
            pq = LorentzExponents(2.5, 1.5)
            dual2 = bl.kothe_dual_norm_bruteforce(
                f, bl.lorentz_norm_batch(space, LorentzExponents(
                    pq.p_conj, pq.q_conj)), seed=int(rng.integers(2**31)))
            base = lorentz_norm(f, pq)
            if base > 0:
                ratios.append(dual2.value / base)
        if not ratios:
            ratios = [1.0]
        ratio_stats.append((min(ratios), max(ratios)))
    (lo_a, hi_a), (lo_b, hi_b) = ratio_stats
    if not (0.5 <= hi_a / hi_b <= 2.0) or not (0.5 <= lo_a / lo_b <= 2.0):
        failures.append("ratio stability")
    status = "fail" if failures else "pass"
    return [
        Verdict(cid, status, worst, "kothe-duality",
                "; ".join(failures[:3]) or
                "p=q sharpness 1e-6; p!=q constants recorded"),
        Verdict(cid + "/ratio-band", "recorded", hi_a, "kothe-duality",
                f"p!=q two-sided band [{min(lo_a, lo_b):.4f}, {max(hi_a, hi_b):.4f}]"),
    ]


def check_maximal(ctx: RunContext) -> List[Verdict]:
    cid = "C14-maximal-probes"
    cfg = ctx.cfg
    failures = []
    g1 = ctx.grid_oracle(1)
    grid = g1.space
    rng = ctx.rng("c14")

    # constants are fixed exactly; averages never exceed the sup
    for c in (0.7, 1.0, 3.5):
        out = wt.local_maximal(grid, Field(grid, np.full(grid.size, c)))
        if np.abs(out.values - c).max() > 1e-12:
            failures.append("constant not fixed")
    for _ in range(20):
        f = _random_field(rng, grid)
        mf = wt.local_maximal(grid, f)
        if mf.values.max() > np.abs(f.values).max() * (1.0 + 1e-12) + 1e-15:
            failures.append("sup bound")
        g = _random_field(rng, grid)
        both = wt.local_maximal(grid, Field(grid, f.values + g.values))
        apart = wt.local_maximal(grid, f).values + wt.local_maximal(grid, g).values
        if np.any(both.values > apart + 1e-12):
            failures.append("sublinearity")

    if abs(wt.a1loc_constant(grid, Field(grid, np.ones(grid.size))) - 1.0) > 1e-12:
        failures.append("a1 of constant")

    # local-A1 calibration over potential weights
    wcfg = wt.WeightConfig(delta=cfg.delta, slack=cfg.slack,
                           l1c_levels=cfg.l1c_levels)
    cands = [wt.potential_weight(g1, m, wcfg)
             for m in _grid_set_corpus(ctx.rng("c14-weights"), grid, 3)]
    a1_max = max(w.a1_constant for w in cands)
    ctx.calibration["a1_corpus_max"] = a1_max

    e = LorentzExponents(2.0, 2.0)
    probe_max = {}
    for tag in ("a", "b"):
        rngc = ctx.rng(f"c14-{tag}")
        corpus = [Field(grid, np.abs(_bump_field(
            grid, rngc.uniform(-1.5, 1.5), rngc.uniform(0.4, 1.2),
            rngc.uniform(0.5, 2.0)).values))
            for _ in range(3)]

        def m_est(f):
            return mn.m_norm(f, e, mn.default_grid_family(f), g1)

        def n_est(f):
            return wt.n_norm_upper(f, e, cands, a1_cap=a1_max * cfg.slack,
                                   refine=False)

        rep = wt.maximal_boundedness_probe(grid, corpus, m_est, n_est)
        if not (math.isfinite(rep.m_max) and math.isfinite(rep.n_max)):
            failures.append("probe infinite")
        probe_max[tag] = rep
    stab = probe_max["a"].m_max / probe_max["b"].m_max \
        if probe_max["b"].m_max > 0 else math.inf
    if not (0.5 <= stab <= 2.0):
        failures.append(f"probe stability {stab:.3f}")

    # sweep the exponent ratio p/q and record where the ratios sit; no
    # window boundary is claimed, only the measured degradation profile
    rngs = ctx.rng("c14-sweep")
    sweep_corpus = [Field(grid, np.abs(_bump_field(
        grid, rngs.uniform(-1.5, 1.5), rngs.uniform(0.4, 1.2)).values))
        for _ in range(2)]
    sweep = {}
    for p_over_q in (1.0, 1.25, 1.5):
        es = LorentzExponents(2.0 * p_over_q, 2.0)
        rep = wt.maximal_boundedness_probe(
            grid, sweep_corpus,
            lambda f, es=es: mn.m_norm(f, es, mn.default_grid_family(f), g1))
        sweep[p_over_q] = rep.m_max
        if not math.isfinite(rep.m_max):
            failures.append(f"sweep p/q={p_over_q}")
    status = "fail" if failures else "pass"
    return [
        Verdict(cid, status, probe_max["a"].m_max, "maximal-boundedness-probe",
                "; ".join(sorted(set(failures))) or
                "multiplier-estimate ratios under the maximal operator"),
        Verdict(cid + "/window-sweep", "recorded", max(sweep.values()),
                "maximal-boundedness-probe",
                "ratios at p/q in {1, 1.25, 1.5}: " +
                ", ".join(f"{k}:{v:.4f}" for k, v in sweep.items())),
        Verdict(cid + "/operator", status, 0.0, "local-maximal-operator",
                "constants fixed, sup bound, sublinearity"),
        Verdict(cid + "/a1-calibration", "recorded", a1_max, "a1loc-class",
                "corpus maximum of potential-weight constants"),
        Verdict(cid + "/n-upper", status, probe_max["a"].n_max,
                "n-space-definition",
                "weighted-infimum upper bounds under the maximal operator"),
    ]


def check_multiplier_invariants(ctx: RunContext) -> List[Verdict]:
    cid = "C16-multiplier-invariants"
    cfg = ctx.cfg
    rng = ctx.rng("c16")
    failures = []
    space = DiscreteMeasureSpace(rng.random(6) + 0.3)
    oracle = CapacityOracle(identity_problem(space),
                               CapacityParams(1.0, 2.0, tol=cfg.tol))
    allfam = mn.TestSetFamily.all_subsets()

    # counting model: the sup of mass ratios for an indicator is one
    A = SetMask.from_indices(space, [0, 2])
    chiA = Field(space, A.bools.astype(float))
    est = mn.m_norm(chiA, LorentzExponents(2.0, 2.0), allfam, oracle)
    if abs(est.value - 1.0) > 1e-12 or not est.witness.issubset(A):
        failures.append("counting exactness")
    if est.mode != "exact":
        failures.append("exactness tag")

    # p = q: both multiplier norms coincide
    f = _random_field(rng, space)
    e = LorentzExponents(2.0, 2.0)
    if abs(mn.m_norm(f, e, allfam, oracle).value -
           mn.script_m_norm(f, e, allfam, oracle).value) > 1e-15:
        failures.append("p=q coincidence")

    # weak two-form identity (raises internally on disagreement)
    mn.weak_script_m_norm(f, 2.0, allfam, oracle)

    # all-subsets dominates any family; families are monotone
    sub = mn.TestSetFamily.random_unions(6, seed=cfg.master_seed)
    est_sub = mn.m_norm(f, e, sub, oracle)
    if est_sub.value > mn.m_norm(f, e, allfam, oracle).value * (1 + 1e-15):
        failures.append("all-subsets domination")
    bigger = sub + mn.TestSetFamily.superlevels()
    if mn.m_norm(f, e, bigger, oracle).value < est_sub.value * (1 - 1e-15):
        failures.append("family monotonicity")

    # bounded fields: per-set domination by the sup norm
    for mask in allfam.sets(space):
        lhs = lorentz_norm(f.restrict(mask), e)
        rhs = (e.p / e.q) ** (1.0 / e.q) * np.abs(f.values).max() * \
            mask.measure ** (1.0 / e.p)
        if lhs > rhs * (1 + 1e-12):
            failures.append("sup-norm domination")
            break

    # embedding across secondary exponents: ratios below the explicit
    # constant (r/p)^(1/r - 1/q) from the weak bound on t^(1/p) f*(t),
    # with the corpus maximum recorded and seed-stable
    emb = {}
    pe, re_, qe = 2.0, 1.0, 2.5
    emb_cap = (re_ / pe) ** (1.0 / re_ - 1.0 / qe)
    for tag in ("a", "b"):
        rnge = ctx.rng(f"c16-emb-{tag}")
        hi = 0.0
        for _ in range(cfg.scale_fields):
            m = int(rnge.integers(2, 33))
            sp = DiscreteMeasureSpace(rnge.random(m) + 0.2)
            ff = _random_field(rnge, sp)
            a = lorentz_norm(ff, LorentzExponents(pe, qe))
            b = lorentz_norm(ff, LorentzExponents(pe, re_))
            if b > 0:
                hi = max(hi, a / b)
        emb[tag] = hi
        if hi > emb_cap * (1 + 1e-12):
            failures.append(f"embedding constant exceeded ({hi:.6f})")
    if not (0.5 <= emb["a"] / emb["b"] <= 2.0):
        failures.append("embedding stability")

    # quasi-triangle constant, measured
    kappa = 0.0
    rngk = ctx.rng("c16-kappa")
    for _ in range(cfg.scale_fields):
        m = int(rngk.integers(2, 17))
        sp = DiscreteMeasureSpace(rngk.random(m) + 0.2)
        f1, f2 = _random_field(rngk, sp), _random_field(rngk, sp)
        p, q = (2.0, 0.5) if rngk.random() < 0.5 else (2.0, 2.0)
        e2 = LorentzExponents(p, q)
        s12 = lorentz_norm(Field(sp, f1.values + f2.values), e2)
        denom = lorentz_norm(f1, e2) + lorentz_norm(f2, e2)
        if denom > 0:
            kappa = max(kappa, s12 / denom)
    ctx.calibration["quasi_triangle_kappa"] = kappa

    # monotone limits commute with the closed form
    fpos = Field(space, np.abs(_random_field(rng, space).values))
    cuts = np.linspace(0.2, 1.0, 6) * fpos.values.max()
    norms = [lorentz_norm(Field(space, np.minimum(fpos.values, c)), e)
             for c in cuts] + [lorentz_norm(fpos, e)]
    if np.any(np.diff(norms) < -1e-12) or abs(norms[-2] - norms[-1]) > 1e-12:
        failures.append("monotone convergence")

    # r-convexity transfers from the norm level to the estimates
    rconv_fail = 0
    rngr = ctx.rng("c16-rconv")
    p, q, r = 2.5, 2.0, 1.5
    er = LorentzExponents(p, q)
    kap_r = 1.0
    tuples = []
    for _ in range(cfg.scale_tuples):
        fs = [_random_field(rngr, space) for _ in range(3)]
        tuples.append(fs)
        for mask in allfam.sets(space):
            parts = [Field(space, np.abs(g.values) ** r).restrict(mask)
                     for g in fs]
            mix = Field(space, sum(p_.values for p_ in parts))
            e_low = LorentzExponents(p / r, q / r)
            denom = sum(lorentz_norm(p_, e_low) for p_ in parts)
            if denom > 0:
                kap_r = max(kap_r, lorentz_norm(mix, e_low) / denom)
    kappa_est = kap_r ** (1.0 / r) * (1.0 + 1e-9)
    for fs in tuples:
        mix = Field(space, (sum(np.abs(g.values) ** r for g in fs)) ** (1.0 / r))
        lhs = mn.m_norm(mix, er, allfam, oracle).value
        rhs = kappa_est * sum(mn.m_norm(g, er, allfam, oracle).value ** r
                              for g in fs) ** (1.0 / r)
        if lhs > rhs * (1 + 1e-12):
            rconv_fail += 1
    if rconv_fail:
        failures.append(f"r-convexity ({rconv_fail})")

    status = "fail" if failures else "pass"
    return [
        Verdict(cid, status, float(len(failures)), "multiplier-norm-definitions",
                "; ".join(sorted(set(failures))) or "finite-model estimator laws"),
        Verdict(cid + "/script", status, 0.0, "script-multiplier-coincidence",
                "p=q collapse of the two capacity exponents"),
        Verdict(cid + "/weak-identity", status, 0.0, "weak-multiplier-identity",
                "breakpoint form equals per-set weak form"),
        Verdict(cid + "/norm-switching", status, 0.0, "norm-switching-suprema",
                "all-subsets supremum dominates every family"),
        Verdict(cid + "/linf", status, 0.0, "linf-embedding",
                "per-set sup-norm domination"),
        Verdict(cid + "/embedding", status, max(emb.values()),
                "lorentz-embedding-r-le-q",
                f"norm ratio maxima vs constant {emb_cap:.6f}"),
        Verdict(cid + "/kappa", "recorded", kappa, "quasi-norm-axioms",
                "measured quasi-triangle constant"),
        Verdict(cid + "/fatou", status, 0.0, "fatou-monotone",
                "norms of increasing truncations converge upward"),
        Verdict(cid + "/r-convex", status, float(rconv_fail), "r-convexity",
                f"{cfg.scale_tuples} tuples with measured kappa"),
    ]


def check_localization_diam1(ctx: RunContext) -> List[Verdict]:
    cid = "C17-diam1-localization"
    cfg = ctx.cfg
    rng = ctx.rng("c17")
    g1 = ctx.grid_oracle(1)
    grid = g1.space
    failures = []
    ratios = []
    e = LorentzExponents(2.0, 2.0)
    # a field inside one cover tile localizes with ratio one (up to gaps)
    x = grid.coords()[:, 0]
    f_in = _bump_field(grid, 0.5, 0.08)
    vals = np.where(np.abs(x - 0.5) <= 0.4, f_in.values, 0.0)
    rep = mn.m_norm_local(Field(grid, vals), e, g1)
    if rep.local.value > rep.global_.value * (1 + 1e-12):
        failures.append("local exceeds global")
    if not (1.0 - 1e-9 <= rep.ratio <= 1.0 + 1e-3):
        failures.append(f"single-tile ratio {rep.ratio:.6f}")
    for _ in range(cfg.scale_grid_sets):
        f = Field(grid, _bump_field(grid, rng.uniform(-3, 0), 0.5).values +
                  _bump_field(grid, rng.uniform(1, 3), 0.4).values)
        rep = mn.m_norm_local(f, e, g1)
        if rep.local.value > rep.global_.value * (1 + 1e-12):
            failures.append("local exceeds global")
        if not math.isfinite(rep.ratio):
            failures.append("ratio infinite")
        ratios.append(rep.ratio)
    status = "fail" if failures else "pass"
    return [Verdict(cid, status, max(ratios) if ratios else 1.0,
                    "diam1-localization",
                    "; ".join(sorted(set(failures))) or
                    "unit-diameter suprema against unrestricted ones")]


def check_kernel_diagnostics(ctx: RunContext) -> List[Verdict]:
    cid = "C18-kernel-diagnostics"
    cfg = ctx.cfg
    failures = []
    from scipy.integrate import quad as _quad
    grids = [(1, cfg.grid_L, cfg.grid_N, cfg.alpha),
             (1, cfg.grid_L, cfg.grid_N, 1.0),
             (2, cfg.grid2_L, cfg.grid2_N, 1.0)]
    for n, L, N, alpha in grids:
        grid = make_grid(n, L, N)
        spec = bessel_kernel(grid, alpha)
        mass = spec.kernel.sum() * grid.cell_measure
        if abs(mass - 1.0) > 1e-10:
            failures.append("mass")
        ker = spec.kernel.reshape(grid.shape)
        if n == 1:
            flipped = np.roll(ker[::-1], 1)
        else:
            flipped = np.roll(ker[::-1, ::-1], (1, 1), axis=(0, 1))
        if np.abs(ker - flipped).max() > 1e-15 * np.abs(ker).max():
            failures.append("evenness")

    # a too-coarse plane grid must be rejected with a clipped-mass diagnostic
    try:
        bessel_kernel(make_grid(2, 12.0, 64), 1.0)
        failures.append("coarse grid accepted")
    except ValueError:
        pass

    # direct band-limited inverse-transform quadrature at two probe points
    grid = make_grid(1, cfg.grid_L, cfg.grid_N)
    spec = bessel_kernel(grid, 1.0)
    band = math.pi / grid.h
    worst_quad = 0.0
    for x in (0.0, 1.0):
        ref, _ = _quad(lambda xi: (1 + xi ** 2) ** (-0.5) * math.cos(xi * x)
                       / math.pi, 0.0, band, limit=400)
        j = int(round(x / grid.h))
        dev = abs(spec.kernel[j] - ref) / abs(ref)
        worst_quad = max(worst_quad, dev)
        if dev > 1e-4:
            failures.append(f"quadrature x={x}")

    # pairing symmetry and monotonicity of the convolution
    rng = ctx.rng("c18")
    f = _random_field(rng, grid)
    g = _random_field(rng, grid)
    lhs = pairing(convolve(grid, spec, f), g)
    rhs = pairing(f, convolve(grid, spec, g))
    scale = max(abs(lhs), abs(rhs), 1.0)
    if abs(lhs - rhs) > 1e-10 * scale:
        failures.append("pairing symmetry")
    a = Field(grid, np.abs(f.values))
    b = Field(grid, np.abs(f.values) + np.abs(g.values))
    if np.any(convolve(grid, spec, a).values >
              convolve(grid, spec, b).values + 1e-12):
        failures.append("monotonicity")
    ones = Field(grid, np.ones(grid.size))
    if np.abs(convolve(grid, spec, ones).values - 1.0).max() > 1e-10:
        failures.append("unit response")

    # refinement stability of smoothed indicators at fixed probes
    fine = make_grid(1, cfg.grid_L, cfg.grid_N * 2)
    spec_f = bessel_kernel(fine, 1.0)
    mask_c = _interval_mask(grid, 0.0, 1.0)
    mask_f = _refine_mask(grid, fine, mask_c)
    conv_c = convolve(grid, spec, Field(grid, mask_c.bools.astype(float)))
    conv_f = convolve(fine, spec_f, Field(fine, mask_f.bools.astype(float)))
    drift = 0.0
    for x in (0.0, 0.5, 2.0):
        jc = int((x + grid.L / 2) / grid.h)
        jf = int((x + fine.L / 2) / fine.h)
        c0, f0 = conv_c.values[jc], conv_f.values[jf]
        drift = max(drift, abs(c0 - f0) / max(abs(c0), 1e-300))
    if drift > 0.05:
        failures.append(f"refinement drift {drift:.3f}")

    status = "fail" if failures else "pass"
    return [
        Verdict(cid, status, worst_quad, "bessel-kernel-spectral",
                "; ".join(sorted(set(failures))) or
                "mass, evenness, quadrature oracle, clip rejection"),
        Verdict(cid + "/symmetry", status, drift, "convolution-pairing-symmetry",
                "self-adjoint pairing and refinement drift"),
    ]


def check_determinism(ctx: RunContext) -> List[Verdict]:
    cid = "C15-determinism"
    cfg = ctx.cfg.quick()
    spec = SuiteSpec("determinism-core", cfg)
    first = _render_csv(run_suite(spec))
    second = _render_csv(run_suite(spec))
    ok = first == second
    return [Verdict(cid, "pass" if ok else "fail", float(len(first)),
                    "artifact-determinism",
                    "bytewise-identical verdict CSV across two runs")]


# ---------------------------------------------------------------------------
# Registry, suites, runner
# ---------------------------------------------------------------------------

REQUIRED_CLAIMS = [
    "a1loc-class",
    "artifact-determinism",
    "bessel-kernel-spectral",
    "block-decomposition-constructive",
    "block-solidity",
    "block-space-definitions",
    "capacitary-embedding-constants",
    "capacitary-lorentz-spaces",
    "capacity-definition",
    "capacity-duality-certificate",
    "capacity-set-function-axioms",
    "convolution-pairing-symmetry",
    "diam1-localization",
    "equilibrium-identities",
    "fatou-monotone",
    "gamma-normability",
    "kothe-duality",
    "l1c-norm",
    "level-sum-bound",
    "linf-embedding",
    "local-maximal-operator",
    "lorentz-embedding-r-le-q",
    "lorentz-norm-definition",
    "maximal-boundedness-probe",
    "multiplier-norm-definitions",
    "n-space-definition",
    "nonlinear-potential",
    "norm-switching-suprema",
    "pairing-direction-n",
    "pairing-direction-weak",
    "pairing-estimate",
    "power-identity",
    "quasi-norm-axioms",
    "r-convexity",
    "script-multiplier-coincidence",
    "sobolev-lower-bounds",
    "strichartz-localization",
    "trace-class",
    "trace-threshold-equality",
    "weak-multiplier-identity",
    "weight-averaging",
    "weight-characterization",
]

CHECKS: List = [
    ("C01-capacity-certificates",
     ("capacity-definition", "capacity-duality-certificate"),
     check_capacity_certificates),
    ("C02-equilibrium-identities",
     ("equilibrium-identities", "nonlinear-potential"), check_equilibrium),
    ("C03-monotone-subadditive",
     ("capacity-set-function-axioms",), check_set_function_axioms),
    ("C04-lorentz-engine",
     ("lorentz-norm-definition", "power-identity"), check_lorentz_engine),
    ("C05-gamma-sandwich", ("gamma-normability",), check_gamma_sandwich),
    ("C06-capacitary-embeddings",
     ("capacitary-embedding-constants", "capacitary-lorentz-spaces",
      "l1c-norm"), check_capacitary_embeddings),
    ("C07-strichartz-localization",
     ("strichartz-localization",), check_strichartz),
    ("C08-sobolev-lower-bounds", ("sobolev-lower-bounds",), check_sobolev_bounds),
    ("C09-pairing-inequalities",
     ("pairing-estimate", "pairing-direction-weak", "pairing-direction-n"),
     check_pairing),
    ("C10-block-decomposition",
     ("block-decomposition-constructive", "block-space-definitions",
      "level-sum-bound", "block-solidity"), check_block_decomposition),
    ("C11-weight-characterization",
     ("weight-characterization", "weight-averaging"),
     check_weight_characterization),
    ("C12-trace-formula",
     ("trace-threshold-equality", "trace-class"), check_trace_formula),
    ("C13-kothe-oracle", ("kothe-duality",), check_kothe_oracle),
    ("C14-maximal-probes",
     ("maximal-boundedness-probe", "local-maximal-operator", "a1loc-class",
      "n-space-definition"), check_maximal),
    ("C15-determinism", ("artifact-determinism",), check_determinism),
    ("C16-multiplier-invariants",
     ("multiplier-norm-definitions", "script-multiplier-coincidence",
      "weak-multiplier-identity", "norm-switching-suprema", "linf-embedding",
      "lorentz-embedding-r-le-q", "quasi-norm-axioms", "fatou-monotone",
      "r-convexity"), check_multiplier_invariants),
    ("C17-diam1-localization", ("diam1-localization",), check_localization_diam1),
    ("C18-kernel-diagnostics",
     ("bessel-kernel-spectral", "convolution-pairing-symmetry"),
     check_kernel_diagnostics),
]

SUITES: Dict[str, List[str]] = {
    "all": [cid for cid, _claims, _fn in CHECKS],
    "lorentz-core": ["C04-lorentz-engine", "C05-gamma-sandwich",
                     "C16-multiplier-invariants"],
    "capacity": ["C01-capacity-certificates", "C02-equilibrium-identities",
                 "C03-monotone-subadditive", "C18-kernel-diagnostics"],
    "localization": ["C07-strichartz-localization", "C08-sobolev-lower-bounds",
                     "C17-diam1-localization"],
    "weights": ["C11-weight-characterization", "C14-maximal-probes"],
    "blocks-duality": ["C09-pairing-inequalities", "C10-block-decomposition",
                       "C12-trace-formula", "C13-kothe-oracle"],
    "determinism-core": ["C01-capacity-certificates", "C04-lorentz-engine",
                         "C05-gamma-sandwich", "C13-kothe-oracle"],
    "determinism": ["C15-determinism"],
}


def _audit_verdict() -> Verdict:
    covered = set()
    for _cid, claims, _fn in CHECKS:
        covered.update(claims)
    missing = sorted(set(REQUIRED_CLAIMS) - covered)
    if missing:
        return Verdict("C00-coverage-audit", "fail", float(len(missing)),
                       "artifact-determinism", "missing: " + ", ".join(missing))
    return Verdict("C00-coverage-audit", "pass", float(len(REQUIRED_CLAIMS)),
                   "artifact-determinism",
                   "every registered claim has at least one check")


def run_suite(spec: SuiteSpec) -> List[Verdict]:
    """Execute the named campaign deterministically; verdict order is fixed
    by check id.  Missing suite names raise."""
    if spec.suite not in SUITES:
        raise ValueError(f"unknown suite {spec.suite!r}; "
                         f"choose from {sorted(SUITES)}")
    wanted = SUITES[spec.suite]
    if not wanted:
        raise ValueError("empty suite")
    ctx = RunContext(spec.config)
    verdicts: List[Verdict] = [_audit_verdict()]
    verdicts.append(Verdict("C00-seeds", "recorded",
                            float(spec.config.master_seed),
                            "artifact-determinism", "master seed"))
    for cid, _claims, fn in CHECKS:
        if cid in wanted:
            verdicts.extend(fn(ctx))
    verdicts.sort(key=lambda v: v.check_id)
    return verdicts


def _render_csv(verdicts: List[Verdict]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["check_id", "status", "measured", "claim", "details"])
    for v in verdicts:
        writer.writerow([v.check_id, v.status, _fmt(v.measured), v.claim,
                         v.details])
    return buf.getvalue().encode()


def emit_report(verdicts: List[Verdict], fmt: str, path,
                spec: Optional[SuiteSpec] = None,
                calibration: Optional[Dict] = None) -> None:
    """Write the verdict table; field order is stable and reruns with the
    same config and seeds are byte-identical."""
    if fmt == "csv":
        Path(path).write_bytes(_render_csv(verdicts))
        return
    if fmt != "json":
        raise ValueError(f"unknown report format {fmt!r}")
    doc = {
        "suite": spec.suite if spec else None,
        "config": spec.config.to_dict() if spec else None,
        "calibration": calibration or {},
        "verdicts": [
            {"check_id": v.check_id, "status": v.status,
             "measured": _fmt(v.measured), "claim": v.claim,
             "details": v.details}
            for v in verdicts
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def any_failures(verdicts: List[Verdict]) -> bool:
    return any(v.status == "fail" for v in verdicts)
