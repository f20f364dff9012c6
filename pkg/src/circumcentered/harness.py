"""Theorem registry, randomized campaigns and classical baselines.

Every registered theorem is a trial function `trial(rng, n, stratum)` that
draws one hypothesis-satisfying instance, runs the method and returns a
`TrialResult`. Trial i of a campaign uses its own generator seeded by
(seed, crc32(theorem id), i), so results do not depend on worker count.
"""

from __future__ import annotations

import json
import time
import zlib
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import generators as gen
from . import geometry as geo
from .ccmap import (
    IterationTrace,
    OperatorFamily,
    cc_map,
    iterate_map,
    one_step_pair_check,
    oracle_pair_target,
    prox_crm_formula,
    prox_crm_step,
    properness_cone_check,
    reflector,
    separating_target,
)
from .circumcenter import POINT, CircumcenterOutcome
from .errors import EmptySet, HypothesisViolated, PreconditionViolated, SamplerFailed, UnknownTheorem
from .geometry import AffineSubspace, ConvexSet, Halfspace, Hyperplane
from .halfspace_analysis import (
    COMPOSED,
    DIRECT,
    crm_feasibility_pair,
    crm_hyperplane_pair,
    explain_mixed,
    explain_pair,
    feasibility_index,
    map_subsequence_gap,
    mixed_family,
    pair_family,
)
from .oracles import (
    is_generic_composed,
    is_generic_plain,
    oracle_proj_affine_intersection,
    oracle_proj_polyhedron,
    perturb_composed,
    perturb_plain,
    sample_equidistance_cone,
)
from .tolerances import MAX_ITER, STOP_TOL, TOL_NUM

PASS = "pass"
FAIL = "fail"
BOUNDARY = "boundary"

HYPERPLANE_TOL = 1e-8
Z_SAMPLES = 3


class TrialResult(NamedTuple):
    status: str
    violation: float
    steps: Optional[int] = None
    pythagorean: float = float("nan")
    fejer: float = float("nan")


@dataclass(frozen=True)
class Theorem:
    theorem_id: str
    description: str
    trial: Callable[[np.random.Generator, int, int], TrialResult]
    dims: tuple
    strata: int
    tolerance: float


@dataclass(eq=False)
class CampaignReport:
    theorem_id: str
    trials: int
    passed: int
    failed: int
    boundary: int
    max_violation: float
    tolerance: float
    step_histogram: dict = field(default_factory=dict)
    max_pythagorean: float = 0.0
    max_fejer: float = 0.0
    wall_time: float = 0.0
    children: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        if self.children:
            return all(c.ok and c.trials > 0 for c in self.children)
        return self.failed == 0

    def to_json(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "trials": self.trials,
            "passed": self.passed,
            "failed": self.failed,
            "boundary": self.boundary,
            "max_violation": self.max_violation,
            "tolerance": self.tolerance,
            "step_histogram": {str(k): v for k, v in sorted(self.step_histogram.items())},
            "max_pythagorean": self.max_pythagorean,
            "max_fejer": self.max_fejer,
            "wall_time": self.wall_time,
            "ok": self.ok,
            "children": [c.to_json() for c in self.children],
        }

    def same_results(self, other: "CampaignReport") -> bool:
        """Equality of everything except wall time."""
        a, b = self.to_json(), other.to_json()
        return _without_time(a) == _without_time(b)


def _without_time(d: dict) -> dict:
    d = dict(d)
    d.pop("wall_time", None)
    d["children"] = [_without_time(c) for c in d["children"]]
    return json.loads(json.dumps(d))


# Shared checks ----------------------------------------------------------------

def _rel_dist(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.linalg.norm(p - q)) / max(1.0, float(np.linalg.norm(q)))


def pythagorean_violation(x: np.ndarray, y: np.ndarray, zs: Sequence[np.ndarray]) -> float:
    """max over z of |‖y−z‖² + ‖y−x‖² − ‖x−z‖²| relative to max(1, ‖x−z‖²)."""
    worst = 0.0
    for z in zs:
        lhs = float((y - z) @ (y - z)) + float((y - x) @ (y - x))
        rhs = float((x - z) @ (x - z))
        worst = max(worst, abs(lhs - rhs) / max(1.0, rhs))
    return worst


def fqne_excess(x: np.ndarray, y: np.ndarray, zs: Sequence[np.ndarray]) -> float:
    """How far ‖y−z‖² + ‖y−x‖² ≤ ‖x−z‖² is from holding (0 when it holds)."""
    worst = 0.0
    for z in zs:
        lhs = float((y - z) @ (y - z)) + float((y - x) @ (y - x))
        rhs = float((x - z) @ (x - z))
        worst = max(worst, (lhs - rhs) / max(1.0, rhs))
    return worst


def sample_affine_points(rng: np.random.Generator, hyperplanes: Sequence[Hyperplane], n: int, k: int = Z_SAMPLES):
    """Random points of ∩ H_i (projections of random points)."""
    return [oracle_proj_affine_intersection(hyperplanes, rng.uniform(-5.0, 5.0, n)) for _ in range(k)]


def _trace_identity(trace: IterationTrace, zs) -> float:
    worst = 0.0
    for a, b in zip(trace.iterates, trace.iterates[1:]):
        if np.all(np.isfinite(b)):
            worst = max(worst, pythagorean_violation(a, b, zs))
    return worst


def _require(*checks: bool) -> None:
    """Hypothesis bitmask: every bit must be set before the method runs."""
    if not all(checks):
        bits = "".join("1" if c else "0" for c in checks)
        raise HypothesisViolated(f"generated instance fails its hypotheses (bitmask {bits})")


def _judge(violation: float, tol: float, **extra) -> TrialResult:
    return TrialResult(PASS if violation <= tol else FAIL, violation, **extra)


# Trials -------------------------------------------------------------------------

def trial_s2_three_step(rng, n, stratum) -> TrialResult:
    start = gen.START_KINDS[stratum]
    H1, H2, x = gen.hyperplane_pair_with_start(rng, n, start)
    target = oracle_proj_affine_intersection([H1, H2], x)
    _require(H1.contains(x) == (start in ("on_H1_only", "on_both")), H2.contains(x) == (start in ("on_H2_only", "on_both")))
    trace = crm_hyperplane_pair(H1, H2, x, max_iter=5)
    zs = sample_affine_points(rng, [H1, H2], n)
    k = trace.first_within(target, HYPERPLANE_TOL)
    dist = min(_rel_dist(p, target) for p in trace.iterates[:4] if np.all(np.isfinite(p)))
    fejer = _fejer(trace, zs)
    status = PASS if k is not None and k <= 3 else FAIL
    return TrialResult(status, dist, k, _trace_identity(trace, zs), fejer)


def _fejer(trace: IterationTrace, zs) -> float:
    worst = 0.0
    pts = [p for p in trace.iterates if np.all(np.isfinite(p))]
    for z in zs:
        for a, b in zip(pts, pts[1:]):
            before = float(np.linalg.norm(a - z))
            worst = max(worst, (float(np.linalg.norm(b - z)) - before) / max(1.0, before))
    return worst


def trial_s1_map(rng, n, stratum, K: int = 20) -> TrialResult:
    H1, H2, x = gen.hyperplane_pair_with_start(rng, n, "on_H1_only")
    _require(H1.contains(x), not H2.contains(x))
    gap = map_subsequence_gap(H1, H2, x, K)
    S = OperatorFamily.id_prefixed([reflector(H1), reflector(H2)])
    zs = sample_affine_points(rng, [H1, H2], n)
    out = cc_map(S, x)
    ident = pythagorean_violation(x, out.point, zs) if not out.is_empty else np.inf
    return _judge(gap, TOL_NUM, pythagorean=ident)


def _m_hyperplane_start(rng, hyperplanes, n, composed: bool, adversarial: bool):
    x = rng.uniform(-4.0, 4.0, n)
    if adversarial:
        # put the start exactly on a random nonempty subset of the hyperplanes
        m = len(hyperplanes)
        count = int(rng.integers(1, m + 1))
        chosen = sorted(rng.choice(m, size=count, replace=False).tolist())
        x = oracle_proj_affine_intersection([hyperplanes[i] for i in chosen], x)
    eps = float(rng.uniform(1e-3, 1.0))
    y = (perturb_composed if composed else perturb_plain)(hyperplanes, x, eps)
    return x, y, eps


def _m_hyperplane_one_step(rng, n, stratum, composed: bool) -> TrialResult:
    m = 2 + stratum % 3
    hs = gen.concurrent_hyperplanes(rng, n, m)
    _, y, _ = _m_hyperplane_start(rng, hs, n, composed, adversarial=bool(rng.integers(2)))
    _require((is_generic_composed if composed else is_generic_plain)(hs, y))
    ops = [reflector(H) for H in hs]
    S = OperatorFamily.composed_prefix(ops) if composed else OperatorFamily.id_prefixed(ops)
    target = oracle_proj_affine_intersection(hs, y)
    out = cc_map(S, y)
    if out.is_empty:
        return TrialResult(FAIL, np.inf, None)
    zs = sample_affine_points(rng, hs, n)
    return _judge(_rel_dist(out.point, target), HYPERPLANE_TOL, steps=1,
                  pythagorean=pythagorean_violation(y, out.point, zs),
                  fejer=_fejer_pair(y, out.point, zs))


def _fejer_pair(x, y, zs) -> float:
    return max((float(np.linalg.norm(y - z)) - float(np.linalg.norm(x - z))) / max(1.0, float(np.linalg.norm(x - z))) for z in zs)


def trial_one_step_id_prefixed(rng, n, stratum) -> TrialResult:
    return _m_hyperplane_one_step(rng, n, stratum, composed=False)


def trial_one_step_composed(rng, n, stratum) -> TrialResult:
    return _m_hyperplane_one_step(rng, n, stratum, composed=True)


def trial_one_step_random_start(rng, n, stratum) -> TrialResult:
    """Random starts are generic with probability one; both families."""
    m = 2 + stratum % 3
    composed = stratum >= 3
    hs = gen.concurrent_hyperplanes(rng, n, m)
    x = rng.uniform(-4.0, 4.0, n)
    _require((is_generic_composed if composed else is_generic_plain)(hs, x))
    ops = [reflector(H) for H in hs]
    S = OperatorFamily.composed_prefix(ops) if composed else OperatorFamily.id_prefixed(ops)
    out = cc_map(S, x)
    if out.is_empty:
        return TrialResult(FAIL, np.inf, None)
    target = oracle_proj_affine_intersection(hs, x)
    zs = sample_affine_points(rng, hs, n)
    return _judge(_rel_dist(out.point, target), HYPERPLANE_TOL, steps=1,
                  pythagorean=pythagorean_violation(x, out.point, zs))


def _perturbation(rng, n, stratum, composed: bool) -> TrialResult:
    m = 1 + stratum % 4
    hs = gen.concurrent_hyperplanes(rng, n, m)
    x, y, eps = _m_hyperplane_start(rng, hs, n, composed, adversarial=True)
    generic = (is_generic_composed if composed else is_generic_plain)(hs, y)
    moved = float(np.linalg.norm(y - x))
    shift = float(np.linalg.norm(oracle_proj_affine_intersection(hs, y) - oracle_proj_affine_intersection(hs, x)))
    ok = generic and moved <= eps and shift <= TOL_NUM
    return TrialResult(PASS if ok else FAIL, shift if generic and moved <= eps else np.inf)


def trial_perturb_plain(rng, n, stratum) -> TrialResult:
    return _perturbation(rng, n, stratum, composed=False)


def trial_perturb_composed(rng, n, stratum) -> TrialResult:
    return _perturbation(rng, n, stratum, composed=True)


def _hyperplane_meeting(rng, U: AffineSubspace, n: int) -> Hyperplane:
    p = U.anchor + U.basis.T @ rng.uniform(-2.0, 2.0, U.subspace_dim) if U.subspace_dim else U.anchor
    u = gen.normal_vector(rng, n)
    return Hyperplane(u, float(u @ p))


def trial_hyperplane_affine(rng, n, stratum) -> TrialResult:
    """S = {Id, R_H, R_U R_H} from x ∈ U gives P_{H∩U} x."""
    k = 1 + stratum % (n - 1)
    U = gen.random_affine(rng, n, k)
    H = _hyperplane_meeting(rng, U, n)
    x = geo.proj_affine(U, rng.uniform(-4.0, 4.0, n))
    _require(U.contains(x))
    T1, T2 = reflector(H), reflector(U)
    y = one_step_pair_check(T1, T2, x)
    target = oracle_pair_target(T1, T2, x)
    zs = sample_affine_points(rng, [H] + U.as_hyperplanes(), n)
    return _judge(_rel_dist(y, target), HYPERPLANE_TOL, steps=1, pythagorean=pythagorean_violation(x, y, zs))


def trial_isometry_pair(rng, n, stratum) -> TrialResult:
    """T1 = R_H with T1(Fix T2) ⊆ Fix T2, T2 = R_V; x ∈ Fix T2."""
    k = 1 + stratum % (n - 1)
    V = gen.random_affine(rng, n, k)
    # a normal inside par V makes R_H map V into itself
    u = V.basis.T @ rng.standard_normal(k)
    p = V.anchor + V.basis.T @ rng.uniform(-2.0, 2.0, k)
    H = Hyperplane(u, float(u @ p))
    x = geo.proj_affine(V, rng.uniform(-4.0, 4.0, n))
    probe = V.anchor + V.basis.T @ rng.standard_normal(k)
    _require(V.contains(x), V.contains(geo.reflect(H, probe)), H.degeneracy == geo.PROPER)
    T1, T2 = reflector(H), reflector(V)
    y = one_step_pair_check(T1, T2, x)
    target = oracle_pair_target(T1, T2, x)
    zs = sample_affine_points(rng, [H] + V.as_hyperplanes(), n)
    return _judge(_rel_dist(y, target), HYPERPLANE_TOL, steps=1, pythagorean=pythagorean_violation(x, y, zs))


def _halfspace_trial(rng, n, cells: Sequence[str], stratum: int) -> TrialResult:
    cell = cells[stratum % len(cells)]
    kind = gen.HALFSPACE_CELLS[cell][0]
    W1, W2, x = gen.halfspace_cell_instance(rng, n, cell)
    pred = explain_pair(W1, W2, kind, x)
    _require(pred.case == gen.HALFSPACE_CELLS[cell][2], not pred.boundary)
    actual = cc_map(pair_family(W1, W2, kind), x)
    return _judge(_outcome_gap(pred.outcome, actual), TOL_NUM)


def _outcome_gap(pred: CircumcenterOutcome, actual: CircumcenterOutcome) -> float:
    if pred.is_empty or actual.is_empty:
        return 0.0 if pred.is_empty and actual.is_empty else np.inf
    scale = max(1.0, float(np.linalg.norm(pred.point)), float(np.linalg.norm(actual.point)))
    return float(np.linalg.norm(pred.point - actual.point)) / scale


def _cells(prefix: str, dependent: Optional[bool]) -> tuple:
    out = []
    for name in gen.HALFSPACE_CELLS:
        if not name.startswith(prefix + "/"):
            continue
        tag = name.split("/", 1)[1]
        is_dep = tag.startswith("dependent")
        if dependent is None and tag == "zero_normal" or dependent is not None and is_dep == dependent and tag != "zero_normal":
            out.append(name)
    return tuple(out)


DIRECT_INDEPENDENT = _cells("direct", False)
DIRECT_DEPENDENT = _cells("direct", True) + _cells("direct", None)
COMPOSED_INDEPENDENT = _cells("composed", False)
COMPOSED_DEPENDENT = _cells("composed", True) + _cells("composed", None)
MIXED = tuple(gen.MIXED_CELLS)


def trial_halfspace_direct(rng, n, stratum):
    return _halfspace_trial(rng, n, DIRECT_INDEPENDENT, stratum)


def trial_halfspace_direct_dependent(rng, n, stratum):
    return _halfspace_trial(rng, n, DIRECT_DEPENDENT, stratum)


def trial_halfspace_composed(rng, n, stratum):
    return _halfspace_trial(rng, n, COMPOSED_INDEPENDENT, stratum)


def trial_halfspace_composed_dependent(rng, n, stratum):
    return _halfspace_trial(rng, n, COMPOSED_DEPENDENT, stratum)


def trial_halfspace_feasibility(rng, n, stratum) -> TrialResult:
    """Composed family, independent normals: W1 ∩ W2 is reached within two steps."""
    cell = COMPOSED_INDEPENDENT[stratum % len(COMPOSED_INDEPENDENT)]
    W1, W2, x = gen.halfspace_cell_instance(rng, n, cell)
    trace = crm_feasibility_pair(W1, W2, x, max_iter=4)
    k = feasibility_index(trace, W1, W2)
    return TrialResult(PASS if k is not None and k <= 2 else FAIL, 0.0 if k is not None and k <= 2 else np.inf, k)


def trial_mixed_pair(rng, n, stratum) -> TrialResult:
    cell = MIXED[stratum % len(MIXED)]
    variant, _, want = gen.MIXED_CELLS[cell]
    H1, W2, x = gen.mixed_cell_instance(rng, n, cell)
    pred = explain_mixed(H1, W2, variant, x)
    _require(pred.case == want, not pred.boundary)
    if want == "mixed_dependent":
        # the claim here is P_{H1} x = P_{H1 ∩ W2} x, not a circumcenter value
        actual = CircumcenterOutcome(POINT, oracle_proj_polyhedron([H1, W2], x), 0)
    else:
        actual = cc_map(mixed_family(H1, W2, variant), x)
    return _judge(_outcome_gap(pred.outcome, actual), TOL_NUM)


def trial_prox_crm(rng, n, stratum) -> TrialResult:
    """One CRM step for C ∩ U (C a ball or halfspace) equals P_{H_x ∩ U} x."""
    use_ball, line = bool(stratum & 1), bool(stratum & 2)
    C, U, x = gen.ball_affine_instance(rng, use_ball, line)
    _require(U.contains(x))
    try:
        y = prox_crm_step(C, U, x)
    except EmptySet:
        return TrialResult(FAIL, np.inf)
    target = separating_target(C, U, x)
    formula = prox_crm_formula(C, U, x)
    gap = max(_rel_dist(y, target), _rel_dist(formula, target))
    in_u = U.contains(y)
    zs = _points_in(rng, C, U)
    excess = fqne_excess(x, y, zs)
    ok = gap <= HYPERPLANE_TOL and in_u and excess <= HYPERPLANE_TOL
    return TrialResult(PASS if ok else FAIL, gap if in_u else np.inf, 1, fejer=_fejer_pair(x, y, zs))


def _points_in(rng, C, U, k: int = Z_SAMPLES) -> list:
    if isinstance(C, geo.Ball):
        return [gen.sample_in_ball_cap_affine(rng, C, U) for _ in range(k)]
    return [oracle_proj_polyhedron([C, U], rng.uniform(-5.0, 5.0, U.dim)) for _ in range(k)]


def trial_halfspace_affine_projection(rng, n, stratum) -> TrialResult:
    """x ∈ U outside W with W ∩ U ≠ ∅: P_{H∩U} x = P_{W∩U} x."""
    k = 1 + stratum % (n - 1)
    U = gen.random_affine(rng, n, k)
    for _ in range(200):
        W = Halfspace(gen.normal_vector(rng, n), rng.uniform(-2.0, 2.0))
        x = geo.proj_affine(U, rng.uniform(-4.0, 4.0, n))
        if W.contains(x):
            continue
        try:
            p_wu = oracle_proj_polyhedron([W, U], x)
        except Exception:
            continue
        p_hu = oracle_proj_affine_intersection([W.boundary] + U.as_hyperplanes(), x)
        return _judge(_rel_dist(p_hu, p_wu), TOL_NUM)
    raise HypothesisViolated("no instance with x ∈ U outside W found")


def trial_properness_cone(rng, n, stratum) -> TrialResult:
    m = 2 + stratum % 2
    hs = gen.concurrent_hyperplanes(rng, n, m)
    x = sample_equidistance_cone(hs, int(rng.integers(2**31)))
    ok = properness_cone_check(hs, x)
    return TrialResult(PASS if ok else FAIL, 0.0 if ok else np.inf)


def trial_fqne_identity(rng, n, stratum) -> TrialResult:
    """Pythagorean identity for CC_S with S a reflector family containing Id."""
    m = 2 + stratum % 3
    composed = bool(stratum // 3 % 2)
    hs = gen.concurrent_hyperplanes(rng, n, m)
    x = rng.uniform(-4.0, 4.0, n)
    ops = [reflector(H) for H in hs]
    S = OperatorFamily.composed_prefix(ops) if composed else OperatorFamily.id_prefixed(ops)
    out = cc_map(S, x)
    if out.is_empty:
        return TrialResult(FAIL, np.inf)
    zs = sample_affine_points(rng, hs, n)
    v = pythagorean_violation(x, out.point, zs)
    return _judge(v, TOL_NUM, pythagorean=v, fejer=_fejer_pair(x, out.point, zs))


# Registry -----------------------------------------------------------------------

_ENTRIES = [
    Theorem("S2_three_step", "S = {Id, R_H1, R_H2 R_H1} reaches P_{H1∩H2} x within three steps",
            trial_s2_three_step, (2, 3, 6, 16), 4, HYPERPLANE_TOL),
    Theorem("S1_map_subsequence", "even CRM iterates for {Id, R_H1, R_H2} equal (P_H1 P_H2)^k x from x ∈ H1 outside H2",
            trial_s1_map, (2, 3, 6, 16), 1, TOL_NUM),
    Theorem("isometry_pair_one_step", "S = {Id, T1, T2 T1} with T1 a hyperplane reflector preserving Fix T2, x ∈ Fix T2",
            trial_isometry_pair, (3, 4, 6), 3, HYPERPLANE_TOL),
    Theorem("hyperplane_affine_one_step", "S = {Id, R_H, R_U R_H} from x ∈ U gives P_{H∩U} x",
            trial_hyperplane_affine, (3, 4, 6), 3, HYPERPLANE_TOL),
    Theorem("m_hyperplanes_id_prefixed", "{Id, R_H1, ..., R_Hm} from a perturbed start gives P_{∩Hi} x in one step",
            trial_one_step_id_prefixed, (4, 8), 3, HYPERPLANE_TOL),
    Theorem("m_hyperplanes_composed", "{Id, R_H1, R_H2 R_H1, ...} from a perturbed start gives P_{∩Hi} x in one step",
            trial_one_step_composed, (4, 8), 3, HYPERPLANE_TOL),
    Theorem("m_hyperplanes_random_start", "both reflector families from random starts give P_{∩Hi} x in one step",
            trial_one_step_random_start, (4, 8), 6, HYPERPLANE_TOL),
    Theorem("perturb_plain", "perturb_plain output is generic, within eps, and keeps the projection",
            trial_perturb_plain, (4, 6), 4, TOL_NUM),
    Theorem("perturb_composed", "perturb_composed output is generic, within eps, and keeps the projection",
            trial_perturb_composed, (4, 6), 4, TOL_NUM),
    Theorem("halfspace_direct", "closed-form CC for {Id, R_W1, R_W2}, independent normals",
            trial_halfspace_direct, (2, 3, 6), len(DIRECT_INDEPENDENT), TOL_NUM),
    Theorem("halfspace_direct_dependent", "closed-form CC for {Id, R_W1, R_W2}, dependent or zero normals",
            trial_halfspace_direct_dependent, (2, 3, 6), len(DIRECT_DEPENDENT), TOL_NUM),
    Theorem("halfspace_composed", "closed-form CC for {Id, R_W1, R_W2 R_W1}, independent normals",
            trial_halfspace_composed, (2, 3, 6), len(COMPOSED_INDEPENDENT), TOL_NUM),
    Theorem("halfspace_composed_dependent", "closed-form CC for {Id, R_W1, R_W2 R_W1}, dependent or zero normals",
            trial_halfspace_composed_dependent, (2, 3, 6), len(COMPOSED_DEPENDENT), TOL_NUM),
    Theorem("halfspace_feasibility", "{Id, R_W1, R_W2 R_W1} reaches W1 ∩ W2 within two steps",
            trial_halfspace_feasibility, (2, 3, 6), len(COMPOSED_INDEPENDENT), 0.0),
    Theorem("mixed_pair", "closed-form CC for a hyperplane and a halfspace, three families",
            trial_mixed_pair, (2, 3, 6), len(MIXED), TOL_NUM),
    Theorem("halfspace_affine_projection", "P_{H∩U} x = P_{W∩U} x for x ∈ U outside W",
            trial_halfspace_affine_projection, (3, 4, 6), 3, TOL_NUM),
    Theorem("prox_crm_step", "one CRM step for a ball or halfspace C and affine U equals P_{H_x∩U} x",
            trial_prox_crm, (3,), 4, HYPERPLANE_TOL),
    Theorem("properness_cone", "{Id, P_H1, ..., P_Hm} maps equidistant points to equidistant points at half distance",
            trial_properness_cone, (3, 4, 6), 2, TOL_NUM),
    Theorem("FQNE_identity", "Pythagorean identity for reflector families containing Id",
            trial_fqne_identity, (2, 3, 6), 6, TOL_NUM),
]

REGISTRY = {t.theorem_id: t for t in _ENTRIES}
ALL = "all"


def theorem_ids() -> list[str]:
    return list(REGISTRY)


def trial_seed(seed: int, theorem_id: str, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(theorem_id.encode()), index])


def _usable_dims(t: Theorem, dims: Optional[Sequence[int]]) -> tuple:
    return tuple(dims) if dims else t.dims


def run_trial(theorem_id: str, seed: int, index: int, dims: Optional[Sequence[int]] = None) -> TrialResult:
    t = REGISTRY[theorem_id]
    ds = _usable_dims(t, dims)
    rng = trial_seed(seed, theorem_id, index)
    n = ds[index % len(ds)]
    stratum = (index // len(ds)) % t.strata
    try:
        return t.trial(rng, n, stratum)
    except (HypothesisViolated, PreconditionViolated, EmptySet, SamplerFailed, RuntimeError):
        return TrialResult(FAIL, np.inf)


def _run_chunk(args) -> list:
    theorem_id, seed, indices, dims = args
    return [run_trial(theorem_id, seed, i, dims) for i in indices]


def aggregate(theorem_id: str, results: Sequence[TrialResult], tolerance: float, wall_time: float) -> CampaignReport:
    status = Counter(r.status for r in results)
    finite = [r.violation for r in results]
    hist = Counter(r.steps for r in results if r.steps is not None)
    pyth = [r.pythagorean for r in results if not np.isnan(r.pythagorean)]
    fejer = [r.fejer for r in results if not np.isnan(r.fejer)]
    return CampaignReport(
        theorem_id=theorem_id,
        trials=len(results),
        passed=status[PASS],
        failed=status[FAIL],
        boundary=status[BOUNDARY],
        max_violation=float(max(finite)) if finite else 0.0,
        tolerance=tolerance,
        step_histogram=dict(hist),
        max_pythagorean=float(max(pyth)) if pyth else 0.0,
        max_fejer=float(max(max(fejer), 0.0)) if fejer else 0.0,
        wall_time=wall_time,
    )


def run_theorem_suite(
    theorem_id: str,
    trials: int,
    seed: int,
    dims: Optional[Sequence[int]] = None,
    workers: int = 1,
) -> CampaignReport:
    """Run `trials` trials of a registered theorem (or of every one for "all")."""
    start = time.perf_counter()
    if theorem_id == ALL:
        children = [run_theorem_suite(tid, trials, seed, dims, workers) for tid in REGISTRY]
        report = CampaignReport(
            ALL,
            trials=sum(c.trials for c in children),
            passed=sum(c.passed for c in children),
            failed=sum(c.failed for c in children),
            boundary=sum(c.boundary for c in children),
            max_violation=max((c.max_violation for c in children), default=0.0),
            tolerance=max(t.tolerance for t in _ENTRIES),
            max_pythagorean=max((c.max_pythagorean for c in children), default=0.0),
            max_fejer=max((c.max_fejer for c in children), default=0.0),
            children=children,
        )
        report.wall_time = time.perf_counter() - start
        return report
    if theorem_id not in REGISTRY:
        raise UnknownTheorem(theorem_id)
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    t = REGISTRY[theorem_id]
    indices = list(range(trials))
    if workers > 1 and trials > 1:
        chunks = [indices[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, [(theorem_id, seed, c, dims) for c in chunks]))
        by_index = {}
        for chunk, part in zip(chunks, parts):
            by_index.update(zip(chunk, part))
        results = [by_index[i] for i in indices]
    else:
        results = _run_chunk((theorem_id, seed, indices, dims))
    return aggregate(theorem_id, results, t.tolerance, time.perf_counter() - start)


def step_counts_csv(theorem_id: str, trials: int, seed: int, dims: Optional[Sequence[int]] = None) -> str:
    """Per-trial CSV: index, status, violation, steps."""
    lines = ["index,status,violation,steps"]
    for i in range(trials):
        r = run_trial(theorem_id, seed, i, dims)
        lines.append(f"{i},{r.status},{format(r.violation, '.17g')},{'' if r.steps is None else r.steps}")
    return "\n".join(lines) + "\n"


# Baselines ----------------------------------------------------------------------

MAP = "MAP"
DRM = "DRM"


def run_baseline(
    method: str,
    sets: Sequence[ConvexSet],
    x0,
    max_iter: int = MAX_ITER,
    stop_tol: float = STOP_TOL,
    target=None,
) -> IterationTrace:
    """MAP: x ← P2 P1 x.  DRM: x ← (x + R2 R1 x) / 2.  Same trace format as CRM."""
    if len(sets) != 2:
        raise PreconditionViolated("baselines take exactly two sets")
    C1, C2 = sets
    x0 = geo.as_point(x0)
    geo.check_same_dim([C1, C2], x0)
    for C in (C1, C2):
        if isinstance(C, (Hyperplane, Halfspace)) and C.degeneracy == geo.EMPTY:
            raise EmptySet("one of the sets is empty")
    if method == MAP:
        def step(x):
            return CircumcenterOutcome(POINT, geo.project(C2, geo.project(C1, x)), -1)
    elif method == DRM:
        def step(x):
            return CircumcenterOutcome(POINT, 0.5 * (x + geo.reflect(C2, geo.reflect(C1, x))), -1)
    else:
        raise ValueError(f"unknown baseline {method!r}")
    return iterate_map(step, x0, max_iter, stop_tol, target)
