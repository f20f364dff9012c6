"""Case analysis of circumcenter mappings for pairs of halfspaces.

For W_i = {x : ⟨x,u_i⟩ ≤ η_i} with boundaries H_i this module classifies a
pair and a point, and predicts CC_S x in closed form for the two families

    direct:   S = {Id, R_W1, R_W2}
    composed: S = {Id, R_W1, R_W2 R_W1}

without evaluating a circumcenter. Predictions are cross-checked against
`cc_map` in the tests. Mixed pairs (a hyperplane with a halfspace) and the
hyperplane-pair iterations live here too.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import geometry as geo
from .ccmap import IterationTrace, OperatorFamily, cc_map, iterate, reflector
from .circumcenter import POINT, CircumcenterOutcome, affine_rank
from .errors import CaseNotCovered, HypothesisViolated, InfeasibleIntersection, InfeasiblePair
from .geometry import Halfspace, Hyperplane
from .oracles import oracle_proj_affine_intersection, oracle_proj_polyhedron
from .tolerances import TOL_DEP, TOL_NUM, points_close, scalar_close

DIRECT = "direct"
COMPOSED = "composed"

IN_BOTH = "in_both"
ONLY_W1 = "only_W1"
ONLY_W2 = "only_W2"
OUTSIDE_BOTH = "outside_both"


@dataclass
class PairClassification:
    degeneracy: str  # "none", "u1_zero", "u2_zero", "both_zero"
    dependence: Optional[str]  # "dependent" / "independent"; None when degenerate
    inner_sign: str  # "positive" / "zero" / "negative"
    offset_relation: Optional[str]  # η1/‖u1‖ vs ±η2/‖u2‖: "lt" / "eq" / "gt"
    feasible: bool
    region: str
    reflection_in_W2: Optional[bool]  # R_W1 x ∈ W2, only when x ∉ W1
    predicate: Optional[float]
    gap: Optional[float]  # ‖P_H1 x − P_H2 x‖ for dependent normals
    boundary: bool = False
    boundary_reasons: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)


def _sign(v: float, scale: float) -> str:
    if abs(v) <= TOL_NUM * scale:
        return "zero"
    return "positive" if v > 0 else "negative"


def _membership(W: geo._LinearConstraint, x: np.ndarray) -> tuple[bool, bool]:
    """(x ∈ W, x within tolerance of the boundary)."""
    if W.degeneracy != geo.PROPER:
        return W.degeneracy == geo.WHOLE_SPACE, False
    r = W.residual(x)
    band = TOL_NUM * max(1.0, W.norm_u * float(np.linalg.norm(x)))
    return r <= band, abs(r) <= band


def reflection_predicate(W1: Halfspace, W2: Halfspace, x) -> float:
    """(⟨x,u2⟩ − η2)‖u1‖² − 2(⟨x,u1⟩ − η1)⟨u1,u2⟩; for x ∉ W1 it is ≤ 0 iff R_W1 x ∈ W2."""
    x = np.asarray(x, dtype=float)
    return W2.residual(x) * float(W1.u @ W1.u) - 2.0 * W1.residual(x) * float(W1.u @ W2.u)


def _predicate_scale(W1: Halfspace, W2: Halfspace, x: np.ndarray) -> float:
    nx = float(np.linalg.norm(x))
    n1, n2 = W1.norm_u, W2.norm_u
    return max(1.0, n1 * n1 * (n2 * nx + abs(W2.eta)) + 2.0 * (n1 * nx + abs(W1.eta)) * n1 * n2)


def classify_pair(W1: Halfspace, W2: Halfspace, x) -> PairClassification:
    x = geo.as_point(x, W1.dim)
    geo.check_same_dim([W1, W2], x)
    reasons: list[str] = []
    in1, edge1 = _membership(W1, x)
    in2, edge2 = _membership(W2, x)
    if edge1:
        reasons.append("x on H1")
    if edge2:
        reasons.append("x on H2")
    region = {(True, True): IN_BOTH, (True, False): ONLY_W1, (False, True): ONLY_W2, (False, False): OUTSIDE_BOTH}[
        (in1, in2)
    ]

    z1 = W1.degeneracy != geo.PROPER
    z2 = W2.degeneracy != geo.PROPER
    if z1 or z2:
        degeneracy = "both_zero" if z1 and z2 else ("u1_zero" if z1 else "u2_zero")
        feasible = W1.degeneracy != geo.EMPTY and W2.degeneracy != geo.EMPTY
        return PairClassification(degeneracy, None, "zero", None, feasible, region, None, None, None,
                                  bool(reasons), reasons)

    n1, n2 = W1.norm_u, W2.norm_u
    inner = float(W1.u @ W2.u)
    dependent = abs(inner) >= (1.0 - TOL_DEP) * n1 * n2
    inner_sign = "positive" if inner > 0 else "negative" if inner < 0 else "zero"
    if not dependent and abs(inner) <= TOL_NUM * n1 * n2:
        inner_sign = "zero"
    h1, h2 = W1.eta / n1, W2.eta / n2

    offset_relation = None
    gap = None
    feasible = True
    if dependent:
        other = h2 if inner > 0 else -h2
        offset_relation = "eq" if scalar_close(h1, other) else ("lt" if h1 < other else "gt")
        gap = abs(h1 - other) if inner > 0 else h1 + h2
        if inner < 0:
            feasible = W1.eta * n2 + W2.eta * n1 >= -TOL_NUM * max(1.0, abs(W1.eta) * n2, abs(W2.eta) * n1)
            gap = max(gap, 0.0) if feasible else gap

    predicate = None
    reflection_in_W2 = None
    if not in1:
        predicate = reflection_predicate(W1, W2, x)
        scale = _predicate_scale(W1, W2, x)
        reflection_in_W2 = predicate <= TOL_NUM * scale
        if abs(predicate) <= TOL_NUM * scale:
            reasons.append("R_W1 x on H2")
        if dependent and feasible:
            dist = W1.residual(x) / n1
            if abs(dist - gap) <= TOL_NUM * max(1.0, dist, gap):
                reasons.append("distance to H1 equals the gap")

    return PairClassification(
        "none",
        "dependent" if dependent else "independent",
        inner_sign,
        offset_relation,
        bool(feasible),
        region,
        reflection_in_W2,
        predicate,
        gap,
        bool(reasons),
        reasons,
    )


class PairPrediction(NamedTuple):
    outcome: CircumcenterOutcome
    case: str
    boundary: bool


def _point(p, *support) -> CircumcenterOutcome:
    return CircumcenterOutcome(POINT, np.asarray(p, dtype=float), affine_rank(support) if support else 0)


def _empty() -> CircumcenterOutcome:
    return CircumcenterOutcome.empty(1)


def _p_lines(W1: Halfspace, W2: Halfspace, x) -> np.ndarray:
    return oracle_proj_affine_intersection([W1.boundary, W2.boundary], x)


def explain_pair(W1: Halfspace, W2: Halfspace, family_kind: str, x) -> PairPrediction:
    """Closed-form CC_S x with the name of the case that produced it."""
    if family_kind not in (DIRECT, COMPOSED):
        raise ValueError(f"unknown family kind {family_kind!r}")
    x = geo.as_point(x, W1.dim)
    c = classify_pair(W1, W2, x)
    flag = c.boundary
    H1, H2 = W1.boundary, W2.boundary

    if c.degeneracy != "none":
        if not c.feasible:
            raise CaseNotCovered("one of the halfspaces is empty")
        if W1.degeneracy == geo.WHOLE_SPACE:
            return PairPrediction(_point(geo.proj_halfspace(W2, x)), "zero_normal", flag)
        return PairPrediction(_point(geo.proj_halfspace(W1, x)), "zero_normal", flag)

    if c.dependence == "dependent":
        if not c.feasible:
            raise CaseNotCovered("dependent normals with an empty intersection")
        return (_dependent_direct if family_kind == DIRECT else _dependent_composed)(W1, W2, x, c)

    # independent normals
    region = c.region
    if region == IN_BOTH:
        return PairPrediction(_point(x), "independent_in_both", flag)
    if region == ONLY_W1:
        return PairPrediction(_point(geo.proj_hyperplane(H2, x)), "independent_only_W1", flag)
    if family_kind == DIRECT:
        if region == ONLY_W2:
            return PairPrediction(_point(geo.proj_hyperplane(H1, x)), "independent_only_W2", flag)
        return PairPrediction(_point(_p_lines(W1, W2, x)), "independent_outside_both", flag)
    tag = "only_W2" if region == ONLY_W2 else "outside_both"
    if c.reflection_in_W2:
        return PairPrediction(_point(geo.proj_hyperplane(H1, x)), f"independent_{tag}_reflection_in_W2", flag)
    return PairPrediction(_point(_p_lines(W1, W2, x)), f"independent_{tag}_reflection_outside_W2", flag)


def _dependent_direct(W1, W2, x, c: PairClassification) -> PairPrediction:
    flag = c.boundary
    if c.inner_sign == "negative":
        return PairPrediction(_point(oracle_proj_polyhedron([W1, W2], x)), "dependent_opposite", flag)
    if c.offset_relation == "eq":
        return PairPrediction(_point(geo.proj_halfspace(W1, x)), "dependent_equal", flag)
    if c.region == OUTSIDE_BOTH:
        return PairPrediction(_empty(), "dependent_nested_outside_both", flag)
    return PairPrediction(_point(oracle_proj_polyhedron([W1, W2], x)), "dependent_nested_in_union", flag)


def _dependent_composed(W1, W2, x, c: PairClassification) -> PairPrediction:
    flag = c.boundary
    in1 = c.region in (IN_BOTH, ONLY_W1)
    dist = max(W1.residual(x), 0.0) / W1.norm_u
    if c.inner_sign == "positive":
        if c.offset_relation in ("lt", "eq"):
            return PairPrediction(_point(geo.proj_halfspace(W1, x)), "dependent_W1_in_W2", flag)
        if in1:
            return PairPrediction(_point(geo.proj_halfspace(W2, x)), "dependent_W2_in_W1_x_in_W1", flag)
        if dist >= c.gap or c.reflection_in_W2:
            return PairPrediction(_point(geo.proj_hyperplane(W1.boundary, x)), "dependent_W2_in_W1_far", flag)
        return PairPrediction(_empty(), "dependent_W2_in_W1_near", flag)
    if in1:
        return PairPrediction(_point(oracle_proj_polyhedron([W1, W2], x)), "dependent_opposite_x_in_W1", flag)
    if dist <= c.gap or c.reflection_in_W2:
        return PairPrediction(_point(geo.proj_halfspace(W1, x)), "dependent_opposite_near", flag)
    if c.offset_relation == "eq":
        return PairPrediction(_point(geo.proj_halfspace(W1, x)), "dependent_opposite_touching", flag)
    return PairPrediction(_empty(), "dependent_opposite_far", flag)


def predict_cc_pair(W1: Halfspace, W2: Halfspace, family_kind: str, x) -> CircumcenterOutcome:
    return explain_pair(W1, W2, family_kind, x).outcome


def pair_family(W1, W2, family_kind: str) -> OperatorFamily:
    ops = [reflector(W1), reflector(W2)]
    if family_kind == DIRECT:
        return OperatorFamily.id_prefixed(ops)
    return OperatorFamily.composed_prefix(ops)


def outcomes_agree(a: CircumcenterOutcome, b: CircumcenterOutcome, tol: float = TOL_NUM) -> bool:
    if a.is_empty or b.is_empty:
        return a.is_empty and b.is_empty
    return points_close(a.point, b.point, tol)


# Hyperplane / halfspace pairs ----------------------------------------------

S1 = "S1"  # {Id, R_H1, R_W2}
S2 = "S2"  # {Id, R_H1, R_W2 R_H1}
S3 = "S3"  # {Id, R_W2, R_H1 R_W2}


def mixed_family(H1: Hyperplane, W2: Halfspace, variant: str) -> OperatorFamily:
    if variant == S1:
        return OperatorFamily.id_prefixed([reflector(H1), reflector(W2)])
    if variant == S2:
        return OperatorFamily.composed_prefix([reflector(H1), reflector(W2)])
    if variant == S3:
        return OperatorFamily.composed_prefix([reflector(W2), reflector(H1)])
    raise ValueError(f"unknown variant {variant!r}")


def explain_mixed(H1: Hyperplane, W2: Halfspace, variant: str, x) -> PairPrediction:
    x = geo.as_point(x, H1.dim)
    geo.check_same_dim([H1, W2], x)
    if variant not in (S1, S2, S3):
        raise ValueError(f"unknown variant {variant!r}")
    try:
        oracle_proj_polyhedron([H1, W2], x)
    except InfeasibleIntersection as exc:
        raise InfeasiblePair("H1 ∩ W2 is empty") from exc

    if H1.degeneracy != geo.PROPER or W2.degeneracy != geo.PROPER:
        if H1.degeneracy == geo.WHOLE_SPACE:
            return PairPrediction(_point(geo.proj_halfspace(W2, x)), "zero_normal", False)
        return PairPrediction(_point(geo.proj_hyperplane(H1, x)), "zero_normal", False)

    n1, n2 = H1.norm_u, W2.norm_u
    if abs(float(H1.u @ W2.u)) >= (1.0 - TOL_DEP) * n1 * n2:
        # H1 lies inside W2, so projecting onto H1 already solves the problem
        return PairPrediction(_point(geo.proj_hyperplane(H1, x)), "mixed_dependent", False)

    H2 = W2.boundary
    p_h1 = geo.proj_hyperplane(H1, x)
    reasons = []
    in_w2, edge = _membership(W2, x)
    if edge:
        reasons.append("x on H2")
    on_h1 = H1.contains(x)
    band = TOL_NUM * max(1.0, n1 * float(np.linalg.norm(x)))
    if abs(H1.residual(x)) <= 10 * band and not on_h1:
        reasons.append("x near H1")

    if variant == S2:
        r1 = geo.reflect(H1, x)
        trigger_in, trigger_edge = _membership(W2, r1)
        if trigger_edge:
            reasons.append("R_H1 x on H2")
        if trigger_in:
            return PairPrediction(_point(p_h1), "S2_reflection_in_W2", bool(reasons))
        if on_h1:
            return PairPrediction(_point(geo.proj_hyperplane(H2, x)), "S2_x_on_H1", bool(reasons))
        return PairPrediction(_point(_lines(H1, H2, x)), "S2_generic", bool(reasons))

    if in_w2:
        return PairPrediction(_point(p_h1), f"{variant}_x_in_W2", bool(reasons))
    if variant == S1:
        if on_h1:
            return PairPrediction(_point(geo.proj_hyperplane(H2, x)), "S1_x_on_H1", bool(reasons))
        return PairPrediction(_point(_lines(H1, H2, x)), "S1_generic", bool(reasons))
    r2 = geo.reflect(H2, x)
    if H1.contains(r2):
        return PairPrediction(_point(geo.proj_hyperplane(H2, x)), "S3_reflection_on_H1", bool(reasons))
    return PairPrediction(_point(_lines(H1, H2, x)), "S3_generic", bool(reasons))


def _lines(H1: Hyperplane, H2: Hyperplane, x) -> np.ndarray:
    return oracle_proj_affine_intersection([H1, H2], x)


def mixed_pair_cc(H1: Hyperplane, W2: Halfspace, variant: str, x) -> CircumcenterOutcome:
    return explain_mixed(H1, W2, variant, x).outcome


# Iterations over pairs ------------------------------------------------------

def _pair_target_hyperplanes(H1: Hyperplane, H2: Hyperplane, x) -> np.ndarray:
    try:
        return oracle_proj_affine_intersection([H1, H2], x)
    except InfeasibleIntersection as exc:
        raise InfeasiblePair("H1 ∩ H2 is empty") from exc


def crm_hyperplane_pair(H1: Hyperplane, H2: Hyperplane, x, max_iter: int = 100) -> IterationTrace:
    """Iterate S = {Id, R_H1, R_H2 R_H1} from x, tracking the distance to P_{H1∩H2} x."""
    x = geo.as_point(x, H1.dim)
    target = _pair_target_hyperplanes(H1, H2, x)
    S = OperatorFamily.composed_prefix([reflector(H1), reflector(H2)])
    return iterate(S, x, max_iter=max_iter, target=target)


def crm_feasibility_pair(W1: Halfspace, W2: Halfspace, x, max_iter: int = 10) -> IterationTrace:
    """Iterate S = {Id, R_W1, R_W2 R_W1}; for independent normals W1 ∩ W2 is hit within two steps."""
    x = geo.as_point(x, W1.dim)
    c = classify_pair(W1, W2, x)
    if c.dependence != "independent":
        raise HypothesisViolated("normals must be linearly independent")
    return iterate(pair_family(W1, W2, COMPOSED), x, max_iter=max_iter, witnesses=[])


def feasibility_index(trace: IterationTrace, W1: Halfspace, W2: Halfspace) -> Optional[int]:
    for k, p in enumerate(trace.iterates):
        if np.all(np.isfinite(p)) and W1.contains(p) and W2.contains(p):
            return k
    return None


def map_subsequence_gap(H1: Hyperplane, H2: Hyperplane, x, K: int) -> float:
    """Largest relative gap between CC_S iterates (S = {Id, R_H1, R_H2}) and
    alternating projections, over CC^{2k} and CC^{2k+1} for k ≤ K."""
    x = geo.as_point(x, H1.dim)
    on1, on2 = H1.contains(x), H2.contains(x)
    if on1 == on2:
        raise HypothesisViolated("x must lie on exactly one of the hyperplanes")
    _pair_target_hyperplanes(H1, H2, x)
    first, second = (H1, H2) if on1 else (H2, H1)
    S = OperatorFamily.id_prefixed([reflector(H1), reflector(H2)])

    cc = x.copy()
    alt = x.copy()
    worst = 0.0
    for k in range(K + 1):
        worst = max(worst, _componentwise_gap(cc, alt))
        if k == K:
            break
        out = cc_map(S, cc)
        if out.is_empty:
            return np.inf
        cc = out.point
        half = geo.proj_hyperplane(second, alt)
        worst = max(worst, _componentwise_gap(cc, half))
        out = cc_map(S, cc)
        if out.is_empty:
            return np.inf
        cc = out.point
        alt = geo.proj_hyperplane(first, half)
    return worst


def _componentwise_gap(a: np.ndarray, b: np.ndarray) -> float:
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / scale))


def map_subsequence_check(H1: Hyperplane, H2: Hyperplane, x, K: int) -> bool:
    return map_subsequence_gap(H1, H2, x, K) <= TOL_NUM
