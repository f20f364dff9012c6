"""Circumcenter mappings induced by operator families, and their iteration.

A family S = {T_1, ..., T_m} maps x to CC_S(x) = CCO({T_1 x, ..., T_m x}).
Families are expanded eagerly so that a trace records the concrete member
list that was used.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from . import geometry as geo
from .circumcenter import CircumcenterOutcome, circumcenter_general
from .errors import EmptySet, HypothesisViolated, InfeasibleIntersection, PreconditionViolated
from .geometry import AffineSubspace, Ball, ConvexSet, Halfspace, Hyperplane
from .oracles import oracle_proj_affine_intersection, oracle_proj_polyhedron
from .tolerances import MAX_ITER, STOP_TOL, TOL_NUM

IDENTITY = "identity"
PROJECTOR = "projector"
REFLECTOR = "reflector"
COMPOSITION = "composition"

PLAIN = "plain"
ID_PREFIXED = "id_prefixed"
COMPOSED_PREFIX = "composed_prefix"


@dataclass(frozen=True)
class OperatorSpec:
    kind: str
    set: Optional[ConvexSet] = None
    parts: tuple = ()

    def __post_init__(self):
        if self.kind == IDENTITY:
            if self.set is not None or self.parts:
                raise PreconditionViolated("identity takes no set")
        elif self.kind in (PROJECTOR, REFLECTOR):
            if self.set is None:
                raise PreconditionViolated(f"{self.kind} needs a set")
        elif self.kind == COMPOSITION:
            if len(self.parts) < 2:
                raise PreconditionViolated("a composition needs at least two parts")
        else:
            raise PreconditionViolated(f"unknown operator kind {self.kind!r}")

    @property
    def fixed_sets(self) -> tuple:
        """Sets whose intersection is Fix T (empty tuple: the whole space).

        For compositions this is the intersection of the parts' fixed sets,
        which equals Fix T for the reflector compositions used here.
        """
        if self.kind == IDENTITY:
            return ()
        if self.kind == COMPOSITION:
            return tuple(C for p in self.parts for C in p.fixed_sets)
        return (self.set,)

    @property
    def is_affine_isometry(self) -> bool:
        if self.kind == IDENTITY:
            return True
        if self.kind == REFLECTOR:
            return isinstance(self.set, (Hyperplane, AffineSubspace))
        if self.kind == COMPOSITION:
            return all(p.is_affine_isometry for p in self.parts)
        return False

    def label(self) -> str:
        if self.kind == IDENTITY:
            return "Id"
        if self.kind == COMPOSITION:
            return "".join(p.label() for p in self.parts)
        return ("P" if self.kind == PROJECTOR else "R") + f"[{type(self.set).__name__}]"


def identity() -> OperatorSpec:
    return OperatorSpec(IDENTITY)


def projector(C: ConvexSet) -> OperatorSpec:
    return OperatorSpec(PROJECTOR, C)


def reflector(C: ConvexSet) -> OperatorSpec:
    return OperatorSpec(REFLECTOR, C)


def compose(*parts: OperatorSpec) -> OperatorSpec:
    """compose(A, B) is A∘B: B is applied first."""
    flat: list[OperatorSpec] = []
    for p in parts:
        flat.extend(p.parts if p.kind == COMPOSITION else [p])
    flat = [p for p in flat if p.kind != IDENTITY]
    if not flat:
        return identity()
    if len(flat) == 1:
        return flat[0]
    return OperatorSpec(COMPOSITION, parts=tuple(flat))


def apply(T: OperatorSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if T.kind == IDENTITY:
        return x.copy()
    if T.kind == PROJECTOR:
        return geo.project(T.set, x)
    if T.kind == REFLECTOR:
        return geo.reflect(T.set, x)
    for part in reversed(T.parts):
        x = apply(part, x)
    return x


@dataclass(frozen=True)
class OperatorFamily:
    members: tuple
    family_kind: str
    base: tuple = ()

    @classmethod
    def plain(cls, ops: Sequence[OperatorSpec]) -> "OperatorFamily":
        return cls(tuple(ops), PLAIN, tuple(ops))

    @classmethod
    def id_prefixed(cls, ops: Sequence[OperatorSpec]) -> "OperatorFamily":
        return cls((identity(),) + tuple(ops), ID_PREFIXED, tuple(ops))

    @classmethod
    def composed_prefix(cls, ops: Sequence[OperatorSpec]) -> "OperatorFamily":
        """{Id, T_1, T_2 T_1, ..., T_m ⋯ T_1}."""
        members = [identity()]
        for k in range(1, len(ops) + 1):
            members.append(compose(*reversed(ops[:k])))
        return cls(tuple(members), COMPOSED_PREFIX, tuple(ops))

    @classmethod
    def build(cls, kind: str, ops: Sequence[OperatorSpec]) -> "OperatorFamily":
        makers = {PLAIN: cls.plain, ID_PREFIXED: cls.id_prefixed, COMPOSED_PREFIX: cls.composed_prefix}
        if kind not in makers:
            raise PreconditionViolated(f"unknown family kind {kind!r}")
        return makers[kind](ops)

    @property
    def contains_identity(self) -> bool:
        return any(T.kind == IDENTITY for T in self.members)

    @property
    def isometric(self) -> bool:
        """Identity plus affine isometries: CC_S is proper on the whole space."""
        return self.contains_identity and all(T.is_affine_isometry for T in self.members)

    @property
    def fixed_sets(self) -> tuple:
        return tuple(C for T in self.members for C in T.fixed_sets)


def evaluate_members(S: OperatorFamily, x) -> list[np.ndarray]:
    x = np.asarray(x, dtype=float)
    if S.family_kind == COMPOSED_PREFIX:
        # reuse partial composites: member k is T_k applied to member k−1
        out = [x.copy()]
        for T in S.base:
            out.append(apply(T, out[-1]))
        return out
    return [apply(T, x) for T in S.members]


def cc_map(S: OperatorFamily, x) -> CircumcenterOutcome:
    if not S.members:
        raise PreconditionViolated("empty operator family")
    # CCO commutes with translation; centering at x keeps the duplicate
    # test absolute once the members cluster near a fixed point.
    x = np.asarray(x, dtype=float)
    out = circumcenter_general([p - x for p in evaluate_members(S, x)])
    if out.is_empty:
        return out
    return CircumcenterOutcome(out.kind, out.point + x, out.affine_rank, out.alpha)


# Iteration ------------------------------------------------------------------

STATUS_START = "start"
STATUS_STEP = "step"
STATUS_CONVERGED = "converged"
STATUS_EMPTY = "empty"
STATUS_MAX_ITER = "max_iter"
STATUS_STALLED = "stalled"
FEJER_TOL = 1e-10


@dataclass(eq=False)
class IterationTrace:
    """Per-row record of an iteration; the first five fields are the CSV."""

    iterates: list
    step_norms: list
    dist_to_target: list
    fejer_ok: list
    statuses: list
    target: Optional[np.ndarray] = field(default=None, compare=False)
    outcomes: list = field(default_factory=list, compare=False)
    fejer_violation: float = field(default=0.0, compare=False)
    covered: bool = field(default=True, compare=False)

    @property
    def final(self) -> np.ndarray:
        """Last iterate that is a point (an Empty row holds NaNs)."""
        return self.iterates[-2] if self.ended_empty else self.iterates[-1]

    @property
    def steps(self) -> int:
        return len(self.iterates) - 1

    @property
    def ended_empty(self) -> bool:
        return bool(self.statuses) and self.statuses[-1] == STATUS_EMPTY

    def first_within(self, point, tol: float) -> Optional[int]:
        """Smallest k with ‖x_k − point‖ ≤ tol·max(1, ‖point‖)."""
        scale = max(1.0, float(np.linalg.norm(point)))
        for k, x in enumerate(self.iterates):
            if np.all(np.isfinite(x)) and np.linalg.norm(x - point) <= tol * scale:
                return k
        return None

    def to_csv(self) -> str:
        n = len(self.iterates[0])
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k"] + [f"x_{i}" for i in range(n)] + ["step_norm", "dist_to_target", "fejer_ok", "status"])
        for k, x in enumerate(self.iterates):
            writer.writerow(
                [k]
                + [_fmt(v) for v in x]
                + [_fmt(self.step_norms[k]), _fmt(self.dist_to_target[k]), int(self.fejer_ok[k]), self.statuses[k]]
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "IterationTrace":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        n = sum(1 for h in header if h.startswith("x_"))
        trace = cls([], [], [], [], [])
        for k, row in enumerate(body):
            if int(row[0]) != k:
                raise ValueError("trace rows are out of order")
            trace.iterates.append(np.array([float(v) for v in row[1:1 + n]]))
            trace.step_norms.append(float(row[1 + n]))
            trace.dist_to_target.append(float(row[2 + n]))
            trace.fejer_ok.append(bool(int(row[3 + n])))
            trace.statuses.append(row[4 + n])
        return trace

    def same_records(self, other: "IterationTrace") -> bool:
        if len(self.iterates) != len(other.iterates):
            return False
        same_floats = all(
            np.array_equal(a, b, equal_nan=True) for a, b in zip(self.iterates, other.iterates)
        ) and np.array_equal(
            np.array(self.step_norms + self.dist_to_target),
            np.array(other.step_norms + other.dist_to_target),
            equal_nan=True,
        )
        return same_floats and self.fejer_ok == other.fejer_ok and self.statuses == other.statuses


def _fmt(v: float) -> str:
    return "nan" if math.isnan(v) else format(float(v), ".17g")


def iterate(
    S: OperatorFamily,
    x0,
    max_iter: int = MAX_ITER,
    stop_tol: float = STOP_TOL,
    target=None,
    witnesses: Optional[Sequence[np.ndarray]] = None,
) -> IterationTrace:
    """Iterate x_{k+1} = CC_S(x_k).

    Stops when the step is at most stop_tol (and, with a target, the iterate
    is within stop_tol of it), when CC_S returns Empty, or after max_iter
    steps. A step of size ≤ stop_tol is not appended. Fejér monotonicity is
    checked against `witnesses` (default: the target).
    """
    return iterate_map(lambda x: cc_map(S, x), x0, max_iter, stop_tol, target, witnesses, covered=S.isometric)


def iterate_map(
    step_fn: Callable[[np.ndarray], CircumcenterOutcome],
    x0,
    max_iter: int = MAX_ITER,
    stop_tol: float = STOP_TOL,
    target=None,
    witnesses: Optional[Sequence[np.ndarray]] = None,
    covered: bool = True,
) -> IterationTrace:
    """The iteration loop behind `iterate`, for any map returning an outcome."""
    x = np.asarray(x0, dtype=float).copy()
    tgt = None if target is None else np.asarray(target, dtype=float)
    refs = [np.asarray(w, dtype=float) for w in witnesses] if witnesses is not None else (
        [tgt] if tgt is not None else []
    )

    def dist(p):
        return float("nan") if tgt is None else float(np.linalg.norm(p - tgt))

    trace = IterationTrace([x], [float("nan")], [dist(x)], [True], [STATUS_START], target=tgt, covered=covered)
    worst = 0.0
    for _ in range(max_iter):
        outcome = step_fn(x)
        trace.outcomes.append(outcome)
        if outcome.is_empty:
            trace.iterates.append(np.full_like(x, np.nan))
            trace.step_norms.append(float("nan"))
            trace.dist_to_target.append(float("nan"))
            trace.fejer_ok.append(False)
            trace.statuses.append(STATUS_EMPTY)
            break
        y = outcome.point
        step = float(np.linalg.norm(y - x))
        near_target = tgt is None or np.linalg.norm(y - tgt) <= stop_tol * max(1.0, float(np.linalg.norm(tgt)))
        if step <= stop_tol * max(1.0, float(np.linalg.norm(x))):
            if near_target:
                trace.statuses[-1] = STATUS_CONVERGED
                break
            if step == 0.0:
                trace.statuses[-1] = STATUS_STALLED
                break
        ok = True
        for z in refs:
            before = float(np.linalg.norm(x - z))
            excess = float(np.linalg.norm(y - z)) - before
            if excess > 0:
                worst = max(worst, excess / max(1.0, before))
            if excess > FEJER_TOL * max(1.0, before):
                ok = False
        trace.iterates.append(y)
        trace.step_norms.append(step)
        trace.dist_to_target.append(dist(y))
        trace.fejer_ok.append(ok)
        trace.statuses.append(STATUS_STEP)
        x = y
    else:
        trace.statuses[-1] = STATUS_MAX_ITER
    trace.fejer_violation = worst
    return trace


# Theorem-level checks -------------------------------------------------------

def _hyperplanes_of(C: ConvexSet) -> list[Hyperplane]:
    if isinstance(C, Hyperplane):
        return [C]
    if isinstance(C, AffineSubspace):
        return C.as_hyperplanes()
    raise HypothesisViolated(f"{type(C).__name__} is not an affine set")


def one_step_pair_check(T1: OperatorSpec, T2: OperatorSpec, x) -> np.ndarray:
    """CC_S x for S = {Id, T1, T2 T1}, with x ∈ Fix T2.

    T1 must reflect across a hyperplane and T2 across an affine set; the result
    then is the projection of x onto Fix T1 ∩ Fix T2.
    """
    x = np.asarray(x, dtype=float)
    for T in (T1, T2):
        if T.kind != REFLECTOR or not isinstance(T.set, (Hyperplane, AffineSubspace)):
            raise HypothesisViolated("both operators must be reflectors across affine sets")
    if not isinstance(T1.set, Hyperplane) or T1.set.degeneracy != geo.PROPER:
        raise HypothesisViolated("Fix T1 must have codimension one")
    if not T2.set.contains(x):
        raise HypothesisViolated("x is not a fixed point of T2")
    outcome = cc_map(OperatorFamily.composed_prefix([T1, T2]), x)
    if outcome.is_empty:
        raise EmptySet("circumcenter is empty")
    return outcome.point


def oracle_pair_target(T1: OperatorSpec, T2: OperatorSpec, x) -> np.ndarray:
    return oracle_proj_affine_intersection(_hyperplanes_of(T1.set) + _hyperplanes_of(T2.set), x)


class SeparatingPair(NamedTuple):
    hyperplane: Optional[Hyperplane]
    halfspace: Optional[Halfspace]
    inside: bool


def build_separating(C: ConvexSet, x) -> SeparatingPair:
    """H_x, W_x through P_C x with normal x − P_C x; `inside` when x ∈ C."""
    x = np.asarray(x, dtype=float)
    p = geo.project(C, x)
    normal = x - p
    if C.contains(x) or not np.any(normal):
        return SeparatingPair(None, None, True)
    eta = float(p @ normal)
    return SeparatingPair(Hyperplane(normal, eta), Halfspace(normal, eta), False)


def _check_prox_inputs(C: ConvexSet, U: AffineSubspace, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not isinstance(C, (Halfspace, Ball)):
        raise HypothesisViolated("C must be a halfspace or a ball")
    if not U.contains(x):
        raise HypothesisViolated("x is not in U")
    if isinstance(C, Ball):
        gap = np.linalg.norm(geo.proj_affine(U, C.center) - C.center)
        if gap > C.radius * (1 + TOL_NUM):
            raise InfeasibleIntersection("C ∩ U is empty")
    else:
        oracle_proj_polyhedron([C, U], x)
    return x


def prox_crm_step(C: ConvexSet, U: AffineSubspace, x) -> np.ndarray:
    """CC_S x for S = {Id, R_C, R_U R_C} with x ∈ U."""
    x = _check_prox_inputs(C, U, x)
    outcome = cc_map(OperatorFamily.composed_prefix([reflector(C), reflector(U)]), x)
    if outcome.is_empty:
        raise EmptySet("circumcenter is empty")
    return outcome.point


def prox_crm_formula(C: ConvexSet, U: AffineSubspace, x) -> np.ndarray:
    """x + 2α(P_U R_C x − x), α = 1/(4 − ‖R_U R_C x − R_C x‖²/‖R_C x − x‖²)."""
    x = _check_prox_inputs(C, U, x)
    rc = geo.reflect(C, x)
    if np.linalg.norm(rc - x) <= TOL_NUM * max(1.0, float(np.linalg.norm(x))):
        return x.copy()
    rurc = geo.reflect(U, rc)
    alpha = 1.0 / (4.0 - float((rurc - rc) @ (rurc - rc)) / float((rc - x) @ (rc - x)))
    return x + 2.0 * alpha * (geo.proj_affine(U, rc) - x)


def separating_target(C: ConvexSet, U: AffineSubspace, x) -> np.ndarray:
    """Oracle P_{H_x ∩ U} x (x itself when x ∈ C)."""
    sep = build_separating(C, x)
    if sep.inside:
        return np.asarray(x, dtype=float).copy()
    return oracle_proj_affine_intersection([sep.hyperplane] + U.as_hyperplanes(), x)


def cone_spread(hyperplanes: Sequence[Hyperplane], x) -> float:
    d = np.array([H.distance(x) for H in hyperplanes])
    return float(d.max() - d.min())


def properness_cone_check(hyperplanes: Sequence[Hyperplane], x) -> bool:
    """Whether CC_S maps the equidistance point x back into the equidistance set.

    S = {Id, P_{H_1}, ..., P_{H_m}}. Also requires every distance to be halved.
    """
    x = np.asarray(x, dtype=float)
    d_x = np.array([H.distance(x) for H in hyperplanes])
    if d_x.max() - d_x.min() > TOL_NUM * max(1.0, float(d_x.max())):
        raise HypothesisViolated("x is not equidistant from the hyperplanes")
    outcome = cc_map(OperatorFamily.id_prefixed([projector(H) for H in hyperplanes]), x)
    if outcome.is_empty:
        return False
    d_y = np.array([H.distance(outcome.point) for H in hyperplanes])
    scale = max(1.0, float(d_x.max()))
    in_cone = d_y.max() - d_y.min() <= TOL_NUM * scale
    halved = bool(np.all(np.abs(d_y - 0.5 * d_x) <= TOL_NUM * scale))
    return bool(in_cone and halved)


def span_rank(S: OperatorFamily, x) -> int:
    """Rank of {T x − x : T ∈ S}."""
    x = np.asarray(x, dtype=float)
    diffs = np.array([p - x for p in evaluate_members(S, x)])
    s = np.linalg.svd(diffs, compute_uv=False)
    return int(np.sum(s > 1e-10 * s[0])) if s[0] > 0 else 0
