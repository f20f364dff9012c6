"""Independent ground truth for the iteration methods.

Projections onto intersections are computed here without any circumcenter
machinery: a minimum-norm least-squares correction for affine constraints,
and exhaustive active-set enumeration when a few inequalities are present.
The module also builds structured starting points (generic perturbations and
equidistance-cone samples).
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InfeasibleIntersection, PreconditionViolated, SamplerFailed
from .geometry import (
    EMPTY,
    WHOLE_SPACE,
    AffineSubspace,
    Ball,
    ConvexSet,
    Halfspace,
    Hyperplane,
    as_point,
    linear_reflect,
    reflect,
)
from .tolerances import RANK_RTOL, TOL_NUM

BISECTION_STEPS = 80
SAFETY_MARGIN = 1e-12


def oracle_proj_affine_intersection(hyperplanes: Sequence[Hyperplane], x) -> np.ndarray:
    """P_{∩ H_i} x as the minimum-norm correction solving ⟨y, u_i⟩ = η_i."""
    x = as_point(x)
    rows, rhs = [], []
    for H in hyperplanes:
        if H.dim != x.shape[0]:
            raise DimensionMismatch("hyperplane and point dimensions differ")
        if H.degeneracy == EMPTY:
            raise InfeasibleIntersection("an empty hyperplane (u = 0, eta != 0) is present")
        if H.degeneracy == WHOLE_SPACE:
            continue
        rows.append(H.u)
        rhs.append(H.eta)
    if not rows:
        return x.copy()
    A = np.array(rows)
    b = np.array(rhs)
    correction = np.linalg.lstsq(A, b - A @ x, rcond=RANK_RTOL)[0]
    y = x + correction
    for H in hyperplanes:
        if not H.contains(y):
            raise InfeasibleIntersection("hyperplane system is inconsistent")
    return y


def _equalities_of(sets: Sequence[ConvexSet]) -> tuple[list[Hyperplane], list[Halfspace]]:
    eqs: list[Hyperplane] = []
    ineqs: list[Halfspace] = []
    for C in sets:
        if isinstance(C, Hyperplane):
            eqs.append(C)
        elif isinstance(C, AffineSubspace):
            eqs.extend(C.as_hyperplanes())
        elif isinstance(C, Halfspace):
            if C.degeneracy == EMPTY:
                raise InfeasibleIntersection("an empty halfspace (u = 0, eta < 0) is present")
            if C.degeneracy != WHOLE_SPACE:
                ineqs.append(C)
        elif isinstance(C, Ball):
            raise PreconditionViolated("the polyhedral oracle does not handle balls")
        else:
            raise TypeError(f"unsupported set type {type(C).__name__}")
    return eqs, ineqs


def oracle_proj_polyhedron(sets: Sequence[ConvexSet], x) -> np.ndarray:
    """P_{∩ C_i} x for hyperplanes, affine subspaces and a few halfspaces.

    Enumerates every active set of the inequality constraints; the projection
    is the closest feasible candidate among the affine projections.
    """
    x = as_point(x)
    eqs, ineqs = _equalities_of(sets)
    if len(ineqs) > 12:
        raise PreconditionViolated("too many inequalities for exhaustive enumeration")
    best: Optional[np.ndarray] = None
    best_dist = np.inf
    for size in range(len(ineqs) + 1):
        for active in itertools.combinations(range(len(ineqs)), size):
            try:
                cand = oracle_proj_affine_intersection(
                    eqs + [ineqs[i].boundary for i in active], x
                )
            except InfeasibleIntersection:
                continue
            if not all(W.contains(cand) for W in ineqs):
                continue
            d = float(np.linalg.norm(cand - x))
            if d < best_dist:
                best, best_dist = cand, d
    if best is None:
        raise InfeasibleIntersection("the intersection is empty")
    return best


def oracle_proj_two_halfspaces(W1: Halfspace, W2: Halfspace, x) -> np.ndarray:
    """P_{W1∩W2} x from the candidates x, P_{H1}x, P_{H2}x, P_{H1∩H2}x."""
    return oracle_proj_polyhedron([W1, W2], x)


@dataclass
class IntersectionSpec:
    """A target intersection with a cached feasibility witness."""

    sets: tuple
    _witness: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False)

    def __post_init__(self):
        self.sets = tuple(self.sets)

    @property
    def kind(self) -> str:
        if all(isinstance(C, (Hyperplane, AffineSubspace)) for C in self.sets):
            return "all_affine"
        if len(self.sets) == 2 and all(isinstance(C, Halfspace) for C in self.sets):
            return "two_halfspaces"
        return "mixed"

    def witness(self) -> np.ndarray:
        if self._witness is None:
            with self._lock:
                if self._witness is None:
                    self._witness = oracle_proj_polyhedron(self.sets, np.zeros(self.sets[0].dim))
        return self._witness

    def project(self, x) -> np.ndarray:
        self.witness()
        return oracle_proj_polyhedron(self.sets, x)


# Generic perturbations ------------------------------------------------------

def _plain_residuals(hyperplanes: Sequence[Hyperplane], y: np.ndarray):
    return [(H.residual(y), H.contains(y)) for H in hyperplanes]


def _composed_residuals(hyperplanes: Sequence[Hyperplane], y: np.ndarray):
    out = []
    w = y
    for H in hyperplanes:
        out.append((H.residual(w), H.contains(w)))
        w = reflect(H, w)
    return out


def is_generic_plain(hyperplanes: Sequence[Hyperplane], y) -> bool:
    """True iff y lies on none of the hyperplanes."""
    return not any(inside for _, inside in _plain_residuals(hyperplanes, np.asarray(y, float)))


def is_generic_composed(hyperplanes: Sequence[Hyperplane], y) -> bool:
    """True iff R_{H_{i−1}}⋯R_{H_1} y ∉ H_i for every i."""
    return not any(inside for _, inside in _composed_residuals(hyperplanes, np.asarray(y, float)))


def _perturb(hyperplanes: Sequence[Hyperplane], x, eps: float, composed: bool) -> np.ndarray:
    if not eps > 0:
        raise PreconditionViolated("eps must be positive")
    if any(H.degeneracy != "proper" for H in hyperplanes):
        raise PreconditionViolated("perturbation needs nonzero normals")
    x = as_point(x, hyperplanes[0].dim)
    oracle_proj_affine_intersection(hyperplanes, x)  # raises when ∩ H_i = ∅
    residuals = _composed_residuals if composed else _plain_residuals
    m = len(hyperplanes)
    y = x.copy()
    for _ in range(m):
        current = residuals(hyperplanes, y)
        bad = [i for i, (_, inside) in enumerate(current) if inside]
        if not bad:
            return y
        j = bad[0]
        # Moving along d shifts the j-th condition by t·‖u_j‖² while staying in
        # span{u_i}, so the projection onto the intersection is unchanged.
        d = hyperplanes[j].u.copy()
        if composed:
            for H in reversed(hyperplanes[:j]):
                d = linear_reflect(H.u, d)
        signs = [np.sign(r) for r, _ in current[:j]]

        def safe(t: float) -> bool:
            trial = residuals(hyperplanes, y + t * d)[:j]
            return all(
                (not inside) and np.sign(r) == s and abs(r) >= SAFETY_MARGIN
                for (r, inside), s in zip(trial, signs)
            )

        # shrunk by a relative 1e-12 so rounding cannot push ‖y − x‖ past eps
        t_max = eps / (m * float(np.linalg.norm(d))) * (1.0 - 1e-12)
        if safe(t_max):
            t = t_max
        else:
            lo, hi = 0.0, t_max
            for _ in range(BISECTION_STEPS):
                mid = 0.5 * (lo + hi)
                if safe(mid):
                    lo = mid
                else:
                    hi = mid
            t = 0.5 * lo
        y = y + t * d
    if any(inside for _, inside in residuals(hyperplanes, y)):
        raise SamplerFailed("perturbation did not reach a generic point")
    return y


def perturb_plain(reflector_sets: Sequence[Hyperplane], x, eps: float) -> np.ndarray:
    """A point within eps of x lying on no H_i, with the same projection onto ∩ H_i."""
    return _perturb(list(reflector_sets), x, eps, composed=False)


def perturb_composed(reflector_sets: Sequence[Hyperplane], x, eps: float) -> np.ndarray:
    """As perturb_plain, but genericity is required of every partial composite."""
    return _perturb(list(reflector_sets), x, eps, composed=True)


# Equidistance cone ----------------------------------------------------------

def distance_spread(hyperplanes: Sequence[Hyperplane], x) -> tuple[float, float]:
    """(max − min, max) of the distances from x to each hyperplane."""
    d = np.array([H.distance(x) for H in hyperplanes])
    return float(d.max() - d.min()), float(d.max())


def sample_equidistance_cone(hyperplanes: Sequence[Hyperplane], seed: int, retries: int = 50) -> np.ndarray:
    """A random x with ‖x − P_{H_i}x‖ equal for every i.

    Picks a random sign pattern s and level d > 0 and projects a random point
    onto the affine set {⟨x, u_i⟩/‖u_i‖ − η_i/‖u_i‖ = s_i d}.
    """
    rng = np.random.default_rng(seed)
    center = oracle_proj_affine_intersection(hyperplanes, np.zeros(hyperplanes[0].dim))
    for _ in range(retries):
        level = rng.uniform(0.1, 2.0)
        signs = rng.choice([-1.0, 1.0], size=len(hyperplanes))
        shifted = [
            Hyperplane(H.u / H.norm_u, H.eta / H.norm_u + s * level)
            for H, s in zip(hyperplanes, signs)
        ]
        x0 = center + rng.standard_normal(center.shape[0])
        try:
            x = oracle_proj_affine_intersection(shifted, x0)
        except InfeasibleIntersection:
            continue
        spread, top = distance_spread(hyperplanes, x)
        if spread <= TOL_NUM * max(1.0, top):
            return x
    raise SamplerFailed("no equidistant point found within the retry budget")
