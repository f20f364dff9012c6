"""Circumcenter of a finite point set.

The circumcenter of K is the unique point of aff(K) equidistant from every
member of K. It need not exist; an `Empty` outcome is a value, not an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, PreconditionViolated
from .tolerances import RANK_RTOL, TOL_NUM

POINT = "point"
EMPTY = "empty"


@dataclass(frozen=True)
class CircumcenterOutcome:
    kind: str
    point: Optional[np.ndarray]
    affine_rank: int
    alpha: Optional[float] = None

    @property
    def is_empty(self) -> bool:
        return self.kind == EMPTY

    @classmethod
    def empty(cls, affine_rank: int) -> "CircumcenterOutcome":
        return cls(EMPTY, None, affine_rank)

    def to_json(self) -> dict:
        out = {"kind": self.kind, "affine_rank": self.affine_rank}
        out["point"] = None if self.point is None else self.point.tolist()
        if self.alpha is not None:
            out["alpha"] = self.alpha
        return out


def _same(p: np.ndarray, q: np.ndarray) -> bool:
    scale = max(1.0, float(np.linalg.norm(p)), float(np.linalg.norm(q)))
    return float(np.linalg.norm(p - q)) <= TOL_NUM * scale


def distinct_points(points: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Collapse near-duplicates, keeping first occurrences in input order."""
    kept: list[np.ndarray] = []
    for p in points:
        if not any(_same(p, q) for q in kept):
            kept.append(p)
    return kept


def _as_points(points) -> list[np.ndarray]:
    pts = [np.asarray(p, dtype=float).reshape(-1) for p in points]
    if not pts:
        raise PreconditionViolated("circumcenter of an empty list")
    n = pts[0].shape[0]
    if any(p.shape[0] != n for p in pts):
        raise DimensionMismatch("points of different dimension")
    return pts


def _pair_independent(a: np.ndarray, b: np.ndarray) -> tuple[bool, float]:
    """Rank test for two difference vectors, same criterion as the SVD rank.

    The Gram determinant is accumulated from 2x2 minors (Lagrange identity),
    which keeps it accurate for nearly parallel vectors.
    """
    outer = np.outer(a, b)
    minors = outer - outer.T
    det = 0.5 * float(np.sum(minors * minors))
    trace = float(a @ a + b @ b)
    disc = max(trace * trace - 4.0 * det, 0.0)
    s_max_sq = 0.5 * (trace + np.sqrt(disc))
    if s_max_sq == 0.0:
        return False, det
    s_min_sq = det / s_max_sq
    return np.sqrt(s_min_sq) > RANK_RTOL * np.sqrt(s_max_sq), det


def circumcenter3(x, y, z) -> CircumcenterOutcome:
    """Closed-form circumcenter of {x, y, z}."""
    x, y, z = _as_points([x, y, z])
    pts = distinct_points([x, y, z])
    if len(pts) == 1:
        return CircumcenterOutcome(POINT, pts[0].copy(), 0)
    if len(pts) == 2:
        return CircumcenterOutcome(POINT, 0.5 * (pts[0] + pts[1]), 1)
    a, b = y - x, z - x
    independent, det = _pair_independent(a, b)
    if not independent:
        return CircumcenterOutcome.empty(1)
    # barycentric weights of y and z; the weights of x, y, z sum to 2*det,
    # so the formula is evaluated relative to x.
    w_y = float(b @ b) * float((y - z) @ (y - x))
    w_z = float(a @ a) * float((z - x) @ (z - y))
    return CircumcenterOutcome(POINT, x + (w_y * a + w_z * b) / (2.0 * det), 2)


def circumcenter_equidistant(x, y, z) -> CircumcenterOutcome:
    """Circumcenter of {x, y, z} when ‖x − y‖ = ‖x − z‖, via the α coefficient."""
    x, y, z = _as_points([x, y, z])
    dxy = float(np.linalg.norm(y - x))
    dxz = float(np.linalg.norm(z - x))
    if abs(dxy - dxz) > TOL_NUM * max(1.0, dxy):
        raise PreconditionViolated(f"‖x−y‖ = {dxy!r} differs from ‖x−z‖ = {dxz!r}")
    if _same(x, y):
        return CircumcenterOutcome(POINT, x.copy(), 0)
    if _same(y, z):
        alpha = 0.25
        return CircumcenterOutcome(POINT, x + alpha * (y - x) + alpha * (z - x), 1, alpha)
    independent, _ = _pair_independent(y - x, z - x)
    if not independent:
        # equidistant, collinear and y != z forces x = (y + z) / 2
        return CircumcenterOutcome.empty(1)
    ratio = float((y - z) @ (y - z)) / float((y - x) @ (y - x))
    alpha = 1.0 / (4.0 - ratio)
    return CircumcenterOutcome(POINT, x + alpha * (y - x) + alpha * (z - x), 2, alpha)


CHOLESKY_MIN_RATIO = 1e-2


def _independent_rows(diffs: np.ndarray) -> tuple[list[int], float]:
    """Greedy maximal independent subset of rows at the relative rank threshold."""
    s_all = np.linalg.svd(diffs, compute_uv=False)
    s_max = float(s_all[0]) if s_all.size else 0.0
    chosen: list[int] = []
    if s_max == 0.0:
        return chosen, s_max
    for i in range(diffs.shape[0]):
        if len(chosen) == diffs.shape[1]:
            break
        trial = diffs[chosen + [i]]
        s = np.linalg.svd(trial, compute_uv=False)
        if s[len(chosen)] > RANK_RTOL * s_max:
            chosen.append(i)
    return chosen, s_max


def affine_rank(points) -> int:
    pts = distinct_points(_as_points(points))
    if len(pts) == 1:
        return 0
    diffs = np.array([p - pts[0] for p in pts[1:]])
    s = np.linalg.svd(diffs, compute_uv=False)
    return int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0


def circumcenter_general(points) -> CircumcenterOutcome:
    """Circumcenter of any finite set via a Gram system on independent differences."""
    pts = distinct_points(_as_points(points))
    p0 = pts[0]
    if len(pts) == 1:
        return CircumcenterOutcome(POINT, p0.copy(), 0)
    diffs = np.array([p - p0 for p in pts[1:]])
    chosen, _ = _independent_rows(diffs)
    rank = len(chosen)
    sel = diffs[chosen]
    rhs = 0.5 * np.einsum("ij,ij->i", sel, sel)
    gram = sel @ sel.T
    s = np.linalg.svd(sel, compute_uv=False)
    # the Gram matrix squares the conditioning, so Cholesky is kept for
    # well-spread differences only
    if s[-1] > CHOLESKY_MIN_RATIO * s[0]:
        try:
            chol = np.linalg.cholesky(gram)
            beta = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
            offset = sel.T @ beta
        except np.linalg.LinAlgError:
            offset = np.linalg.lstsq(sel, rhs, rcond=None)[0]
    else:
        # badly conditioned Gram matrix: minimum-norm solve of sel v = rhs
        offset = np.linalg.lstsq(sel, rhs, rcond=None)[0]

    radii = np.concatenate([[np.linalg.norm(offset)], np.linalg.norm(offset - diffs, axis=1)])
    rel = np.vstack([np.zeros(diffs.shape[1]), diffs])
    diameter = max(
        float(np.max(np.linalg.norm(rel[i + 1:] - rel[i], axis=1))) for i in range(len(rel) - 1)
    )
    if float(radii.max() - radii.min()) <= TOL_NUM * (1.0 + diameter):
        return CircumcenterOutcome(POINT, p0 + offset, rank)
    return CircumcenterOutcome.empty(rank)


def circumcenter(points) -> CircumcenterOutcome:
    """CCO(K): dispatches to the closed form for three points."""
    pts = _as_points(points)
    if len(pts) == 3:
        return circumcenter3(*pts)
    return circumcenter_general(pts)
