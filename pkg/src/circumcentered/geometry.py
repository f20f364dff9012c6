"""Convex-set representations and closed-form projectors/reflectors.

Supported sets are hyperplanes, halfspaces, affine subspaces and closed balls
in R^n. Every set is immutable; projectors are pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DimensionMismatch, EmptySet, PreconditionViolated
from .tolerances import RANK_RTOL, TOL_MEM, TOL_ORTH


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Convert to a finite float vector, checking the dimension when given."""
    arr = np.array(x, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise PreconditionViolated("point has non-finite entries")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {arr.shape[0]}")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


# Degeneracy labels for hyperplanes/halfspaces with a zero normal.
PROPER = "proper"
WHOLE_SPACE = "whole_space"
EMPTY = "empty"


class _LinearConstraint:
    __slots__ = ()
    u: np.ndarray
    eta: float

    @property
    def dim(self) -> int:
        return self.u.shape[0]

    @property
    def norm_u(self) -> float:
        return float(np.linalg.norm(self.u))

    def residual(self, x) -> float:
        """⟨x,u⟩ − η."""
        return float(np.dot(x, self.u)) - self.eta

    def _mem_scale(self, x) -> float:
        return TOL_MEM * max(1.0, self.norm_u * float(np.linalg.norm(x)))

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and np.array_equal(self.u, other.u)
            and self.eta == other.eta
        )

    def __hash__(self):
        return hash((type(self).__name__, self.u.tobytes(), self.eta))


@dataclass(frozen=True, eq=False)
class Hyperplane(_LinearConstraint):
    """{x : ⟨x,u⟩ = eta}."""

    u: np.ndarray
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen(as_point(self.u)))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def degeneracy(self) -> str:
        if np.any(self.u != 0.0):
            return PROPER
        return WHOLE_SPACE if self.eta == 0.0 else EMPTY

    def contains(self, x) -> bool:
        if self.degeneracy != PROPER:
            return self.degeneracy == WHOLE_SPACE
        return abs(self.residual(x)) <= self._mem_scale(x)

    def distance(self, x) -> float:
        if self.degeneracy != PROPER:
            if self.degeneracy == EMPTY:
                raise EmptySet("distance to an empty hyperplane")
            return 0.0
        return abs(self.residual(x)) / self.norm_u


@dataclass(frozen=True, eq=False)
class Halfspace(_LinearConstraint):
    """{x : ⟨x,u⟩ ≤ eta}."""

    u: np.ndarray
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen(as_point(self.u)))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def degeneracy(self) -> str:
        if np.any(self.u != 0.0):
            return PROPER
        return WHOLE_SPACE if self.eta >= 0.0 else EMPTY

    @property
    def boundary(self) -> Hyperplane:
        return Hyperplane(self.u, self.eta)

    def contains(self, x) -> bool:
        if self.degeneracy != PROPER:
            return self.degeneracy == WHOLE_SPACE
        return self.residual(x) <= self._mem_scale(x)

    def distance(self, x) -> float:
        if self.degeneracy != PROPER:
            if self.degeneracy == EMPTY:
                raise EmptySet("distance to an empty halfspace")
            return 0.0
        return max(0.0, self.residual(x)) / self.norm_u


def orthonormal_rows(vectors, dim: int) -> np.ndarray:
    """Orthonormal basis (as rows) of span(vectors), rank-truncated.

    Vectors that are already orthonormal to TOL_ORTH are returned unchanged so
    that a basis survives a serialization round trip bit for bit.
    """
    mat = np.array(vectors, dtype=float).reshape(-1, dim) if len(vectors) else np.zeros((0, dim))
    if mat.shape[0] == 0:
        return mat
    gram = mat @ mat.T
    if np.max(np.abs(gram - np.eye(mat.shape[0]))) <= TOL_ORTH:
        return mat
    _, s, vt = np.linalg.svd(mat, full_matrices=False)
    keep = s > RANK_RTOL * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    return vt[keep]


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """anchor + span(basis), with `basis` an orthonormal set of rows."""

    anchor: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        anchor = as_point(self.anchor)
        n = anchor.shape[0]
        basis = np.array(self.basis, dtype=float).reshape(-1, n) if np.size(self.basis) else np.zeros((0, n))
        if basis.shape[0] and np.max(np.abs(basis @ basis.T - np.eye(basis.shape[0]))) > TOL_ORTH:
            raise PreconditionViolated("basis is not orthonormal; use AffineSubspace.from_span")
        object.__setattr__(self, "anchor", _frozen(anchor))
        object.__setattr__(self, "basis", _frozen(basis))

    @classmethod
    def from_span(cls, anchor, vectors) -> "AffineSubspace":
        anchor = as_point(anchor)
        vectors = [as_point(v, anchor.shape[0]) for v in vectors]
        return cls(anchor, orthonormal_rows(vectors, anchor.shape[0]))

    @property
    def dim(self) -> int:
        return self.anchor.shape[0]

    @property
    def subspace_dim(self) -> int:
        return self.basis.shape[0]

    def complement_normals(self) -> np.ndarray:
        """Orthonormal rows spanning (par U)^⊥."""
        if self.subspace_dim == 0:
            return np.eye(self.dim)
        _, _, vt = np.linalg.svd(self.basis, full_matrices=True)
        return vt[self.subspace_dim:]

    def as_hyperplanes(self) -> list[Hyperplane]:
        return [Hyperplane(w, float(w @ self.anchor)) for w in self.complement_normals()]

    def contains(self, x) -> bool:
        gap = np.linalg.norm(proj_affine(self, x) - x)
        return gap <= TOL_MEM * max(1.0, float(np.linalg.norm(x)))

    def __eq__(self, other):
        return (
            isinstance(other, AffineSubspace)
            and np.array_equal(self.anchor, other.anchor)
            and np.array_equal(self.basis, other.basis)
        )

    def __hash__(self):
        return hash(("affine", self.anchor.tobytes(), self.basis.tobytes()))


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed ball {y : ‖y − center‖ ≤ radius}."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(as_point(self.center)))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.radius > 0:
            raise PreconditionViolated("ball radius must be positive")

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, x) -> bool:
        d = float(np.linalg.norm(np.asarray(x) - self.center))
        return d - self.radius <= TOL_MEM * max(1.0, self.radius)

    def __eq__(self, other):
        return (
            isinstance(other, Ball)
            and np.array_equal(self.center, other.center)
            and self.radius == other.radius
        )

    def __hash__(self):
        return hash(("ball", self.center.tobytes(), self.radius))


ConvexSet = Union[Hyperplane, Halfspace, AffineSubspace, Ball]


def set_dim(C: ConvexSet) -> int:
    return C.dim


def check_same_dim(sets: Sequence[ConvexSet], *points) -> int:
    """Return the common ambient dimension or raise DimensionMismatch."""
    dims = {set_dim(C) for C in sets}
    dims.update(np.asarray(p).reshape(-1).shape[0] for p in points)
    if len(dims) != 1:
        raise DimensionMismatch(f"mixed ambient dimensions {sorted(dims)}")
    return dims.pop()


def _check(C: ConvexSet, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (C.dim,):
        raise DimensionMismatch(f"set has dimension {C.dim}, point has shape {x.shape}")
    return x


def proj_hyperplane(H: Hyperplane, x) -> np.ndarray:
    x = _check(H, x)
    deg = H.degeneracy
    if deg == EMPTY:
        raise EmptySet("hyperplane with u = 0 and eta != 0 is empty")
    if deg == WHOLE_SPACE:
        return x.copy()
    return x + ((H.eta - float(x @ H.u)) / float(H.u @ H.u)) * H.u


def proj_halfspace(W: Halfspace, x) -> np.ndarray:
    x = _check(W, x)
    deg = W.degeneracy
    if deg == EMPTY:
        raise EmptySet("halfspace with u = 0 and eta < 0 is empty")
    if deg == WHOLE_SPACE or float(x @ W.u) <= W.eta:
        return x.copy()
    return x + ((W.eta - float(x @ W.u)) / float(W.u @ W.u)) * W.u


def proj_affine(U: AffineSubspace, x) -> np.ndarray:
    x = _check(U, x)
    if U.subspace_dim == 0:
        return U.anchor.copy()
    return U.anchor + U.basis.T @ (U.basis @ (x - U.anchor))


def proj_ball(B: Ball, x) -> np.ndarray:
    x = _check(B, x)
    d = x - B.center
    r = float(np.linalg.norm(d))
    if r <= B.radius:
        return x.copy()
    return B.center + (B.radius / r) * d


def project(C: ConvexSet, x) -> np.ndarray:
    if isinstance(C, Hyperplane):
        return proj_hyperplane(C, x)
    if isinstance(C, Halfspace):
        return proj_halfspace(C, x)
    if isinstance(C, AffineSubspace):
        return proj_affine(C, x)
    if isinstance(C, Ball):
        return proj_ball(C, x)
    raise TypeError(f"unsupported set type {type(C).__name__}")


def reflect(C: ConvexSet, x) -> np.ndarray:
    """R_C x = 2 P_C x − x."""
    x = np.asarray(x, dtype=float)
    return 2.0 * project(C, x) - x


def contains(C: ConvexSet, x) -> bool:
    return C.contains(np.asarray(x, dtype=float))


def translate(C: ConvexSet, z) -> ConvexSet:
    """The set C − z."""
    z = _check(C, np.asarray(z, dtype=float))
    if isinstance(C, (Hyperplane, Halfspace)):
        return type(C)(C.u, C.eta - float(z @ C.u))
    if isinstance(C, AffineSubspace):
        return AffineSubspace(C.anchor - z, C.basis)
    if isinstance(C, Ball):
        return Ball(C.center - z, C.radius)
    raise TypeError(f"unsupported set type {type(C).__name__}")


def translate_family(sets: Sequence[ConvexSet], z) -> list[ConvexSet]:
    return [translate(C, z) for C in sets]


def linear_reflect(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Reflection of v across the linear hyperplane u^⊥."""
    return v - (2.0 * float(v @ u) / float(u @ u)) * u


# JSON encoding -------------------------------------------------------------

def set_to_json(C: ConvexSet) -> dict:
    if isinstance(C, Hyperplane):
        return {"type": "hyperplane", "u": C.u.tolist(), "eta": C.eta}
    if isinstance(C, Halfspace):
        return {"type": "halfspace", "u": C.u.tolist(), "eta": C.eta}
    if isinstance(C, AffineSubspace):
        return {"type": "affine", "anchor": C.anchor.tolist(), "span": C.basis.tolist()}
    if isinstance(C, Ball):
        return {"type": "ball", "center": C.center.tolist(), "radius": C.radius}
    raise TypeError(f"unsupported set type {type(C).__name__}")


def set_from_json(obj: dict) -> ConvexSet:
    """Decode one ConvexSet; raises ValueError/KeyError/TypeError on bad input."""
    if not isinstance(obj, dict):
        raise TypeError("set specification must be a JSON object")
    kind = obj["type"]
    if kind == "hyperplane":
        return Hyperplane(obj["u"], obj["eta"])
    if kind == "halfspace":
        return Halfspace(obj["u"], obj["eta"])
    if kind == "affine":
        anchor = as_point(obj["anchor"])
        return AffineSubspace.from_span(anchor, obj.get("span", []))
    if kind == "ball":
        return Ball(obj["center"], obj["radius"])
    raise ValueError(f"unknown set type {kind!r}")
