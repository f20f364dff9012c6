"""Random instance generators used by the harness and the tests.

Each generator draws from a numpy Generator and returns instances that
satisfy the hypotheses they are named after; conditioning is kept away from
the degenerate limits (nearly parallel normals, nearly collinear triples).
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from . import geometry as geo
from .geometry import AffineSubspace, Ball, Halfspace, Hyperplane
from .halfspace_analysis import COMPOSED, DIRECT, S1, S2, S3, explain_mixed, explain_pair
from .oracles import oracle_proj_affine_intersection

MAX_ABS_COS = 0.99
MIN_SINGULAR = 0.1


def unit(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal(n)
    return v / np.linalg.norm(v)


def normal_vector(rng: np.random.Generator, n: int) -> np.ndarray:
    """A random normal with norm in [0.5, 2]."""
    return unit(rng, n) * rng.uniform(0.5, 2.0)


def well_spread_normals(rng: np.random.Generator, n: int, m: int) -> np.ndarray:
    """m random normals whose normalized matrix has smallest singular value ≥ MIN_SINGULAR."""
    for _ in range(1000):
        U = np.array([normal_vector(rng, n) for _ in range(m)])
        s = np.linalg.svd(U / np.linalg.norm(U, axis=1, keepdims=True), compute_uv=False)
        if s[-1] >= MIN_SINGULAR:
            return U
    raise RuntimeError("could not draw well-conditioned normals")


def hyperplanes_through(rng: np.random.Generator, point: np.ndarray, m: int) -> list[Hyperplane]:
    n = point.shape[0]
    return [Hyperplane(u, float(u @ point)) for u in well_spread_normals(rng, n, m)]


def concurrent_hyperplanes(rng: np.random.Generator, n: int, m: int) -> list[Hyperplane]:
    return hyperplanes_through(rng, rng.uniform(-2.0, 2.0, n), m)


def independent_pair(rng: np.random.Generator, n: int, sign: Optional[str] = None) -> tuple[np.ndarray, np.ndarray]:
    """Two normals with |cos| ≤ MAX_ABS_COS and the requested sign of ⟨u1,u2⟩."""
    for _ in range(1000):
        u1, u2 = normal_vector(rng, n), normal_vector(rng, n)
        if sign == "zero":
            u2 = u2 - (u2 @ u1) / (u1 @ u1) * u1
            if np.linalg.norm(u2) < 0.3:
                continue
        cos = float(u1 @ u2) / (np.linalg.norm(u1) * np.linalg.norm(u2))
        if abs(cos) > MAX_ABS_COS or (sign in ("positive", "negative") and abs(cos) < 0.05):
            continue
        if sign == "positive" and cos < 0 or sign == "negative" and cos > 0:
            u2 = -u2
        return u1, u2
    raise RuntimeError("could not draw an independent pair")


def random_affine(rng: np.random.Generator, n: int, k: int, through: Optional[np.ndarray] = None) -> AffineSubspace:
    anchor = rng.uniform(-2.0, 2.0, n) if through is None else through
    vectors = rng.standard_normal((k, n)) if k else np.zeros((0, n))
    return AffineSubspace.from_span(anchor, list(vectors))


# Hyperplane pairs with stratified starting points -----------------------------

START_KINDS = ("on_H1_only", "on_H2_only", "off_both", "on_both")


def hyperplane_pair_with_start(rng: np.random.Generator, n: int, start: str):
    """A feasible hyperplane pair plus a start of the requested kind."""
    if n == 1:
        raise ValueError("need n ≥ 2")
    u1, u2 = independent_pair(rng, n)
    p = rng.uniform(-2.0, 2.0, n)
    H1, H2 = Hyperplane(u1, float(u1 @ p)), Hyperplane(u2, float(u2 @ p))
    x = p + rng.uniform(0.5, 3.0) * unit(rng, n)
    if start == "on_H1_only":
        x = geo.proj_hyperplane(H1, x)
    elif start == "on_H2_only":
        x = geo.proj_hyperplane(H2, x)
    elif start == "on_both":
        x = oracle_proj_affine_intersection([H1, H2], x)
    for H, want in ((H1, start in ("on_H1_only", "on_both")), (H2, start in ("on_H2_only", "on_both"))):
        if H.contains(x) != want:
            return hyperplane_pair_with_start(rng, n, start)
    return H1, H2, x


# Halfspace-pair cells ---------------------------------------------------------

# cell name -> (family kind, pair structure, expected case tag)
HALFSPACE_CELLS = {
    # direct family
    "direct/zero_normal": (DIRECT, "zero_normal", "zero_normal"),
    "direct/dependent_equal": (DIRECT, "dep_pos_eq", "dependent_equal"),
    "direct/dependent_nested_in_union": (DIRECT, "dep_pos_neq", "dependent_nested_in_union"),
    "direct/dependent_nested_outside_both": (DIRECT, "dep_pos_neq", "dependent_nested_outside_both"),
    "direct/dependent_opposite": (DIRECT, "dep_neg", "dependent_opposite"),
    "direct/independent_in_both": (DIRECT, "ind", "independent_in_both"),
    "direct/independent_only_W1_nonneg": (DIRECT, "ind_nonneg", "independent_only_W1"),
    "direct/independent_only_W2_nonneg": (DIRECT, "ind_nonneg", "independent_only_W2"),
    "direct/independent_only_W1_neg": (DIRECT, "ind_neg", "independent_only_W1"),
    "direct/independent_only_W2_neg": (DIRECT, "ind_neg", "independent_only_W2"),
    "direct/independent_outside_both": (DIRECT, "ind", "independent_outside_both"),
    # composed family
    "composed/zero_normal": (COMPOSED, "zero_normal", "zero_normal"),
    "composed/dependent_W1_in_W2": (COMPOSED, "dep_pos_le", "dependent_W1_in_W2"),
    "composed/dependent_W2_in_W1_x_in_W1": (COMPOSED, "dep_pos_gt", "dependent_W2_in_W1_x_in_W1"),
    "composed/dependent_W2_in_W1_far": (COMPOSED, "dep_pos_gt", "dependent_W2_in_W1_far"),
    "composed/dependent_W2_in_W1_near": (COMPOSED, "dep_pos_gt", "dependent_W2_in_W1_near"),
    "composed/dependent_opposite_x_in_W1": (COMPOSED, "dep_neg", "dependent_opposite_x_in_W1"),
    "composed/dependent_opposite_near": (COMPOSED, "dep_neg", "dependent_opposite_near"),
    "composed/dependent_opposite_touching": (COMPOSED, "dep_neg_touch", "dependent_opposite_touching"),
    "composed/dependent_opposite_far": (COMPOSED, "dep_neg", "dependent_opposite_far"),
    "composed/independent_in_both": (COMPOSED, "ind", "independent_in_both"),
    "composed/independent_only_W1_nonneg": (COMPOSED, "ind_nonneg", "independent_only_W1"),
    "composed/independent_only_W1_neg": (COMPOSED, "ind_neg", "independent_only_W1"),
    "composed/independent_only_W2_reflection_in_W2": (COMPOSED, "ind", "independent_only_W2_reflection_in_W2"),
    "composed/independent_only_W2_reflection_outside_W2": (COMPOSED, "ind_neg", "independent_only_W2_reflection_outside_W2"),
    "composed/independent_outside_both_reflection_in_W2": (COMPOSED, "ind_pos", "independent_outside_both_reflection_in_W2"),
    "composed/independent_outside_both_reflection_outside_W2": (COMPOSED, "ind", "independent_outside_both_reflection_outside_W2"),
}

MIXED_CELLS = {
    "mixed/zero_normal": (S1, "zero_normal", "zero_normal"),
    "mixed/dependent": (S1, "dep", "mixed_dependent"),
    "mixed/S1_x_in_W2": (S1, "ind", "S1_x_in_W2"),
    "mixed/S1_generic": (S1, "ind", "S1_generic"),
    "mixed/S1_x_on_H1": (S1, "ind_on_H1", "S1_x_on_H1"),
    "mixed/S2_reflection_in_W2": (S2, "ind", "S2_reflection_in_W2"),
    "mixed/S2_generic": (S2, "ind", "S2_generic"),
    "mixed/S2_x_on_H1": (S2, "ind_on_H1", "S2_x_on_H1"),
    "mixed/S3_x_in_W2": (S3, "ind", "S3_x_in_W2"),
    "mixed/S3_generic": (S3, "ind", "S3_generic"),
    "mixed/S3_reflection_on_H1": (S3, "ind_reflect_on_H1", "S3_reflection_on_H1"),
}


def _halfspace_structure(rng: np.random.Generator, n: int, structure: str) -> tuple[Halfspace, Halfspace]:
    if structure == "zero_normal":
        u = normal_vector(rng, n)
        eta = rng.uniform(-2.0, 2.0)
        whole = Halfspace(np.zeros(n), rng.uniform(0.0, 2.0))
        W = Halfspace(u, eta)
        pick = rng.integers(3)
        if pick == 0:
            return whole, W
        if pick == 1:
            return W, whole
        return whole, Halfspace(np.zeros(n), rng.uniform(0.0, 2.0))
    if structure.startswith("ind"):
        sign = {"ind": None, "ind_nonneg": "positive" if rng.random() < 0.8 else "zero",
                "ind_neg": "negative", "ind_pos": "positive"}[structure]
        u1, u2 = independent_pair(rng, n, sign)
        return Halfspace(u1, rng.uniform(-2.0, 2.0)), Halfspace(u2, rng.uniform(-2.0, 2.0))
    u1 = normal_vector(rng, n)
    n1 = float(np.linalg.norm(u1))
    c = rng.uniform(0.3, 3.0)
    h1 = rng.uniform(-2.0, 2.0)
    if structure.startswith("dep_pos"):
        u2 = c * u1
        n2 = c * n1
        if structure == "dep_pos_eq":
            h2 = h1
        elif structure == "dep_pos_neq":
            h2 = h1 + rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 2.0)
        elif structure == "dep_pos_le":
            h2 = h1 if rng.random() < 0.25 else h1 + rng.uniform(0.2, 2.0)
        else:  # dep_pos_gt
            h2 = h1 - rng.uniform(0.2, 2.0)
        return Halfspace(u1, h1 * n1), Halfspace(u2, h2 * n2)
    # opposite normals: W1 = {a ≤ h1}, W2 = {a ≥ -h2}; feasible iff h1 + h2 ≥ 0
    u2 = -c * u1
    n2 = c * n1
    h2 = -h1 if structure == "dep_neg_touch" else -h1 + rng.uniform(0.2, 2.0)
    return Halfspace(u1, h1 * n1), Halfspace(u2, h2 * n2)


def halfspace_cell_instance(rng: np.random.Generator, n: int, cell: str, tries: int = 2000):
    """(W1, W2, x) whose classification lands in `cell`, away from case boundaries."""
    kind, structure, want = HALFSPACE_CELLS[cell]
    for _ in range(tries):
        W1, W2 = _halfspace_structure(rng, n, structure)
        for _ in range(30):
            x = rng.uniform(-4.0, 4.0, n)
            pred = explain_pair(W1, W2, kind, x)
            if pred.case == want and not pred.boundary:
                return W1, W2, x
    raise RuntimeError(f"no instance found for cell {cell}")


def mixed_cell_instance(rng: np.random.Generator, n: int, cell: str, tries: int = 2000):
    variant, structure, want = MIXED_CELLS[cell]
    for _ in range(tries):
        if structure == "zero_normal":
            if rng.random() < 0.5:
                H1 = Hyperplane(np.zeros(n), 0.0)
                W2 = Halfspace(normal_vector(rng, n), rng.uniform(-2.0, 2.0))
            else:
                H1 = Hyperplane(normal_vector(rng, n), rng.uniform(-2.0, 2.0))
                W2 = Halfspace(np.zeros(n), rng.uniform(0.0, 2.0))
        elif structure == "dep":
            u1 = normal_vector(rng, n)
            c = rng.choice([-1.0, 1.0]) * rng.uniform(0.3, 3.0)
            eta1 = rng.uniform(-2.0, 2.0)
            # H1 ∩ W2 ≠ ∅ forces H1 ⊆ W2: c·η1 ≤ η2
            H1, W2 = Hyperplane(u1, eta1), Halfspace(c * u1, c * eta1 + rng.uniform(0.0, 2.0))
        else:
            u1, u2 = independent_pair(rng, n)
            H1, W2 = Hyperplane(u1, rng.uniform(-2.0, 2.0)), Halfspace(u2, rng.uniform(-2.0, 2.0))
        for _ in range(30):
            x = rng.uniform(-4.0, 4.0, n)
            if structure == "ind_on_H1":
                x = geo.proj_hyperplane(H1, x)
            elif structure == "ind_reflect_on_H1":
                # R_H2 x ∈ H1: reflect a point of H1 across H2
                x = geo.reflect(W2.boundary, geo.proj_hyperplane(H1, x))
            pred = explain_mixed(H1, W2, variant, x)
            if pred.case == want and not pred.boundary:
                return H1, W2, x
    raise RuntimeError(f"no instance found for cell {cell}")


def ball_affine_instance(rng: np.random.Generator, use_ball: bool, line: bool):
    """(C, U, x) in R³ with C ∩ U ≠ ∅ and x ∈ U."""
    n = 3
    U = random_affine(rng, n, 1 if line else 2)
    basis = U.basis
    meet = U.anchor + basis.T @ rng.uniform(-1.0, 1.0, basis.shape[0])
    if use_ball:
        radius = rng.uniform(0.5, 2.0)
        center = meet + unit(rng, n) * rng.uniform(0.0, 0.95 * radius)
        C = Ball(center, radius)
    else:
        u = normal_vector(rng, n)
        C = Halfspace(u, float(u @ meet) + rng.uniform(0.0, 1.0))
    x = U.anchor + basis.T @ rng.uniform(-6.0, 6.0, basis.shape[0])
    return C, U, x


def sample_in_ball_cap_affine(rng: np.random.Generator, B: Ball, U: AffineSubspace) -> np.ndarray:
    c = geo.proj_affine(U, B.center)
    r = np.sqrt(max(B.radius ** 2 - float(np.sum((c - B.center) ** 2)), 0.0))
    coeffs = rng.standard_normal(U.subspace_dim)
    coeffs *= rng.uniform(0.0, 1.0) * r / max(np.linalg.norm(coeffs), 1e-300)
    return c + U.basis.T @ coeffs
