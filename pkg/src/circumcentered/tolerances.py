"""Numerical tolerances and the hybrid absolute/relative comparison."""

import numpy as np

TOL_NUM = 1e-9
TOL_MEM = 1e-9
TOL_ORTH = 1e-12
TOL_DEP = 1e-10
RANK_RTOL = 1e-10

STOP_TOL = 1e-10
MAX_ITER = 10_000


def scalar_close(a: float, b: float, tol: float = TOL_NUM) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def points_close(p, q, tol: float = TOL_NUM) -> bool:
    """‖p − q‖ ≤ tol · max(1, ‖p‖, ‖q‖)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    scale = max(1.0, float(np.linalg.norm(p)), float(np.linalg.norm(q)))
    return float(np.linalg.norm(p - q)) <= tol * scale


def relative_gap(p, q) -> float:
    """‖p − q‖ / max(1, ‖p‖, ‖q‖); the quantity bounded by points_close."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    scale = max(1.0, float(np.linalg.norm(p)), float(np.linalg.norm(q)))
    return float(np.linalg.norm(p - q)) / scale
