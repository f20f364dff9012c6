"""Acceptance criteria 1-10.

Each criterion prints one `criterion N: PASS|FAIL ...` line. Run directly with
`python3 tests/test_acceptance.py` for the summary alone.
"""

import functools
import time

import numpy as np
import pytest

from circumcentered import generators as gen
from circumcentered.ccmap import OperatorFamily, cc_map, projector, prox_crm_step, separating_target
from circumcentered.circumcenter import circumcenter3, circumcenter_equidistant, circumcenter_general
from circumcentered.harness import REGISTRY, run_theorem_suite
from circumcentered.oracles import oracle_proj_polyhedron, sample_equidistance_cone

SEED = 20260101


@functools.lru_cache(maxsize=None)
def campaign(theorem_id, trials, dims=None):
    """Campaign reports are shared, so criterion 7 reads the runs of 3-6."""
    return run_theorem_suite(theorem_id, trials, SEED, dims=dims)


def hybrid_gap(a, b):
    return float(np.linalg.norm(a - b)) / max(1.0, float(np.linalg.norm(a)), float(np.linalg.norm(b)))


def same_outcome(a, b, tol):
    if a.is_empty or b.is_empty:
        return a.is_empty and b.is_empty
    return hybrid_gap(a.point, b.point) <= tol


def timed(fn):
    start = time.perf_counter()
    ok, detail = fn()
    return ok, detail, time.perf_counter() - start


# criteria ------------------------------------------------------------------------

def _spread(pts):
    s = np.linalg.svd(np.array([pts[1] - pts[0], pts[2] - pts[0]]), compute_uv=False)
    return s[1] / s[0]


def _near_collinear(rng, n):
    """Exactly collinear (one in five) or singular-value ratio in [1e-6, 1e-2]."""
    while True:
        a, b = rng.uniform(-5, 5, n), rng.uniform(-5, 5, n)
        c = a + rng.uniform(-2, 3) * (b - a)
        if rng.random() < 0.2:
            return a, b, c
        c = c + 10.0 ** rng.uniform(-6, -2) * np.linalg.norm(b - a) * gen.unit(rng, n)
        if 1e-6 <= _spread((a, b, c)) <= 1e-2:
            return a, b, c


def criterion_1():
    rng = np.random.default_rng([SEED, 1])
    bad = 0
    for i in range(10_000):
        n = 2 if i % 2 else 5
        pts = _near_collinear(rng, n) if i < 1000 else [rng.uniform(-5, 5, n) for _ in range(3)]
        if not same_outcome(circumcenter3(*pts), circumcenter_general(list(pts)), 1e-9):
            bad += 1
    return bad == 0, f"{bad} mismatches in 10000 triples"


def criterion_2():
    rng = np.random.default_rng([SEED, 2])
    bad, min_alpha = 0, np.inf
    for i in range(10_000):
        n = int(rng.integers(2, 7))
        x = rng.uniform(-5, 5, n)
        r = rng.uniform(0.1, 5)
        v = gen.unit(rng, n)
        w = -v if i % 50 == 0 else gen.unit(rng, n)
        y, z = x + r * v, x + r * w
        out = circumcenter_equidistant(x, y, z)
        if i % 50 == 0:
            bad += not out.is_empty
            continue
        ref = circumcenter3(x, y, z)
        if not same_outcome(out, ref, 1e-9):
            bad += 1
        elif not out.is_empty:
            min_alpha = min(min_alpha, out.alpha)
            bad += out.alpha < 0.25 * (1 - 1e-12)
    return bad == 0, f"{bad} failures, min alpha {min_alpha:.6f}"


def criterion_3():
    r = campaign("S2_three_step", 4000, (2, 3, 6, 16))
    ok = r.ok and r.passed == 4000 and max(r.step_histogram) <= 3 and r.max_violation <= 1e-8
    return ok, f"{r.passed}/4000 within 3 steps, steps {dict(sorted(r.step_histogram.items()))}"


def _campaign_line(reports):
    return ", ".join(f"{r.theorem_id} {r.passed}/{r.trials}" for r in reports)


def criterion_4():
    reports = [campaign(t, 6000) for t in ("m_hyperplanes_id_prefixed", "m_hyperplanes_composed")]
    ok = all(r.ok and r.passed == 6000 and r.max_violation <= 1e-8 for r in reports)
    return ok, _campaign_line(reports)


def criterion_5():
    reports = [campaign(t, 4000) for t in ("perturb_plain", "perturb_composed")]
    ok = all(r.ok and r.passed == 4000 and r.max_violation <= 1e-9 for r in reports)
    return ok, _campaign_line(reports)


HALFSPACE_CAMPAIGNS = ("halfspace_direct", "halfspace_direct_dependent", "halfspace_composed",
                       "halfspace_composed_dependent", "mixed_pair", "halfspace_feasibility")


def _halfspace_reports():
    out = []
    for t in HALFSPACE_CAMPAIGNS:
        cells = REGISTRY[t].strata
        dims = len(REGISTRY[t].dims)
        # every cell gets 67 * dims >= 200 instances
        out.append(campaign(t, 67 * dims * cells))
    return out


def criterion_6():
    reports = _halfspace_reports()
    return all(r.ok and r.failed == 0 for r in reports), _campaign_line(reports)


def criterion_7():
    reports = [campaign("S2_three_step", 4000, (2, 3, 6, 16))]
    reports += [campaign(t, 6000) for t in ("m_hyperplanes_id_prefixed", "m_hyperplanes_composed")]
    reports += [campaign("FQNE_identity", 1200)]
    pyth = max(r.max_pythagorean for r in reports)
    fejer = max(r.max_fejer for r in reports + [campaign("prox_crm_step", 500)])
    return pyth <= 1e-8 and fejer <= 1e-10, f"max identity violation {pyth:.2e}, max Fejer excess {fejer:.2e}"


def criterion_8():
    r = campaign("S1_map_subsequence", 500)
    return r.ok and r.passed == 500, f"{r.passed}/500 pairs, max gap {r.max_violation:.2e}"


def criterion_9():
    rng = np.random.default_rng([SEED, 9])
    far, outside_u, worst_identity = 0, 0, 0.0
    for i in range(500):
        C, U, x = gen.ball_affine_instance(rng, bool(i & 1), bool(i & 2))
        y = prox_crm_step(C, U, x)
        far += hybrid_gap(y, separating_target(C, U, x)) > 1e-8
        outside_u += not U.contains(y)
        for _ in range(3):
            if isinstance(C, gen.Ball):
                z = gen.sample_in_ball_cap_affine(rng, C, U)
            else:
                z = oracle_proj_polyhedron([C, U], rng.uniform(-5, 5, 3))
            rhs = float(np.sum((x - z) ** 2))
            lhs = float(np.sum((y - x) ** 2) + np.sum((y - z) ** 2))
            worst_identity = max(worst_identity, abs(lhs - rhs) / max(1.0, rhs))
    ok = far == 0 and outside_u == 0 and worst_identity <= 1e-8
    return ok, (f"{500 - far}/500 match P_(H_x∩U) x, {500 - outside_u}/500 in U, "
                f"identity over z in C∩U off by up to {worst_identity:.2e}")


def criterion_10():
    rng = np.random.default_rng([SEED, 10])
    bad = 0
    for i in range(500):
        m, n = 2 + i % 2, (3, 4, 6)[i % 3]
        hs = gen.concurrent_hyperplanes(rng, n, m)
        x = sample_equidistance_cone(hs, int(rng.integers(2**31)))
        y = cc_map(OperatorFamily.id_prefixed([projector(H) for H in hs]), x)
        if y.is_empty:
            bad += 1
            continue
        dx = np.array([H.distance(x) for H in hs])
        dy = np.array([H.distance(y.point) for H in hs])
        scale = max(1.0, float(dx.max()))
        bad += (dy.max() - dy.min() > 1e-8 * scale) or np.any(np.abs(dy - 0.5 * dx) > 1e-8 * scale)
    return bad == 0, f"{500 - bad}/500 cone points stay in the cone at half distance"


CRITERIA = {
    1: (criterion_1, 5.0),
    2: (criterion_2, 5.0),
    3: (criterion_3, 30.0),
    4: (criterion_4, 60.0),
    5: (criterion_5, 30.0),
    6: (criterion_6, 60.0),
    7: (criterion_7, None),
    8: (criterion_8, 10.0),
    9: (criterion_9, 10.0),
    10: (criterion_10, 10.0),
}


def evaluate(number):
    fn, cap = CRITERIA[number]
    ok, detail, elapsed = timed(fn)
    in_time = cap is None or elapsed < cap
    limit = "" if cap is None else f" (cap {cap:.0f} s)"
    line = f"criterion {number}: {'PASS' if ok and in_time else 'FAIL'} {detail}; {elapsed:.1f} s{limit}"
    return ok, in_time, line


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    ok, in_time, line = evaluate(number)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line
    assert in_time, line


if __name__ == "__main__":
    for k in sorted(CRITERIA):
        print(evaluate(k)[2], flush=True)
