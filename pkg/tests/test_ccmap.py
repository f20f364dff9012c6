import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circumcentered import generators as gen
from circumcentered import geometry as geo
from circumcentered.ccmap import (
    STATUS_CONVERGED,
    STATUS_EMPTY,
    STATUS_MAX_ITER,
    IterationTrace,
    OperatorFamily,
    OperatorSpec,
    apply,
    build_separating,
    cc_map,
    compose,
    evaluate_members,
    identity,
    iterate,
    one_step_pair_check,
    oracle_pair_target,
    projector,
    properness_cone_check,
    prox_crm_formula,
    prox_crm_step,
    reflector,
    separating_target,
    span_rank,
)
from circumcentered.errors import HypothesisViolated, PreconditionViolated
from circumcentered.geometry import AffineSubspace, Ball, Halfspace, Hyperplane
from circumcentered.oracles import (
    oracle_proj_affine_intersection,
    oracle_proj_polyhedron,
    sample_equidistance_cone,
)

TOL = 1e-9


def close(a, b, tol=TOL):
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.linalg.norm(a - b) <= tol * max(1.0, np.linalg.norm(a), np.linalg.norm(b))


def reflector_family(hs, composed):
    ops = [reflector(H) for H in hs]
    return OperatorFamily.composed_prefix(ops) if composed else OperatorFamily.id_prefixed(ops)


# operators --------------------------------------------------------------------

def test_apply_examples():
    x = np.array([1.0, 2.0])
    assert np.array_equal(apply(identity(), x), x)
    H = Hyperplane([1.0, 0.0], 0.0)
    assert close(apply(reflector(H), x), [-1.0, 2.0])
    H2 = Hyperplane([1.0, 1.0], 1.0)
    both = compose(reflector(H2), reflector(H))
    assert close(apply(both, x), geo.reflect(H2, geo.reflect(H, x)))


def test_operator_validation():
    with pytest.raises(PreconditionViolated):
        OperatorSpec("reflector")
    with pytest.raises(PreconditionViolated):
        OperatorSpec("composition", parts=(identity(),))
    assert compose(identity(), identity()).kind == "identity"


def test_fixed_sets_of_projector_are_the_set():
    W = Halfspace([0.0, 1.0], 1.0)
    T = projector(W)
    assert T.fixed_sets == (W,)
    assert close(apply(T, [3.0, 0.5]), [3.0, 0.5])
    assert not close(apply(T, [3.0, 1.5]), [3.0, 1.5])


def test_composed_prefix_expansion():
    hs = [Hyperplane([1.0, 0.0, 0.0], 0.0), Hyperplane([0.0, 1.0, 0.0], 0.0), Hyperplane([0.0, 0.0, 1.0], 1.0)]
    S = reflector_family(hs, composed=True)
    assert len(S.members) == 4
    x = np.array([1.0, 2.0, 3.0])
    manual = [x, geo.reflect(hs[0], x)]
    manual.append(geo.reflect(hs[1], manual[-1]))
    manual.append(geo.reflect(hs[2], manual[-1]))
    for got, want, T in zip(evaluate_members(S, x), manual, S.members):
        assert close(got, want)
        assert close(apply(T, x), want)
    assert S.contains_identity and S.isometric


def test_family_build_rejects_unknown_kind():
    with pytest.raises(PreconditionViolated):
        OperatorFamily.build("spiral", [identity()])


# cc_map -----------------------------------------------------------------------

def test_fixed_point_is_kept():
    rng = np.random.default_rng(0)
    for composed in (False, True):
        hs = gen.concurrent_hyperplanes(rng, 4, 3)
        x = oracle_proj_affine_intersection(hs, rng.uniform(-3, 3, 4))
        out = cc_map(reflector_family(hs, composed), x)
        assert close(out.point, x)


def test_two_lines_one_step():
    H1, H2 = Hyperplane([1.0, 0.0], 1.0), Hyperplane([1.0, 2.0], 0.0)
    x = np.array([3.0, 4.0])
    out = cc_map(reflector_family([H1, H2], composed=False), x)
    assert close(out.point, oracle_proj_affine_intersection([H1, H2], x))


def test_dependent_halfspaces_dead_zone():
    W1, W2 = Halfspace([1.0, 0.0], 0.0), Halfspace([2.0, 0.0], 2.0)
    out = cc_map(OperatorFamily.id_prefixed([reflector(W1), reflector(W2)]), [3.0, 1.0])
    assert out.is_empty


def test_best_approximation_formulation():
    # CC_S x = P_aff(S(x)) z for any z in the intersection
    rng = np.random.default_rng(1)
    for _ in range(100):
        composed = bool(rng.integers(2))
        hs = gen.concurrent_hyperplanes(rng, 5, int(rng.integers(2, 5)))
        x = rng.uniform(-4, 4, 5)
        S = reflector_family(hs, composed)
        pts = evaluate_members(S, x)
        hull = AffineSubspace.from_span(pts[0], [p - pts[0] for p in pts[1:]])
        z = oracle_proj_affine_intersection(hs, rng.uniform(-4, 4, 5))
        assert close(cc_map(S, x).point, geo.proj_affine(hull, z), 1e-8)


def test_span_rank_matches_normals():
    rng = np.random.default_rng(2)
    for m in (1, 2, 3, 4):
        for composed in (False, True):
            hs = gen.concurrent_hyperplanes(rng, 6, m)
            x = rng.uniform(-4, 4, 6)
            assert span_rank(reflector_family(hs, composed), x) == m


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 4), st.booleans())
def test_pythagorean_identity_for_reflector_families(seed, m, composed):
    rng = np.random.default_rng(seed)
    hs = gen.concurrent_hyperplanes(rng, 5, m)
    x = rng.uniform(-4, 4, 5)
    y = cc_map(reflector_family(hs, composed), x).point
    for _ in range(3):
        z = oracle_proj_affine_intersection(hs, rng.uniform(-5, 5, 5))
        lhs = np.sum((y - z) ** 2) + np.sum((y - x) ** 2)
        rhs = np.sum((x - z) ** 2)
        assert abs(lhs - rhs) <= TOL * max(1.0, rhs)


# iteration --------------------------------------------------------------------

def test_iterate_from_fixed_point_is_one_row():
    hs = [Hyperplane([1.0, 0.0], 0.0), Hyperplane([0.0, 1.0], 0.0)]
    trace = iterate(reflector_family(hs, True), [0.0, 0.0], target=np.zeros(2))
    assert len(trace.iterates) == 1 and trace.statuses == [STATUS_CONVERGED]


def test_three_step_in_r5():
    rng = np.random.default_rng(3)
    for _ in range(50):
        hs = gen.concurrent_hyperplanes(rng, 5, 2)
        x = rng.uniform(-4, 4, 5)
        target = oracle_proj_affine_intersection(hs, x)
        trace = iterate(reflector_family(hs, True), x, target=target)
        k = trace.first_within(target, 1e-8)
        assert k is not None and k <= 3
        assert all(trace.fejer_ok)


def test_projection_invariance_along_iterates():
    rng = np.random.default_rng(4)
    for _ in range(30):
        hs = gen.concurrent_hyperplanes(rng, 6, 3)
        x = rng.uniform(-4, 4, 6)
        p0 = oracle_proj_affine_intersection(hs, x)
        trace = iterate(reflector_family(hs, bool(rng.integers(2))), x, max_iter=20)
        for xk in trace.iterates:
            assert close(oracle_proj_affine_intersection(hs, xk), p0)


def test_fejer_against_sampled_points():
    rng = np.random.default_rng(5)
    hs = gen.concurrent_hyperplanes(rng, 4, 2)
    zs = [oracle_proj_affine_intersection(hs, rng.uniform(-5, 5, 4)) for _ in range(5)]
    trace = iterate(OperatorFamily.id_prefixed([reflector(hs[0]), reflector(hs[1])]),
                    geo.proj_hyperplane(hs[0], rng.uniform(-4, 4, 4)), max_iter=50, witnesses=zs)
    assert all(trace.fejer_ok)
    assert trace.fejer_violation <= 1e-10


def test_empty_outcome_is_recorded():
    W1, W2 = Halfspace([1.0, 0.0], 0.0), Halfspace([2.0, 0.0], 2.0)
    trace = iterate(OperatorFamily.id_prefixed([reflector(W1), reflector(W2)]), [3.0, 1.0])
    assert trace.statuses[-1] == STATUS_EMPTY
    assert trace.ended_empty and np.all(np.isnan(trace.iterates[-1]))
    assert close(trace.final, [3.0, 1.0])


def test_max_iter_status():
    # lines at a small angle converge slowly under alternating-type families
    H1, H2 = Hyperplane([0.0, 1.0], 0.0), Hyperplane([-0.05, 1.0], 0.0)
    trace = iterate(OperatorFamily.plain([projector(H1), projector(H2)]), [5.0, 0.0], max_iter=3)
    assert trace.statuses[-1] == STATUS_MAX_ITER and trace.steps == 3


def test_trace_csv_round_trip():
    rng = np.random.default_rng(6)
    hs = gen.concurrent_hyperplanes(rng, 3, 2)
    x = rng.uniform(-4, 4, 3)
    trace = iterate(reflector_family(hs, True), x, target=oracle_proj_affine_intersection(hs, x))
    text = trace.to_csv()
    assert text.splitlines()[0] == "k,x_0,x_1,x_2,step_norm,dist_to_target,fejer_ok,status"
    back = IterationTrace.from_csv(text)
    assert back.same_records(trace)
    assert back.to_csv() == text


def test_trace_csv_round_trip_with_empty_row():
    W1, W2 = Halfspace([1.0, 0.0], 0.0), Halfspace([2.0, 0.0], 2.0)
    trace = iterate(OperatorFamily.id_prefixed([reflector(W1), reflector(W2)]), [3.0, 1.0])
    assert IterationTrace.from_csv(trace.to_csv()).same_records(trace)


# one-step pair theorem ------------------------------------------------------------

def test_pair_check_hyperplane_and_line():
    H = Hyperplane([1.0, 0.0, 0.0], 0.0)
    U = AffineSubspace.from_span([0.0, 0.0, 2.0], [[0.0, 1.0, 0.0]])
    x = np.array([0.0, 5.0, 2.0])
    y = one_step_pair_check(reflector(H), reflector(U), x)
    assert close(y, oracle_pair_target(reflector(H), reflector(U), x))


def test_pair_check_transversal_line():
    H = Hyperplane([1.0, 0.0, 0.0], 0.0)
    U = AffineSubspace.from_span([1.0, 1.0, 2.0], [[1.0, 1.0, 0.0]])
    x = np.array([3.0, 3.0, 2.0])
    y = one_step_pair_check(reflector(H), reflector(U), x)
    assert close(y, [0.0, 0.0, 2.0])


def test_pair_check_fixed_point():
    H = Hyperplane([1.0, 0.0, 0.0], 0.0)
    U = AffineSubspace.from_span([0.0, 0.0, 0.0], [[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    x = np.array([0.0, 0.0, 4.0])
    assert close(one_step_pair_check(reflector(H), reflector(U), x), x)


def test_pair_check_random_n4():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        U = gen.random_affine(rng, 4, int(rng.integers(1, 4)))
        p = U.anchor + U.basis.T @ rng.uniform(-2, 2, U.subspace_dim)
        u = gen.normal_vector(rng, 4)
        H = Hyperplane(u, float(u @ p))
        x = geo.proj_affine(U, rng.uniform(-4, 4, 4))
        y = one_step_pair_check(reflector(H), reflector(U), x)
        assert close(y, oracle_pair_target(reflector(H), reflector(U), x), 1e-8)


def test_pair_check_hypotheses():
    H = Hyperplane([1.0, 0.0, 0.0], 0.0)
    U = AffineSubspace.from_span([0.0, 0.0, 2.0], [[0.0, 1.0, 0.0]])
    with pytest.raises(HypothesisViolated):
        one_step_pair_check(reflector(H), reflector(U), [1.0, 1.0, 1.0])
    with pytest.raises(HypothesisViolated):
        one_step_pair_check(projector(H), reflector(U), [0.0, 1.0, 2.0])


# convex set and affine subspace ---------------------------------------------------

def test_separating_hyperplane_examples():
    sep = build_separating(Ball([0.0, 0.0], 1.0), [2.0, 0.0])
    assert not sep.inside
    assert close(sep.hyperplane.u / np.linalg.norm(sep.hyperplane.u), [1.0, 0.0])
    assert sep.hyperplane.contains([1.0, 5.0])
    W = Halfspace([0.0, 2.0], 2.0)
    sep = build_separating(W, [0.0, 3.0])
    assert sep.hyperplane.contains([7.0, 1.0]) and not sep.hyperplane.contains([0.0, 0.0])
    assert build_separating(W, [0.0, 0.0]).inside


def test_separating_halfspace_contains_ball():
    rng = np.random.default_rng(8)
    B = Ball([0.5, -1.0, 2.0], 1.3)
    for _ in range(20):
        x = B.center + rng.standard_normal(3) * 4
        sep = build_separating(B, x)
        if sep.inside:
            continue
        assert sep.hyperplane.contains(geo.proj_ball(B, x))
        for _ in range(50):
            d = rng.standard_normal(3)
            assert sep.halfspace.contains(B.center + B.radius * rng.uniform() * d / np.linalg.norm(d))


def test_prox_step_ball_on_axis():
    B = Ball([-1.0, 0.0], 1.0)
    U = AffineSubspace.from_span([0.0, 0.0], [[1.0, 0.0]])
    x = np.array([3.0, 0.0])
    y = prox_crm_step(B, U, x)
    assert close(y, [0.0, 0.0])
    assert close(prox_crm_formula(B, U, x), y)
    assert close(separating_target(B, U, x), y)


def test_prox_step_inside_is_fixed():
    B = Ball([-1.0, 0.0], 1.0)
    U = AffineSubspace.from_span([0.0, 0.0], [[1.0, 0.0]])
    assert close(prox_crm_step(B, U, [-0.5, 0.0]), [-0.5, 0.0])


def test_prox_step_requires_x_in_u():
    B = Ball([-1.0, 0.0], 1.0)
    U = AffineSubspace.from_span([0.0, 0.0], [[1.0, 0.0]])
    with pytest.raises(HypothesisViolated):
        prox_crm_step(B, U, [1.0, 1.0])


def test_prox_step_identity_on_separating_set():
    # equality holds for z ∈ H_x ∩ U; for z ∈ C ∩ U only the inequality holds
    rng = np.random.default_rng(9)
    for _ in range(200):
        C, U, x = gen.ball_affine_instance(rng, bool(rng.integers(2)), bool(rng.integers(2)))
        y = prox_crm_step(C, U, x)
        sep = build_separating(C, x)
        if sep.inside:
            assert close(y, x)
            continue
        hs = [sep.hyperplane] + U.as_hyperplanes()
        for _ in range(3):
            z = oracle_proj_affine_intersection(hs, rng.uniform(-5, 5, 3))
            lhs = np.sum((y - x) ** 2) + np.sum((y - z) ** 2)
            assert abs(lhs - np.sum((x - z) ** 2)) <= 1e-8 * max(1.0, np.sum((x - z) ** 2))
        if isinstance(C, Ball):
            zc = gen.sample_in_ball_cap_affine(rng, C, U)
        else:
            zc = oracle_proj_polyhedron([C, U], rng.uniform(-5, 5, 3))
        lhs = np.sum((y - x) ** 2) + np.sum((y - zc) ** 2)
        assert lhs <= np.sum((x - zc) ** 2) * (1 + 1e-8) + 1e-8


def test_prox_step_equality_fails_inside_c():
    # ball B[(−1,0);1], U the x-axis, x = (3,0): CC x = (0,0), z = (−1,0) ∈ C ∩ U
    y = np.array([0.0, 0.0])
    x = np.array([3.0, 0.0])
    z = np.array([-1.0, 0.0])
    lhs = np.sum((y - x) ** 2) + np.sum((y - z) ** 2)
    assert lhs == 10.0 and np.sum((x - z) ** 2) == 16.0


# equidistance cone ------------------------------------------------------------------

def test_cone_check_at_intersection():
    hs = [Hyperplane([1.0, 0.0], 0.0), Hyperplane([0.0, 1.0], 0.0)]
    assert properness_cone_check(hs, [0.0, 0.0])


def test_cone_check_bisector():
    hs = [Hyperplane([1.0, 0.0], 0.0), Hyperplane([1.0, 1.0], 0.0)]
    x = sample_equidistance_cone(hs, 0)
    assert properness_cone_check(hs, x)
    y = cc_map(OperatorFamily.id_prefixed([projector(H) for H in hs]), x).point
    for H in hs:
        assert abs(H.distance(y) - 0.5 * H.distance(x)) <= TOL * max(1.0, H.distance(x))


def test_cone_check_three_hyperplanes():
    rng = np.random.default_rng(10)
    hs = gen.concurrent_hyperplanes(rng, 4, 3)
    for seed in range(500):
        assert properness_cone_check(hs, sample_equidistance_cone(hs, seed))


def test_cone_check_rejects_points_outside():
    hs = [Hyperplane([1.0, 0.0], 0.0), Hyperplane([0.0, 1.0], 0.0)]
    with pytest.raises(HypothesisViolated):
        properness_cone_check(hs, [1.0, 3.0])
