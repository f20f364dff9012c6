import numpy as np
import pytest

from circumcentered import generators as gen
from circumcentered import harness
from circumcentered.ccmap import OperatorFamily, iterate, reflector
from circumcentered.errors import EmptySet, UnknownTheorem
from circumcentered.geometry import Halfspace, Hyperplane
from circumcentered.harness import (
    ALL,
    DRM,
    MAP,
    REGISTRY,
    aggregate,
    run_baseline,
    run_theorem_suite,
    run_trial,
    step_counts_csv,
    trial_seed,
)
from circumcentered.oracles import oracle_proj_affine_intersection


def test_trial_seed_is_stable():
    a = trial_seed(42, "S2_three_step", 7).standard_normal(3)
    b = trial_seed(42, "S2_three_step", 7).standard_normal(3)
    c = trial_seed(42, "S2_three_step", 8).standard_normal(3)
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_same_seed_same_report():
    a = run_theorem_suite("S2_three_step", 100, 42)
    b = run_theorem_suite("S2_three_step", 100, 42)
    assert a.same_results(b)
    assert a.ok and a.passed + a.failed + a.boundary == a.trials == 100


def test_workers_do_not_change_results():
    a = run_theorem_suite("m_hyperplanes_composed", 60, 3, workers=1)
    b = run_theorem_suite("m_hyperplanes_composed", 60, 3, workers=2)
    assert a.same_results(b)


def test_zero_trials_is_vacuous_pass():
    r = run_theorem_suite("S2_three_step", 0, 1)
    assert r.trials == 0 and r.ok


def test_all_with_zero_trials_fails_coverage():
    assert not run_theorem_suite(ALL, 0, 1).ok


def test_all_covers_every_theorem():
    r = run_theorem_suite(ALL, 5, 11)
    assert {c.theorem_id for c in r.children} == set(REGISTRY)
    assert all(c.trials == 5 for c in r.children)
    assert r.trials == 5 * len(REGISTRY)
    assert r.ok


def test_unknown_theorem():
    with pytest.raises(UnknownTheorem):
        run_theorem_suite("no_such_theorem", 1, 0)


@pytest.mark.parametrize("theorem_id", sorted(REGISTRY))
def test_every_campaign_passes_small(theorem_id):
    r = run_theorem_suite(theorem_id, 40, 2024)
    assert r.ok, r.to_json()
    assert r.passed + r.failed + r.boundary == r.trials


def test_dimension_override():
    r = run_theorem_suite("S2_three_step", 8, 0, dims=(16,))
    assert r.ok and r.trials == 8


def test_failures_are_counted():
    rs = [harness.TrialResult(harness.PASS, 0.0, 1), harness.TrialResult(harness.FAIL, 1.0, 5),
          harness.TrialResult(harness.BOUNDARY, 0.0)]
    r = aggregate("x", rs, 1e-9, 0.0)
    assert (r.passed, r.failed, r.boundary) == (1, 1, 1) and not r.ok
    assert r.max_violation == 1.0


def test_step_histogram_for_three_step():
    r = run_theorem_suite("S2_three_step", 200, 5)
    assert max(r.step_histogram) <= 3
    assert sum(r.step_histogram.values()) == r.passed


def test_step_counts_csv():
    text = step_counts_csv("S2_three_step", 4, 9)
    lines = text.splitlines()
    assert lines[0] == "index,status,violation,steps" and len(lines) == 5
    assert lines[1].split(",")[1] == run_trial("S2_three_step", 9, 0).status


# baselines --------------------------------------------------------------------

def test_map_orthogonal_one_step():
    H1, H2 = Hyperplane([1.0, 0.0], 0.0), Hyperplane([0.0, 1.0], 0.0)
    trace = run_baseline(MAP, [H1, H2], [3.0, 4.0], target=np.zeros(2))
    assert trace.first_within(np.zeros(2), 1e-12) == 1


def test_map_matches_crm_even_iterates():
    # for x on H1, CRM with {Id, R_H1, R_H2} steps twice per MAP step
    rng = np.random.default_rng(0)
    H1, H2, x = gen.hyperplane_pair_with_start(rng, 3, "on_H1_only")
    cc = iterate(OperatorFamily.id_prefixed([reflector(H1), reflector(H2)]), x, max_iter=8, stop_tol=0.0)
    alt = run_baseline(MAP, [H2, H1], x, max_iter=4, stop_tol=0.0)
    for k in range(len(alt.iterates)):
        if 2 * k < len(cc.iterates):
            assert np.allclose(cc.iterates[2 * k], alt.iterates[k], atol=1e-9)


def test_drm_slower_than_crm():
    t = 0.2
    H1, H2 = Hyperplane([0.0, 1.0], 0.0), Hyperplane([-np.sin(t), np.cos(t)], 0.0)
    x = np.array([3.0, 2.0])
    target = oracle_proj_affine_intersection([H1, H2], x)
    crm = iterate(OperatorFamily.composed_prefix([reflector(H1), reflector(H2)]), x, target=target)
    drm = run_baseline(DRM, [H1, H2], x, target=target, max_iter=2000)
    assert crm.first_within(target, 1e-8) <= 3
    assert drm.first_within(target, 1e-8) is None or drm.first_within(target, 1e-8) > 3


def test_baselines_on_halfspaces_and_errors():
    W1, W2 = Halfspace([1.0, 0.0], 0.0), Halfspace([0.0, 1.0], 0.0)
    trace = run_baseline(MAP, [W1, W2], [2.0, 3.0])
    assert np.allclose(trace.final, [0.0, 0.0])
    with pytest.raises(EmptySet):
        run_baseline(MAP, [W1, Halfspace([0.0, 0.0], -1.0)], [0.0, 0.0])
    with pytest.raises(ValueError):
        run_baseline("ADMM", [W1, W2], [0.0, 0.0])


def test_three_step_campaign_n6():
    r = run_theorem_suite("S2_three_step", 1000, 42, dims=(6,))
    assert r.ok and r.passed == 1000
    assert max(r.step_histogram) <= 3 and r.max_violation <= 1e-8


def test_fqne_campaign():
    r = run_theorem_suite("FQNE_identity", 500, 42)
    assert r.ok and r.max_pythagorean <= 1e-9
