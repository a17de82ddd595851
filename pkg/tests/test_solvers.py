import numpy as np
import pytest

from sixpoint import (ConfigurationMismatch, InvalidProblem, MatchType, RayCorrespondence,
                      SolverKind, classify_configuration, rotation_error, solve,
                      translation_error)
from sixpoint.solvers import MATCH_TYPE_SOLUTIONS, auto_kind, solve_detailed

from conftest import noise_free_sample


def pcs_with_pairs(pairs, seed=0):
    rng = np.random.default_rng(seed)
    return [RayCorrespondence(rng.standard_normal(3), rng.standard_normal(3), i, ip) for i, ip in pairs]


def contains(poses, pose, tol=1e-6):
    return any(rotation_error(pose.R, p.R) < tol and translation_error(pose.t, p.t) < tol
               for p in poses)


@pytest.mark.parametrize("pairs,mt,count", [
    ([(0, 0)] * 6, MatchType.SIX, 0),
    ([(0, 0)] * 5 + [(1, 2)], MatchType.FIVE, 20),
    ([(0, 1)] * 4 + [(1, 0), (2, 2)], MatchType.FOUR, 40),
    ([(0, 0)] * 3 + [(1, 1)] * 3, MatchType.THREE_THREE, 48),
    ([(0, 1)] * 3 + [(1, 0), (2, 2), (0, 2)], MatchType.THREE, 56),
    ([(k, k + 1) for k in range(6)], MatchType.SINGLES, 64),
])
def test_match_types(pairs, mt, count):
    assert classify_configuration(pcs_with_pairs(pairs)) is mt
    assert MATCH_TYPE_SOLUTIONS[mt] == count


def test_classification_needs_six():
    with pytest.raises(InvalidProblem, match="expected 6 correspondences"):
        classify_configuration(pcs_with_pairs([(0, 0)] * 5))


@pytest.mark.parametrize("kind", ["generic", "inter56", "inter48", "intra"])
@pytest.mark.parametrize("seed", range(4))
def test_noise_free_truth_recovered(kind, seed):
    inst, pcs = noise_free_sample(kind, seed)
    assert contains(solve(pcs, inst.rig, kind), inst.pose)


@pytest.mark.parametrize("seed", range(4))
def test_inter_variants_agree(seed):
    inst, pcs = noise_free_sample("inter56", seed)
    for kind in ("inter56", "inter48"):
        assert contains(solve(pcs, inst.rig, kind), inst.pose)


@pytest.mark.parametrize("seed", range(5))
def test_intra_root_count_is_bounded(seed):
    inst, pcs = noise_free_sample("intra", seed)
    rep = solve_detailed(pcs, inst.rig, "intra")
    assert rep.solutions.complex_count <= 48 and len(rep.poses) <= 48


def test_intra_passed_to_inter_solver():
    inst, pcs = noise_free_sample("intra", 0)
    with pytest.raises(ConfigurationMismatch):
        solve(pcs, inst.rig, SolverKind.INTER48)


def test_inter_passed_to_intra_solver():
    inst, pcs = noise_free_sample("inter56", 0)
    with pytest.raises(ConfigurationMismatch):
        solve(pcs, inst.rig, "intra")


def test_single_pair_configurations_rejected():
    inst, _ = noise_free_sample("intra", 0)
    same = [pc for pc in inst.pcs if pc.pair == (0, 0)]
    with pytest.raises(ConfigurationMismatch):
        solve(same[:6], inst.rig, "generic")
    other = [pc for pc in inst.pcs if pc.pair == (1, 1)]
    with pytest.raises(ConfigurationMismatch):
        solve(same[:5] + other[:1], inst.rig, "generic")


def test_auto_prefers_specific_solvers():
    for kind, want in [("intra", SolverKind.INTRA48), ("inter56", SolverKind.INTER56),
                       ("generic", SolverKind.GENERIC64)]:
        inst, pcs = noise_free_sample(kind, 1)
        assert auto_kind(pcs, inst.rig) is want
        assert solve_detailed(pcs, inst.rig).kind is want


def test_four_plus_pairs_routed_to_generic():
    # a 4∪x configuration from an intra rig: four in camera 0, two in camera 1
    inst, _ = noise_free_sample("intra", 2)
    c0 = [pc for pc in inst.pcs if pc.pair == (0, 0)][:4]
    c1 = [pc for pc in inst.pcs if pc.pair == (1, 1)][:2]
    rep = solve_detailed(c0 + c1, inst.rig)
    assert rep.kind is SolverKind.GENERIC64
    assert contains(rep.poses, inst.pose)
    assert rep.solutions.complex_count == 40
