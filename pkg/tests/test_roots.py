import numpy as np
import pytest

from sixpoint import (CameraExtrinsic, ConfigurationMismatch, RayCorrespondence, RigPose,
                      SixPointProblem, SolutionSet, SolverConfig, TranslationAtInfinity,
                      assemble_poses, build_M, build_equations, recover_translation,
                      rotation_error, rotation_to_cayley, solve_system, translation_error)
from sixpoint.geometry import rotation_about
from sixpoint.roots import without_ray_bundles

from conftest import noise_free_sample


def random_rotation(rng):
    return rotation_about(rng.standard_normal(3), rng.uniform(0, 150))


def generic_problem(rng, R, t):
    """Six cameras pairs with random extrinsics observing random points in all directions."""
    rig = tuple(CameraExtrinsic(random_rotation(rng), rng.uniform(-1, 1, 3), k) for k in range(12))
    pcs = []
    for k in range(6):
        ci, cj = rig[2 * k], rig[2 * k + 1]
        X = rng.uniform(-8, 8, 3)
        x = ci.Q.T @ (X - ci.s)
        xp = cj.Q.T @ (R @ X + t - cj.s)
        pcs.append(RayCorrespondence(x / np.linalg.norm(x), xp / np.linalg.norm(xp), 2 * k, 2 * k + 1))
    return SixPointProblem(rig, pcs)


def contains(poses, pose, tol=1e-6):
    return any(rotation_error(pose.R, p.R) < tol and translation_error(pose.t, p.t) < tol
               for p in poses)


@pytest.mark.parametrize("kind", ["generic", "intra", "inter48"])
@pytest.mark.parametrize("seed", range(5))
def test_truth_among_roots(kind, seed):
    inst, pcs = noise_free_sample(kind, seed)
    sys = build_equations(SixPointProblem(inst.rig, pcs))
    sols = solve_system(sys)
    q = rotation_to_cayley(inst.pose.R)
    assert np.min(np.linalg.norm(sols.roots - q, axis=1)) < 1e-8
    assert np.all(sols.residuals < SolverConfig().residual_tol)
    assert contains(assemble_poses(sys, sols), inst.pose)


def test_roots_are_separated():
    inst, pcs = noise_free_sample("generic", 11)
    sols = solve_system(build_equations(SixPointProblem(inst.rig, pcs)))
    d = np.linalg.norm(sols.roots[:, None] - sols.roots[None], axis=-1)
    assert np.all(d[np.triu_indices(len(d), 1)] > SolverConfig().dedup_radius)


def test_intra_needs_bundle_equations():
    inst, pcs = noise_free_sample("intra", 0)
    sys = without_ray_bundles(build_equations(SixPointProblem(inst.rig, pcs)))
    with pytest.raises(ConfigurationMismatch):
        solve_system(sys)


def test_translation_from_truth():
    inst, pcs = noise_free_sample("inter56", 3)
    m = build_M(SixPointProblem(inst.rig, pcs))
    t = recover_translation(m, rotation_to_cayley(inst.pose.R))
    assert np.abs(t - inst.pose.t).max() < 1e-8


def test_translation_from_constructed_null_vector():
    rng = np.random.default_rng(0)
    B = rng.standard_normal((6, 3))
    # columns orthogonal to (0, 0, 1, 1): the third and fourth cancel
    M = np.column_stack([B[:, 0], B[:, 1], B[:, 2], -B[:, 2]])
    assert np.allclose(recover_translation(M, None), [0, 0, 1], atol=1e-12)


def test_translation_at_infinity():
    rng = np.random.default_rng(1)
    M = np.column_stack([rng.standard_normal((6, 2)), np.zeros(6), rng.standard_normal(6)])
    with pytest.raises(TranslationAtInfinity):
        recover_translation(M, None)


def test_empty_solution_set_gives_no_pose():
    inst, pcs = noise_free_sample("generic", 0)
    sys = build_equations(SixPointProblem(inst.rig, pcs))
    assert assemble_poses(sys, SolutionSet(np.zeros((0, 3)), np.zeros(0))) == []


def test_half_turn_is_invisible():
    rng = np.random.default_rng(5)
    R = rotation_about([0.3, -0.5, 0.8], 180)
    pose = RigPose(R, rng.standard_normal(3))
    prob = generic_problem(rng, R, pose.t)
    sys = build_equations(prob)
    poses = assemble_poses(sys, solve_system(sys))
    assert not contains(poses, pose, tol=1e-3)


@pytest.mark.parametrize("seed", range(3))
def test_solution_counts_from_macaulay(seed):
    inst, pcs = noise_free_sample("generic", seed)
    assert solve_system(build_equations(SixPointProblem(inst.rig, pcs))).complex_count == 64
    inst, pcs = noise_free_sample("inter56", seed)
    sys = build_equations(SixPointProblem(inst.rig, pcs))
    assert solve_system(without_ray_bundles(sys)).complex_count == 56
    assert solve_system(sys).complex_count == 48


def test_continuation_counts_generic():
    rng = np.random.default_rng(2)
    prob = generic_problem(rng, random_rotation(rng), rng.standard_normal(3))
    sols = solve_system(build_equations(prob), SolverConfig(backend="homotopy", seed=1))
    assert sols.complex_count == 64


def test_continuation_finds_truth():
    inst, pcs = noise_free_sample("intra", 4)
    sys = build_equations(SixPointProblem(inst.rig, pcs))
    poses = assemble_poses(sys, solve_system(sys, SolverConfig(backend="homotopy")))
    assert contains(poses, inst.pose)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(backend="groebner")
    with pytest.raises(ValueError):
        SolverConfig(degree=1)
