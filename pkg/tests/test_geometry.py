import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from sixpoint import (CameraExtrinsic, DegenerateRotation, NotNormalized, RayCorrespondence,
                      RigPose, ZeroVector, cayley_to_quat, cayley_to_rotation, compose_camera_pair,
                      epipolar_residual, essential_matrix, quat_to_rotation, rotation_error,
                      rotation_to_cayley, translation_dir_error, translation_error)
from sixpoint.geometry import rotation_about, skew

cayley = arrays(np.float64, 3, elements=st.floats(-5, 5))
vec3 = arrays(np.float64, 3, elements=st.floats(-10, 10))


def random_rotation(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    return q if np.linalg.det(q) > 0 else -q


def homogeneous(R, t):
    T = np.eye(4)
    T[:3, :3], T[:3, 3] = R, t
    return T


def test_zero_cayley_is_identity():
    assert np.array_equal(cayley_to_rotation([0, 0, 0]), np.eye(3))


def test_unit_x_cayley_is_quarter_turn():
    want = np.array([[1, 0, 0], [0, 0, -1], [0, 1, 0]], float)
    assert np.allclose(cayley_to_rotation([1, 0, 0]), want, atol=1e-15)


@given(cayley)
def test_cayley_transpose_is_negation(q):
    assert np.allclose(cayley_to_rotation(q).T, cayley_to_rotation(-q), atol=1e-13)


@given(cayley)
def test_cayley_gives_rotation(q):
    R = cayley_to_rotation(q)
    assert np.allclose(R.T @ R, np.eye(3), atol=1e-12)
    assert np.isclose(np.linalg.det(R), 1.0, atol=1e-12)


@given(cayley)
def test_cayley_round_trip(q):
    assert np.allclose(rotation_to_cayley(cayley_to_rotation(q)), q, atol=1e-9 * (1 + q @ q))


def test_cayley_round_trip_example():
    q = np.array([0.3, -0.2, 0.1])
    assert np.abs(rotation_to_cayley(cayley_to_rotation(q)) - q).max() < 1e-12
    assert np.array_equal(rotation_to_cayley(np.eye(3)), np.zeros(3))


def test_half_turn_has_no_cayley_vector():
    with pytest.raises(DegenerateRotation):
        rotation_to_cayley(np.diag([-1.0, -1.0, 1.0]))


def test_quaternion_examples():
    assert np.array_equal(quat_to_rotation([1, 0, 0, 0]), np.eye(3))
    assert np.array_equal(quat_to_rotation([0, 1, 0, 0]), np.diag([1.0, -1.0, -1.0]))
    with pytest.raises(NotNormalized):
        quat_to_rotation([1, 1, 0, 0])


@given(cayley)
def test_quaternion_sign_symmetry_and_cayley_agreement(q):
    h = cayley_to_quat(q)
    assert np.allclose(quat_to_rotation(h), quat_to_rotation(-h), atol=1e-15)
    assert np.allclose(quat_to_rotation(h), cayley_to_rotation(q), atol=1e-12)


def test_rotation_about_matches_cayley():
    # a Cayley vector is tan(angle / 2) times the axis
    axis = np.array([1.0, 2.0, -2.0]) / 3
    assert np.allclose(rotation_about(axis, 50), cayley_to_rotation(np.tan(np.radians(25)) * axis))


def test_compose_single_camera_reduction(rng):
    pose = RigPose(random_rotation(rng), rng.standard_normal(3))
    R, t = compose_camera_pair(pose, CameraExtrinsic.identity(), CameraExtrinsic.identity())
    assert np.allclose(R, pose.R) and np.allclose(t, pose.t)


def test_compose_same_camera_no_motion(rng):
    cam = CameraExtrinsic(random_rotation(rng), rng.standard_normal(3))
    R, t = compose_camera_pair(RigPose.identity(), cam, cam)
    assert np.allclose(R, np.eye(3), atol=1e-15) and np.allclose(t, 0, atol=1e-15)


@pytest.mark.parametrize("seed", range(20))
def test_compose_matches_homogeneous_product(seed):
    rng = np.random.default_rng(seed)
    pose = RigPose(random_rotation(rng), rng.standard_normal(3))
    ci = CameraExtrinsic(random_rotation(rng), rng.standard_normal(3))
    cj = CameraExtrinsic(random_rotation(rng), rng.standard_normal(3))
    # camera i -> rig 1 -> rig 2 -> camera i'
    T = np.linalg.inv(cj.as_matrix()) @ pose.as_matrix() @ ci.as_matrix()
    R, t = compose_camera_pair(pose, ci, cj)
    assert np.abs(homogeneous(R, t) - T).max() < 1e-12


def test_essential_at_origin_is_skew_t_R(rng):
    pose = RigPose(random_rotation(rng), rng.standard_normal(3))
    E = essential_matrix(pose, CameraExtrinsic.identity(), CameraExtrinsic.identity())
    assert np.allclose(E, skew(pose.t) @ pose.R)


def test_essential_without_motion_vanishes(rng):
    cam = CameraExtrinsic(random_rotation(rng), rng.standard_normal(3))
    assert np.allclose(essential_matrix(RigPose.identity(), cam, cam), 0, atol=1e-14)


@pytest.mark.parametrize("seed", range(20))
def test_essential_matches_camera_pair(seed):
    rng = np.random.default_rng(seed)
    pose = RigPose(random_rotation(rng), rng.standard_normal(3))
    ci = CameraExtrinsic(random_rotation(rng), rng.standard_normal(3))
    cj = CameraExtrinsic(random_rotation(rng), rng.standard_normal(3))
    R, t = compose_camera_pair(pose, ci, cj)
    assert np.allclose(essential_matrix(pose, ci, cj), skew(t) @ R, atol=1e-12)


@pytest.mark.parametrize("seed", range(10))
def test_residual_of_true_correspondence(seed):
    rng = np.random.default_rng(seed)
    pose = RigPose(random_rotation(rng), rng.standard_normal(3))
    ci = CameraExtrinsic(random_rotation(rng), rng.standard_normal(3))
    cj = CameraExtrinsic(random_rotation(rng), rng.standard_normal(3))
    X = rng.uniform(-5, 5, 3)                               # rig frame, view 1
    x = ci.Q.T @ (X - ci.s)
    xp = cj.Q.T @ (pose.R @ X + pose.t - cj.s)
    pc = RayCorrespondence(x / np.linalg.norm(x), xp / np.linalg.norm(xp), 0, 1)
    E = essential_matrix(pose, ci, cj)
    assert abs(epipolar_residual(E, pc)) < 1e-10
    pc2 = RayCorrespondence(2 * pc.x, pc.xp, 0, 1)
    assert np.isclose(epipolar_residual(E, pc2), 2 * epipolar_residual(E, pc), atol=1e-15)


def test_residual_orthogonal_case(rng):
    E = rng.standard_normal((3, 3))
    x = np.array([0.1, 0.2, 1.0])
    xp = np.cross(E @ x, [1.0, 0.0, 0.0])
    assert abs(epipolar_residual(E, RayCorrespondence(x, xp, 0, 0))) < 1e-14


@given(cayley, vec3.filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_error_metrics(q, t):
    R = cayley_to_rotation(q)
    assert rotation_error(R, R) == pytest.approx(0, abs=1e-6)
    assert translation_error(t, -t) == pytest.approx(2)
    assert translation_dir_error(t, -t) == pytest.approx(180)
    assert translation_error(t, 2 * t) == pytest.approx(2 / 3)
    assert translation_dir_error(t, 2 * t) == pytest.approx(0, abs=1e-6)


def test_rotation_error_resolves_tiny_angles():
    R = rotation_about([0, 0, 1], 1e-9)
    assert rotation_error(np.eye(3), R) == pytest.approx(1e-9, rel=1e-6)


def test_direction_error_of_zero_vector():
    with pytest.raises(ZeroVector):
        translation_dir_error(np.zeros(3), np.ones(3))


def test_value_types_validate():
    with pytest.raises(ValueError):
        RigPose(np.diag([1.0, 1.0, -1.0]), np.zeros(3))
    with pytest.raises(ValueError):
        RayCorrespondence(np.zeros(3), np.ones(3), 0, 0)
    with pytest.raises(ValueError):
        CameraExtrinsic(np.eye(3), [np.nan, 0, 0])
