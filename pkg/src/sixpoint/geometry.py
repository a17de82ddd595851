"""Rotation parametrizations, rig transforms, essential matrices and error metrics.

Conventions: a camera extrinsic ``(Q, s)`` maps camera coordinates into the rig
frame, ``X_rig = Q X_cam + s``.  A rig pose ``(R, t)`` maps rig coordinates of
view 1 into view 2, ``X_2 = R X_1 + t``.  Angles crossing the public API are in
degrees.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateRotation, NotNormalized, ZeroVector

_ORTHO_TOL = 1e-10


def _as_rotation(R, name: str) -> np.ndarray:
    R = np.array(R, dtype=float).reshape(3, 3)
    if not np.all(np.isfinite(R)):
        raise ValueError(f"{name} has non-finite entries")
    if np.abs(R.T @ R - np.eye(3)).max() > _ORTHO_TOL or abs(np.linalg.det(R) - 1.0) > _ORTHO_TOL:
        raise ValueError(f"{name} is not a rotation matrix")
    R.setflags(write=False)
    return R


def _as_vec3(v, name: str) -> np.ndarray:
    v = np.array(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} has non-finite entries")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class RigPose:
    """Motion of the rig reference frame from view 1 to view 2."""

    R: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "R", _as_rotation(self.R, "R"))
        object.__setattr__(self, "t", _as_vec3(self.t, "t"))

    @classmethod
    def identity(cls) -> "RigPose":
        return cls(np.eye(3), np.zeros(3))

    def as_matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.R
        T[:3, 3] = self.t
        return T


@dataclass(frozen=True, eq=False)
class CameraExtrinsic:
    """Orientation ``Q`` and position ``s`` of one camera inside the rig."""

    Q: np.ndarray
    s: np.ndarray
    id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "Q", _as_rotation(self.Q, "Q"))
        object.__setattr__(self, "s", _as_vec3(self.s, "s"))
        if int(self.id) < 0:
            raise ValueError("camera id must be non-negative")
        object.__setattr__(self, "id", int(self.id))

    @classmethod
    def identity(cls, id: int = 0) -> "CameraExtrinsic":
        return cls(np.eye(3), np.zeros(3), id)

    def as_matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.Q
        T[:3, 3] = self.s
        return T


@dataclass(frozen=True, eq=False)
class RayCorrespondence:
    """Observation ``x`` in camera ``i`` (view 1) matched to ``xp`` in camera ``ip`` (view 2).

    Bearings are kept exactly as given; they need not be unit length.
    """

    x: np.ndarray
    xp: np.ndarray
    i: int
    ip: int
    inlier: bool = field(default=True, compare=False)

    def __post_init__(self):
        x = _as_vec3(self.x, "x")
        xp = _as_vec3(self.xp, "xp")
        if np.linalg.norm(x) == 0 or np.linalg.norm(xp) == 0:
            raise ValueError("bearing vectors must be non-zero")
        if int(self.i) < 0 or int(self.ip) < 0:
            raise ValueError("camera indices must be non-negative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xp", xp)
        object.__setattr__(self, "i", int(self.i))
        object.__setattr__(self, "ip", int(self.ip))

    @property
    def pair(self) -> tuple[int, int]:
        return (self.i, self.ip)


def skew(v) -> np.ndarray:
    """Cross-product matrix: ``skew(a) @ b == np.cross(a, b)``."""
    x, y, z = np.asarray(v, dtype=float).reshape(3)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def cayley_matrix_unscaled(q) -> np.ndarray:
    """The polynomial matrix ``(1 + |q|^2) R`` of the Cayley map.

    Works for real or complex ``q``; every entry is quadratic in ``q``.
    """
    qx, qy, qz = np.asarray(q).reshape(3)
    return np.array([
        [1 + qx * qx - qy * qy - qz * qz, 2 * qx * qy - 2 * qz, 2 * qx * qz + 2 * qy],
        [2 * qx * qy + 2 * qz, 1 - qx * qx + qy * qy - qz * qz, 2 * qy * qz - 2 * qx],
        [2 * qx * qz - 2 * qy, 2 * qy * qz + 2 * qx, 1 - qx * qx - qy * qy + qz * qz],
    ])


def cayley_to_rotation(q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(3)
    if not np.all(np.isfinite(q)):
        raise ValueError("Cayley vector must be finite")
    return cayley_matrix_unscaled(q) / (1.0 + q @ q)


def rotation_to_cayley(R) -> np.ndarray:
    """Inverse Cayley map.  Rotations by 180 degrees have no Cayley vector."""
    R = np.asarray(R, dtype=float).reshape(3, 3)
    denom = 1.0 + np.trace(R)
    if denom < 1e-9:
        raise DegenerateRotation("rotation by 180 degrees has no Cayley representation")
    # R - R^T = 4 [q]x / (1 + |q|^2) and 1 + tr R = 4 / (1 + |q|^2)
    return np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]]) / denom


def quat_to_rotation(q, tol: float = 1e-9) -> np.ndarray:
    qw, qx, qy, qz = np.asarray(q, dtype=float).reshape(4)
    if abs(qw * qw + qx * qx + qy * qy + qz * qz - 1.0) > tol:
        raise NotNormalized("quaternion must have unit norm")
    return np.array([
        [qw * qw + qx * qx - qy * qy - qz * qz, 2 * qx * qy - 2 * qw * qz, 2 * qx * qz + 2 * qw * qy],
        [2 * qx * qy + 2 * qw * qz, qw * qw - qx * qx + qy * qy - qz * qz, 2 * qy * qz - 2 * qw * qx],
        [2 * qx * qz - 2 * qw * qy, 2 * qy * qz + 2 * qw * qx, qw * qw - qx * qx - qy * qy + qz * qz],
    ])


def cayley_to_quat(q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(3)
    h = np.concatenate([[1.0], q])
    return h / np.linalg.norm(h)


def rotation_about(axis, angle_deg: float) -> np.ndarray:
    """Rodrigues rotation about ``axis`` by ``angle_deg`` degrees."""
    a = np.asarray(axis, dtype=float).reshape(3)
    a = a / np.linalg.norm(a)
    th = np.radians(angle_deg)
    K = skew(a)
    return np.eye(3) + np.sin(th) * K + (1 - np.cos(th)) * K @ K


def compose_camera_pair(pose: RigPose, cam_i: CameraExtrinsic, cam_ip: CameraExtrinsic):
    """Relative motion from camera ``i`` in view 1 to camera ``ip`` in view 2."""
    R_iip = cam_ip.Q.T @ pose.R @ cam_i.Q
    t_iip = cam_ip.Q.T @ (pose.R @ cam_i.s + pose.t - cam_ip.s)
    return R_iip, t_iip


def essential_matrix(pose: RigPose, cam_i: CameraExtrinsic, cam_ip: CameraExtrinsic) -> np.ndarray:
    R = pose.R
    return cam_ip.Q.T @ (R @ skew(cam_i.s) + skew(pose.t - cam_ip.s) @ R) @ cam_i.Q


def epipolar_residual(E, pc: RayCorrespondence) -> float:
    return float(pc.xp @ np.asarray(E) @ pc.x)


def rotation_error(R_gt, R) -> float:
    """Angle of ``R_gt R^T`` in degrees.

    Same angle as ``arccos((tr(R_gt R^T) - 1) / 2)`` but evaluated through
    ``atan2`` so errors far below 1e-8 rad are still resolved.
    """
    A = np.asarray(R_gt, dtype=float) @ np.asarray(R, dtype=float).T
    cos_th = np.clip((np.trace(A) - 1.0) / 2.0, -1.0, 1.0)
    sin_th = 0.5 * np.linalg.norm([A[2, 1] - A[1, 2], A[0, 2] - A[2, 0], A[1, 0] - A[0, 1]])
    return float(np.degrees(np.arctan2(sin_th, cos_th)))


def translation_error(t_gt, t) -> float:
    t_gt = np.asarray(t_gt, dtype=float)
    t = np.asarray(t, dtype=float)
    denom = np.linalg.norm(t_gt) + np.linalg.norm(t)
    if denom == 0:
        return 0.0
    return float(2.0 * np.linalg.norm(t_gt - t) / denom)


def translation_dir_error(t_gt, t) -> float:
    t_gt = np.asarray(t_gt, dtype=float)
    t = np.asarray(t, dtype=float)
    n1, n2 = np.linalg.norm(t_gt), np.linalg.norm(t)
    if n1 == 0 or n2 == 0:
        raise ZeroVector("translation direction undefined for a zero vector")
    a, b = t_gt / n1, t / n2
    # atan2 form of arccos(a.b); clamping is implicit
    return float(np.degrees(np.arctan2(np.linalg.norm(np.cross(a, b)), a @ b)))
