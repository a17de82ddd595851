"""JSON problem and result documents.

Problem document::

    {
      "rig": [{"Q": [9 numbers, row-major], "s": [3 numbers]}, ...],
      "correspondences": [{"x": [3], "xp": [3], "i": 0, "ip": 0, "inlier": true}, ...],
      "ground_truth": {"R": [9 numbers, row-major], "t": [3 numbers]}     (optional)
    }

Camera indices are 0-based positions in ``rig``.  ``inlier`` is optional and
only carried along for synthetic data.
"""
from __future__ import annotations

import json

import numpy as np

from .errors import InvalidProblem
from .geometry import CameraExtrinsic, RayCorrespondence, RigPose


def _vec(obj, n, what):
    try:
        v = np.asarray(obj, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise InvalidProblem(f"{what} must be a list of numbers") from None
    if v.size != n:
        raise InvalidProblem(f"{what} must have {n} entries, got {v.size}")
    return v


def _field(d, key, what):
    if not isinstance(d, dict) or key not in d:
        raise InvalidProblem(f"{what} is missing '{key}'")
    return d[key]


def pose_to_dict(pose: RigPose) -> dict:
    return {"R": pose.R.reshape(-1).tolist(), "t": pose.t.tolist()}


def pose_from_dict(d) -> RigPose:
    R = _vec(_field(d, "R", "pose"), 9, "pose R").reshape(3, 3)
    t = _vec(_field(d, "t", "pose"), 3, "pose t")
    try:
        return RigPose(R, t)
    except ValueError as e:
        raise InvalidProblem(f"pose: {e}") from None


def problem_to_dict(rig, pcs, ground_truth: RigPose | None = None) -> dict:
    doc = {
        "rig": [{"Q": c.Q.reshape(-1).tolist(), "s": c.s.tolist()} for c in rig],
        "correspondences": [{"x": pc.x.tolist(), "xp": pc.xp.tolist(), "i": pc.i, "ip": pc.ip,
                             "inlier": bool(pc.inlier)} for pc in pcs],
    }
    if ground_truth is not None:
        doc["ground_truth"] = pose_to_dict(ground_truth)
    return doc


def problem_from_dict(doc) -> tuple:
    """Returns ``(rig, pcs, ground_truth or None)``; raises ``InvalidProblem`` on schema errors."""
    cams = _field(doc, "rig", "problem")
    if not isinstance(cams, list) or not cams:
        raise InvalidProblem("rig must be a non-empty list of cameras")
    rig = []
    for k, c in enumerate(cams):
        Q = _vec(_field(c, "Q", f"camera {k}"), 9, f"camera {k} Q").reshape(3, 3)
        s = _vec(_field(c, "s", f"camera {k}"), 3, f"camera {k} s")
        try:
            rig.append(CameraExtrinsic(Q, s, k))
        except ValueError as e:
            raise InvalidProblem(f"camera {k}: {e}") from None
    items = _field(doc, "correspondences", "problem")
    if not isinstance(items, list):
        raise InvalidProblem("correspondences must be a list")
    pcs = []
    for k, it in enumerate(items):
        i, ip = _field(it, "i", f"correspondence {k}"), _field(it, "ip", f"correspondence {k}")
        if not (isinstance(i, int) and isinstance(ip, int)) or not (0 <= i < len(rig) and 0 <= ip < len(rig)):
            raise InvalidProblem(f"correspondence {k}: camera index out of range")
        x = _vec(_field(it, "x", f"correspondence {k}"), 3, f"correspondence {k} x")
        xp = _vec(_field(it, "xp", f"correspondence {k}"), 3, f"correspondence {k} xp")
        try:
            pcs.append(RayCorrespondence(x, xp, i, ip, bool(it.get("inlier", True))))
        except ValueError as e:
            raise InvalidProblem(f"correspondence {k}: {e}") from None
    gt = doc.get("ground_truth")
    return tuple(rig), pcs, (pose_from_dict(gt) if gt is not None else None)


def load_problem(path) -> tuple:
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise InvalidProblem(f"{path}: not valid JSON ({e})") from None
    return problem_from_dict(doc)


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_json(doc, path) -> None:
    text = dumps(doc)
    if path in (None, "-"):
        print(text, end="")
        return
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
