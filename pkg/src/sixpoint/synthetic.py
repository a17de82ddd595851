"""Synthetic scenes for solver stability and accuracy experiments.

Two scenarios are provided.  The two-camera rig has two roughly forward-facing
pinhole cameras one metre apart, a ground plane and 50 random planes in front of
it.  The generalized camera has omnidirectional cameras with random extrinsics.

Coordinates follow the usual camera convention (x right, y down, z forward), so
the ground plane 1.5 m below the rig origin is ``y = +1.5``.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import SixPointError
from .geometry import (CameraExtrinsic, RayCorrespondence, RigPose, rotation_about,
                       rotation_error, translation_dir_error, translation_error)
from .solvers import SolverKind, solve


class Scenario(enum.Enum):
    TWO_CAMERA_RIG = "rig"
    GENERALIZED = "generalized"


class Motion(enum.Enum):
    FORWARD = "forward"
    SIDEWAYS = "sideways"
    RANDOM = "random"


class PCType(enum.Enum):
    GENERIC = "generic"
    INTER = "inter"
    INTRA = "intra"


@dataclass(frozen=True)
class SceneConfig:
    scenario: Scenario = Scenario.TWO_CAMERA_RIG
    pc_type: PCType = PCType.INTRA
    motion: Motion = Motion.RANDOM
    noise_px: float = 0.0
    n_pcs: int = 100
    outlier_ratio: float = 0.0
    seed: int = 0
    # two-camera rig
    baseline: float = 1.0
    translation: float = 3.0
    width: int = 640
    height: int = 480
    focal: float = 400.0
    camera_perturbation_deg: float = 5.0
    view_rotation_deg: float = 10.0
    ground_height: float = 1.5
    n_planes: int = 50
    n_ground: int = 50
    patch_size: float = 2.0
    # generalized camera
    n_cameras: int = 12
    max_rotation_deg: float = 90.0

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        object.__setattr__(self, "pc_type", PCType(self.pc_type))
        object.__setattr__(self, "motion", Motion(self.motion))
        if self.noise_px < 0:
            raise ValueError("noise must be non-negative")
        if self.n_pcs < 1:
            raise ValueError("need at least one correspondence")
        if not 0.0 <= self.outlier_ratio <= 1.0:
            raise ValueError("outlier ratio must lie in [0, 1]")
        if self.scenario is Scenario.TWO_CAMERA_RIG and self.pc_type is PCType.GENERIC:
            raise ValueError("the two-camera rig supports inter and intra correspondences only")


@dataclass(frozen=True)
class SyntheticInstance:
    rig: tuple
    pose: RigPose
    pcs: tuple
    points: np.ndarray = field(repr=False)
    model: str = "pinhole"           # "pinhole" (bearings on the z = 1 plane) | "omni"
    focal: float = 400.0

    @property
    def inlier_mask(self) -> np.ndarray:
        return np.array([pc.inlier for pc in self.pcs])


def _small_rotation(rng, max_deg: float) -> np.ndarray:
    """Rotations about x, y and z in turn, each angle uniform in ``[-max_deg, max_deg]``."""
    ax, ay, az = rng.uniform(-max_deg, max_deg, 3)
    return rotation_about([0, 0, 1], az) @ rotation_about([0, 1, 0], ay) @ rotation_about([1, 0, 0], ax)


def _bounded_rotation(rng, max_deg: float) -> np.ndarray:
    axis = rng.standard_normal(3)
    return rotation_about(axis, rng.uniform(0.0, max_deg))


def _rig_pose(rng, cfg: SceneConfig) -> RigPose:
    R = _small_rotation(rng, cfg.view_rotation_deg)
    if cfg.motion is Motion.FORWARD:
        d = np.array([0.0, 0.0, 1.0])
    elif cfg.motion is Motion.SIDEWAYS:
        d = np.array([1.0, 0.0, 0.0])
    else:
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
    centre = cfg.translation * d            # second rig origin in first rig frame
    return RigPose(R, -R @ centre)


def _project(cam: CameraExtrinsic, X: np.ndarray, cfg: SceneConfig):
    Xc = cam.Q.T @ (X - cam.s)
    if Xc[2] <= 1e-6:
        return None
    u = cfg.focal * Xc[0] / Xc[2] + cfg.width / 2
    v = cfg.focal * Xc[1] / Xc[2] + cfg.height / 2
    if not (0 <= u < cfg.width and 0 <= v < cfg.height):
        return None
    return Xc / Xc[2]


def _camera_pairs(cfg: SceneConfig, n: int):
    if cfg.pc_type is PCType.GENERIC:
        base = [(2 * k, 2 * k + 1) for k in range(cfg.n_cameras // 2)]
    elif cfg.pc_type is PCType.INTER:
        base = [(0, 1), (1, 0)]
    else:
        base = [(0, 0), (1, 1)]
    return [base[k % len(base)] for k in range(n)]


def _observe_rig(rng, rig, pose, cfg: SceneConfig, pair, sampler, tries: int = 1000):
    i, ip = pair
    for _ in range(tries):
        X = sampler()
        x = _project(rig[i], X, cfg)
        if x is None:
            continue
        xp = _project(rig[ip], pose.R @ X + pose.t, cfg)
        if xp is None:
            continue
        return X, x, xp
    return None


def make_two_camera_rig(cfg: SceneConfig) -> SyntheticInstance:
    """Two forward-facing pinhole cameras; ground plane plus random planes.

    Points that do not project inside both images are redrawn.
    """
    rng = np.random.default_rng(cfg.seed)
    h = cfg.baseline / 2
    rig = tuple(CameraExtrinsic(_small_rotation(rng, cfg.camera_perturbation_deg), [sx, 0.0, 0.0], k)
                for k, sx in enumerate((-h, h)))
    for _ in range(100):
        pose = _rig_pose(rng, cfg)
        planes = []
        for _ in range(cfg.n_planes):
            c = rng.uniform([-5, -5, 10], [5, 5, 20])
            nrm = rng.standard_normal(3)
            nrm /= np.linalg.norm(nrm)
            e1 = np.cross(nrm, [1.0, 0, 0] if abs(nrm[0]) < 0.9 else [0, 1.0, 0])
            e1 /= np.linalg.norm(e1)
            planes.append((c, e1, np.cross(nrm, e1)))

        def ground():
            return np.array([rng.uniform(-5, 5), cfg.ground_height, rng.uniform(10, 20)])

        def on_plane(p):
            c, e1, e2 = p
            a, b = rng.uniform(-cfg.patch_size / 2, cfg.patch_size / 2, 2)
            return c + a * e1 + b * e2

        samplers = [ground] * cfg.n_ground + [lambda p=p: on_plane(p) for p in planes]
        while len(samplers) < cfg.n_pcs:
            samplers.append(ground)
        samplers = samplers[: cfg.n_pcs]
        pairs = _camera_pairs(cfg, cfg.n_pcs)
        obs = []
        for k, smp in enumerate(samplers):
            o = _observe_rig(rng, rig, pose, cfg, pairs[k], smp)
            if o is None:
                # an unlucky plane; fall back to the ground plane
                o = _observe_rig(rng, rig, pose, cfg, pairs[k], ground)
            if o is None:
                break
            obs.append(o)
        if len(obs) == cfg.n_pcs:
            break
    else:
        raise SixPointError("could not place the scene inside both views")
    points = np.array([o[0] for o in obs])
    pcs = tuple(RayCorrespondence(x, xp, i, ip) for (X, x, xp), (i, ip) in zip(obs, pairs))
    inst = SyntheticInstance(rig, pose, pcs, points, "pinhole", cfg.focal)
    inst = add_pixel_noise(inst, cfg.noise_px, rng)
    return add_outliers(inst, cfg.outlier_ratio, rng)


def make_generalized_camera(cfg: SceneConfig) -> SyntheticInstance:
    """Omnidirectional cameras with random extrinsics; unit bearings."""
    rng = np.random.default_rng(cfg.seed)
    ncam = cfg.n_cameras if cfg.pc_type is PCType.GENERIC else 2
    rig = tuple(CameraExtrinsic(Rotation.random(random_state=rng).as_matrix(), rng.uniform(-1, 1, 3), k)
                for k in range(ncam))
    pose = RigPose(_bounded_rotation(rng, cfg.max_rotation_deg), rng.uniform(-1, 1, 3))
    cfg_pairs = replace(cfg, n_cameras=ncam)
    pairs = _camera_pairs(cfg_pairs, cfg.n_pcs)
    points = rng.uniform(-5, 5, (cfg.n_pcs, 3))
    pcs = []
    for X, (i, ip) in zip(points, pairs):
        x = rig[i].Q.T @ (X - rig[i].s)
        xp = rig[ip].Q.T @ (pose.R @ X + pose.t - rig[ip].s)
        pcs.append(RayCorrespondence(x / np.linalg.norm(x), xp / np.linalg.norm(xp), i, ip))
    inst = SyntheticInstance(rig, pose, tuple(pcs), points, "omni", cfg.focal)
    inst = add_bearing_noise(inst, cfg.noise_px / cfg.focal, rng)
    return add_outliers(inst, cfg.outlier_ratio, rng)


def make_instance(cfg: SceneConfig) -> SyntheticInstance:
    if cfg.scenario is Scenario.TWO_CAMERA_RIG:
        return make_two_camera_rig(cfg)
    return make_generalized_camera(cfg)


def _rng(rng):
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def add_pixel_noise(inst: SyntheticInstance, sigma: float, rng=None) -> SyntheticInstance:
    """Gaussian pixel noise on both images; bearings stay on the ``z = 1`` plane."""
    if sigma < 0:
        raise ValueError("noise must be non-negative")
    if sigma == 0:
        return inst
    if inst.model != "pinhole":
        return add_bearing_noise(inst, sigma / inst.focal, rng)
    rng = _rng(rng)
    s = sigma / inst.focal
    pcs = []
    for pc in inst.pcs:
        dx, dxp = rng.normal(0.0, s, 2), rng.normal(0.0, s, 2)
        x = pc.x / pc.x[2] + np.r_[dx, 0.0]
        xp = pc.xp / pc.xp[2] + np.r_[dxp, 0.0]
        pcs.append(RayCorrespondence(x, xp, pc.i, pc.ip, pc.inlier))
    return replace(inst, pcs=tuple(pcs))


def _perturb_bearing(rng, v: np.ndarray, sigma_rad: float) -> np.ndarray:
    u = v / np.linalg.norm(v)
    a = np.cross(u, [1.0, 0.0, 0.0] if abs(u[0]) < 0.9 else [0.0, 1.0, 0.0])
    a /= np.linalg.norm(a)
    b = np.cross(u, a)
    w = u + rng.normal(0.0, sigma_rad) * a + rng.normal(0.0, sigma_rad) * b
    return w / np.linalg.norm(w)


def add_bearing_noise(inst: SyntheticInstance, sigma_rad: float, rng=None) -> SyntheticInstance:
    """Angular Gaussian noise of standard deviation ``sigma_rad`` per tangent direction."""
    if sigma_rad < 0:
        raise ValueError("noise must be non-negative")
    if sigma_rad == 0:
        return inst
    rng = _rng(rng)
    pcs = tuple(RayCorrespondence(_perturb_bearing(rng, pc.x, sigma_rad),
                                  _perturb_bearing(rng, pc.xp, sigma_rad), pc.i, pc.ip, pc.inlier)
                for pc in inst.pcs)
    return replace(inst, pcs=pcs)


def random_bearing(rng) -> np.ndarray:
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def add_outliers(inst: SyntheticInstance, ratio: float, rng=None) -> SyntheticInstance:
    """Replace ``x'`` of a random ``ratio`` share of correspondences with a random bearing."""
    if ratio <= 0:
        return inst
    rng = _rng(rng)
    n = len(inst.pcs)
    bad = set(rng.choice(n, size=int(round(ratio * n)), replace=False).tolist())
    pcs = tuple(RayCorrespondence(pc.x, random_bearing(rng), pc.i, pc.ip, False) if k in bad else pc
                for k, pc in enumerate(inst.pcs))
    return replace(inst, pcs=pcs)


SAMPLE_PAIRS = {
    SolverKind.GENERIC64: [(2 * k, 2 * k + 1) for k in range(6)],
    SolverKind.INTER56: [(0, 1)] * 3 + [(1, 0)] * 3,
    SolverKind.INTER48: [(0, 1)] * 3 + [(1, 0)] * 3,
    SolverKind.INTRA48: [(0, 0)] * 3 + [(1, 1)] * 3,
}


def minimal_sample(inst: SyntheticInstance, kind: SolverKind, rng=None) -> list:
    """Six correspondences matching the solver's camera-pair selection rule."""
    rng = _rng(rng)
    by_pair: dict = {}
    for k, pc in enumerate(inst.pcs):
        if pc.inlier:
            by_pair.setdefault(pc.pair, []).append(k)
    picked = []
    need: dict = {}
    for p in SAMPLE_PAIRS[kind]:
        need[p] = need.get(p, 0) + 1
    for p, c in need.items():
        pool = by_pair.get(p, [])
        if len(pool) < c:
            raise SixPointError(f"instance has too few correspondences for camera pair {p}")
        picked.extend(rng.choice(pool, size=c, replace=False).tolist())
    return [inst.pcs[k] for k in picked]


def kind_pc_type(kind: SolverKind) -> PCType:
    return {SolverKind.GENERIC64: PCType.GENERIC, SolverKind.INTRA48: PCType.INTRA}.get(kind, PCType.INTER)


@dataclass
class StabilityResult:
    log_eps_R: np.ndarray          # nan for failed trials
    log_eps_t: np.ndarray
    log_eps_tdir: np.ndarray
    failures: int
    p2: float

    def __len__(self) -> int:
        return len(self.log_eps_R)

    def median_log_eps_R(self) -> float:
        return float(np.nanmedian(self.log_eps_R))


_FLOOR = 1e-300


def _trial(kind: SolverKind, cfg: SceneConfig, seed: int, solver_cfg=None):
    inst = make_instance(replace(cfg, seed=seed, noise_px=0.0, outlier_ratio=0.0,
                                 pc_type=kind_pc_type(kind), n_pcs=max(cfg.n_pcs, 12)))
    rng = np.random.default_rng([seed, 1])
    try:
        poses = solve(minimal_sample(inst, kind, rng), inst.rig, kind, solver_cfg)
    except SixPointError:
        poses = []
    if not poses:
        return None
    errs = [(rotation_error(inst.pose.R, p.R), translation_error(inst.pose.t, p.t),
             translation_dir_error(inst.pose.t, p.t)) for p in poses]
    # the best root is the one closest to the ground truth
    return min(errs, key=lambda e: (e[0], e[1]))


def run_stability_experiment(kind: SolverKind | str, cfg: SceneConfig | None = None,
                             trials: int = 10000, seed: int = 0, threads: int = 1,
                             accuracy: float = 1e-3, solver_cfg=None) -> StabilityResult:
    """Noise-free minimal solves; one error triple per trial (``nan`` when it fails).

    ``p2`` is the share of trials whose rotation error (degrees) and relative
    translation error both fall below ``accuracy``; failed trials count against it.
    """
    kind = SolverKind(kind)
    if cfg is None:
        scenario = Scenario.GENERALIZED if kind is SolverKind.GENERIC64 else Scenario.TWO_CAMERA_RIG
        cfg = SceneConfig(scenario=scenario, pc_type=kind_pc_type(kind))
    if cfg.scenario is Scenario.TWO_CAMERA_RIG and kind is SolverKind.GENERIC64:
        raise ValueError("the generic solver needs the generalized-camera scenario")
    seeds = np.random.SeedSequence([seed, 7]).generate_state(trials).tolist()
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            out = list(pool.map(lambda s: _trial(kind, cfg, s, solver_cfg), seeds))
    else:
        out = [_trial(kind, cfg, s, solver_cfg) for s in seeds]
    arr = np.full((trials, 3), np.nan)
    for k, e in enumerate(out):
        if e is not None:
            arr[k] = np.log10(np.maximum(e, _FLOOR))
    failures = sum(e is None for e in out)
    good = sum(e is not None and e[0] < accuracy and e[1] < accuracy for e in out)
    return StabilityResult(arr[:, 0], arr[:, 1], arr[:, 2], failures, good / trials if trials else math.nan)
