"""RANSAC over six-correspondence samples with angular reprojection scoring."""
from __future__ import annotations

import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTriangulation, NoModelFound, SixPointError
from .geometry import RigPose, compose_camera_pair
from .roots import SolverConfig
from .solvers import SolverKind, solve

_PARALLEL_EPS = 1e-12


@dataclass(frozen=True)
class RansacConfig:
    confidence: float = 0.99
    max_iterations: int = 20000
    threshold_deg: float = 0.1
    sample_size: int = 6
    seed: int = 0
    aggregation: str = "max"        # "max" | "sum" over the two views
    p2: float = 1.0                 # solver success probability for the stopping rule
    threads: int = 1

    def __post_init__(self):
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must be < 1 and > 0")
        if self.threshold_deg <= 0:
            raise ValueError("threshold must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.aggregation not in ("max", "sum"):
            raise ValueError("aggregation must be 'max' or 'sum'")
        if not 0.0 < self.p2 <= 1.0:
            raise ValueError("p2 must lie in (0, 1]")


@dataclass
class RansacResult:
    pose: RigPose
    inliers: np.ndarray
    iterations: int
    outlier_ratio: float
    errors: np.ndarray

    @property
    def n_inliers(self) -> int:
        return int(self.inliers.sum())


def ransac_iterations(p: float, s: int, eps: float) -> int:
    return ransac_iterations_stable(p, s, eps, 1.0)


def ransac_iterations_stable(p: float, s: int, eps: float, p2: float) -> int:
    """Samples needed so that one accurate all-inlier solve happens with probability ``p``."""
    if not 0.0 < p < 1.0:
        raise ValueError("confidence must be < 1 and > 0")
    if not 0.0 <= eps <= 1.0:
        raise ValueError("outlier ratio must lie in [0, 1]")
    if not 0.0 < p2 <= 1.0:
        raise ValueError("p2 must lie in (0, 1]")
    w = (p2 * (1.0 - eps)) ** s
    if w >= 1.0:
        return 1
    if w <= 0.0:
        return sys.maxsize
    denom = math.log1p(-w)
    if denom == 0.0:
        return sys.maxsize
    return max(1, math.ceil(math.log(1.0 - p) / denom))


def _cutoff(threshold_deg: float) -> float:
    # 1 - cos(a) without cancellation
    return 2.0 * math.sin(math.radians(threshold_deg) / 2.0) ** 2


def _unit(v):
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def angular_errors(pose: RigPose, rig, x: np.ndarray, xp: np.ndarray, cam: np.ndarray,
                   camp: np.ndarray, aggregation: str = "max") -> np.ndarray:
    """Vectorized ``1 - cos`` reprojection errors; ``inf`` for degenerate triangulations.

    The point is triangulated by the midpoint method in the view-1 camera frame.
    """
    Q = np.stack([c.Q for c in rig])
    S = np.stack([c.s for c in rig])
    Qi, si, Qp, sp = Q[cam], S[cam], Q[camp], S[camp]
    # camera-pair motion: X' = Rp X + tp for points in camera frames
    Rp = np.einsum("nji,jk,nkl->nil", Qp, pose.R, Qi)
    tp = np.einsum("nji,nj->ni", Qp, np.einsum("jk,nk->nj", pose.R, si) + pose.t - sp)
    d1 = _unit(x)
    d2m = _unit(xp)
    d2 = np.einsum("nji,nj->ni", Rp, d2m)               # second ray direction in camera-1 frame
    c2 = -np.einsum("nji,nj->ni", Rp, tp)               # second camera centre in camera-1 frame
    b = np.sum(d1 * d2, axis=1)
    denom = 1.0 - b * b
    cd1 = np.sum(c2 * d1, axis=1)
    cd2 = np.sum(c2 * d2, axis=1)
    degenerate = denom < _PARALLEL_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        l1 = (cd1 - b * cd2) / denom
        l2 = (b * cd1 - cd2) / denom
    X = 0.5 * (l1[:, None] * d1 + c2 + l2[:, None] * d2)
    X2 = np.einsum("nij,nj->ni", Rp, X) + tp
    # 1 - cos between unit vectors is half their squared distance
    with np.errstate(invalid="ignore"):
        e1 = 0.5 * np.sum((_unit(X) - d1) ** 2, axis=1)
        e2 = 0.5 * np.sum((_unit(X2) - d2m) ** 2, axis=1)
    err = np.maximum(e1, e2) if aggregation == "max" else e1 + e2
    err[degenerate | ~np.isfinite(err)] = np.inf
    return err


def angular_inlier_test(pose: RigPose, rig, pc, threshold_deg: float = 0.1,
                        aggregation: str = "max") -> tuple[bool, float]:
    """Inlier decision and ``1 - cos`` error for one correspondence."""
    R, t = compose_camera_pair(pose, rig[pc.i], rig[pc.ip])
    d1 = pc.x / np.linalg.norm(pc.x)
    d2 = R.T @ (pc.xp / np.linalg.norm(pc.xp))
    if np.linalg.norm(np.cross(d1, d2)) ** 2 < _PARALLEL_EPS:
        raise DegenerateTriangulation("rays are parallel")
    err = angular_errors(pose, rig, pc.x[None], pc.xp[None], np.array([pc.i]),
                         np.array([pc.ip]), aggregation)[0]
    return bool(err < _cutoff(threshold_deg)), float(err)


def _strata(pcs, kind: SolverKind):
    """Candidate camera pairs to draw 3+3 samples from, or None for plain sampling."""
    if kind not in (SolverKind.INTER56, SolverKind.INTER48, SolverKind.INTRA48):
        return None
    by_pair: dict = {}
    for k, pc in enumerate(pcs):
        by_pair.setdefault(pc.pair, []).append(k)
    want_intra = kind is SolverKind.INTRA48
    pools = [np.array(v) for p, v in sorted(by_pair.items())
             if len(v) >= 3 and (p[0] == p[1]) == want_intra]
    if len(pools) < 2:
        raise NoModelFound(f"not enough correspondences to draw {kind.value} samples")
    return pools


def _draw(rng: np.random.Generator, n: int, s: int, pools):
    if pools is None:
        return rng.choice(n, size=s, replace=False)
    a, b = rng.choice(len(pools), size=2, replace=False)
    return np.concatenate([rng.choice(pools[a], 3, replace=False),
                           rng.choice(pools[b], 3, replace=False)])


def _hypotheses(it, seed, pcs, rig, kind, pools, solver_cfg):
    rng = np.random.default_rng([seed, it])
    idx = _draw(rng, len(pcs), 6, pools)
    try:
        return solve([pcs[k] for k in idx], rig, kind, solver_cfg)
    except SixPointError:
        return []


def run_ransac(pcs, rig, solver: SolverKind | str = "auto", cfg: RansacConfig | None = None,
               solver_cfg: SolverConfig | None = None) -> RansacResult:
    """Best pose by inlier count with adaptive stopping.

    Every iteration draws its sample from a generator seeded by ``(seed, it)``,
    so the result does not depend on the number of worker threads.
    """
    cfg = cfg or RansacConfig()
    pcs, rig = list(pcs), tuple(rig)
    n = len(pcs)
    if n < cfg.sample_size:
        raise NoModelFound(f"need at least {cfg.sample_size} correspondences, got {n}")
    if isinstance(solver, str) and solver != "auto":
        solver = SolverKind(solver)
    if solver == "auto":
        solver = _auto_kind_for_set(pcs)
    pools = _strata(pcs, solver)
    x = np.stack([pc.x for pc in pcs])
    xp = np.stack([pc.xp for pc in pcs])
    cam = np.array([pc.i for pc in pcs])
    camp = np.array([pc.ip for pc in pcs])
    cutoff = _cutoff(cfg.threshold_deg)

    best = None
    best_count = -1
    best_err = None
    needed = cfg.max_iterations
    it = 0
    chunk = max(1, cfg.threads)
    pool = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None
    try:
        while it < min(needed, cfg.max_iterations):
            ids = range(it, min(it + chunk, cfg.max_iterations))
            args = (cfg.seed, pcs, rig, solver, pools, solver_cfg)
            if pool is None:
                batches = [_hypotheses(i, *args) for i in ids]
            else:
                batches = list(pool.map(lambda i: _hypotheses(i, *args), ids))
            for poses in batches:
                # stop exactly where a sequential run would
                if it >= min(needed, cfg.max_iterations):
                    break
                it += 1
                for pose in poses:
                    err = angular_errors(pose, rig, x, xp, cam, camp, cfg.aggregation)
                    count = int(np.sum(err < cutoff))
                    if count > best_count:
                        best, best_count, best_err = pose, count, err
                if best_count > 0:
                    eps = 1.0 - best_count / n
                    needed = ransac_iterations_stable(cfg.confidence, cfg.sample_size, eps, cfg.p2)
    finally:
        if pool is not None:
            pool.shutdown()
    if best is None:
        raise NoModelFound("no sample produced a pose")
    return RansacResult(best, best_err < cutoff, it, 1.0 - best_count / n, best_err)


def _auto_kind_for_set(pcs) -> SolverKind:
    pairs = {}
    for pc in pcs:
        pairs[pc.pair] = pairs.get(pc.pair, 0) + 1
    intra = sum(1 for p, c in pairs.items() if p[0] == p[1] and c >= 3)
    inter = sum(1 for p, c in pairs.items() if p[0] != p[1] and c >= 3)
    if intra >= 2:
        return SolverKind.INTRA48
    if inter >= 2:
        return SolverKind.INTER56
    return SolverKind.GENERIC64
