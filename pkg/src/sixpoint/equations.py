"""Hidden-variable equation system for the six-point rig pose problem.

Each correspondence gives one bilinear constraint in rotation and translation.
With the Cayley map scaled by ``1 + |q|^2`` every constraint becomes one row of
a 6x4 matrix ``M(q)`` of quadratics with ``M(q) @ (t, 1) = 0``.  Rotation
candidates are the common zeros of the vanishing 4x4 minors and, for
correspondences sharing one camera pair, of the rank-2 conditions on the 3x3
translation blocks.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from functools import lru_cache

import numpy as np

from .errors import InvalidProblem
from .geometry import CameraExtrinsic, RayCorrespondence, skew
from .poly3 import (Poly, PolyMatrix, batch_exact_divide, batch_mul, cayley_norm_factor,
                    exact_divide, minors, monomials)

N_POINTS = 6


class Parametrization(enum.Enum):
    CAYLEY = "cayley"
    QUATERNION = "quaternion"


@dataclass(frozen=True)
class SixPointProblem:
    rig: tuple
    pcs: tuple
    parametrization: Parametrization = Parametrization.CAYLEY

    def __post_init__(self):
        rig = tuple(self.rig)
        pcs = tuple(self.pcs)
        if len(pcs) != N_POINTS:
            raise InvalidProblem(f"expected {N_POINTS} correspondences, got {len(pcs)}")
        for k, pc in enumerate(pcs):
            if not isinstance(pc, RayCorrespondence):
                raise InvalidProblem(f"correspondence {k} is not a RayCorrespondence")
            if not (0 <= pc.i < len(rig) and 0 <= pc.ip < len(rig)):
                raise InvalidProblem(f"correspondence {k} refers to a camera outside the rig")
        if any(not isinstance(c, CameraExtrinsic) for c in rig):
            raise InvalidProblem("rig entries must be CameraExtrinsic")
        object.__setattr__(self, "rig", rig)
        object.__setattr__(self, "pcs", pcs)
        object.__setattr__(self, "parametrization", Parametrization(self.parametrization))


@dataclass(frozen=True)
class RayBundleGroup:
    """Correspondences observed by one camera in view 1 and one camera in view 2."""

    rows: tuple[int, ...]
    pair: tuple[int, int]

    @property
    def size(self) -> int:
        return len(self.rows)

    def triples(self):
        return list(combinations(self.rows, 3))


@dataclass
class EquationSystem:
    e1: list[Poly]
    e2: list[Poly]
    m: PolyMatrix
    groups: list[RayBundleGroup] = field(default_factory=list)
    parametrization: Parametrization = Parametrization.CAYLEY

    @property
    def polys(self) -> list[Poly]:
        return list(self.e1) + list(self.e2)


@lru_cache(maxsize=None)
def _rotation_coefficients(param: Parametrization) -> np.ndarray:
    """Coefficient tensor ``C[j, k, :]`` of the polynomial rotation entries.

    For Cayley this is ``(1 + |q|^2) R`` over the 10 monomials of degree <= 2 in
    ``(q_x, q_y, q_z)``; for quaternions it is ``R_quat`` over the 15 monomials
    of degree <= 2 in ``(q_w, q_x, q_y, q_z)``.
    """
    if param is Parametrization.CAYLEY:
        nv = 3
        x, y, z = (Poly.variable(k, 3) for k in range(3))
        one = Poly.constant(1.0)
        ent = [
            [one + x * x - y * y - z * z, 2 * (x * y) - 2 * z, 2 * (x * z) + 2 * y],
            [2 * (x * y) + 2 * z, one - x * x + y * y - z * z, 2 * (y * z) - 2 * x],
            [2 * (x * z) - 2 * y, 2 * (y * z) + 2 * x, one - x * x - y * y + z * z],
        ]
    else:
        nv = 4
        w, x, y, z = (Poly.variable(k, 4) for k in range(4))
        ent = [
            [w * w + x * x - y * y - z * z, 2 * (x * y) - 2 * (w * z), 2 * (x * z) + 2 * (w * y)],
            [2 * (x * y) + 2 * (w * z), w * w - x * x + y * y - z * z, 2 * (y * z) - 2 * (w * x)],
            [2 * (x * z) - 2 * (w * y), 2 * (y * z) + 2 * (w * x), w * w - x * x - y * y + z * z],
        ]
    n = len(monomials(nv, 2))
    C = np.array([[p.padded(2) for p in row] for row in ent]).reshape(3, 3, n)
    C.setflags(write=False)
    return C


def _row_coefficients(rig, pc: RayCorrespondence, C: np.ndarray) -> np.ndarray:
    """Coefficients of one row of ``M``: shape ``(4, n_monomials)``."""
    cam_i, cam_ip = rig[pc.i], rig[pc.ip]
    a = cam_i.Q @ pc.x          # view-1 ray direction in the rig frame
    b = cam_ip.Q @ pc.xp        # view-2 ray direction in the rig frame
    # b . ([t]x R a) = t . ((R a) x b) = -(skew(b) R a) . t
    t_part = -np.einsum("mj,jkn,k->mn", skew(b), C, a)
    # b . (R [s_i]x a - [s_i']x R a)
    const = (np.einsum("j,jkn,k->n", b, C, np.cross(cam_i.s, a))
             - np.einsum("j,jkn,k->n", np.cross(b, cam_ip.s), C, a))
    return np.vstack([t_part, const[None, :]])


def _coefficient_tensor(problem: SixPointProblem) -> np.ndarray:
    C = _rotation_coefficients(problem.parametrization)
    return np.stack([_row_coefficients(problem.rig, pc, C) for pc in problem.pcs])


def build_M(problem: SixPointProblem) -> PolyMatrix:
    """The 6x4 matrix with ``M(q) @ (t_x, t_y, t_z, 1) = 0`` at the true pose.

    The Cayley denominator ``1 + |q|^2`` is cleared, so entries are quadratic.
    """
    nv = 3 if problem.parametrization is Parametrization.CAYLEY else 4
    T = _coefficient_tensor(problem)
    return PolyMatrix([[Poly(c, nv) for c in row] for row in T])


def detect_ray_bundle_groups(problem: SixPointProblem, min_size: int = 3) -> list[RayBundleGroup]:
    """Maximal sets of correspondences sharing their ``(i, i')`` camera pair."""
    by_pair: dict[tuple[int, int], list[int]] = {}
    for k, pc in enumerate(problem.pcs):
        by_pair.setdefault(pc.pair, []).append(k)
    groups = [RayBundleGroup(tuple(rows), pair) for pair, rows in by_pair.items()
              if len(rows) >= min_size]
    groups.sort(key=lambda g: g.rows)
    return groups


def _structurally_zero(rows, groups) -> bool:
    # four rows from one camera pair: the constant column is a combination of
    # the translation columns, so the 4x4 minor vanishes identically
    return any(sum(r in g.rows for r in rows) >= 4 for g in groups)


_PAIRS4 = list(combinations(range(4), 2))


def _batched_minors(T: np.ndarray, row_sets4, triples):
    """Coefficient rows of the 4x4 minors (degree 8) and 3x3 minors on columns 0..2 (degree 6).

    Both come from one batch of 2x2 minors: the 4x4 minors by Laplace expansion
    along their first two rows, the 3x3 minors along their first row.
    """
    row_pairs = sorted({(r[0], r[1]) for r in row_sets4} | {(r[2], r[3]) for r in row_sets4}
                       | {(t[1], t[2]) for t in triples})
    pair_id = {p: k for k, p in enumerate(row_pairs)}
    ra = np.array([p[0] for p in row_pairs])
    rb = np.array([p[1] for p in row_pairs])
    ca = np.array([c[0] for c in _PAIRS4])
    cb = np.array([c[1] for c in _PAIRS4])
    A = T[ra[:, None], ca[None, :]].reshape(-1, T.shape[-1])
    B = T[rb[:, None], cb[None, :]].reshape(-1, T.shape[-1])
    C = T[ra[:, None], cb[None, :]].reshape(-1, T.shape[-1])
    D = T[rb[:, None], ca[None, :]].reshape(-1, T.shape[-1])
    m2 = (batch_mul(A, B, 2, 2) - batch_mul(C, D, 2, 2)).reshape(len(row_pairs), len(_PAIRS4), -1)
    col_id = {c: k for k, c in enumerate(_PAIRS4)}

    d4 = np.zeros((len(row_sets4), 165))
    if row_sets4:
        top = np.array([pair_id[(r[0], r[1])] for r in row_sets4])
        bot = np.array([pair_id[(r[2], r[3])] for r in row_sets4])
        for (c0, c1) in _PAIRS4:
            comp = tuple(c for c in range(4) if c not in (c0, c1))
            sign = 1.0 if (c0 + c1) % 2 else -1.0
            d4 += sign * batch_mul(m2[top, col_id[(c0, c1)]], m2[bot, col_id[comp]], 4, 4)
    d3 = np.zeros((len(triples), 84))
    if triples:
        lead = np.array([t[0] for t in triples])
        rest = np.array([pair_id[(t[1], t[2])] for t in triples])
        for j, comp in enumerate(((1, 2), (0, 2), (0, 1))):
            sign = -1.0 if j % 2 else 1.0
            d3 += sign * batch_mul(T[lead, j], m2[rest, col_id[comp]], 2, 4)
    return d4, d3


def build_equations(problem: SixPointProblem) -> EquationSystem:
    """Emit the 4x4-minor set and the ray-bundle 3x3-minor set.

    Cayley minors are divided exactly by ``1 + q_x^2 + q_y^2 + q_z^2``.  Minors
    that vanish identically (four rows from one camera pair) are omitted.
    """
    m = build_M(problem)
    groups = detect_ray_bundle_groups(problem)
    row_sets4 = [rows for rows in combinations(range(N_POINTS), 4)
                 if not _structurally_zero(rows, groups)]
    triples = [t for g in groups for t in g.triples()]
    if problem.parametrization is Parametrization.CAYLEY:
        d4, d3 = _batched_minors(m.coefficient_tensor(2), row_sets4, triples)
        d = cayley_norm_factor()
        e1 = [Poly(c) for c in batch_exact_divide(d4, 8, d)] if row_sets4 else []
        e2 = [Poly(c) for c in batch_exact_divide(d3, 6, d)] if triples else []
    else:
        e1 = minors(m, row_sets4, (0, 1, 2, 3))
        e2 = minors(m, triples, (0, 1, 2)) if triples else []
    return EquationSystem(e1, e2, m, groups, problem.parametrization)


def build_equations_reference(problem: SixPointProblem) -> EquationSystem:
    """Same system through symbolic cofactor expansion and long division (slow, for checks)."""
    m = build_M(problem)
    groups = detect_ray_bundle_groups(problem)
    row_sets4 = [rows for rows in combinations(range(N_POINTS), 4)
                 if not _structurally_zero(rows, groups)]
    dets4 = minors(m, row_sets4, (0, 1, 2, 3))
    triples = [t for g in groups for t in g.triples()]
    dets3 = minors(m, triples, (0, 1, 2)) if triples else []
    if problem.parametrization is Parametrization.CAYLEY:
        d = cayley_norm_factor()
        e1 = [exact_divide(p, d) for p in dets4]
        e2 = [exact_divide(p, d) for p in dets3]
    else:
        e1, e2 = list(dets4), list(dets3)
    return EquationSystem(e1, e2, m, groups, problem.parametrization)
