"""Root finding for the rotation equations and translation recovery.

The default backend is a null-space (truncated normal form) method: the
equations are expanded into a Macaulay matrix up to a fixed degree, its null
space is restricted to low-degree monomials until the rank stops growing (which
separates the affine roots from any component at infinity), a monomial basis is
picked by QR with column pivoting, and the roots are read off the eigenvectors
of a multiplication map.  Every candidate is then polished with Gauss-Newton
steps on the full overdetermined system.

A total-degree homotopy continuation backend (see ``homotopy``) is available
for cross-checking root counts.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .equations import EquationSystem, Parametrization
from .errors import ConfigurationMismatch, SolveFailure, TranslationAtInfinity
from .geometry import RigPose, cayley_to_rotation
from .poly3 import (Poly, PolyMatrix, _product_table, exponent_array, monomial_index,
                    monomial_vector, n_monomials)

NVARS = 3
DEFAULT_DEGREE = 8


@dataclass(frozen=True)
class SolverConfig:
    backend: str = "macaulay"          # "macaulay" | "homotopy"
    degree: int | None = None          # Macaulay expansion degree; None picks per system
    rank_tol: float = 1e-10            # relative singular value cutoff, expansion matrix
    restriction_rank_tol: float = 1e-11  # a rank gap must end below this
    dedup_radius: float = 1e-6
    imag_tol: float = 1e-6
    bound: float = 10.0
    residual_tol: float = 1e-6
    newton_steps: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.backend not in ("macaulay", "homotopy"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.degree is not None and self.degree < 2:
            raise ValueError("expansion degree too small")


@dataclass
class SolutionSet:
    roots: np.ndarray                   # (n, 3) real Cayley vectors
    residuals: np.ndarray               # (n,) max scaled residual per root
    complex_count: int = 0
    complex_roots: np.ndarray = field(default_factory=lambda: np.zeros((0, NVARS), complex))

    def __len__(self) -> int:
        return len(self.roots)

    @classmethod
    def empty(cls) -> "SolutionSet":
        return cls(np.zeros((0, NVARS)), np.zeros(0))


# ---------------------------------------------------------------------------
# polynomial system helpers


def _normalized_coefficients(polys: list[Poly], deg: int) -> np.ndarray:
    P = np.array([p.padded(deg) for p in polys])
    return P / np.linalg.norm(P, axis=1, keepdims=True)


def _derivative_maps(deg: int) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """For each variable: (source index, target index, factor) of d/dx_v."""
    exps = exponent_array(NVARS, deg)
    index = monomial_index(NVARS, deg)
    maps = []
    for v in range(NVARS):
        src = np.flatnonzero(exps[:, v] > 0)
        tgt = []
        for k in src:
            e = list(exps[k])
            e[v] -= 1
            tgt.append(index[tuple(e)])
        maps.append((src, np.array(tgt, dtype=np.int64), exps[src, v].astype(float)))
    return maps


class _System:
    """Dense view of a polynomial system for fast batched evaluation."""

    def __init__(self, polys: list[Poly]):
        self.deg = max(p.degree for p in polys)
        self.P = _normalized_coefficients(polys, self.deg)
        self.dP = []
        for src, tgt, fac in _derivative_maps(self.deg):
            D = np.zeros_like(self.P)
            D[:, tgt] = self.P[:, src] * fac
            self.dP.append(D)

    def residuals(self, z: np.ndarray) -> np.ndarray:
        """Scaled values, shape (n_roots, n_polys)."""
        return monomial_vector(z, self.deg) @ self.P.T

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        mv = monomial_vector(z, self.deg)
        return np.stack([mv @ D.T for D in self.dP], axis=-1)

    def refine(self, z: np.ndarray, steps: int) -> np.ndarray:
        """Gauss-Newton polishing; a step is kept only if it lowers the residual."""
        z = np.array(z, dtype=complex)
        if len(z) == 0:
            return z
        res = np.linalg.norm(self.residuals(z), axis=1)
        for _ in range(steps):
            f = self.residuals(z)
            J = self.jacobian(z)
            # least squares through QR; normal equations would square the
            # condition number of nearly singular roots
            Qj, Rj = np.linalg.qr(J)
            rhs = (np.conj(np.swapaxes(Qj, 1, 2)) @ f[..., None])[..., 0]
            with np.errstate(all="ignore"):
                try:
                    step = np.linalg.solve(Rj, rhs[..., None])[..., 0]
                except np.linalg.LinAlgError:
                    break
            cand = z - step
            new = np.linalg.norm(self.residuals(cand), axis=1)
            ok = np.isfinite(new) & (new < res)
            z[ok] = cand[ok]
            res[ok] = new[ok]
        return z


def macaulay_matrix(polys: list[Poly], degree: int) -> np.ndarray:
    """Rows are ``m * p`` for every polynomial ``p`` and monomial ``m`` with deg(m p) <= degree."""
    ncol = n_monomials(NVARS, degree)
    blocks = []
    for p in polys:
        dp = p.degree
        if dp < 0 or dp > degree:
            continue
        c = p.coeffs / np.linalg.norm(p.coeffs)
        table = _product_table(NVARS, dp, degree - dp).reshape(len(c), -1)
        nshift = table.shape[1]
        block = np.zeros((nshift, ncol))
        block[np.arange(nshift)[None, :], table] = c[:, None]
        blocks.append(block)
    if not blocks:
        return np.zeros((0, ncol))
    return np.vstack(blocks)


def _svd(A: np.ndarray, **kw):
    try:
        return np.linalg.svd(A, **kw)
    except np.linalg.LinAlgError:
        # the divide-and-conquer driver occasionally fails to converge
        kw.setdefault("full_matrices", True)
        return scipy.linalg.svd(A, lapack_driver="gesvd", **kw)


def _numerical_rank(A: np.ndarray, rtol: float) -> tuple[int, np.ndarray]:
    """Rank at the widest gap in the singular values that ends below ``rtol``.

    A fixed cutoff misjudges restricted null spaces whose genuine singular
    values can reach ``1e-9`` while the spurious ones sit near ``1e-16``.
    """
    s = _svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0, s
    r = s / s[0]
    lower = r[1:]
    cand = np.flatnonzero(lower < rtol)
    if cand.size:
        ratios = r[cand] / np.maximum(lower[cand], 1e-300)
        best = int(np.argmax(ratios))
        if ratios[best] > 1e3:
            return int(cand[best] + 1), s
    return int(np.sum(r > 1e-14)), s


def _macaulay_roots(polys: list[Poly], cfg: SolverConfig) -> np.ndarray:
    """All isolated affine complex roots via a truncated normal form."""
    d = cfg.degree or DEFAULT_DEGREE
    A = macaulay_matrix(polys, d)
    if A.shape[0] == 0:
        raise SolveFailure("empty equation system")
    ncol = A.shape[1]
    if A.shape[0] < ncol:
        A = np.vstack([A, np.zeros((ncol - A.shape[0], ncol))])
    _, s, Vt = _svd(A, full_matrices=True)
    rank = int(np.sum(s > cfg.rank_tol * s[0]))
    N = Vt[rank:].T
    if N.shape[1] == 0:
        return np.zeros((0, NVARS), complex)

    # the rank of the null space restricted to degree <= k grows with k until
    # the affine roots are separated; stop where it first stalls from the top
    ranks = {d: N.shape[1]}
    k = d
    found = None
    while k >= 1:
        r_lo, _ = _numerical_rank(N[: n_monomials(NVARS, k - 1)], cfg.restriction_rank_tol)
        ranks[k - 1] = r_lo
        if r_lo == ranks[k]:
            found = k
            break
        k -= 1
    if found is None:
        raise SolveFailure("solution set is not zero-dimensional at this expansion degree")
    delta = ranks[found]
    if delta == 0:
        return np.zeros((0, NVARS), complex)
    Nk = N[: n_monomials(NVARS, found)]
    U, sk, _ = _svd(Nk, full_matrices=False)
    Nh = U[:, :delta] * sk[:delta]
    n_basis_space = n_monomials(NVARS, found - 1)
    _, _, piv = scipy.linalg.qr(Nh[:n_basis_space].T, pivoting=True, mode="economic")
    basis = np.sort(piv[:delta])

    exps = exponent_array(NVARS, found)
    index = monomial_index(NVARS, found)
    shifted = np.empty((NVARS, delta), dtype=np.int64)
    for v in range(NVARS):
        for j, b in enumerate(basis):
            e = list(exps[b])
            e[v] += 1
            shifted[v, j] = index[tuple(e)]

    rng = np.random.default_rng(cfg.seed)
    weights = rng.standard_normal(NVARS)
    NB = Nh[basis]
    Ng = sum(weights[v] * Nh[shifted[v]] for v in range(NVARS))
    try:
        mult = np.linalg.solve(NB, Ng)
    except np.linalg.LinAlgError as exc:
        raise SolveFailure("singular basis block in the normal form") from exc
    _, vecs = np.linalg.eig(mult)
    vals = Nh @ vecs                        # evaluation vectors up to scale
    vB = vals[basis]
    denom = np.sum(np.conj(vB) * vB, axis=0)
    roots = np.empty((delta, NVARS), complex)
    for v in range(NVARS):
        roots[:, v] = np.sum(np.conj(vB) * vals[shifted[v]], axis=0) / denom
    return roots


def _dedup(z: np.ndarray, radius: float) -> np.ndarray:
    """Greedy removal of points within ``radius`` of an earlier point."""
    if len(z) < 2:
        return z
    dist = np.linalg.norm(z[:, None, :] - z[None, :, :], axis=-1)
    keep = np.ones(len(z), bool)
    for k in range(len(z)):
        if keep[k]:
            dup = dist[k] <= radius
            dup[: k + 1] = False
            keep &= ~dup
    return z[keep]


def solve_system(sys: EquationSystem, cfg: SolverConfig | None = None) -> SolutionSet:
    """All isolated real roots of ``sys.e1 + sys.e2`` inside ``|q| <= cfg.bound``."""
    cfg = cfg or SolverConfig()
    if sys.parametrization is not Parametrization.CAYLEY:
        raise ConfigurationMismatch("only the Cayley equation system can be solved")
    if not sys.e2 and any(g.pair[0] == g.pair[1] for g in sys.groups):
        raise ConfigurationMismatch(
            "intra-camera ray bundles need the ray-bundle equations; the 4x4 minors alone "
            "have a one-dimensional family of extraneous roots")
    polys = [p for p in sys.polys if not p.is_zero()]
    if not polys:
        raise SolveFailure("no non-trivial equations")

    if cfg.backend == "homotopy":
        from .homotopy import homotopy_roots
        z = homotopy_roots(polys, seed=cfg.seed)
    else:
        z = _macaulay_roots(polys, cfg)
    system = _System(polys)
    z = system.refine(z, cfg.newton_steps)
    z = z[np.all(np.isfinite(z), axis=1)]
    z = _dedup(z, cfg.dedup_radius)
    complex_count = len(z)

    scale = np.maximum(1.0, np.abs(z).max(axis=1)) if len(z) else np.zeros(0)
    real = np.abs(z.imag).max(axis=1) < cfg.imag_tol * scale if len(z) else np.zeros(0, bool)
    q = z[real].real
    if len(q):
        q = system.refine(q.astype(complex), cfg.newton_steps).real
    inside = np.linalg.norm(q, axis=1) <= cfg.bound if len(q) else np.zeros(0, bool)
    q = q[inside]
    res = np.abs(system.residuals(q)).max(axis=1) / _monomial_scale(q, system.deg) if len(q) else np.zeros(0)
    ok = res < cfg.residual_tol
    q, res = q[ok], res[ok]
    if len(q):
        q = _dedup(q, cfg.dedup_radius)
        res = np.abs(system.residuals(q)).max(axis=1) / _monomial_scale(q, system.deg)
    return SolutionSet(q, res, complex_count, z)


def _monomial_scale(q: np.ndarray, deg: int) -> np.ndarray:
    # residuals are measured relative to the size of the monomial vector at q
    return np.maximum(1.0, np.linalg.norm(monomial_vector(q, deg), axis=1))


def _translations(Mq: np.ndarray):
    """Null vectors of a stack of numeric 6x4 matrices; ``ok`` is False at infinity."""
    _, _, Vt = np.linalg.svd(Mq)
    v = Vt[..., -1, :]
    ok = np.abs(v[..., 3]) >= 1e-10 * np.linalg.norm(v, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = v[..., :3] / v[..., 3:4]
    return t, ok & np.all(np.isfinite(t), axis=-1)


def recover_translation(m, q) -> np.ndarray:
    """Translation from the null vector of the numeric 6x4 matrix ``M(q)``.

    ``m`` is a PolyMatrix or an already evaluated numeric matrix.
    """
    if isinstance(m, PolyMatrix):
        Mq = np.asarray(m.evaluate(np.asarray(q, dtype=float)), dtype=float)
    else:
        Mq = np.asarray(m, dtype=float)
    t, ok = _translations(Mq[None])
    if not ok[0]:
        raise TranslationAtInfinity("null vector has a vanishing homogeneous coordinate")
    return t[0]


def assemble_poses(sys: EquationSystem, sols: SolutionSet) -> list[RigPose]:
    """One pose per real root; roots whose translation lies at infinity are dropped."""
    if len(sols.roots) == 0:
        return []
    q = np.asarray(sols.roots, dtype=float)
    t, ok = _translations(sys.m.evaluate(q))
    return [RigPose(cayley_to_rotation(qk), tk) for qk, tk, good in zip(q, t, ok) if good]


def without_ray_bundles(sys: EquationSystem) -> EquationSystem:
    """Copy of ``sys`` that keeps only the 4x4-minor equations."""
    return dataclasses.replace(sys, e2=[])
