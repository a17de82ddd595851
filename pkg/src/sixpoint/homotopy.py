"""Total-degree homotopy continuation for small overdetermined systems in three unknowns.

The system is first squared: each of three target equations is a random complex
combination of ``h_i * p_i`` where ``h_i`` is a power of a random affine linear
form that lifts ``p_i`` to the top degree.  The square system is then tracked
from ``x_j^D - 1 = 0`` with the usual random ``gamma`` so that paths avoid
singularities for ``t < 1``.  Endpoints that stay finite are polished on the
square system and kept only if they also satisfy every original equation.

All paths are tracked together with vectorized numpy steps; every path keeps
its own position ``t`` and step size.
"""
from __future__ import annotations

import numpy as np

from .poly3 import Poly, monomial_vector

NVARS = 3


class _Square:
    def __init__(self, polys: list[Poly], rng: np.random.Generator):
        from .roots import _System

        self.full = _System(polys)
        self.D = self.full.deg
        self.P = self.full.P                      # (m, nmon) normalized coefficients
        self.dP = self.full.dP
        m = len(polys)
        self.lift = np.array([self.D - p.degree for p in polys])
        self.a = rng.standard_normal((m, NVARS)) + 1j * rng.standard_normal((m, NVARS))
        self.b = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        self.lam = rng.standard_normal((NVARS, m)) + 1j * rng.standard_normal((NVARS, m))

    def value_jac(self, z: np.ndarray):
        mv = monomial_vector(z, self.D)                     # (n, nmon)
        p = mv @ self.P.T                                   # (n, m)
        dp = np.stack([mv @ D.T for D in self.dP], axis=-1)  # (n, m, 3)
        ell = z @ self.a.T + self.b                         # (n, m)
        k = self.lift
        h = ell ** k
        dh = np.where(k > 0, k * ell ** np.maximum(k - 1, 0), 0.0)[..., None] * self.a
        g = h * p
        dg = dh * p[..., None] + h[..., None] * dp
        return g @ self.lam.T, np.einsum("jm,nmv->njv", self.lam, dg)


def _start_system(D: int):
    roots1 = np.exp(2j * np.pi * np.arange(D) / D)
    grid = np.stack(np.meshgrid(roots1, roots1, roots1, indexing="ij"), axis=-1)
    return grid.reshape(-1, NVARS)


def _homotopy(sq: _Square, gamma: complex, z: np.ndarray, t: np.ndarray):
    D = sq.D
    F, JF = sq.value_jac(z)
    G = z ** D - 1.0
    JG = np.zeros_like(JF)
    idx = np.arange(NVARS)
    JG[:, idx, idx] = D * z ** (D - 1)
    s = (1.0 - t)[:, None]
    H = s * gamma * G + t[:, None] * F
    Hx = s[..., None] * gamma * JG + t[:, None, None] * JF
    Ht = F - gamma * G
    return H, Hx, Ht


def _velocity(sq, gamma, z, t):
    _, Hx, Ht = _homotopy(sq, gamma, z, t)
    return -np.linalg.solve(Hx, Ht[..., None])[..., 0]


def _safe(fn, *args):
    with np.errstate(all="ignore"):
        try:
            return fn(*args)
        except np.linalg.LinAlgError:
            return None


def track_paths(sq: _Square, gamma: complex, max_steps: int = 4000,
                max_norm: float = 1e8, min_step: float = 1e-10):
    """Track all start solutions from t=0 to t=1.  Returns (endpoints, finished mask)."""
    z = _start_system(sq.D).astype(complex)
    n = len(z)
    t = np.zeros(n)
    dt = np.full(n, 0.01)
    active = np.ones(n, bool)
    done = np.zeros(n, bool)
    for _ in range(max_steps):
        ids = np.flatnonzero(active)
        if ids.size == 0:
            break
        zi, ti = z[ids], t[ids]
        h = np.minimum(dt[ids], 1.0 - ti)
        ok = np.zeros(ids.size, bool)
        znew = zi.copy()
        with np.errstate(all="ignore"):
            res = _rk4_correct(sq, gamma, zi, ti, h)
        if res is not None:
            znew, ok = res
        t_new = ti + h
        ok &= np.all(np.isfinite(znew), axis=1)
        # accepted steps advance and grow; rejected ones shrink
        z[ids[ok]] = znew[ok]
        t[ids[ok]] = t_new[ok]
        dt[ids[ok]] = np.minimum(dt[ids[ok]] * 2.0, 0.05)
        dt[ids[~ok]] *= 0.5
        finished = ids[ok & (t_new >= 1.0)]
        done[finished] = True
        active[finished] = False
        blown = ids[(np.linalg.norm(z[ids], axis=1) > max_norm) | (dt[ids] < min_step)]
        active[blown] = False
    return z, done


def _rk4_correct(sq, gamma, z, t, h):
    def vel(zz, tt):
        v = _safe(_velocity, sq, gamma, zz, tt)
        if v is None:
            raise FloatingPointError
        return v

    try:
        k1 = vel(z, t)
        k2 = vel(z + 0.5 * h[:, None] * k1, t + 0.5 * h)
        k3 = vel(z + 0.5 * h[:, None] * k2, t + 0.5 * h)
        k4 = vel(z + h[:, None] * k3, t + h)
    except FloatingPointError:
        return _per_path(sq, gamma, z, t, h)
    pred = z + (h[:, None] / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return _correct(sq, gamma, pred, t + h)


def _per_path(sq, gamma, z, t, h):
    # a singular batch solve poisons every path; fall back to one path at a time
    out = z.copy()
    ok = np.zeros(len(z), bool)
    for k in range(len(z)):
        r = _rk4_correct(sq, gamma, z[k:k + 1], t[k:k + 1], h[k:k + 1]) if len(z) > 1 else None
        if r is not None:
            out[k], ok[k] = r[0][0], r[1][0]
    return out, ok


def _correct(sq, gamma, z, t, iters: int = 3, tol: float = 1e-9):
    ok = np.ones(len(z), bool)
    step = np.zeros(len(z))
    for _ in range(iters):
        H, Hx, _ = _homotopy(sq, gamma, z, t)
        try:
            dz = np.linalg.solve(Hx, H[..., None])[..., 0]
        except np.linalg.LinAlgError:
            return z, np.zeros(len(z), bool)
        z = z - dz
        step = np.linalg.norm(dz, axis=1)
    ok &= step < tol * (1.0 + np.linalg.norm(z, axis=1))
    return z, ok


def homotopy_roots(polys: list[Poly], seed: int = 0, residual_tol: float = 1e-11,
                   dedup_radius: float = 1e-5) -> np.ndarray:
    """Isolated affine complex roots of an overdetermined system in three unknowns."""
    rng = np.random.default_rng(seed)
    sq = _Square(polys, rng)
    gamma = np.exp(2j * np.pi * rng.uniform())
    z, done = track_paths(sq, gamma)
    z = z[done]
    if len(z) == 0:
        return np.zeros((0, NVARS), complex)
    # endpoints of ill-conditioned roots can need a second polishing pass
    z = sq.full.refine(sq.full.refine(z, 8), 8)
    scale = np.maximum(1.0, np.linalg.norm(monomial_vector(z, sq.D), axis=1))
    res = np.abs(sq.full.residuals(z)).max(axis=1) / scale
    z = z[res < residual_tol]
    # drop singular endpoints (they are not isolated regular roots)
    if len(z):
        J = sq.full.jacobian(z)
        sv = np.linalg.svd(J, compute_uv=False)
        z = z[sv[:, -1] > 1e-8 * np.maximum(sv[:, 0], 1e-300)]
    from .roots import _dedup
    return _dedup(z, dedup_radius)
