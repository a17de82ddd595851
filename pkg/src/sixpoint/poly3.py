"""Dense multivariate polynomials with real coefficients.

Coefficients are stored as a flat vector over all monomials up to the
polynomial's degree, in ascending graded reverse lexicographic order
(``1 < z < y < x < z^2 < yz < y^2 < xz < xy < x^2 < ...`` for three variables).
Any prefix of that ordering is the set of monomials up to some degree, which
keeps addition and padding trivial.  Products go through cached index tables.

The Cayley pipeline works in three variables ``(q_x, q_y, q_z)``; the
quaternion pipeline uses four ``(q_w, q_x, q_y, q_z)``.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb

import numpy as np

from .errors import NotDivisible, NotSquare

PRUNE_RTOL = 1e-14


@lru_cache(maxsize=None)
def monomials_of_degree(nvars: int, deg: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples of total degree ``deg`` in ascending grevlex order."""
    out = []
    for combo in combinations_with_replacement(range(nvars), deg):
        e = [0] * nvars
        for v in combo:
            e[v] += 1
        out.append(tuple(e))
    # descending grevlex sorts by the reversed exponent vector, ascending
    out.sort(key=lambda e: tuple(reversed(e)), reverse=True)
    return tuple(out)


@lru_cache(maxsize=None)
def monomials(nvars: int, deg: int) -> tuple[tuple[int, ...], ...]:
    """All exponent tuples of total degree <= ``deg`` in ascending grevlex order."""
    out: list[tuple[int, ...]] = []
    for d in range(deg + 1):
        out.extend(monomials_of_degree(nvars, d))
    return tuple(out)


def n_monomials(nvars: int, deg: int) -> int:
    return comb(deg + nvars, nvars) if deg >= 0 else 0


@lru_cache(maxsize=None)
def monomial_index(nvars: int, deg: int) -> dict[tuple[int, ...], int]:
    return {e: k for k, e in enumerate(monomials(nvars, deg))}


@lru_cache(maxsize=None)
def exponent_array(nvars: int, deg: int) -> np.ndarray:
    arr = np.array(monomials(nvars, deg), dtype=np.int64).reshape(-1, nvars)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=None)
def _product_table(nvars: int, da: int, db: int) -> np.ndarray:
    ea = exponent_array(nvars, da)
    eb = exponent_array(nvars, db)
    index = monomial_index(nvars, da + db)
    table = np.empty((len(ea), len(eb)), dtype=np.int64)
    for i, a in enumerate(ea):
        for j, b in enumerate(eb):
            table[i, j] = index[tuple(int(u) for u in a + b)]
    table.setflags(write=False)
    return table.ravel()


def grevlex_key(e: tuple[int, ...]):
    """Sort key; larger key means larger monomial in grevlex."""
    return (sum(e), tuple(-v for v in reversed(e)))


@lru_cache(maxsize=None)
def _degree_of_length(nvars: int, n: int) -> int:
    d = 0
    while n_monomials(nvars, d) < n:
        d += 1
    if n_monomials(nvars, d) != n:
        raise ValueError("coefficient vector length does not match a full degree")
    return d


class Poly:
    """Polynomial in ``nvars`` variables with dense real coefficients."""

    __slots__ = ("coeffs", "nvars")

    def __init__(self, coeffs, nvars: int = 3, prune: bool = True):
        c = np.asarray(coeffs, dtype=float).ravel()
        if c.size == 0:
            c = np.zeros(1)
        self.nvars = nvars
        _degree_of_length(nvars, c.size)
        if prune:
            c = _pruned(c)
        self.coeffs = _trimmed(c, nvars)

    # construction ------------------------------------------------------
    @classmethod
    def constant(cls, value: float, nvars: int = 3) -> "Poly":
        return cls([value], nvars)

    @classmethod
    def variable(cls, k: int, nvars: int = 3) -> "Poly":
        e = [0] * nvars
        e[k] = 1
        return cls.from_terms({tuple(e): 1.0}, nvars)

    @classmethod
    def from_terms(cls, terms: dict, nvars: int = 3) -> "Poly":
        if not terms:
            return cls([0.0], nvars)
        deg = max(sum(e) for e in terms)
        index = monomial_index(nvars, deg)
        c = np.zeros(n_monomials(nvars, deg))
        for e, v in terms.items():
            if len(e) != nvars or min(e) < 0:
                raise ValueError(f"bad exponent tuple {e}")
            c[index[tuple(e)]] += v
        return cls(c, nvars)

    # inspection --------------------------------------------------------
    @property
    def degree(self) -> int:
        """Total degree; the zero polynomial reports -1."""
        if not np.any(self.coeffs):
            return -1
        return _degree_of_length(self.nvars, self.coeffs.size)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def terms(self) -> dict[tuple[int, ...], float]:
        """Non-zero terms keyed by exponent tuple, largest monomial first."""
        mons = monomials(self.nvars, _degree_of_length(self.nvars, self.coeffs.size))
        nz = np.flatnonzero(self.coeffs)
        return {mons[k]: float(self.coeffs[k]) for k in nz[::-1]}

    def leading_term(self) -> tuple[tuple[int, ...], float]:
        nz = np.flatnonzero(self.coeffs)
        if nz.size == 0:
            raise ValueError("zero polynomial has no leading term")
        k = nz[-1]
        return monomials(self.nvars, self.degree)[k], float(self.coeffs[k])

    def max_abs_coeff(self) -> float:
        return float(np.abs(self.coeffs).max())

    def padded(self, deg: int) -> np.ndarray:
        """Coefficient vector over all monomials up to ``deg``."""
        n = n_monomials(self.nvars, deg)
        if self.coeffs.size > n:
            raise ValueError("polynomial degree exceeds requested padding")
        out = np.zeros(n)
        out[: self.coeffs.size] = self.coeffs
        return out

    # arithmetic --------------------------------------------------------
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Poly.constant(float(other), self.nvars)

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        if a.size < b.size:
            a, b = b, a
        c = a.copy()
        c[: b.size] += b
        return Poly(c, self.nvars)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(-self.coeffs, self.nvars, prune=False)

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return Poly(self.coeffs * float(other), self.nvars)
        other = self._coerce(other)
        da = _degree_of_length(self.nvars, self.coeffs.size)
        db = _degree_of_length(self.nvars, other.coeffs.size)
        table = _product_table(self.nvars, da, db)
        c = np.bincount(table, weights=np.outer(self.coeffs, other.coeffs).ravel(),
                        minlength=n_monomials(self.nvars, da + db))
        return Poly(c, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly.constant(1.0, self.nvars)
        for _ in range(int(k)):
            out = out * self
        return out

    def __call__(self, q):
        return poly_eval(self, q)

    def __repr__(self) -> str:
        names = "xyz" if self.nvars == 3 else [f"v{k}" for k in range(self.nvars)]
        if self.nvars == 4:
            names = ["w", "x", "y", "z"]
        parts = []
        for e, v in self.terms().items():
            mon = "*".join(f"{names[k]}^{p}" if p > 1 else names[k] for k, p in enumerate(e) if p)
            parts.append(f"{v:+.6g}" + (f"*{mon}" if mon else ""))
        return "Poly(" + (" ".join(parts) if parts else "0") + ")"


TriPoly = Poly


def _pruned(c: np.ndarray) -> np.ndarray:
    if c.size == 0:
        return c
    m = np.abs(c).max()
    if m == 0 or not np.isfinite(m):
        return c
    small = np.abs(c) < PRUNE_RTOL * m
    if small.any():
        c = c.copy()
        c[small] = 0.0
    return c


def _trimmed(c: np.ndarray, nvars: int) -> np.ndarray:
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return np.zeros(1)
    deg = sum(monomials(nvars, _degree_of_length(nvars, c.size))[nz[-1]])
    n = n_monomials(nvars, deg)
    return c[:n] if n < c.size else c


def poly_add(p: Poly, r: Poly) -> Poly:
    return p + r


def poly_mul(p: Poly, r: Poly) -> Poly:
    return p * r


def monomial_vector(q, deg: int) -> np.ndarray:
    """Values of all monomials up to ``deg`` at ``q`` (shape ``(..., nvars)``)."""
    q = np.asarray(q)
    nvars = q.shape[-1]
    exps = exponent_array(nvars, deg)
    # powers[..., v, p] = q_v ** p
    powers = q[..., :, None] ** np.arange(deg + 1)
    out = np.ones(q.shape[:-1] + (len(exps),), dtype=np.result_type(q, float))
    for v in range(nvars):
        out = out * powers[..., v, exps[:, v]]
    return out


def poly_eval(p: Poly, q):
    """Evaluate at one point or a batch of points; complex input is allowed."""
    q = np.asarray(q)
    if q.shape[-1] != p.nvars:
        raise ValueError(f"expected points with {p.nvars} coordinates")
    deg = _degree_of_length(p.nvars, p.coeffs.size)
    val = monomial_vector(q, deg) @ p.coeffs
    return val if np.ndim(val) else val.item()


class PolyMatrix:
    """Rectangular matrix of polynomials in a common set of variables."""

    def __init__(self, entries):
        rows = [list(r) for r in entries]
        if not rows or not rows[0]:
            raise ValueError("empty polynomial matrix")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise ValueError("polynomial matrix must be rectangular")
        self.entries = rows
        self.nvars = rows[0][0].nvars
        self._tensor = None

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    def __getitem__(self, idx) -> Poly:
        r, c = idx
        return self.entries[r][c]

    def submatrix(self, rows, cols) -> "PolyMatrix":
        return PolyMatrix([[self.entries[r][c] for c in cols] for r in rows])

    def max_degree(self) -> int:
        return max(p.degree for row in self.entries for p in row)

    def coefficient_tensor(self, deg: int | None = None) -> np.ndarray:
        """Array of shape ``(rows, cols, n_monomials)``."""
        deg = self.max_degree() if deg is None else deg
        return np.array([[p.padded(deg) for p in row] for row in self.entries])

    def evaluate(self, q) -> np.ndarray:
        """Numeric matrix at ``q`` (or a stack of matrices for a batch of points)."""
        q = np.asarray(q)
        if self._tensor is None:
            self._tensor = self.coefficient_tensor(max(self.max_degree(), 0))
        deg = _degree_of_length(self.nvars, self._tensor.shape[-1])
        mv = monomial_vector(q, deg)
        return np.einsum("rcm,...m->...rc", self._tensor, mv)


def det_poly(m: PolyMatrix) -> Poly:
    """Determinant by cofactor expansion along the first column."""
    nr, nc = m.shape
    if nr != nc:
        raise NotSquare(f"determinant needs a square matrix, got {nr}x{nc}")
    memo: dict = {}
    return _det_rows(m, tuple(range(nr)), tuple(range(nc)), memo)


def minors(m: PolyMatrix, row_sets, cols) -> list[Poly]:
    """Determinants of ``m[rows, cols]`` for every ``rows`` in ``row_sets``.

    Sub-determinants are shared between minors through a common cache.
    """
    cols = tuple(cols)
    memo: dict = {}
    out = []
    for rows in row_sets:
        rows = tuple(rows)
        if len(rows) != len(cols):
            raise NotSquare("row and column selections differ in size")
        out.append(_det_rows(m, rows, cols, memo))
    return out


def _det_rows(m: PolyMatrix, rows: tuple, cols: tuple, memo: dict) -> Poly:
    key = (rows, cols)
    hit = memo.get(key)
    if hit is not None:
        return hit
    if len(rows) == 1:
        out = m.entries[rows[0]][cols[0]]
    elif len(rows) == 2:
        (r0, r1), (c0, c1) = rows, cols
        e = m.entries
        out = e[r0][c0] * e[r1][c1] - e[r0][c1] * e[r1][c0]
    else:
        c0, rest = cols[0], cols[1:]
        out = None
        for k, r in enumerate(rows):
            a = m.entries[r][c0]
            if a.is_zero():
                continue
            term = a * _det_rows(m, rows[:k] + rows[k + 1:], rest, memo)
            if k % 2:
                term = -term
            out = term if out is None else out + term
        if out is None:
            out = Poly.constant(0.0, m.nvars)
    memo[key] = out
    return out


@lru_cache(maxsize=64)
def _division_plan(nvars: int, deg_p: int, lm: tuple, others: tuple):
    """Per-monomial steps of long division by a fixed divisor shape.

    For every monomial of ``p`` (largest first): its position, and either
    ``None`` (goes to the remainder) or the quotient position plus the
    positions receiving the non-leading divisor terms.
    """
    mons = monomials(nvars, deg_p)
    index = monomial_index(nvars, deg_p)
    deg_q = max(deg_p - sum(lm), 0)
    q_index = monomial_index(nvars, deg_q)
    plan = []
    for k in range(len(mons) - 1, -1, -1):
        shift = tuple(a - b for a, b in zip(mons[k], lm))
        if min(shift) < 0:
            plan.append((k, None, None))
            continue
        targets = tuple(index[tuple(a + b for a, b in zip(shift, e))] for e in others)
        plan.append((k, q_index[shift], targets))
    return tuple(plan), n_monomials(nvars, deg_q)


def divide(p: Poly, d: Poly) -> tuple[Poly, Poly]:
    """Multivariate long division by a single divisor in grevlex order.

    Returns ``(quotient, remainder)`` with ``p = quotient * d + remainder`` and
    no remainder term divisible by the leading monomial of ``d``.
    """
    if p.nvars != d.nvars:
        raise ValueError("variable count mismatch")
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    nvars = p.nvars
    lm, lc = d.leading_term()
    rest = [(e, v / lc) for e, v in d.terms().items() if e != lm]
    deg_p = max(p.degree, 0)
    plan, nq = _division_plan(nvars, deg_p, lm, tuple(e for e, _ in rest))
    factors = [v for _, v in rest]
    work = p.padded(deg_p).tolist()
    quot = [0.0] * nq
    rem = [0.0] * len(work)
    for k, qk, targets in plan:
        c = work[k]
        if c == 0.0:
            continue
        if qk is None:
            rem[k] = c
            continue
        f = c / lc
        quot[qk] += f
        for tk, dv in zip(targets, factors):
            work[tk] -= c * dv
    return Poly(quot, nvars), Poly(rem, nvars, prune=False)


def exact_divide(p: Poly, d: Poly, rtol: float = 1e-9) -> Poly:
    """Quotient of an exact division; raises NotDivisible on a non-negligible remainder."""
    quot, rem = divide(p, d)
    scale = p.max_abs_coeff()
    if scale > 0 and rem.max_abs_coeff() > rtol * scale:
        raise NotDivisible(
            f"remainder {rem.max_abs_coeff():.3e} exceeds {rtol:g} x max|coeff| {scale:.3e}")
    return quot


def cayley_norm_factor() -> Poly:
    """``q_x^2 + q_y^2 + q_z^2 + 1``."""
    return Poly.from_terms({(2, 0, 0): 1.0, (0, 2, 0): 1.0, (0, 0, 2): 1.0, (0, 0, 0): 1.0})


# ---------------------------------------------------------------------------
# batched coefficient arithmetic (rows of a 2-D array are polynomials)


@lru_cache(maxsize=None)
def _scatter(nvars: int, da: int, db: int) -> np.ndarray:
    table = _product_table(nvars, da, db)
    S = np.zeros((table.size, n_monomials(nvars, da + db)))
    S[np.arange(table.size), table] = 1.0
    S.setflags(write=False)
    return S


def batch_mul(A: np.ndarray, B: np.ndarray, da: int, db: int, nvars: int = 3) -> np.ndarray:
    """Row-wise products of degree-``da`` and degree-``db`` coefficient rows."""
    outer = (A[:, :, None] * B[:, None, :]).reshape(len(A), -1)
    return outer @ _scatter(nvars, da, db)


@lru_cache(maxsize=None)
def _division_operator(nvars: int, deg_p: int, d_key: tuple):
    d = Poly(np.array(d_key), nvars)
    deg_q = deg_p - d.degree
    n_q = n_monomials(nvars, deg_q)
    Mul = np.stack([(Poly(np.eye(n_q)[k], nvars, prune=False) * d).padded(deg_p)
                    for k in range(n_q)], axis=1)
    pinv = np.linalg.pinv(Mul)
    Mul.setflags(write=False)
    pinv.setflags(write=False)
    return Mul, pinv


def batch_exact_divide(P: np.ndarray, deg_p: int, d: Poly, rtol: float = 1e-9,
                       nvars: int = 3) -> np.ndarray:
    """Quotients of every row of ``P`` by ``d``; raises NotDivisible if any row leaves a remainder."""
    Mul, pinv = _division_operator(nvars, deg_p, tuple(d.coeffs.tolist()))
    Q = P @ pinv.T
    R = P - Q @ Mul.T
    scale = np.abs(P).max(axis=1)
    bad = np.abs(R).max(axis=1) > rtol * np.maximum(scale, np.finfo(float).tiny)
    if np.any(bad & (scale > 0)):
        k = int(np.flatnonzero(bad & (scale > 0))[0])
        raise NotDivisible(f"row {k} leaves a remainder {np.abs(R[k]).max():.3e}")
    return Q
