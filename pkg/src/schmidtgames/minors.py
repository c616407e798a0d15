"""Minor calculus over augmented row/column vector families of a matrix point.

A point of the game space R^H (H = M·N) is an M×N matrix A.  Two derived
families of L-vectors (L = M+N) drive the strategies:

  * column family: b_v(A) = (column v of A, e_v) — layout (M entries, then N);
  * row family:    a_u(A) = (row u of A,    e_u) — layout (N entries, then M).

Given an orthonormal basis Y_1..Y_dim of a subspace of R^L, the v×v minors of
the interaction matrix (family_i · Y_j) and their Euclidean norms M_v are the
quantities the strategies bound from below.  The distinguished empty minor has
value identically 1.

All index sets are 0-based internally.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
from mpmath import mpf, sqrt

from .precision import Number, to_real, vec


@dataclass(frozen=True)
class MinorIndex:
    """Pair of equal-size index subsets (sorted tuples, 0-based)."""

    I: tuple[int, ...]
    J: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "I", tuple(sorted(self.I)))
        object.__setattr__(self, "J", tuple(sorted(self.J)))
        if len(set(self.I)) != len(self.I) or len(set(self.J)) != len(self.J):
            raise ValueError("index sets must not contain repeats")
        if len(self.I) != len(self.J):
            raise ValueError("index sets must have equal size")

    @property
    def v(self) -> int:
        return len(self.I)


EMPTY_MINOR = MinorIndex((), ())


def all_minor_indices(dim: int, v: int) -> list[MinorIndex]:
    return [
        MinorIndex(I, J)
        for I in combinations(range(dim), v)
        for J in combinations(range(dim), v)
    ]


@dataclass(frozen=True)
class LinearFormsPoint:
    """An M×N real matrix viewed as a point of R^H with derived L-vectors."""

    entries: tuple[tuple[mpf, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "entries", tuple(vec(row) for row in self.entries)
        )
        widths = {len(row) for row in self.entries}
        if len(widths) != 1:
            raise ValueError("matrix rows must have equal length")

    @property
    def m_rows(self) -> int:
        return len(self.entries)

    @property
    def n_cols(self) -> int:
        return len(self.entries[0])

    @property
    def l_dim(self) -> int:
        return self.m_rows + self.n_cols

    def row_vector(self, u: int) -> tuple[mpf, ...]:
        """(row u of A, e_u): 1 at coordinate n_cols + u."""
        m, n = self.m_rows, self.n_cols
        return self.entries[u] + tuple(mpf(1 if i == u else 0) for i in range(m))

    def col_vector(self, v: int) -> tuple[mpf, ...]:
        """(column v of A, e_v): 1 at coordinate m_rows + v."""
        m, n = self.m_rows, self.n_cols
        col = tuple(self.entries[u][v] for u in range(m))
        return col + tuple(mpf(1 if i == v else 0) for i in range(n))

    def apply_rows(self, X: Sequence[Number]) -> tuple[mpf, ...]:
        """Row-family forms at X = (x, p): returns A·x + p, an M-vector."""
        xs = vec(X)
        if len(xs) != self.l_dim:
            raise ValueError("argument must be an L-vector")
        n = self.n_cols
        return tuple(
            sum((self.entries[u][j] * xs[j] for j in range(n)), mpf(0)) + xs[n + u]
            for u in range(self.m_rows)
        )

    def apply_cols(self, Y: Sequence[Number]) -> tuple[mpf, ...]:
        """Column-family forms at Y = (y, q): returns A^T·y + q, an N-vector."""
        ys = vec(Y)
        if len(ys) != self.l_dim:
            raise ValueError("argument must be an L-vector")
        m = self.m_rows
        return tuple(
            sum((self.entries[u][v] * ys[u] for u in range(m)), mpf(0)) + ys[m + v]
            for v in range(self.n_cols)
        )


def family_vector(A: LinearFormsPoint, family: str, i: int) -> tuple[mpf, ...]:
    if family == "cols":
        return A.col_vector(i)
    if family == "rows":
        return A.row_vector(i)
    raise ValueError(f"unknown family {family!r}")


def family_size(A: LinearFormsPoint, family: str) -> int:
    return A.n_cols if family == "cols" else A.m_rows


def det_cofactor(mat: Sequence[Sequence]) -> object:
    """Determinant by recursive cofactor expansion along the first row."""
    n = len(mat)
    if n == 0:
        return mpf(1)
    if n == 1:
        return mat[0][0]
    total = 0
    for j in range(n):
        if mat[0][j] == 0:
            continue
        sub = [
            [mat[r][c] for c in range(n) if c != j] for r in range(1, n)
        ]
        term = mat[0][j] * det_cofactor(sub)
        total = total + (term if j % 2 == 0 else -term)
    return total + mpf(0)


def det_elimination(mat: Sequence[Sequence]) -> object:
    """Determinant by Gaussian elimination with partial pivoting."""
    n = len(mat)
    if n == 0:
        return mpf(1)
    a = [list(row) for row in mat]
    sign = 1
    det = mpf(1)
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[pivot][col] == 0:
            return mpf(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            sign = -sign
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] * inv
            if factor != 0:
                for c in range(col, n):
                    a[r][c] -= factor * a[col][c]
    return sign * det


def interaction_matrix(
    A: LinearFormsPoint,
    basis: Sequence[Sequence[mpf]],
    omega: MinorIndex,
    family: str = "cols",
) -> list[list[mpf]]:
    from .geometry import v_dot

    return [
        [v_dot(family_vector(A, family, i), basis[j]) for j in omega.J]
        for i in omega.I
    ]


def minor_determinant(
    A: LinearFormsPoint,
    basis: Sequence[Sequence[mpf]],
    omega: MinorIndex,
    family: str = "cols",
) -> mpf:
    """Value of the minor: det of the omega-submatrix of (family_i · Y_j)."""
    if omega.v == 0:
        return mpf(1)
    return det_cofactor(interaction_matrix(A, basis, omega, family))


def grad_minor_matrix(
    A: LinearFormsPoint,
    basis: Sequence[Sequence[mpf]],
    omega: MinorIndex,
    family: str = "cols",
) -> tuple[tuple[mpf, ...], ...]:
    """Coefficient matrix G of the minor's differential at A.

    The directional derivative in direction A' (an M×N matrix) equals the
    Frobenius inner product <G, A'>.  Entries follow the cofactor expansion:
    deleting position k of I and position l of J carries sign (−1)^{k+l}.
    """
    m, n = A.m_rows, A.n_cols
    g = [[mpf(0)] * n for _ in range(m)]
    if omega.v == 0:
        return tuple(tuple(row) for row in g)
    for k, i_k in enumerate(omega.I):
        for l, j_l in enumerate(omega.J):
            sub = MinorIndex(
                tuple(x for x in omega.I if x != i_k),
                tuple(x for x in omega.J if x != j_l),
            )
            d_sub = minor_determinant(A, basis, sub, family)
            if d_sub == 0:
                continue
            sign = mpf(1 if (k + l) % 2 == 0 else -1)
            y = basis[j_l]
            if family == "cols":
                # d b_v(A') = (column i_k of A', 0): pairs with the first m
                # coordinates of Y; the coefficient of A'[mu][i_k] is Y[mu].
                for mu in range(m):
                    g[mu][i_k] += sign * y[mu] * d_sub
            else:
                # d a_u(A') = (row i_k of A', 0): pairs with the first n
                # coordinates of Y; the coefficient of A'[i_k][nu] is Y[nu].
                for nu in range(n):
                    g[i_k][nu] += sign * y[nu] * d_sub
    return tuple(tuple(row) for row in g)


def grad_minor(
    A: LinearFormsPoint,
    basis: Sequence[Sequence[mpf]],
    omega: MinorIndex,
    direction: Sequence[Sequence[Number]],
    family: str = "cols",
) -> mpf:
    """Directional derivative of the minor at A in a matrix direction."""
    g = grad_minor_matrix(A, basis, omega, family)
    total = mpf(0)
    for gu, du in zip(g, direction):
        for gv, dv in zip(gu, du):
            total += gv * to_real(dv)
    return total


def grad_norm(g: Sequence[Sequence[mpf]]) -> mpf:
    """Operator norm of the gradient functional = Euclidean norm of G."""
    total = mpf(0)
    for row in g:
        for x in row:
            total += x * x
    return sqrt(total)


@dataclass(frozen=True)
class MinorTable:
    """All minor values of one family at a point, with level norms."""

    values: dict
    norms: tuple[mpf, ...]

    def norm(self, v: int) -> mpf:
        return self.norms[v]


def minor_table(
    A: LinearFormsPoint,
    basis: Sequence[Sequence[mpf]],
    family: str = "cols",
) -> MinorTable:
    dim = family_size(A, family)
    values: dict[MinorIndex, mpf] = {}
    norms: list[mpf] = []
    for v in range(dim + 1):
        total = mpf(0)
        for omega in all_minor_indices(dim, v):
            d = minor_determinant(A, basis, omega, family)
            values[omega] = d
            total += d * d
        norms.append(sqrt(total))
    return MinorTable(values=values, norms=tuple(norms))


def level_norm(
    A: LinearFormsPoint,
    basis: Sequence[Sequence[mpf]],
    v: int,
    family: str = "cols",
) -> mpf:
    """Euclidean norm of the vector of all v×v minors at A."""
    dim = family_size(A, family)
    total = mpf(0)
    for omega in all_minor_indices(dim, v):
        d = minor_determinant(A, basis, omega, family)
        total += d * d
    return sqrt(total)


def sup_Mv_bound(
    center: LinearFormsPoint,
    radius: Number,
    basis: Sequence[Sequence[mpf]],
    v: int,
    family: str = "cols",
) -> mpf:
    """Upper bound for sup of the level-v minor norm over a ball.

    Recursive bound: S_0 = 1, S_v = M_v(center) + v·radius·S_{v−1}, valid
    because the gradient of each level-v minor is bounded by v times the
    level-(v−1) norm.
    """
    r = to_real(radius)
    s = mpf(1)
    for level in range(1, v + 1):
        s = level_norm(center, basis, level, family) + level * r * s
    return s


class GridMinorEvaluator:
    """Vectorized float64 evaluation of level norms over many matrix points.

    Used by strategies for dense grid scans; the search result is always
    re-evaluated in full precision before any move is derived from it.
    """

    def __init__(self, basis: Sequence[Sequence[mpf]], m_rows: int, n_cols: int,
                 family: str = "cols"):
        self.family = family
        self.m = m_rows
        self.n = n_cols
        y = np.array([[float(x) for x in row] for row in basis])
        if family == "cols":
            self.dim = n_cols
            self.y_lin = y[:, :m_rows]         # pairs with matrix columns
            self.y_aug = y[:, m_rows:]         # pairs with the indicator
        else:
            self.dim = m_rows
            self.y_lin = y[:, :n_cols]
            self.y_aug = y[:, n_cols:]

    def interaction(self, points: np.ndarray) -> np.ndarray:
        """(P, dim, dim) array C[p, i, j] = family_i(A_p) · Y_j."""
        if self.family == "cols":
            # family_i = (column i, e_i): C[p,i,j] = sum_mu A[p,mu,i]·y_lin[j,mu] + y_aug[j,i]
            lin = np.einsum("pmi,jm->pij", points, self.y_lin)
        else:
            lin = np.einsum("pin,jn->pij", points, self.y_lin)
        return lin + self.y_aug.T[None, :, :]

    def level_norms(self, points: np.ndarray, v: int) -> np.ndarray:
        """(P,) array of level-v minor norms at each point."""
        c = self.interaction(points)
        if v == 0:
            return np.ones(c.shape[0])
        total = np.zeros(c.shape[0])
        for I in combinations(range(self.dim), v):
            rows = c[:, I, :]
            for J in combinations(range(self.dim), v):
                sub = rows[:, :, J]
                if v == 1:
                    d = sub[:, 0, 0]
                elif v == 2:
                    d = sub[:, 0, 0] * sub[:, 1, 1] - sub[:, 0, 1] * sub[:, 1, 0]
                else:
                    d = np.linalg.det(sub)
                total += d * d
        return np.sqrt(total)
