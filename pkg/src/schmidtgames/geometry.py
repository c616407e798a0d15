"""Balls, hyperplane slabs, and the conservative predicates the referee uses.

Everything here works on tuples of mpmath reals and is immutable after
construction; operations are pure functions, safe to call from any thread.

Comparison discipline: all geometric predicates are conservative — ties within
the tolerance resolve against a claim of avoidance, so a slab is only "avoided"
when it clearly is, and a move is only "contained" when it clearly is (up to
the tolerance in the lenient direction for containment).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from mpmath import mp, mpf, sqrt

from .precision import Number, tau, to_real, vec


class DimensionExceeded(ValueError):
    """A vector family spans more dimensions than the contract allows."""


def v_add(a: Sequence[mpf], b: Sequence[mpf]) -> tuple[mpf, ...]:
    return tuple(x + y for x, y in zip(a, b))


def v_sub(a: Sequence[mpf], b: Sequence[mpf]) -> tuple[mpf, ...]:
    return tuple(x - y for x, y in zip(a, b))


def v_scale(c: mpf, a: Sequence[mpf]) -> tuple[mpf, ...]:
    return tuple(c * x for x in a)


def v_dot(a: Sequence[mpf], b: Sequence[mpf]) -> mpf:
    total = mpf(0)
    for x, y in zip(a, b):
        total += x * y
    return total


def v_norm_sq(a: Sequence[mpf]) -> mpf:
    return v_dot(a, a)


def v_norm(a: Sequence[mpf]) -> mpf:
    return sqrt(v_norm_sq(a))


def v_dist(a: Sequence[mpf], b: Sequence[mpf]) -> mpf:
    return v_norm(v_sub(a, b))


def v_unit(a: Sequence[mpf]) -> tuple[mpf, ...]:
    n = v_norm(a)
    if n == 0:
        raise ValueError("cannot normalize the zero vector")
    return v_scale(1 / n, a)


def mat_vec(rows: Sequence[Sequence[mpf]], x: Sequence[mpf]) -> tuple[mpf, ...]:
    return tuple(v_dot(row, x) for row in rows)


def mat_transpose(rows: Sequence[Sequence[mpf]]) -> tuple[tuple[mpf, ...], ...]:
    return tuple(zip(*rows))


def mat_t_vec(rows: Sequence[Sequence[mpf]], y: Sequence[mpf]) -> tuple[mpf, ...]:
    """Transpose-apply: returns rows^T · y."""
    n = len(rows[0])
    return tuple(
        sum((rows[u][j] * y[u] for u in range(len(rows))), mpf(0)) for j in range(n)
    )


def solve_linear(rows: Sequence[Sequence[mpf]], rhs: Sequence[mpf]) -> tuple[mpf, ...]:
    """Solve a small square system by Gaussian elimination with partial pivoting."""
    n = len(rhs)
    a = [list(map(to_real, row)) + [to_real(rhs[i])] for i, row in enumerate(rows)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[pivot][col] == 0:
            raise ValueError("singular linear system")
        a[col], a[pivot] = a[pivot], a[col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] * inv
            if factor != 0:
                for c in range(col, n + 1):
                    a[r][c] -= factor * a[col][c]
    x = [mpf(0)] * n
    for r in range(n - 1, -1, -1):
        acc = a[r][n]
        for c in range(r + 1, n):
            acc -= a[r][c] * x[c]
        x[r] = acc / a[r][r]
    return tuple(x)


def min_norm_preimage(
    rows: Sequence[Sequence[mpf]], y: Sequence[mpf]
) -> tuple[mpf, ...]:
    """Least-norm x with rows·x = y, via x = rows^T (rows rows^T)^{-1} y.

    Requires full row rank (raises on a singular Gram matrix).
    """
    m = len(rows)
    gram = [[v_dot(rows[i], rows[j]) for j in range(m)] for i in range(m)]
    lam = solve_linear(gram, y)
    return mat_t_vec(rows, lam)


def top_singular(
    rows: Sequence[Sequence[mpf]], max_iter: int = 20000
) -> tuple[mpf, tuple[mpf, ...]]:
    """Largest singular value and a right singular vector, by power iteration.

    The returned vector is canonicalized so its first nonzero coordinate is
    positive (the lexicographically larger of the antipodal pair).
    """
    n = len(rows[0])
    tol = mpf(2) ** (-(2 * mp.prec) // 3)
    v = v_unit(tuple(mpf(1) for _ in range(n)))
    prev_sigma_sq = mpf(-1)
    for _ in range(max_iter):
        w = mat_t_vec(rows, mat_vec(rows, v))  # (rows^T rows) v
        norm_w = v_norm(w)
        if norm_w == 0:
            return mpf(0), v
        v_next = v_scale(1 / norm_w, w)
        sigma_sq = norm_w
        if abs(sigma_sq - prev_sigma_sq) <= tol * (1 + sigma_sq):
            v = v_next
            break
        prev_sigma_sq = sigma_sq
        v = v_next
    for x in v:
        if x != 0:
            if x < 0:
                v = v_scale(mpf(-1), v)
            break
    return v_norm(mat_vec(rows, v)), v


@dataclass(frozen=True)
class Ball:
    """Closed Euclidean ball with positive radius."""

    center: tuple[mpf, ...]
    radius: mpf

    def __post_init__(self):
        object.__setattr__(self, "center", vec(self.center))
        object.__setattr__(self, "radius", to_real(self.radius))
        if not self.radius > 0:
            raise ValueError(f"ball radius must be positive, got {self.radius}")

    @property
    def dim(self) -> int:
        return len(self.center)

    def contains_point(self, p: Sequence[Number], slack: mpf | None = None) -> bool:
        margin = tau() * max(mpf(1), self.radius) if slack is None else slack
        return v_dist(self.center, vec(p)) <= self.radius + margin

    def contains_ball(self, inner: "Ball") -> bool:
        margin = tau() * max(mpf(1), self.radius)
        return v_dist(self.center, inner.center) + inner.radius <= self.radius + margin


@dataclass(frozen=True)
class HyperplaneSlab:
    """Thickened hyperplane {x : |normal·x − offset| ≤ epsilon}.

    The normal is normalized to unit length at construction.
    """

    normal: tuple[mpf, ...]
    offset: mpf
    epsilon: mpf

    def __post_init__(self):
        raw = vec(self.normal)
        n = v_norm(raw)
        if n == 0:
            raise ValueError("slab normal must be nonzero")
        object.__setattr__(self, "normal", v_scale(1 / n, raw))
        object.__setattr__(self, "offset", to_real(self.offset) / n)
        # Dividing the thickness by the same factor keeps the slab, as a set,
        # identical to the one described by the unnormalized inputs.
        object.__setattr__(self, "epsilon", to_real(self.epsilon) / n)
        if self.epsilon < 0:
            raise ValueError(f"slab thickness must be nonnegative, got {self.epsilon}")

    @property
    def dim(self) -> int:
        return len(self.normal)

    def with_epsilon(self, epsilon: Number) -> "HyperplaneSlab":
        return HyperplaneSlab(self.normal, self.offset, to_real(epsilon))


def dist_point_hyperplane(p: Sequence[Number], h: HyperplaneSlab) -> mpf:
    """Distance from a point to the slab's central hyperplane."""
    return abs(v_dot(vec(p), h.normal) - h.offset)


def ball_avoids_slab(b: Ball, h: HyperplaneSlab) -> bool:
    """True iff the ball clearly misses the slab: dist > epsilon + radius + tol.

    Conservative: a tie (tangency within tolerance) counts as intersecting.
    """
    margin = tau() * max(mpf(1), b.radius + h.epsilon)
    return dist_point_hyperplane(b.center, h) > h.epsilon + b.radius + margin


def gram_schmidt_extend(
    vectors: Sequence[Sequence[Number]],
    target_dim: int,
    ambient_dim: int | None = None,
) -> tuple[tuple[mpf, ...], ...]:
    """Orthonormal basis of size target_dim whose span contains span(vectors).

    Input vectors are orthonormalized in order; a vector whose residual after
    projection is below tolerance is treated as dependent and skipped.  The
    basis is completed with standard basis vectors in index order.
    ambient_dim fixes the surrounding space when ``vectors`` may be empty.

    Raises DimensionExceeded if the input spans more than target_dim
    dimensions.
    """
    basis: list[tuple[mpf, ...]] = []
    space_dim: int | None = ambient_dim

    def try_add(candidate: tuple[mpf, ...], hard: bool) -> None:
        residual = candidate
        for b in basis:
            residual = v_sub(residual, v_scale(v_dot(residual, b), b))
        scale = max(mpf(1), v_norm(candidate))
        if v_norm(residual) < tau() * scale:
            return
        if len(basis) >= target_dim:
            if hard:
                raise DimensionExceeded(
                    f"vectors span more than {target_dim} dimensions"
                )
            return
        basis.append(v_unit(residual))

    for raw in vectors:
        w = vec(raw)
        space_dim = len(w) if space_dim is None else space_dim
        if len(w) != space_dim:
            raise ValueError("all vectors must live in the same space")
        if v_norm(w) == 0:
            continue
        try_add(w, hard=True)

    if space_dim is None:
        space_dim = target_dim
    for i in range(space_dim):
        if len(basis) == target_dim:
            break
        e_i = tuple(mpf(1 if j == i else 0) for j in range(space_dim))
        try_add(e_i, hard=False)

    if len(basis) < target_dim:
        raise ValueError(
            f"could not complete a basis of size {target_dim} in R^{space_dim}"
        )
    return tuple(basis)


def ball_grid_points(
    b: Ball, divisor: int = 8
) -> list[tuple[mpf, ...]]:
    """Deterministic lattice sample of the ball: pitch radius/divisor.

    Points are lattice offsets from the center with Euclidean norm ≤ radius,
    enumerated in lexicographic order of the integer offsets.
    """
    pitch = b.radius / divisor
    d = b.dim
    rng = range(-divisor, divisor + 1)
    out: list[tuple[mpf, ...]] = []

    def rec(prefix: list[int], norm_sq: int) -> None:
        if len(prefix) == d:
            out.append(
                tuple(b.center[i] + pitch * prefix[i] for i in range(d))
            )
            return
        for m in rng:
            if norm_sq + m * m <= divisor * divisor:
                rec(prefix + [m], norm_sq + m * m)

    rec([], 0)
    return out
