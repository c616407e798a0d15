"""Self-similar sets: sampling, dimension estimation, diffuseness probes.

An iterated function system of contracting similarities with an axis-box
open-set condition generates a limit set K.  This module samples K by
address words, estimates its box-counting dimension and Ahlfors-regularity
constants, tests hyperplane diffuseness empirically (every small ball around
a point of K contains sample points escaping every thickened hyperplane),
and builds the Lipschitz-graph counterexample set whose graph map is
6-bi-Lipschitz yet carries a diffuse set onto a badly approximable one.

Everything here runs in float64: sampling depths are bounded by memory long
before double precision becomes the binding error term, and every numeric
claim carries an explicit scale (5^-depth, grid pitch) dominating 1e-16.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional, Sequence

import numpy as np


class InconclusiveSampler(RuntimeError):
    """The point sample is too coarse for the requested scale range."""


# ---------------------------------------------------------------------------
# Similarities and systems


@dataclass(frozen=True)
class Similarity:
    """Contracting similarity x ↦ ratio·O·x + translation."""

    ratio: float
    orthogonal: tuple[tuple[float, ...], ...]
    translation: tuple[float, ...]

    def __post_init__(self):
        o = np.array(self.orthogonal, dtype=float)
        if not 0 < self.ratio < 1:
            raise ValueError("ratio must lie in (0, 1)")
        if o.ndim != 2 or o.shape[0] != o.shape[1]:
            raise ValueError("orthogonal part must be square")
        if not np.allclose(o.T @ o, np.eye(o.shape[0]), atol=1e-12):
            raise ValueError("orthogonal part must satisfy O^T O = I")
        if len(self.translation) != o.shape[0]:
            raise ValueError("translation dimension mismatch")
        object.__setattr__(
            self, "orthogonal", tuple(tuple(float(x) for x in row) for row in o)
        )
        object.__setattr__(
            self, "translation", tuple(float(x) for x in self.translation)
        )
        object.__setattr__(self, "ratio", float(self.ratio))

    @property
    def dim(self) -> int:
        return len(self.translation)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Apply to an (…, dim) array of points."""
        o = np.array(self.orthogonal)
        t = np.array(self.translation)
        return self.ratio * (points @ o.T) + t


def fixed_point(u: Similarity) -> tuple[float, ...]:
    """The unique p with u(p) = p, from (I − ratio·O)p = translation."""
    o = np.array(u.orthogonal)
    t = np.array(u.translation)
    p = np.linalg.solve(np.eye(u.dim) - u.ratio * o, t)
    return tuple(float(x) for x in p)


@dataclass(frozen=True)
class AxisBox:
    """Open axis-aligned box, the declared open set of an IFS."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        if len(self.lower) != len(self.upper):
            raise ValueError("box corner dimension mismatch")
        if not all(l < u for l, u in zip(self.lower, self.upper)):
            raise ValueError("box must have positive extent")

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, points: np.ndarray, slack: float = 0.0) -> np.ndarray:
        lo = np.array(self.lower) - slack
        hi = np.array(self.upper) + slack
        return ((points > lo) & (points < hi)).all(axis=-1)

    def grid(self, per_axis: int) -> np.ndarray:
        axes = [
            np.linspace(l, u, per_axis + 2)[1:-1]
            for l, u in zip(self.lower, self.upper)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


@dataclass(frozen=True)
class IFS:
    """Finitely many contracting similarities with a box open-set condition."""

    maps: tuple[Similarity, ...]
    open_set: AxisBox

    def __post_init__(self):
        if not self.maps:
            raise ValueError("an IFS needs at least one map")
        dims = {u.dim for u in self.maps}
        if len(dims) != 1 or self.open_set.dim not in dims:
            raise ValueError("all maps and the open set must share a dimension")
        object.__setattr__(self, "maps", tuple(self.maps))

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def ratio_max(self) -> float:
        return max(u.ratio for u in self.maps)

    def similarity_dimension(self) -> float:
        """The exponent s with Σ ratio_i^s = 1, by bisection."""
        ratios = [u.ratio for u in self.maps]
        if len(ratios) == 1:
            return 0.0

        def total(s: float) -> float:
            return sum(r**s for r in ratios)

        lo, hi = 0.0, 1.0
        while total(hi) > 1:
            hi *= 2
        for _ in range(200):
            mid = (lo + hi) / 2
            if total(mid) > 1:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2

    def open_set_condition_check(self, per_axis: int = 40) -> bool:
        """Sampled check: images of the open set are disjoint and inside it."""
        grid = self.open_set.grid(per_axis)
        images = [u.apply(grid) for u in self.maps]
        for img in images:
            if not self.open_set.contains(img, slack=1e-12).all():
                return False
        # Disjointness: no sample of one image lies inside another map's
        # image box (exact membership test through the inverse map).
        for i, u in enumerate(self.maps):
            for j, w in enumerate(self.maps):
                if i == j:
                    continue
                o = np.array(w.orthogonal)
                t = np.array(w.translation)
                pre = (images[i] - t) @ o / w.ratio
                if self.open_set.contains(pre, slack=-1e-12).any():
                    return False
        return True


# ---------------------------------------------------------------------------
# Limit-set sampling


def limit_set_sample(
    ifs: IFS,
    depth: int,
    anchor: Optional[Sequence[float]] = None,
    addresses: Optional[Sequence[Sequence[int]]] = None,
) -> np.ndarray:
    """Sample the limit set by address words.

    Each word (w_1, …, w_D) contributes u_{w_1}∘…∘u_{w_D}(anchor); the
    default enumerates every word of length ``depth``.  Sample accuracy is
    ratio_max^depth times the anchor's distance from the limit set, so an
    anchor on K (default: the first map's fixed point) gives exact points
    of a dense subset.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    base = np.array(
        fixed_point(ifs.maps[0]) if anchor is None else [float(x) for x in anchor]
    )
    if addresses is not None:
        out = np.empty((len(addresses), ifs.dim))
        for row, word in enumerate(addresses):
            p = base.copy()
            for symbol in reversed(list(word)):
                p = ifs.maps[symbol].apply(p)
            out[row] = p
        return out
    # Full enumeration, vectorized breadth-first over the word length.
    points = base[None, :]
    for _ in range(depth):
        points = np.concatenate([u.apply(points) for u in ifs.maps], axis=0)
    return points


def affine_hull_dim(points: Sequence[Sequence[float]], tol: float = 1e-9) -> int:
    """Dimension of the affine hull: rank of the centered point matrix."""
    pts = np.atleast_2d(np.array(points, dtype=float))
    if len(pts) == 0:
        raise ValueError("need at least one point")
    centered = pts - pts.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    scale = max(1.0, float(svals[0]) if len(svals) else 1.0)
    return int((svals > tol * scale).sum())


# ---------------------------------------------------------------------------
# Box counting and Ahlfors-regularity estimation


@dataclass(frozen=True)
class AhlforsEstimate:
    """Fitted measure-scaling exponent with two-sided constants.

    The constants bracket the empirical ball measure: c1·ρ^exponent ≤
    fraction of samples within ρ of a set point ≤ c2·ρ^exponent across the
    fitted scale range.
    """

    exponent: float
    c_lower: float
    c_upper: float
    scale_min: float
    scale_max: float
    box_counts: tuple[tuple[float, int], ...]
    fit_residual: float
    residual_warning: bool

    def to_json_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "c_lower": self.c_lower,
            "c_upper": self.c_upper,
            "scale_range": [self.scale_min, self.scale_max],
            "box_counts": [[s, n] for s, n in self.box_counts],
            "fit_residual": self.fit_residual,
            "residual_warning": self.residual_warning,
        }


def _box_count(points: np.ndarray, scale: float) -> int:
    # The small nudge keeps points that sit exactly on a box boundary from
    # leaking into the lower box through float rounding, which would inflate
    # counts for lattice-aligned samples.
    cells = np.floor(points / scale + 1e-9).astype(np.int64)
    return len(np.unique(cells, axis=0))


def box_count_dimension(
    points: Sequence[Sequence[float]],
    scales: Sequence[float],
    measure_centers: int = 200,
    seed: int = 0,
) -> AhlforsEstimate:
    """Least-squares box-counting dimension with measure-scaling constants.

    Requires the scale range to span at least two decades so the slope is
    meaningful.  The two-sided constants come from empirical ball measures
    μ(B(x,ρ)) = sample fraction within ρ, over random sample centers.
    """
    pts = np.array(points, dtype=float)
    scale_arr = np.array(sorted(float(s) for s in scales), dtype=float)
    if scale_arr.min() <= 0:
        raise ValueError("scales must be positive")
    if scale_arr.max() / scale_arr.min() < 100:
        raise ValueError("scale range must span at least two decades")
    counts = np.array([_box_count(pts, s) for s in scale_arr])
    x = -np.log(scale_arr)
    y = np.log(counts)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))

    rng = np.random.default_rng(seed)
    centers = pts[rng.integers(0, len(pts), size=min(measure_centers, len(pts)))]
    # Ball measures against a capped subsample keep the distance matrix
    # small; the fraction estimate is unbiased under uniform subsampling.
    if len(pts) > 20_000:
        sub = pts[rng.integers(0, len(pts), size=20_000)]
    else:
        sub = pts
    d2 = ((centers[:, None, :] - sub[None, :, :]) ** 2).sum(axis=2)
    c_lo, c_hi = math.inf, 0.0
    for rho in scale_arr:
        if rho > 0.5 * (pts.max() - pts.min()):
            continue
        frac = (d2 <= rho * rho).mean(axis=1)
        ratio = frac / rho**slope
        c_lo = min(c_lo, float(ratio.min()))
        c_hi = max(c_hi, float(ratio.max()))
    return AhlforsEstimate(
        exponent=float(slope),
        c_lower=c_lo if math.isfinite(c_lo) else 0.0,
        c_upper=c_hi,
        scale_min=float(scale_arr.min()),
        scale_max=float(scale_arr.max()),
        box_counts=tuple((float(s), int(n)) for s, n in zip(scale_arr, counts)),
        fit_residual=residual,
        residual_warning=residual > 0.25,
    )


# ---------------------------------------------------------------------------
# Diffuseness


@dataclass(frozen=True)
class DiffusenessReport:
    beta: float
    rho_min: float
    rho_max: float
    trials: int
    sample_count: int
    resolution: float
    passed: bool
    witnesses: tuple[dict, ...] = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        return {
            "beta": self.beta,
            "rho_range": [self.rho_min, self.rho_max],
            "trials": self.trials,
            "sample_count": self.sample_count,
            "resolution": self.resolution,
            "passed": self.passed,
            "witnesses": list(self.witnesses),
        }


def estimate_resolution(points: np.ndarray, probes: int = 256, seed: int = 0) -> float:
    """Largest nearest-neighbor distance over a random probe subset."""
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(points), size=min(probes, len(points)))
    worst = 0.0
    for i in idx:
        d2 = ((points - points[i]) ** 2).sum(axis=1)
        d2[i] = math.inf
        worst = max(worst, math.sqrt(float(d2.min())))
    return worst


def diffuseness_test(
    points: Sequence[Sequence[float]],
    beta: float,
    rho_max: float,
    trials: int = 64,
    rho_min: Optional[float] = None,
    seed: int = 0,
    resolution: Optional[float] = None,
) -> DiffusenessReport:
    """Empirical hyperplane-diffuseness check on a point sample of K.

    Per trial: a sample point x and a radius ρ are drawn; for each of two
    hyperplanes through x — a random one and a worst-case one aligned with
    the locally flattest direction — some sample point of K within B(x, ρ)
    must sit farther than βρ from the hyperplane.  A trial that finds no
    such point fails the report and its (x, ρ, normal) is recorded.

    Raises InconclusiveSampler if the sample is too coarse to resolve βρ/4
    at the smallest requested radius.
    """
    pts = np.array(points, dtype=float)
    if not 0 < beta < 1:
        raise ValueError("beta must lie in (0, 1)")
    res = (
        float(resolution)
        if resolution is not None
        else estimate_resolution(pts, seed=seed)
    )
    lo = rho_min if rho_min is not None else 5 * res / beta
    if res >= beta * lo / 4:
        raise InconclusiveSampler(
            f"sample resolution {res:.3g} too coarse for rho_min {lo:.3g} "
            f"at beta {beta} (needs < {beta * lo / 4:.3g})"
        )
    if lo > rho_max:
        raise ValueError("rho_min exceeds rho_max")

    rng = np.random.default_rng(seed)
    dim = pts.shape[1]
    witnesses: list[dict] = []
    for _ in range(trials):
        x = pts[rng.integers(0, len(pts))]
        rho = math.exp(rng.uniform(math.log(lo), math.log(rho_max)))
        d2 = ((pts - x) ** 2).sum(axis=1)
        inside = pts[d2 <= rho * rho]
        normals = [_random_unit(rng, dim)]
        flat = _flattest_direction(inside - x)
        if flat is not None:
            normals.append(flat)
        for normal in normals:
            dists = np.abs((inside - x) @ normal)
            if not (dists > beta * rho).any():
                witnesses.append(
                    {
                        "x": [float(v) for v in x],
                        "rho": float(rho),
                        "normal": [float(v) for v in normal],
                        "points_in_ball": int(len(inside)),
                    }
                )
    return DiffusenessReport(
        beta=float(beta),
        rho_min=float(lo),
        rho_max=float(rho_max),
        trials=trials,
        sample_count=len(pts),
        resolution=res,
        passed=not witnesses,
        witnesses=tuple(witnesses),
    )


def _random_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    while True:
        v = rng.normal(size=dim)
        n = np.linalg.norm(v)
        if n > 1e-12:
            return v / n


def _flattest_direction(centered: np.ndarray) -> Optional[np.ndarray]:
    """Unit normal of the hyperplane hugging the local point cloud."""
    if len(centered) < 2:
        return None
    # The singular vector of least singular value: the direction in which
    # the cloud is thinnest, i.e. the worst-case hyperplane normal.
    _, _, vt = np.linalg.svd(centered, full_matrices=True)
    return vt[-1]


def diffuseness_beta_search(
    points: Sequence[Sequence[float]],
    rho_max: float,
    betas: Sequence[float] = (0.3, 0.2, 0.1, 0.05, 0.025),
    trials: int = 64,
    seed: int = 0,
) -> tuple[Optional[float], list[DiffusenessReport]]:
    """First β in the grid whose diffuseness test passes, plus all reports."""
    reports = []
    for beta in betas:
        rep = diffuseness_test(points, beta, rho_max, trials=trials, seed=seed)
        reports.append(rep)
        if rep.passed:
            return beta, reports
    return None, reports


# ---------------------------------------------------------------------------
# The Lipschitz-graph counterexample set


def lipgraph5_ifs() -> IFS:
    """Three ratio-1/5 maps whose limit set is the graph of a 5-Lipschitz f.

    Fixed points (0,0), (1/2,1), (1,0); the open unit square witnesses the
    open set condition.
    """
    eye = ((1.0, 0.0), (0.0, 1.0))
    return IFS(
        maps=(
            Similarity(0.2, eye, (0.0, 0.0)),
            Similarity(0.2, eye, (0.4, 0.8)),
            Similarity(0.2, eye, (0.8, 0.0)),
        ),
        open_set=AxisBox((0.0, 0.0), (1.0, 1.0)),
    )


def cantor13_ifs() -> IFS:
    """Middle-thirds Cantor set on the line."""
    eye = ((1.0,),)
    return IFS(
        maps=(
            Similarity(1.0 / 3.0, eye, (0.0,)),
            Similarity(1.0 / 3.0, eye, (2.0 / 3.0,)),
        ),
        open_set=AxisBox((0.0,), (1.0,)),
    )


def sierpinski_ifs() -> IFS:
    """Right-angle Sierpinski gasket (the box open-set condition holds)."""
    eye = ((1.0, 0.0), (0.0, 1.0))
    return IFS(
        maps=(
            Similarity(0.5, eye, (0.0, 0.0)),
            Similarity(0.5, eye, (0.5, 0.0)),
            Similarity(0.5, eye, (0.0, 0.5)),
        ),
        open_set=AxisBox((0.0, 0.0), (1.0, 1.0)),
    )


BUILTIN_IFS: dict[str, Callable[[], IFS]] = {
    "lipgraph5": lipgraph5_ifs,
    "cantor13": cantor13_ifs,
    "sierpinski": sierpinski_ifs,
}


def rotation_matrix(degrees: float, dim: int) -> tuple[tuple[float, ...], ...]:
    if dim == 1:
        if degrees % 360 not in (0.0, 180.0):
            raise ValueError("1-D rotations must be 0 or 180 degrees")
        return ((-1.0,),) if degrees % 360 == 180.0 else ((1.0,),)
    if dim != 2:
        raise ValueError("rotation_degrees shorthand only supports 1-D and 2-D")
    t = math.radians(degrees)
    return ((math.cos(t), -math.sin(t)), (math.sin(t), math.cos(t)))


def ifs_from_json(data: dict | str) -> IFS:
    """Build an IFS from {"maps": [{ratio, rotation_degrees, translation}],
    "open_set": {"lower": […], "upper": […]}} or a builtin name."""
    if isinstance(data, str):
        data = json.loads(data)
    maps = []
    for entry in data["maps"]:
        translation = tuple(float(x) for x in entry["translation"])
        maps.append(
            Similarity(
                ratio=float(entry["ratio"]),
                orthogonal=rotation_matrix(
                    float(entry.get("rotation_degrees", 0.0)), len(translation)
                ),
                translation=translation,
            )
        )
    box = data["open_set"]
    return IFS(
        maps=tuple(maps),
        open_set=AxisBox(
            tuple(float(x) for x in box["lower"]),
            tuple(float(x) for x in box["upper"]),
        ),
    )


def load_ifs(name_or_json: str) -> IFS:
    if name_or_json in BUILTIN_IFS:
        return BUILTIN_IFS[name_or_json]()
    return ifs_from_json(name_or_json)


@dataclass(frozen=True)
class LipschitzGraph:
    """The sampled graph set with its interpolant and the graph shear maps."""

    points: np.ndarray
    knots_x: np.ndarray
    knots_y: np.ndarray
    depth: int

    def f(self, x: np.ndarray | float) -> np.ndarray | float:
        """Piecewise-linear interpolant, constant-extended outside [0, 1]."""
        return np.interp(x, self.knots_x, self.knots_y)

    def phi(self, points: np.ndarray) -> np.ndarray:
        """(x, y) ↦ (x, y + f(x)): shears the plane along the graph."""
        pts = np.atleast_2d(np.array(points, dtype=float))
        out = pts.copy()
        out[:, 1] = pts[:, 1] + self.f(pts[:, 0])
        return out

    def phi_inv(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.array(points, dtype=float))
        out = pts.copy()
        out[:, 1] = pts[:, 1] - self.f(pts[:, 0])
        return out

    def max_chord_slope(self) -> float:
        """Max |Δy/Δx| between consecutive knots (distinct x by construction)."""
        dx = np.diff(self.knots_x)
        dy = np.diff(self.knots_y)
        return float(np.abs(dy / dx).max())


def lipschitz_graph_build(depth: int) -> LipschitzGraph:
    """Sample the ratio-1/5 graph set and interpolate its height function.

    The sampled set projects injectively to the x-axis (base-5 digits from
    {0, 2, 4}), so sorting by x yields graph knots; the interpolant is
    linearly interpolated between knots and frozen at the boundary values
    outside [0, 1] (a 0-Lipschitz extension, well under the interior slope
    bound of 5).
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    ifs = lipgraph5_ifs()
    pts = limit_set_sample(ifs, depth)
    order = np.argsort(pts[:, 0])
    pts = pts[order]
    return LipschitzGraph(
        points=pts,
        knots_x=pts[:, 0].copy(),
        knots_y=pts[:, 1].copy(),
        depth=depth,
    )
