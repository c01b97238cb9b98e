"""Chebyshev radii of planar sets via minimum enclosing balls.

Sets are unions of segments and axis-aligned boxes. They are discretized to
point clouds and passed to a randomized incremental enclosing-circle
routine. The toy model set is ``K = [0,1]^2 u ([1,2] x {1/2})`` observed
through ``lambda(x) = x_1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from . import _backend
from .errors import InvalidArgument

MEB_SEED = 0x5EED
SLICE_TOL = 1e-12
DEFAULT_RESOLUTION = 1000
JUMP_FACTOR = 10.0
LEFT_LIMIT_SHIFT = 1e-9


@dataclass(frozen=True)
class Ball:
    center: tuple[float, float]
    radius: float
    support: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.radius >= 0:
            raise InvalidArgument("radius must be nonnegative")

    def contains(self, points, tol: float = 1e-9) -> bool:
        P = np.atleast_2d(np.asarray(points, dtype=float))
        d = np.hypot(P[:, 0] - self.center[0], P[:, 1] - self.center[1])
        return bool(np.all(d <= self.radius + tol))


def min_enclosing_ball(points, backend=None) -> Ball:
    """Smallest disc containing all points; ``support`` indexes the input rows."""
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    if P.shape[0] == 0:
        raise InvalidArgument("min_enclosing_ball needs at least one point")
    kern = backend if backend is not None else _backend.kernels
    order = np.random.default_rng(MEB_SEED).permutation(P.shape[0])
    cx, cy, r, i, j, k = kern.meb(P[order])
    support = tuple(int(order[t]) for t in (i, j, k) if t >= 0)
    return Ball((float(cx), float(cy)), float(r), support)


@dataclass(frozen=True)
class Segment:
    a: tuple[float, float]
    b: tuple[float, float]

    @property
    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])

    def discretize(self, resolution: int, step: Optional[float] = None) -> np.ndarray:
        step = 1.0 / resolution if step is None else step
        count = 2 if self.length == 0 else max(2, int(math.ceil(self.length / step)) + 1)
        t = np.linspace(0.0, 1.0, count)
        a, b = np.asarray(self.a), np.asarray(self.b)
        return a[None, :] * (1.0 - t[:, None]) + b[None, :] * t[:, None]


@dataclass(frozen=True)
class Box:
    lo: tuple[float, float]
    hi: tuple[float, float]

    def __post_init__(self):
        if self.lo[0] > self.hi[0] or self.lo[1] > self.hi[1]:
            raise InvalidArgument("box corners out of order")

    def discretize(self, resolution: int, step: Optional[float] = None) -> np.ndarray:
        # the enclosing ball only depends on the convex hull, so the boundary is enough
        (x0, y0), (x1, y1) = self.lo, self.hi
        hstep = 1.0 / resolution if step is None else step
        nx = max(2, int(math.ceil((x1 - x0) / hstep)) + 1) if x1 > x0 else 1
        ny = max(2, int(math.ceil((y1 - y0) * resolution)) + 1) if y1 > y0 else 1
        xs = np.linspace(x0, x1, nx)
        ys = np.linspace(y0, y1, ny)
        edges = [np.column_stack([xs, np.full(nx, y0)]), np.column_stack([xs, np.full(nx, y1)]),
                 np.column_stack([np.full(ny, x0), ys]), np.column_stack([np.full(ny, x1), ys])]
        return np.unique(np.vstack(edges), axis=0)


Primitive = Union[Segment, Box]


@dataclass(frozen=True)
class GeometricSet:
    primitives: tuple[Primitive, ...]
    step: Optional[float] = None

    def __post_init__(self):
        if len(self.primitives) == 0:
            raise InvalidArgument("a geometric set needs at least one primitive")
        object.__setattr__(self, "primitives", tuple(self.primitives))

    def discretize(self, resolution: int = DEFAULT_RESOLUTION) -> np.ndarray:
        return np.vstack([q.discretize(resolution, self.step) for q in self.primitives])

    def chebyshev_ball(self, resolution: int = DEFAULT_RESOLUTION, backend=None) -> Ball:
        return min_enclosing_ball(self.discretize(resolution), backend)


def toy_slice(w: float) -> Optional[GeometricSet]:
    """Points of the toy set with first coordinate ``w``; ``None`` when empty.

    At ``w = 1`` both pieces meet and the slice is the full unit segment.
    """
    w = float(w)
    if -SLICE_TOL <= w <= 1.0 + SLICE_TOL:
        w = min(max(w, 0.0), 1.0)
        return GeometricSet((Segment((w, 0.0), (w, 1.0)),))
    if 1.0 < w <= 2.0 + SLICE_TOL:
        w = min(w, 2.0)
        return GeometricSet((Segment((w, 0.5), (w, 0.5)),))
    return None


def slice_radius(w: float, resolution: int = DEFAULT_RESOLUTION, backend=None) -> float:
    """Chebyshev radius of the slice at ``w``; NaN when the slice is empty."""
    K = toy_slice(w)
    return math.nan if K is None else K.chebyshev_ball(resolution, backend).radius


def inflated_set(w_hat: float, eps: float, resolution: int = DEFAULT_RESOLUTION) -> Optional[GeometricSet]:
    """Union of the slices over ``w'`` in ``[w_hat - eps, w_hat + eps]``.

    Along ``w'`` the set is sampled at step ``eps / resolution``.
    """
    if eps < 0:
        raise InvalidArgument("eps must be nonnegative")
    if eps == 0:
        return toy_slice(w_hat)
    lo, hi = w_hat - eps, w_hat + eps
    parts: list[Primitive] = []
    if lo <= 1.0 + SLICE_TOL and hi >= -SLICE_TOL:
        x1 = min(max(hi, 0.0), 1.0)
        x0 = min(max(lo, 0.0), x1)
        parts.append(Box((x0, 0.0), (x1, 1.0)))
    if hi > 1.0 and lo <= 2.0 + SLICE_TOL:
        x0 = max(lo, 1.0)
        x1 = max(min(hi, 2.0), x0)
        parts.append(Segment((x0, 0.5), (x1, 0.5)))
    if not parts:
        return None
    return GeometricSet(tuple(parts), step=eps / resolution)


def inflated_radius(w_hat: float, eps: float, resolution: int = DEFAULT_RESOLUTION, backend=None) -> float:
    K = inflated_set(w_hat, eps, resolution)
    return math.nan if K is None else K.chebyshev_ball(resolution, backend).radius


def inflated_radius_curve(w_hat: float, eps_grid: Sequence[float], resolution: int = DEFAULT_RESOLUTION,
                          backend=None) -> list[tuple[float, float, int]]:
    """Rows ``(eps, radius, is_jump)`` of the inflated radius against ``eps``.

    Where consecutive radii differ by more than ``10 / resolution`` the row
    at the later grid point is preceded by a left-limit row (radius just
    below that ``eps``); both rows carry ``is_jump = 1``.
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    if eps_grid.ndim != 1 or eps_grid.size == 0:
        raise InvalidArgument("eps_grid must be a nonempty vector")
    if np.any(eps_grid < 0) or np.any(np.diff(eps_grid) <= 0):
        raise InvalidArgument("eps_grid must be sorted, distinct and nonnegative")
    if resolution < 100:
        raise InvalidArgument("resolution must be at least 100")
    threshold = JUMP_FACTOR / resolution
    radii = [inflated_radius(w_hat, float(e), resolution, backend) for e in eps_grid]
    rows: list[tuple[float, float, int]] = []
    for i, (e, r) in enumerate(zip(eps_grid, radii)):
        e = float(e)
        if i > 0 and abs(r - radii[i - 1]) > threshold:
            left = inflated_radius(w_hat, e * (1.0 - LEFT_LIMIT_SHIFT), resolution, backend)
            rows.append((e, left, 1))
            rows.append((e, r, 1))
        else:
            rows.append((e, r, 0))
    return rows


def jump_locations(rows) -> list[float]:
    """Distinct ``eps`` values flagged as jumps in a curve."""
    out: list[float] = []
    for e, _, j in rows:
        if j and (not out or out[-1] != e):
            out.append(e)
    return out


def slice_curve(ws: Sequence[float], resolution: int = DEFAULT_RESOLUTION, backend=None) -> list[tuple[float, float]]:
    return [(float(w), slice_radius(w, resolution, backend)) for w in ws]


def _fmt(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.17g}"


def curve_to_csv(rows) -> str:
    lines = ["epsilon,radius,is_jump"]
    lines += [f"{_fmt(e)},{_fmt(r)},{int(j)}" for e, r, j in rows]
    return "\n".join(lines) + "\n"


def slice_curve_to_csv(rows) -> str:
    lines = ["w,radius"] + [f"{_fmt(w)},{_fmt(r)}" for w, r in rows]
    return "\n".join(lines) + "\n"


def parse_curve_csv(text: str) -> list[tuple[float, float, int]]:
    body = text.strip().splitlines()[1:]
    return [(float(a), float(b), int(c)) for a, b, c in (ln.split(",") for ln in body)]


def parse_slice_csv(text: str) -> list[tuple[float, float]]:
    body = text.strip().splitlines()[1:]
    return [(float(a), float(b)) for a, b in (ln.split(",") for ln in body)]
