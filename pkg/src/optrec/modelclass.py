"""Model classes K: the Sobolev ball U(W^1(L_p)) and finite sets of splines."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, UnsupportedParameter
from .splinespace import (
    PiecewiseLinear,
    SplineSpace,
    _merge_points,
    lp_norm,
    pl_l2_distance,
    pl_sup_distance,
    sobolev_seminorm,
)

METRICS = ("L2", "sup")

# Sup-norm bound for the unit ball of W^1(L_p[0,1]), p >= 1:
# |f(x)| <= ||f||_L1 + ||f'||_L1 <= 2. Used only when reporting certificates.
EMBEDDING_CONSTANT_C = 2.0
# L2[0,1] norm is dominated by the sup norm with constant 1.
EMBEDDING_CONSTANT_X = 1.0


@dataclass(frozen=True)
class SobolevBall:
    """The ball of radius ``radius`` in W^1(L_p[0,1]) with the max(|f|_p, |f'|_p) norm."""

    p: float
    radius: float = 1.0

    def __post_init__(self):
        if not float(self.p) > 1.0:
            raise UnsupportedParameter(f"Sobolev ball needs p > 1, got {self.p}")
        if not float(self.radius) > 0.0:
            raise InvalidArgument("radius must be positive")
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "radius", float(self.radius))

    def contains(self, g: PiecewiseLinear) -> bool:
        return sobolev_norm(g, self) <= self.radius

    def penalty(self, g: PiecewiseLinear) -> float:
        return sobolev_norm(g, self) / self.radius


def sobolev_norm(g: PiecewiseLinear, ball: SobolevBall) -> float:
    return max(lp_norm(g, ball.p), sobolev_seminorm(g, ball.p))


@dataclass(frozen=True, eq=False)
class FiniteModelClass:
    members: tuple
    metric: str = "sup"

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InvalidArgument("a finite model class needs at least one member")
        if not all(isinstance(f, PiecewiseLinear) for f in members):
            raise InvalidArgument("members must be PiecewiseLinear")
        if self.metric not in METRICS:
            raise InvalidArgument(f"metric must be one of {METRICS}, got {self.metric!r}")
        object.__setattr__(self, "members", members)

    def distance(self, g: PiecewiseLinear, k: int) -> float:
        f = self.members[k]
        return pl_l2_distance(g, f) if self.metric == "L2" else pl_sup_distance(g, f)


def dist_to_finite_class(g: PiecewiseLinear, K: FiniteModelClass) -> tuple[float, int]:
    """Distance to the nearest member and its index (lowest index on ties)."""
    d = [K.distance(g, k) for k in range(len(K.members))]
    k = int(np.argmin(d))
    return d[k], k


def constant(v: float) -> PiecewiseLinear:
    return PiecewiseLinear.from_knots([0.0, 1.0], [v, v])


def two_constant_class(metric: str) -> FiniteModelClass:
    """K = {1, 0}: the data (1, ..., 1) is consistent only with the first member."""
    return FiniteModelClass((constant(1.0), constant(0.0)), metric)


class MemberDistance:
    """Distance from splines on a fixed space to one member, as a function of coefficients.

    Both functions are represented on the merged knot set, where they are
    piecewise linear, so the L2 distance is an exact quadratic form and the
    sup distance is a maximum over knots.
    """

    def __init__(self, space: SplineSpace, member: PiecewiseLinear, metric: str):
        if metric not in METRICS:
            raise InvalidArgument(f"unknown metric {metric!r}")
        self.metric = metric
        t = _merge_points(space.knots, member.knots)
        self.k, self.t = space.locate(t)
        self.target = member(t)
        self.dim = space.dim
        h = np.diff(t)
        # tridiagonal mass matrix on the merged knots
        self.mdiag = np.zeros(t.size)
        self.mdiag[:-1] += h / 3.0
        self.mdiag[1:] += h / 3.0
        self.moff = h / 6.0

    def _residual(self, c: np.ndarray) -> np.ndarray:
        return (1.0 - self.t) * c[self.k] + self.t * c[self.k + 1] - self.target

    def _pullback(self, v: np.ndarray) -> np.ndarray:
        return (np.bincount(self.k, (1.0 - self.t) * v, minlength=self.dim)
                + np.bincount(self.k + 1, self.t * v, minlength=self.dim))

    def value(self, c: np.ndarray) -> float:
        d = self._residual(c)
        if self.metric == "sup":
            return float(np.abs(d).max())
        q = np.dot(self.mdiag * d, d) + 2.0 * np.dot(self.moff * d[:-1], d[1:])
        return float(math.sqrt(max(q, 0.0)))

    def value_and_grad(self, c: np.ndarray) -> tuple[float, np.ndarray]:
        d = self._residual(c)
        if self.metric == "sup":
            a = np.abs(d)
            top = a.max()
            if top == 0.0:
                return 0.0, np.zeros(self.dim)
            active = a >= top - 1e-12
            v = np.where(active, np.sign(d), 0.0) / np.count_nonzero(active)
            return float(top), self._pullback(v)
        md = self.mdiag * d
        md[:-1] += self.moff * d[1:]
        md[1:] += self.moff * d[:-1]
        q = float(np.dot(md, d))
        if q <= 0.0:
            return 0.0, np.zeros(self.dim)
        r = math.sqrt(q)
        return r, self._pullback(md / r)
