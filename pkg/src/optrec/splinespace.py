"""Continuous piecewise-linear spaces on [0, 1] and norms of their elements.

Elements are stored by nodal values in the hat-function basis, so the value
at knot ``j`` is ``coeffs[j]`` exactly.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._pykernels import abs_power_integrals
from .errors import DomainError, InvalidArgument, UnsupportedParameter

KNOT_TOL = 1e-12
NORM_GAUSS_ORDER = 8
ERROR_GAUSS_ORDER = 16
SINGULAR_REFINEMENTS = 20
SUP_GRID_PER_INTERVAL = 1000


@lru_cache(maxsize=None)
def gauss_legendre_unit(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def _check_p(p: float) -> float:
    p = float(p)
    if not p > 1.0:
        raise UnsupportedParameter(f"p must exceed 1, got {p}")
    return p


@dataclass(frozen=True, eq=False)
class SplineSpace:
    knots: np.ndarray

    def __post_init__(self):
        k = np.array(self.knots, dtype=float).ravel()
        if k.size < 2:
            raise InvalidArgument("a spline space needs at least two knots")
        if k[0] != 0.0 or k[-1] != 1.0:
            raise InvalidArgument("knots must start at 0 and end at 1")
        if np.any(np.diff(k) <= 0):
            raise InvalidArgument("knots must be strictly increasing")
        k.flags.writeable = False
        object.__setattr__(self, "knots", k)

    @property
    def n(self) -> int:
        """Number of knot intervals."""
        return self.knots.size - 1

    @property
    def dim(self) -> int:
        return self.knots.size

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.knots)

    def locate(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Interval index and local coordinate in [0, 1] for each point."""
        x = np.asarray(x, dtype=float)
        k = np.searchsorted(self.knots, x, side="right") - 1
        k = np.clip(k, 0, self.n - 1)
        t = (x - self.knots[k]) / (self.knots[k + 1] - self.knots[k])
        return k, t

    def __eq__(self, other):
        return isinstance(other, SplineSpace) and np.array_equal(self.knots, other.knots)

    def __hash__(self):
        return hash(self.knots.tobytes())


def make_uniform_space(n: int) -> SplineSpace:
    if int(n) != n or n < 1:
        raise InvalidArgument(f"n must be a positive integer, got {n!r}")
    return SplineSpace(np.linspace(0.0, 1.0, int(n) + 1))


def _merge_points(*arrays: np.ndarray) -> np.ndarray:
    pts = np.sort(np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays]))
    keep = [pts[0]]
    for x in pts[1:]:
        if x - keep[-1] > KNOT_TOL:
            keep.append(x)
    return np.array(keep)


def make_merged_space(sites: Sequence[float], n: int) -> SplineSpace:
    """Space whose knots are the union of ``sites`` and the uniform grid j/n."""
    x = np.asarray(sites, dtype=float).ravel()
    if x.size == 0:
        raise InvalidArgument("make_merged_space needs at least one site")
    if x.min() < 0.0 or x.max() > 1.0:
        raise DomainError("sites must lie in [0, 1]")
    knots = _merge_points(x, make_uniform_space(n).knots)
    knots[0], knots[-1] = 0.0, 1.0
    return SplineSpace(knots)


@dataclass(frozen=True, eq=False)
class PiecewiseLinear:
    space: SplineSpace
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).ravel()
        if c.size != self.space.dim:
            raise InvalidArgument(f"{c.size} coefficients for {self.space.dim} knots")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_knots(cls, knots, coeffs) -> "PiecewiseLinear":
        return cls(SplineSpace(knots), coeffs)

    @property
    def knots(self) -> np.ndarray:
        return self.space.knots

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.coeffs) / self.space.widths

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        if x_arr.size and (x_arr.min() < 0.0 or x_arr.max() > 1.0):
            raise DomainError("evaluation point outside [0, 1]")
        k, t = self.space.locate(x_arr)
        out = (1.0 - t) * self.coeffs[k] + t * self.coeffs[k + 1]
        return float(out) if out.ndim == 0 else out

    def __eq__(self, other):
        return (isinstance(other, PiecewiseLinear) and self.space == other.space
                and np.array_equal(self.coeffs, other.coeffs))

    def scaled(self, a: float) -> "PiecewiseLinear":
        return PiecewiseLinear(self.space, a * self.coeffs)

    def to_csv(self) -> str:
        lines = ["knot,coeff"] + [f"{k:.17g},{c:.17g}" for k, c in zip(self.knots, self.coeffs)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "PiecewiseLinear":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows or set(rows[0]) != {"knot", "coeff"}:
            raise InvalidArgument("expected CSV header 'knot,coeff'")
        return cls.from_knots([float(r["knot"]) for r in rows], [float(r["coeff"]) for r in rows])

    def to_json(self) -> str:
        return json.dumps({"knots": self.knots.tolist(), "coeffs": self.coeffs.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "PiecewiseLinear":
        d = json.loads(text)
        try:
            return cls.from_knots(d["knots"], d["coeffs"])
        except KeyError as exc:
            raise InvalidArgument(f"missing key {exc}") from None

    @classmethod
    def load(cls, path) -> "PiecewiseLinear":
        path = Path(path)
        text = path.read_text()
        return cls.from_json(text) if path.suffix.lower() == ".json" else cls.from_csv(text)


def evaluate(g: PiecewiseLinear, x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x={x} outside [0, 1]")
    return g(x)


def interpolate(sites: Sequence[float], values: Sequence[float]) -> PiecewiseLinear:
    """The piecewise-linear interpolant with breakpoints exactly at ``sites``."""
    x = np.asarray(sites, dtype=float).ravel()
    w = np.asarray(values, dtype=float).ravel()
    if x.shape != w.shape:
        raise InvalidArgument("sites and values differ in length")
    if x.size < 2 or x[0] != 0.0 or x[-1] != 1.0:
        raise InvalidArgument("interpolation sites must include both endpoints 0 and 1")
    return PiecewiseLinear.from_knots(x, w)


def sobolev_seminorm(g: PiecewiseLinear, p: float) -> float:
    """Exact L_p norm of the derivative: (sum |slope|^p width)^(1/p)."""
    p = _check_p(p)
    s = np.abs(g.slopes)
    if math.isinf(p):
        return float(s.max())
    return float(np.sum(s ** p * g.space.widths) ** (1.0 / p))


def lp_norm(g: PiecewiseLinear, p: float) -> float:
    p = _check_p(p)
    c = g.coeffs
    if math.isinf(p):
        return float(np.abs(c).max())
    h = g.space.widths
    a, b = c[:-1], c[1:]
    if p == 2.0:
        return float(np.sqrt(np.sum(h * (a * a + a * b + b * b)) / 3.0))
    xi, wq = gauss_legendre_unit(NORM_GAUSS_ORDER)
    integral, _, _ = abs_power_integrals(a, b, p, xi, wq)
    return float(np.sum(integral * h) ** (1.0 / p))


def pl_l2_distance(g: PiecewiseLinear, f: PiecewiseLinear) -> float:
    """Closed-form L2 distance between two piecewise-linear functions."""
    t = _merge_points(g.knots, f.knots)
    d = g(t) - f(t)
    a, b = d[:-1], d[1:]
    return float(np.sqrt(max(np.sum(np.diff(t) * (a * a + a * b + b * b)) / 3.0, 0.0)))


def pl_sup_distance(g: PiecewiseLinear, f: PiecewiseLinear) -> float:
    t = _merge_points(g.knots, f.knots)
    return float(np.abs(g(t) - f(t)).max())


@dataclass(frozen=True, eq=False)
class FunctionOracle:
    """A ground-truth function on [0, 1] together with its non-smooth points.

    ``singular`` lists kinks where the derivative is unbounded; quadrature
    near those is refined dyadically.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    kinks: tuple = ()
    singular: tuple = ()
    spline: Optional[PiecewiseLinear] = field(default=None, repr=False)

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        if x_arr.size and (x_arr.min() < 0.0 or x_arr.max() > 1.0):
            raise DomainError("evaluation point outside [0, 1]")
        out = np.asarray(self.func(x_arr), dtype=float)
        return float(out) if out.ndim == 0 else out

    @classmethod
    def from_spline(cls, g: PiecewiseLinear, name: str = "spline") -> "FunctionOracle":
        return cls(name, g, tuple(g.knots.tolist()), (), g)


def quarter_sqrt() -> FunctionOracle:
    return FunctionOracle("quarter_sqrt", lambda x: 0.25 * np.sqrt(x), (0.0,), (0.0,))


def oracle_from_id(spec: str) -> FunctionOracle:
    """Resolve ``quarter_sqrt``, ``linear``, ``constant:<v>`` or ``spline:<path>``."""
    if spec == "quarter_sqrt":
        return quarter_sqrt()
    if spec == "linear":
        return FunctionOracle("linear", lambda x: np.array(x, dtype=float))
    if spec.startswith("constant:"):
        try:
            v = float(spec.split(":", 1)[1])
        except ValueError:
            raise InvalidArgument(f"bad constant target {spec!r}") from None
        return FunctionOracle(spec, lambda x: np.full(np.shape(x), v))
    if spec.startswith("spline:"):
        path = spec.split(":", 1)[1]
        try:
            g = PiecewiseLinear.load(path)
        except OSError as exc:
            raise InvalidArgument(f"cannot read spline target: {exc}") from None
        return FunctionOracle.from_spline(g, spec)
    raise InvalidArgument(f"unknown target id {spec!r}")


def _breakpoints(g: PiecewiseLinear, f: FunctionOracle) -> np.ndarray:
    extra = [k for k in f.kinks if 0.0 <= k <= 1.0]
    return _merge_points(g.knots, np.asarray(extra, dtype=float).reshape(-1))


def _refined_intervals(bp: np.ndarray, singular: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    lo, hi = bp[:-1], bp[1:]
    sing = np.asarray(singular, dtype=float)
    if sing.size == 0:
        return lo, hi
    los, his = [], []
    frac = 2.0 ** -np.arange(SINGULAR_REFINEMENTS + 1)
    for a, b in zip(lo, hi):
        left = np.any(np.abs(sing - a) <= KNOT_TOL)
        right = np.any(np.abs(sing - b) <= KNOT_TOL)
        if left:
            pts = a + (b - a) * np.concatenate(([0.0], frac[::-1]))
        elif right:
            pts = b - (b - a) * np.concatenate((frac, [0.0]))
        else:
            los.append(a)
            his.append(b)
            continue
        los.extend(pts[:-1])
        his.extend(pts[1:])
    return np.array(los), np.array(his)


def l2_distance(g: PiecewiseLinear, f: FunctionOracle) -> float:
    """L2 distance by composite Gauss-Legendre (order 16 per subinterval)."""
    lo, hi = _refined_intervals(_breakpoints(g, f), f.singular)
    xi, wq = gauss_legendre_unit(ERROR_GAUSS_ORDER)
    h = hi - lo
    x = lo[:, None] + h[:, None] * xi[None, :]
    x = np.clip(x, 0.0, 1.0)
    d = g(x.ravel()) - f(x.ravel())
    return float(np.sqrt(np.sum((d * d).reshape(x.shape) @ wq * h)))


def sup_distance(g: PiecewiseLinear, f: FunctionOracle) -> float:
    """Grid maximum of |g - f|; a lower bound on the true sup up to grid resolution."""
    bp = _breakpoints(g, f)
    s = np.linspace(0.0, 1.0, SUP_GRID_PER_INTERVAL + 1)
    x = (bp[:-1, None] + np.diff(bp)[:, None] * s[None, :]).ravel()
    x = np.clip(np.concatenate((x, bp)), 0.0, 1.0)
    return float(np.abs(g(x) - f(x)).max())
