"""Descent minimizer, parameter schedules and the near-optimality certificate."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import nnls

from . import _backend, _pykernels
from .errors import DegenerateCertificate, InvalidArgument, NumericalFailure, UnsupportedParameter
from .losses import LossProblem, LossSpec
from .measurements import DataSample, mesh_gap
from .modelclass import EMBEDDING_CONSTANT_C, SobolevBall
from .splinespace import PiecewiseLinear, SplineSpace, interpolate, sobolev_seminorm

STRATEGIES = ("per_member", "descent")


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for :func:`minimize`.

    ``init`` is ``"zero"``, ``"member"`` (finite classes: start each member
    solve at that member) or an explicit coefficient vector. ``grad_tol=None``
    picks ``min(1e-8, mu**2 / 10)``. A positive ``fixed_step`` replaces the
    Armijo line search by plain steps of that length. With ``sampling`` on,
    a stalled line search at a kink is followed by gradient-sampling steps
    (see :func:`sampled_step`) before the descent resumes, at most
    ``max_sampled_steps`` times per solve.
    """

    init: Union[str, Sequence[float]] = "zero"
    max_iters: int = 200_000
    grad_tol: Optional[float] = None
    c1: float = 1e-4
    shrink: float = 0.5
    initial_step: float = 1.0
    fixed_step: Optional[float] = None
    strategy: str = "per_member"
    record_history: bool = False
    sampling: bool = True
    max_sampled_steps: int = 200

    def __post_init__(self):
        if isinstance(self.init, str):
            if self.init not in ("zero", "member"):
                raise InvalidArgument(f"unknown init tag {self.init!r}")
        else:
            object.__setattr__(self, "init", np.array(self.init, dtype=float))
        if int(self.max_iters) < 1:
            raise InvalidArgument("max_iters must be at least 1")
        if self.grad_tol is not None and not self.grad_tol > 0:
            raise InvalidArgument("grad_tol must be positive")
        if self.fixed_step is not None and not self.fixed_step > 0:
            raise InvalidArgument("fixed_step must be positive")
        if not (0 < self.c1 < 1 and 0 < self.shrink < 1 and self.initial_step > 0):
            raise InvalidArgument("invalid Armijo parameters")
        if int(self.max_sampled_steps) < 0:
            raise InvalidArgument("max_sampled_steps must be nonnegative")
        if self.strategy not in STRATEGIES:
            raise InvalidArgument(f"unknown strategy {self.strategy!r}")

    def tolerance(self, spec: LossSpec) -> float:
        if self.grad_tol is not None:
            return float(self.grad_tol)
        if spec.is_sobolev and spec.mu > 0:
            return min(1e-8, spec.mu ** 2 / 10.0)
        return 1e-8


@dataclass
class RecoveryResult:
    knots: np.ndarray
    coeffs: np.ndarray
    data_term: float
    penalty_term: float
    loss: float
    iterations: int
    grad_norm_final: float
    converged: bool
    eps_tilde: float = math.nan
    member: Optional[int] = None
    history: Optional[list] = field(default=None, repr=False)

    @property
    def spline(self) -> PiecewiseLinear:
        return PiecewiseLinear.from_knots(self.knots, self.coeffs)

    def to_dict(self) -> dict:
        d = {
            "coeffs": [float(v) for v in self.coeffs],
            "knots": [float(v) for v in self.knots],
            "data_term": self.data_term,
            "penalty_term": self.penalty_term,
            "loss": self.loss,
            "iterations": self.iterations,
            "converged": self.converged,
            "grad_norm_final": self.grad_norm_final,
            "eps_tilde": self.eps_tilde,
        }
        if self.member is not None:
            d["member"] = self.member
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "RecoveryResult":
        d = json.loads(text)
        return cls(np.array(d["knots"], dtype=float), np.array(d["coeffs"], dtype=float),
                   d["data_term"], d["penalty_term"], d["loss"], d["iterations"],
                   d["grad_norm_final"], d["converged"], d.get("eps_tilde", math.nan),
                   d.get("member"))


def _initial(cfg: OptimizerConfig, space: SplineSpace) -> np.ndarray:
    if isinstance(cfg.init, str):
        return np.zeros(space.dim)
    if cfg.init.shape != (space.dim,):
        raise InvalidArgument(f"init has shape {cfg.init.shape}, expected ({space.dim},)")
    return cfg.init.copy()


SAMPLE_SEED = 0x5A3D
SAMPLE_POINTS_PER_DIM = 4
SAMPLE_POINTS_MAX = 1024
SAMPLE_RADII = tuple(10.0 ** -k for k in range(2, 13))


def _min_norm_combination(G: np.ndarray) -> np.ndarray:
    """Shortest vector in the convex hull of the rows of ``G``."""
    scale = max(1.0, float(np.abs(G).max()))
    rho = 1e3 * scale
    # |G^T lam| = |R lam|, so a tall G^T shrinks to its triangular factor
    M = np.linalg.qr(G.T, mode="r") if G.shape[1] > G.shape[0] else G.T
    # weights on the simplex as a nonnegative least-squares problem with a heavy sum row
    A = np.vstack([M, np.full((1, G.shape[0]), rho)])
    b = np.zeros(A.shape[0])
    b[-1] = rho
    lam, _ = nnls(A, b, maxiter=50 * G.shape[0])
    total = lam.sum()
    lam = lam / total if total > 0 else np.full(G.shape[0], 1.0 / G.shape[0])
    return lam @ G


def _active_grad(pieces):
    return max(pieces, key=lambda q: q[0])[1]


def sampled_step(fun, c, f, tol, cfg, rng):
    """One gradient-sampling step from a point where the line search stalled.

    For radii shrinking from 1e-2 to 1e-12 (relative to ``max(1, |c|)``), the
    shortest vector in the convex hull of gradients sampled in a ball around
    ``c`` is used as the negative search direction under the usual Armijo
    test. Returns ``(c_new, f_new, measure)`` with ``c_new`` None when no
    radius gives descent; ``measure`` is the shortest combination found at
    the smallest radius tried.
    """
    f0, pieces = fun(c, True)
    own = np.array([g for _, g in pieces])
    scale = max(1.0, float(np.linalg.norm(c)))
    k = min(SAMPLE_POINTS_PER_DIM * c.size, SAMPLE_POINTS_MAX)
    measure = math.inf
    for r in SAMPLE_RADII:
        u = rng.standard_normal((k, c.size))
        u *= (rng.uniform(size=(k, 1)) ** (1.0 / c.size)) / np.linalg.norm(u, axis=1, keepdims=True)
        grads = [own]
        for q in c + (r * scale) * u:
            fq, pq = fun(q, True)
            if math.isfinite(fq):
                grads.append(_active_grad(pq)[None, :])
        g = _min_norm_combination(np.vstack(grads))
        gg = float(np.dot(g, g))
        measure = math.sqrt(gg)
        if measure <= tol:
            continue
        a = cfg.initial_step
        for _ in range(_pykernels.MAX_BACKTRACKS):
            cn = c - a * g
            fn, _ = fun(cn, False)
            if math.isfinite(fn) and fn < f and fn <= f - cfg.c1 * a * gg:
                return cn, fn, measure
            a *= cfg.shrink
    return None, f, measure


def _descent(fun, c0, cfg, tol, fast=None):
    """Armijo descent from ``c0``; on a stall, gradient-sampling steps and a restart.

    ``fast(c, iters)`` runs the plain Armijo loop (defaults to the numpy
    loop over ``fun``). Returns ``(c, iterations, measure, status, history)``.
    """
    if fast is None:
        def fast(c, iters):
            return _pykernels.armijo_descent(fun, c, iters, tol, cfg.c1, cfg.shrink, cfg.initial_step,
                                             cfg.fixed_step or 0.0, cfg.record_history)

    rng = np.random.default_rng(SAMPLE_SEED)
    c, total, history, sampled = c0, 0, None, 0
    while True:
        c, f, it, gn, status, h = fast(c, int(cfg.max_iters) - total)
        total += it
        if cfg.record_history:
            history = h if history is None else history + h[1:]
        if (status != _pykernels.STATUS_STALLED or not cfg.sampling or cfg.fixed_step
                or sampled >= cfg.max_sampled_steps):
            return c, total, gn, status, history
        if total >= cfg.max_iters:
            return c, total, gn, _pykernels.STATUS_MAX_ITERS, history
        cn, fn, measure = sampled_step(fun, c, f, tol, cfg, rng)
        if cn is None:
            done = measure <= tol
            return c, total, measure, _pykernels.STATUS_CONVERGED if done else status, history
        c = cn
        total += 1
        sampled += 1
        if cfg.record_history:
            history.append(fn)


def _check_status(status, it):
    if status == _pykernels.STATUS_NONFINITE:
        raise NumericalFailure("non-finite loss or gradient during descent", iteration=it)


def _result(problem, c, it, gn, status, history, member=None):
    loss, data, pen, _ = (problem.member_terms(c, member, want_grad=False) if member is not None
                          else problem.terms(c, want_grad=False))
    if not math.isfinite(loss):
        raise NumericalFailure("non-finite loss at the final iterate", iteration=it)
    # convex first-order estimate of the suboptimality in the loss
    eps = gn * max(1.0, float(np.linalg.norm(c))) if math.isfinite(gn) else math.nan
    return RecoveryResult(problem.space.knots.copy(), c, float(data), float(pen), float(loss), int(it),
                          float(gn), status == _pykernels.STATUS_CONVERGED, eps, member, history)


def minimize(sample: DataSample, space: SplineSpace, spec: LossSpec,
             cfg: OptimizerConfig = OptimizerConfig()) -> RecoveryResult:
    """Minimize the loss over the spline space by (sub)gradient descent.

    For the Sobolev variants this runs the backend's Armijo loop from the
    configured start. For finite classes, ``per_member`` solves the convex
    problem with ``dist(g, K)`` replaced by the distance to each member and
    keeps the best (lowest index on ties); ``descent`` runs one descent on
    the full loss, following whichever member is nearest at each iterate.
    """
    problem = LossProblem(sample, space, spec)
    tol = cfg.tolerance(spec)
    if spec.is_sobolev:
        kern = _backend.kernels

        def fun(c, want_grad):
            return kern.sobolev_pieces(c, problem.prob, want_grad)

        def fast(c, iters):
            return kern.sobolev_descent(c, problem.prob, iters, tol, cfg.c1, cfg.shrink, cfg.initial_step,
                                        cfg.fixed_step or 0.0, cfg.record_history)

        c, it, gn, status, history = _descent(fun, _initial(cfg, space), cfg, tol, fast)
        _check_status(status, it)
        return _result(problem, c, it, gn, status, history)

    if cfg.strategy == "descent":
        def fun(c, want_grad):
            loss, _, _, g = problem.terms(c, want_grad)
            return loss, ([(loss, g)] if want_grad else None)

        c, it, gn, status, history = _descent(fun, _initial(cfg, space), cfg, tol)
        _check_status(status, it)
        res = _result(problem, c, it, gn, status, history)
        res.member = problem.nearest_member(c)[1]
        return res

    best = None
    for k, member in enumerate(spec.model.members):
        def fun(c, want_grad, k=k):
            loss, _, _, g = problem.member_terms(c, k, want_grad)
            return loss, ([(loss, g)] if want_grad else None)

        if isinstance(cfg.init, str) and cfg.init == "member":
            c0 = np.asarray(member(space.knots), dtype=float)
        else:
            c0 = _initial(cfg, space)
        c, it, gn, status, history = _descent(fun, c0, cfg, tol)
        _check_status(status, it)
        res = _result(problem, c, it, gn, status, history, member=k)
        if best is None or res.loss < best.loss:
            best = res
        if best.loss <= 0.0:
            # the loss is nonnegative and ties go to the lowest index
            break
    return best


# --- schedules -------------------------------------------------------------

def smoothness_exponent(p: float) -> float:
    """s = 3/2 - 1/p."""
    return 1.5 - 1.0 / p


def schedule_parameters(m: int, p: float, mode: str = "practical") -> tuple[int, float, float]:
    """Return ``(n, mu, s)`` for ``m`` samples in the W^1(L_p) setting."""
    if int(m) != m or m < 2:
        raise InvalidArgument("m must be an integer >= 2")
    if not 1.0 < p <= 2.0:
        raise UnsupportedParameter("schedules are defined for 1 < p <= 2")
    m = int(m)
    s = smoothness_exponent(p)
    if mode == "practical":
        return 2 * m, 0.1 * m ** (-s), s
    if mode == "theoretical":
        v = m ** (2.0 * s / (1.0 - 1.0 / p))
        # exact integer powers must not be bumped up by rounding in the exponent
        return int(math.ceil(v * (1.0 - 1e-12))), m ** (-s), s
    raise InvalidArgument(f"unknown schedule mode {mode!r}")


# --- certificate -----------------------------------------------------------

PROOF_CONSTANT = 1.0 / (4.0 * math.sqrt(2.0))


@dataclass(frozen=True)
class Certificate:
    m: int
    h: float
    s: float
    Lambda: float
    radius_lower: float
    radius_lower_stated: float
    radius_upper: float
    eps: float
    error_bound: float
    constant: float
    eps_ok: bool
    mu_ok: bool

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def near_optimality_certificate(result: RecoveryResult, sample: DataSample, spec: LossSpec) -> Certificate:
    """Radius bracket and the error bound implied for a regularized fit.

    The radius bracket is ``[Lambda h^s / (4 sqrt 2), h^s]`` with
    ``Lambda = 1 - ||S_w'||_p / radius`` for the data interpolant ``S_w``;
    ``radius_lower_stated`` is the sharper ``Lambda h^s``. The error bound is
    ``eps + 2 (h^s + 2 eps sqrt(m h))`` with ``eps = mu * max(mu + 1, C_Y)``.
    """
    if not spec.is_sobolev:
        raise InvalidArgument("the certificate needs a Sobolev-ball loss")
    if sample.noise_bound not in (None, 0.0):
        raise InvalidArgument("the certificate needs noiseless data")
    ball: SobolevBall = spec.model
    m = sample.m
    _, _, s = schedule_parameters(m, ball.p, "practical")
    h = mesh_gap(sample.sites)
    S = interpolate(sample.sites, sample.values)
    lam = 1.0 - sobolev_seminorm(S, ball.p) / ball.radius
    if lam <= 0.0:
        raise DegenerateCertificate(f"Lambda = {lam:.6g} <= 0; the data interpolant leaves the ball")
    hs = h ** s
    mu = spec.mu
    eps = mu * max(mu + 1.0, EMBEDDING_CONSTANT_C)
    bound = eps + 2.0 * (hs + 2.0 * eps * math.sqrt(m * h))
    return Certificate(
        m=m, h=h, s=s, Lambda=lam,
        radius_lower=PROOF_CONSTANT * lam * hs,
        radius_lower_stated=lam * hs,
        radius_upper=hs,
        eps=eps,
        error_bound=bound,
        constant=7.0 / lam,
        eps_ok=eps <= h ** (s - 0.5) * m ** -0.5,
        mu_ok=mu <= m ** (-s),
    )
