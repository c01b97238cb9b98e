"""Loss functionals over spline coefficients and their subgradients.

Four variants share one data term, the empirical norm of the residual
``r = lambda_x(g) - w``:

* ``Plain``:       ``||r|| + mu * N(g)``
* ``Powered``:     ``tau * ||r||**alpha + mu * N(g)**beta``
* ``DistToClass``: ``||r|| + dist(g, K)``
* ``NoisyDist``:   ``tau * ||r|| + dist(g, K)``

where ``N(g) = ||g||_{W^1(L_p)} / radius`` for a :class:`SobolevBall` and
``dist`` is taken in the metric of a :class:`FiniteModelClass`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _backend
from .errors import InvalidArgument, UnsupportedParameter
from .measurements import DataSample
from .modelclass import FiniteModelClass, MemberDistance, SobolevBall
from .splinespace import NORM_GAUSS_ORDER, SplineSpace, gauss_legendre_unit

VARIANTS = ("Plain", "Powered", "DistToClass", "NoisyDist")

Model = Union[SobolevBall, FiniteModelClass]


@dataclass(frozen=True)
class LossSpec:
    variant: str
    model: Model
    mu: float = 0.0
    alpha: float = 1.0
    beta: float = 1.0
    tau: float = 1.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidArgument(f"unknown loss variant {self.variant!r}")
        sobolev = self.variant in ("Plain", "Powered")
        if sobolev and not isinstance(self.model, SobolevBall):
            raise InvalidArgument(f"{self.variant} needs a SobolevBall model")
        if not sobolev and not isinstance(self.model, FiniteModelClass):
            raise InvalidArgument(f"{self.variant} needs a FiniteModelClass model")
        for name in ("mu", "alpha", "beta", "tau"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidArgument(f"{name} must be finite")
            object.__setattr__(self, name, v)
        if self.mu < 0:
            raise InvalidArgument("mu must be nonnegative")
        if self.alpha <= 0 or self.beta <= 0:
            raise InvalidArgument("alpha and beta must be positive")
        if self.alpha < 1 or self.beta < 1:
            raise UnsupportedParameter("alpha, beta < 1 give a nonconvex loss")
        if not 0 < self.tau <= 1:
            raise InvalidArgument("tau must lie in (0, 1]")
        if self.variant in ("Plain", "DistToClass"):
            if self.alpha != 1 or self.beta != 1 or self.tau != 1:
                raise InvalidArgument(f"{self.variant} takes no alpha, beta or tau")
        if self.variant == "NoisyDist" and (self.alpha != 1 or self.beta != 1):
            raise InvalidArgument("NoisyDist takes no alpha or beta")

    @classmethod
    def plain(cls, mu: float, ball: SobolevBall) -> "LossSpec":
        return cls("Plain", ball, mu=mu)

    @classmethod
    def powered(cls, mu: float, ball: SobolevBall, alpha: float = 2.0, beta: float | None = None,
                tau: float = 1.0) -> "LossSpec":
        return cls("Powered", ball, mu=mu, alpha=alpha, beta=ball.p if beta is None else beta, tau=tau)

    @classmethod
    def dist_to_class(cls, K: FiniteModelClass) -> "LossSpec":
        return cls("DistToClass", K)

    @classmethod
    def noisy_dist(cls, K: FiniteModelClass, tau: float) -> "LossSpec":
        return cls("NoisyDist", K, tau=tau)

    @property
    def is_sobolev(self) -> bool:
        return self.variant in ("Plain", "Powered")

    def combine(self, data_term: float, penalty_term: float) -> float:
        """Loss from its two parts, with the same arithmetic as the kernels."""
        if self.is_sobolev:
            return self.tau * data_term + self.mu * penalty_term
        return self.tau * data_term + penalty_term


class LossProblem:
    """A loss bound to data and a spline space; evaluates on coefficient vectors."""

    def __init__(self, sample: DataSample, space: SplineSpace, spec: LossSpec):
        self.sample = sample
        self.space = space
        self.spec = spec
        self.sk, self.st = space.locate(sample.sites)
        self.sk = self.sk.astype(np.int64)
        self.w = np.asarray(sample.values, dtype=float)
        if spec.is_sobolev:
            xi, wq = gauss_legendre_unit(NORM_GAUSS_ORDER)
            ball = spec.model
            self.prob = (space.widths, self.sk, self.st, self.w, xi, wq, spec.tau,
                         spec.alpha, spec.mu, spec.beta, float(ball.p), float(ball.radius))
        else:
            self.members = [MemberDistance(space, f, spec.model.metric) for f in spec.model.members]

    def check(self, c) -> np.ndarray:
        c = np.asarray(c, dtype=float)
        if c.shape != (self.space.dim,):
            raise InvalidArgument(f"expected {self.space.dim} coefficients, got shape {c.shape}")
        return c

    # --- finite-class pieces (the Sobolev variants live in the kernels) ----

    def _data(self, c, want_grad):
        m = self.w.size
        r = (1.0 - self.st) * c[self.sk] + self.st * c[self.sk + 1] - self.w
        R = math.sqrt(float(np.dot(r, r)) / m)
        if not want_grad:
            return R, None
        if R == 0.0:
            return R, np.zeros(c.size)
        v = r / (m * R)
        g = (np.bincount(self.sk, (1.0 - self.st) * v, minlength=c.size)
             + np.bincount(self.sk + 1, self.st * v, minlength=c.size))
        return R, g

    def member_terms(self, c, k: int, want_grad: bool = True):
        """(loss, data, dist, grad) for the loss with dist replaced by the distance to member k."""
        R, gR = self._data(c, want_grad)
        if want_grad:
            d, gd = self.members[k].value_and_grad(c)
            grad = self.spec.tau * gR + gd
        else:
            d, grad = self.members[k].value(c), None
        return self.spec.combine(R, d), R, d, grad

    def nearest_member(self, c) -> tuple[float, int]:
        d = [mem.value(c) for mem in self.members]
        k = int(np.argmin(d))
        return d[k], k

    # --- public evaluation -------------------------------------------------

    def terms(self, c, want_grad: bool = True):
        """Return ``(loss, data_term, penalty_term, subgradient_or_None)``."""
        c = self.check(c)
        if self.spec.is_sobolev:
            return _backend.kernels.sobolev_eval(c, self.prob, want_grad)
        _, k = self.nearest_member(c)
        return self.member_terms(c, k, want_grad)

    def value(self, c) -> float:
        return self.terms(c, want_grad=False)[0]

    def subgradient(self, c) -> np.ndarray:
        return self.terms(c, want_grad=True)[3]


def loss_value(c, sample: DataSample, space: SplineSpace, spec: LossSpec) -> float:
    return LossProblem(sample, space, spec).value(c)


def loss_subgradient(c, sample: DataSample, space: SplineSpace, spec: LossSpec) -> np.ndarray:
    """A subgradient of the loss at ``c``; the gradient wherever the loss is differentiable.

    Non-differentiable pieces at zero (zero residual, zero spline, zero
    distance) contribute 0. At a tie between the two branches of the
    Sobolev norm, or between equal entries of a max, the candidate gradients
    are averaged.
    """
    return LossProblem(sample, space, spec).subgradient(c)
