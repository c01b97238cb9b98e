"""Experiment configuration with JSON round-trip."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from ..errors import InvalidArgument, UnsupportedParameter

EXPERIMENTS = ("rate", "compare_reg", "noisy", "cheb_demo", "recover")
SCHEDULES = ("practical", "theoretical", "explicit")
FORMATS = ("csv", "json")
SPACES = ("uniform", "merged")

DEFAULT_SEED = 0xDEC0DE
DEFAULT_M_LIST = (10, 20, 40, 80, 160, 320)
SINGLE_M = (40,)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment run.

    ``m_list=None`` means the experiment's default: the six nested sizes for
    ``rate``, a single m=40 otherwise. ``n``/``mu`` are only read by the
    explicit schedule. ``gamma`` is the largest noise level of the noisy
    sweep, which uses eleven equally spaced levels from 0. ``model`` is
    ``{"kind": "sobolev", "p": .., "radius": ..}`` or
    ``{"kind": "finite", "metric": "sup" | "L2" | "both", "members": [ids or paths]}``;
    ``None`` means the Sobolev unit ball at ``p``.
    """

    experiment: str = "rate"
    target: str = "quarter_sqrt"
    p: float = 1.5
    m_list: Optional[tuple[int, ...]] = None
    seed: int = DEFAULT_SEED
    schedule: str = "practical"
    n: Optional[int] = None
    mu: Optional[float] = None
    alpha: float = 2.0
    beta: Optional[float] = None
    gamma: Optional[float] = None
    tau: float = 1.0
    space: str = "uniform"
    model: Optional[dict] = field(default=None, hash=False)
    strategy: str = "per_member"
    max_iters: int = 400_000
    resolution: int = 1000
    output: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise InvalidArgument(f"unknown experiment {self.experiment!r}")
        if self.schedule not in SCHEDULES:
            raise InvalidArgument(f"unknown schedule {self.schedule!r}")
        if self.format not in FORMATS:
            raise InvalidArgument(f"unknown format {self.format!r}")
        if self.space not in SPACES:
            raise InvalidArgument(f"unknown space {self.space!r}")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2 ** 64):
            raise InvalidArgument("seed must be an unsigned 64-bit integer")
        if not (math.isfinite(self.p) or math.isinf(self.p)) or self.p <= 1:
            raise UnsupportedParameter("p must exceed 1")
        if self.m_list is not None:
            ms = tuple(int(m) for m in self.m_list)
            if not ms or any(m < 2 for m in ms) or any(b <= a for a, b in zip(ms, ms[1:])):
                raise InvalidArgument("m_list must be strictly increasing integers >= 2")
            object.__setattr__(self, "m_list", ms)
        if self.schedule == "explicit" and self.n is None and self.mu is None:
            raise InvalidArgument("explicit schedule needs n or mu")
        if self.n is not None and int(self.n) < 1:
            raise InvalidArgument("n must be positive")
        if self.mu is not None and not self.mu >= 0:
            raise InvalidArgument("mu must be nonnegative")
        if self.gamma is not None:
            if not self.gamma >= 0:
                raise InvalidArgument("gamma must be nonnegative")
            if self.gamma > 1:
                raise UnsupportedParameter("noise levels above 1 are not supported")
        if not 0 < self.tau <= 1:
            raise InvalidArgument("tau must lie in (0, 1]")
        if int(self.max_iters) < 1:
            raise InvalidArgument("max_iters must be positive")
        if self.resolution < 100:
            raise InvalidArgument("resolution must be at least 100")
        if self.model is not None:
            kind = self.model.get("kind")
            if kind not in ("sobolev", "finite"):
                raise InvalidArgument(f"unknown model kind {kind!r}")
            if kind == "finite" and self.model.get("metric", "sup") not in ("sup", "L2", "both"):
                raise InvalidArgument("finite model metric must be sup, L2 or both")

    @property
    def ms(self) -> tuple[int, ...]:
        if self.m_list is not None:
            return self.m_list
        return DEFAULT_M_LIST if self.experiment == "rate" else SINGLE_M

    @property
    def beta_eff(self) -> float:
        return self.p if self.beta is None else self.beta

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        if d["m_list"] is not None:
            d["m_list"] = list(d["m_list"])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if d.get("m_list") is not None:
            d["m_list"] = tuple(d["m_list"])
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"config is not valid JSON: {exc}") from None
        if not isinstance(d, dict):
            raise InvalidArgument("config must be a JSON object")
        return cls.from_dict(d)
