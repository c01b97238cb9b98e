"""Point-evaluation measurements, the empirical l2 norm and noise injection."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, InvalidArgument

SITE_TOL = 1e-12


def empirical_norm(v) -> float:
    """Return ``sqrt(mean(v**2))``, the norm that makes point evaluation 1-Lipschitz."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        raise InvalidArgument("empirical_norm of an empty vector")
    # scale first so tiny or huge entries neither underflow nor overflow
    top = float(np.max(np.abs(v)))
    if top == 0.0 or not math.isfinite(top):
        return top
    return top * float(np.sqrt(np.mean(np.square(v / top))))


def _check_in_unit(x: np.ndarray) -> None:
    if x.size and (not np.all(np.isfinite(x)) or x.min() < 0.0 or x.max() > 1.0):
        raise DomainError("measurement sites must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class DataSample:
    """Sites in [0, 1] with the observed values and an optional noise bound.

    Sites are sorted on construction. Two sites closer than ``SITE_TOL`` are
    merged when their values agree and rejected otherwise.
    """

    sites: np.ndarray
    values: np.ndarray
    noise_bound: Optional[float] = None

    def __post_init__(self):
        x = np.asarray(self.sites, dtype=float).ravel()
        w = np.asarray(self.values, dtype=float).ravel()
        if x.shape != w.shape:
            raise InvalidArgument(f"{x.size} sites but {w.size} values")
        _check_in_unit(x)
        if not np.all(np.isfinite(w)):
            raise InvalidArgument("values must be finite")
        order = np.argsort(x, kind="stable")
        x, w = x[order], w[order]
        keep = np.ones(x.size, dtype=bool)
        last = 0
        for j in range(1, x.size):
            if x[j] - x[last] <= SITE_TOL:
                if w[j] != w[last]:
                    raise InvalidArgument(f"conflicting values at duplicated site {x[j]!r}")
                keep[j] = False
            else:
                last = j
        x, w = x[keep], w[keep]
        if x.size < 2:
            raise InvalidArgument("a sample needs at least two distinct sites")
        if self.noise_bound is not None and not self.noise_bound >= 0.0:
            raise InvalidArgument("noise bound must be nonnegative")
        x.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "sites", x)
        object.__setattr__(self, "values", w)

    @property
    def m(self) -> int:
        return int(self.sites.size)

    def __eq__(self, other):
        if not isinstance(other, DataSample):
            return NotImplemented
        return (np.array_equal(self.sites, other.sites)
                and np.array_equal(self.values, other.values)
                and self.noise_bound == other.noise_bound)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("site,value\n")
        for x, w in zip(self.sites, self.values):
            buf.write(f"{x:.17g},{w:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, noise_bound: Optional[float] = None) -> "DataSample":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows or set(rows[0]) != {"site", "value"}:
            raise InvalidArgument("expected CSV header 'site,value'")
        return cls([float(r["site"]) for r in rows], [float(r["value"]) for r in rows], noise_bound)

    def to_json(self) -> str:
        return json.dumps({"sites": self.sites.tolist(), "values": self.values.tolist(),
                           "gamma": self.noise_bound})

    @classmethod
    def from_json(cls, text: str) -> "DataSample":
        d = json.loads(text)
        try:
            return cls(d["sites"], d["values"], d.get("gamma"))
        except KeyError as exc:
            raise InvalidArgument(f"missing key {exc}") from None


@dataclass(frozen=True, eq=False)
class NoiseVector:
    entries: np.ndarray
    bound: float

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float).ravel()
        if e.size == 0 or not np.all(np.isfinite(e)):
            raise InvalidArgument("noise entries must be a nonempty finite vector")
        if empirical_norm(e) > self.bound:
            raise InvalidArgument(f"noise norm {empirical_norm(e)!r} exceeds declared bound {self.bound!r}")
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)


def apply_point_measurements(g: Callable, sites: Sequence[float]) -> np.ndarray:
    """Evaluate ``g`` at every site. ``g`` may be vectorized or scalar-only."""
    x = np.asarray(sites, dtype=float).ravel()
    _check_in_unit(x)
    try:
        out = np.asarray(g(x), dtype=float)
        if out.shape != x.shape:
            raise ValueError
    except (TypeError, ValueError):
        out = np.array([float(g(float(xi))) for xi in x])
    return out


def add_noise(sample: DataSample, noise: NoiseVector) -> DataSample:
    """Return ``sample`` with ``noise`` added to its values.

    The new noise bound is the empirical norm of the noise, nudged up by one
    ulp so that it is never below the true norm.
    """
    if noise.entries.size != sample.m:
        raise InvalidArgument(f"noise has length {noise.entries.size}, sample has {sample.m}")
    gamma = empirical_norm(noise.entries)
    if gamma > 0.0:
        gamma = math.nextafter(gamma, math.inf)
    return DataSample(sample.sites, sample.values + noise.entries, gamma)


def mesh_gap(sites: Sequence[float]) -> float:
    x = np.asarray(sites, dtype=float).ravel()
    if x.size < 2:
        raise InvalidArgument("mesh_gap needs at least two sites")
    d = np.diff(x)
    if np.any(d < 0):
        raise InvalidArgument("sites must be sorted")
    return float(d.max())


def nested_sites(m_list: Sequence[int], seed: int) -> list[np.ndarray]:
    """Random site sets for each m in ``m_list``, each containing the previous one.

    Interior sites are i.i.d. uniform draws; 0 and 1 are always included.
    The draws for a larger m extend the stream used for a smaller m.
    """
    m_list = [int(m) for m in m_list]
    if any(m < 2 for m in m_list):
        raise InvalidArgument("every m must be at least 2")
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise InvalidArgument("m_list must be strictly increasing")
    rng = np.random.default_rng(seed)
    interior = rng.random(max(m_list) - 2) if m_list else np.empty(0)
    return [np.sort(np.concatenate(([0.0], interior[: m - 2], [1.0]))) for m in m_list]
