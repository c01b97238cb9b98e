"""Report types emitted by the experiment drivers, with CSV/JSON round-trips."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from ..errors import InvalidArgument


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else f"{v:.17g}"


def _emit_csv(header: tuple[str, ...], rows) -> str:
    lines = [",".join(header)] + [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _parse_csv(text: str, header: tuple[str, ...]) -> list[dict[str, str]]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != header:
        raise InvalidArgument(f"expected CSV header {','.join(header)}")
    return list(reader)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


@dataclass(frozen=True)
class RateRow:
    m: int
    h: float
    n: int
    mu: float
    l2_error: float
    h_pow_s: float
    ratio: float


@dataclass
class RateReport:
    s: float
    rows: list[RateRow] = field(default_factory=list)

    HEADER = ("m", "h", "n", "mu", "l2_error", "h_pow_s", "ratio")

    def slope(self) -> float:
        return loglog_slope([r.h for r in self.rows], [r.l2_error for r in self.rows])

    def to_csv(self) -> str:
        return _emit_csv(self.HEADER, [tuple(asdict(r).values()) for r in self.rows])

    @classmethod
    def from_csv(cls, text: str, s: float) -> "RateReport":
        rows = [RateRow(int(d["m"]), float(d["h"]), int(d["n"]), float(d["mu"]), float(d["l2_error"]),
                        float(d["h_pow_s"]), float(d["ratio"])) for d in _parse_csv(text, cls.HEADER)]
        return cls(s, rows)

    def to_json(self) -> str:
        return json.dumps({"s": self.s, "slope": self.slope() if len(self.rows) > 1 else None,
                           "rows": [asdict(r) for r in self.rows]}, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "RateReport":
        d = json.loads(text)
        return cls(d["s"], [RateRow(**r) for r in d["rows"]])


@dataclass
class CompareReport:
    m: int
    n: int
    h: float
    mu: float
    error_regularized: float
    error_unregularized: float
    data_term_regularized: float
    data_term_unregularized: float
    iterations_regularized: int
    iterations_unregularized: int

    HEADER = ("m", "n", "h", "mu", "error_regularized", "error_unregularized", "ratio",
              "data_term_regularized", "data_term_unregularized")

    @property
    def ratio(self) -> float:
        return self.error_unregularized / self.error_regularized

    def to_csv(self) -> str:
        return _emit_csv(self.HEADER, [(self.m, self.n, self.h, self.mu, self.error_regularized,
                                        self.error_unregularized, self.ratio, self.data_term_regularized,
                                        self.data_term_unregularized)])

    def to_json(self) -> str:
        d = asdict(self)
        d["ratio"] = self.ratio
        return json.dumps(d, indent=2)


@dataclass(frozen=True)
class NoisyRow:
    gamma: float
    l2_error: float
    data_term: float
    penalty_term: float


@dataclass
class NoisyReport:
    m: int
    n: int
    mu: float
    tau: float
    rows: list[NoisyRow] = field(default_factory=list)

    HEADER = ("gamma", "l2_error", "data_term", "penalty_term")

    def affine_fit(self) -> tuple[float, float]:
        """(intercept a, slope b) of the least-squares line error = a + b*gamma."""
        g = [r.gamma for r in self.rows]
        e = [r.l2_error for r in self.rows]
        b, a = np.polyfit(g, e, 1)
        return float(a), float(b)

    def monotone_violations(self, rel_tol: float = 0.2) -> list[float]:
        """Noise levels whose error drops below the running max by more than ``rel_tol * error(0)``."""
        slack = rel_tol * self.rows[0].l2_error
        top = -math.inf
        out = []
        for r in self.rows:
            if r.l2_error < top - slack:
                out.append(r.gamma)
            top = max(top, r.l2_error)
        return out

    def to_csv(self) -> str:
        return _emit_csv(self.HEADER, [tuple(asdict(r).values()) for r in self.rows])

    def to_json(self) -> str:
        a, b = self.affine_fit()
        d = asdict(self)
        d.update(fit_intercept=a, fit_slope=b)
        return json.dumps(d, indent=2)


@dataclass
class ChebDemoReport:
    slice_rows: list[tuple[float, float]]
    inflated: dict[float, list[tuple[float, float, int]]]

    def to_json(self) -> str:
        def enc(v):
            return None if isinstance(v, float) and math.isnan(v) else v

        return json.dumps({
            "slice": [[w, enc(r)] for w, r in self.slice_rows],
            "inflated": {repr(k): [[e, enc(r), j] for e, r, j in rows] for k, rows in self.inflated.items()},
        })


@dataclass
class CounterexampleReport:
    m: int
    n: int
    sup_member: int
    sup_l2_error: float
    sup_loss: float
    l2_member: int
    l2_l2_error: float
    l2_loss: float
    l2_sup_distance_to_zero: float
    l2_penalty: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def to_csv(self) -> str:
        header = ("metric", "member", "l2_error", "loss")
        return _emit_csv(header, [("sup", self.sup_member, self.sup_l2_error, self.sup_loss),
                                  ("L2", self.l2_member, self.l2_l2_error, self.l2_loss)])


@dataclass
class RecoverReport:
    result: "object"
    l2_error: float
    certificate: Optional[dict]
    certificate_error: Optional[str] = None

    def to_json(self) -> str:
        return json.dumps({"result": self.result.to_dict(), "l2_error": self.l2_error,
                           "certificate": self.certificate, "certificate_error": self.certificate_error},
                          indent=2)

    def to_csv(self) -> str:
        return self.result.spline.to_csv()
