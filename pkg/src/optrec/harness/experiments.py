"""Experiment drivers: convergence rate, regularization comparison, noise sweep,
planar Chebyshev demo, single recoveries and the two-constant counterexample."""
from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from .. import chebyshev
from ..errors import DegenerateCertificate, InvalidArgument, NumericalFailure
from ..losses import LossSpec
from ..measurements import DataSample, NoiseVector, add_noise, empirical_norm, mesh_gap, nested_sites
from ..modelclass import FiniteModelClass, SobolevBall, constant, two_constant_class
from ..optimize import (OptimizerConfig, RecoveryResult, minimize, near_optimality_certificate,
                        schedule_parameters, smoothness_exponent)
from ..splinespace import (FunctionOracle, PiecewiseLinear, SplineSpace, l2_distance, make_merged_space,
                           make_uniform_space, oracle_from_id, pl_sup_distance)
from .config import ExperimentConfig
from .reports import (ChebDemoReport, CompareReport, CounterexampleReport, NoisyReport, NoisyRow, RateReport,
                      RateRow, RecoverReport)

log = logging.getLogger("optrec.harness")

NOISE_LEVELS = 11
DEFAULT_GAMMA = 0.1
CHEB_W_HATS = (0.5, 1.1)
COUNTEREXAMPLE_KNOTS_PER_SITE = 100


def sample_for(cfg: ExperimentConfig, m: int, f: FunctionOracle, sites: Optional[np.ndarray] = None) -> DataSample:
    if sites is None:
        sites = nested_sites([m], cfg.seed)[0]
    return DataSample(sites, f(sites))


def schedule_for(cfg: ExperimentConfig, m: int) -> tuple[int, float]:
    if cfg.schedule == "explicit":
        n0, mu0 = (None, None)
        if cfg.n is None or cfg.mu is None:
            n0, mu0, _ = schedule_parameters(m, cfg.p, "practical")
        return int(cfg.n if cfg.n is not None else n0), float(cfg.mu if cfg.mu is not None else mu0)
    n, mu, _ = schedule_parameters(m, cfg.p, cfg.schedule)
    return n, mu


def space_for(cfg: ExperimentConfig, sites, n: int) -> SplineSpace:
    return make_uniform_space(n) if cfg.space == "uniform" else make_merged_space(sites, n)


def optimizer_for(cfg: ExperimentConfig, **kw) -> OptimizerConfig:
    return OptimizerConfig(max_iters=cfg.max_iters, **kw)


def _powered(cfg: ExperimentConfig, mu: float, tau: float = 1.0) -> LossSpec:
    return LossSpec.powered(mu, SobolevBall(cfg.p), alpha=cfg.alpha, beta=cfg.beta_eff, tau=tau)


def _recover(cfg, sample, space, spec, m) -> RecoveryResult:
    try:
        return minimize(sample, space, spec, optimizer_for(cfg))
    except NumericalFailure as exc:
        raise NumericalFailure(f"m={m}: {exc.detail}", iteration=exc.iteration) from exc


def run_rate_experiment(cfg: ExperimentConfig) -> RateReport:
    f = oracle_from_id(cfg.target)
    s = smoothness_exponent(cfg.p)
    report = RateReport(s)
    for m, sites in zip(cfg.ms, nested_sites(cfg.ms, cfg.seed)):
        sample = sample_for(cfg, m, f, sites)
        n, mu = schedule_for(cfg, m)
        space = space_for(cfg, sites, n)
        res = _recover(cfg, sample, space, _powered(cfg, mu), m)
        if not res.converged:
            log.warning("m=%d: descent stopped after %d iterations, grad norm %.3g", m, res.iterations,
                        res.grad_norm_final)
        h = mesh_gap(sites)
        err = l2_distance(res.spline, f)
        hs = h ** s
        report.rows.append(RateRow(m, h, n, mu, err, hs, err / hs))
        log.info("m=%d h=%.4g n=%d mu=%.4g error=%.4g", m, h, n, mu, err)
    return report


def run_regularization_comparison(cfg: ExperimentConfig) -> CompareReport:
    f = oracle_from_id(cfg.target)
    m = cfg.ms[-1]
    sample = sample_for(cfg, m, f)
    n, mu = schedule_for(cfg, m)
    space = space_for(cfg, sample.sites, n)
    reg = _recover(cfg, sample, space, _powered(cfg, mu), m)
    unreg = _recover(cfg, sample, space, _powered(cfg, 0.0), m)
    return CompareReport(m, n, mesh_gap(sample.sites), mu, l2_distance(reg.spline, f), l2_distance(unreg.spline, f),
                         reg.data_term, unreg.data_term, reg.iterations, unreg.iterations)


def noise_direction(seed: int, m: int) -> np.ndarray:
    """Fixed-seed noise direction with unit empirical norm."""
    u = np.random.default_rng(seed ^ m).standard_normal(m)
    return u / empirical_norm(u)


def scaled_noise(u: np.ndarray, gamma: float) -> NoiseVector:
    """``gamma * u`` trimmed so that its empirical norm does not exceed ``gamma``."""
    eta = gamma * u
    while empirical_norm(eta) > gamma:
        eta = eta * (1.0 - 2.0 ** -52)
    return NoiseVector(eta, gamma)


def run_noisy_experiment(cfg: ExperimentConfig) -> NoisyReport:
    gmax = DEFAULT_GAMMA if cfg.gamma is None else cfg.gamma
    f = oracle_from_id(cfg.target)
    m = cfg.ms[-1]
    clean = sample_for(cfg, m, f)
    n, mu = schedule_for(cfg, m)
    space = space_for(cfg, clean.sites, n)
    spec = _powered(cfg, mu, tau=cfg.tau)
    u = noise_direction(cfg.seed, m)
    report = NoisyReport(m, n, mu, cfg.tau)
    for gamma in np.linspace(0.0, gmax, NOISE_LEVELS).tolist():
        sample = add_noise(clean, scaled_noise(u, gamma))
        res = _recover(cfg, sample, space, spec, m)
        report.rows.append(NoisyRow(gamma, l2_distance(res.spline, f), res.data_term, res.penalty_term))
    bad = report.monotone_violations()
    if bad:
        log.warning("error decreases with noise beyond tolerance at gamma=%s", bad)
    return report


def run_cheb_demo(cfg: ExperimentConfig) -> ChebDemoReport:
    ws = [i / 1000 for i in range(-200, 2201)]
    eps_grid = [i / 1000 for i in range(0, 301)]
    slice_rows = chebyshev.slice_curve(ws, cfg.resolution)
    inflated = {w: chebyshev.inflated_radius_curve(w, eps_grid, cfg.resolution) for w in CHEB_W_HATS}
    return ChebDemoReport(slice_rows, inflated)


def _member(ref: str) -> PiecewiseLinear:
    if ref.startswith("constant:"):
        try:
            return constant(float(ref.split(":", 1)[1]))
        except ValueError:
            raise InvalidArgument(f"bad constant member {ref!r}") from None
    path = ref.split(":", 1)[1] if ref.startswith("spline:") else ref
    try:
        return PiecewiseLinear.load(path)
    except OSError as exc:
        raise InvalidArgument(f"cannot read member {ref!r}: {exc}") from None


def finite_class_from(model: dict, metric: str) -> FiniteModelClass:
    members = model.get("members")
    if not members:
        return two_constant_class(metric)
    return FiniteModelClass(tuple(_member(r) for r in members), metric)


def run_counterexample(cfg: ExperimentConfig) -> CounterexampleReport:
    """The two-constant class with all-ones data, under both metrics.

    The sup-metric loss is minimized globally (one convex solve per member,
    each started at the member). The L2-metric loss is minimized by descent
    from zero without gradient sampling, the way a practical optimizer would
    meet it; it settles on a spiky near-minimizer close to the zero member.
    """
    m = cfg.ms[-1]
    sites = nested_sites([m], cfg.seed)[0]
    sample = DataSample(sites, np.ones(m))
    n = cfg.n if cfg.n is not None else COUNTEREXAMPLE_KNOTS_PER_SITE * m
    space = make_merged_space(sites, n)
    one = oracle_from_id("constant:1")
    model = cfg.model or {}
    sup = minimize(sample, space, LossSpec.dist_to_class(finite_class_from(model, "sup")),
                   optimizer_for(cfg, init="member", strategy="per_member"))
    l2 = minimize(sample, space, LossSpec.dist_to_class(finite_class_from(model, "L2")),
                  optimizer_for(cfg, init="zero", strategy="descent", sampling=False))
    zero = constant(0.0)
    return CounterexampleReport(
        m=m, n=space.n,
        sup_member=sup.member, sup_l2_error=l2_distance(sup.spline, one), sup_loss=sup.loss,
        l2_member=l2.member, l2_l2_error=l2_distance(l2.spline, one), l2_loss=l2.loss,
        l2_sup_distance_to_zero=pl_sup_distance(l2.spline, zero),
        l2_penalty=l2.penalty_term,
    )


def run_single_recover(cfg: ExperimentConfig):
    """One minimization plus its certificate, or the counterexample for ``metric: both``."""
    model = cfg.model or {"kind": "sobolev", "p": cfg.p, "radius": 1.0}
    if model["kind"] == "finite" and model.get("metric", "sup") == "both":
        return run_counterexample(cfg)
    f = oracle_from_id(cfg.target)
    m = cfg.ms[-1]
    sample = sample_for(cfg, m, f)
    if model["kind"] == "finite":
        K = finite_class_from(model, model.get("metric", "sup"))
        n = cfg.n if cfg.n is not None else COUNTEREXAMPLE_KNOTS_PER_SITE * m
        space = make_merged_space(sample.sites, n)
        spec = LossSpec.dist_to_class(K) if cfg.tau == 1 else LossSpec.noisy_dist(K, cfg.tau)
        init = "member" if cfg.strategy == "per_member" else "zero"
        res = minimize(sample, space, spec, optimizer_for(cfg, init=init, strategy=cfg.strategy))
        return RecoverReport(res, l2_distance(res.spline, f), None, "finite model class")
    ball = SobolevBall(float(model.get("p", cfg.p)), float(model.get("radius", 1.0)))
    n, mu = schedule_for(cfg, m)
    space = space_for(cfg, sample.sites, n)
    spec = LossSpec.powered(mu, ball, alpha=cfg.alpha, beta=ball.p if cfg.beta is None else cfg.beta, tau=cfg.tau)
    res = _recover(cfg, sample, space, spec, m)
    cert, why = None, None
    try:
        cert = near_optimality_certificate(res, sample, spec).to_dict()
    except (DegenerateCertificate, InvalidArgument, ValueError) as exc:
        why = str(exc)
    return RecoverReport(res, l2_distance(res.spline, f), cert, why)


RUNNERS = {
    "rate": run_rate_experiment,
    "compare_reg": run_regularization_comparison,
    "noisy": run_noisy_experiment,
    "cheb_demo": run_cheb_demo,
    "recover": run_single_recover,
}


def run(cfg: ExperimentConfig):
    return RUNNERS[cfg.experiment](cfg)
