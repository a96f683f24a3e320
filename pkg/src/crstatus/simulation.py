"""Synthetic data generation and Monte Carlo coverage experiments.

Event times follow per-cause gamma laws selected by a cause-probability
vector; inspection times are drawn independently from a discrete grid, a
continuous uniform range, or a continuous range whose recordings are rounded
by a grouping scheme.  Coverage experiments rebuild the chosen estimators and
confidence intervals on each replication and compare against ground truth
computed from the gamma mixture directly.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Dataset, GroupingScheme, TallyTable
from .estimators import SolverSettings, fit_mle, naive_estimate_all
from .inference import (
    ModelSpec,
    bootstrap_deviations,
    ci_likelihood_ratio,
    ci_normal,
)
from .special import gamma_cdf, gamma_cdf_interval_mean

__all__ = [
    "GammaLaw",
    "ObservationModel",
    "SimulationConfig",
    "CoverageRow",
    "CoverageReport",
    "RateRow",
    "default_grid_suite",
    "generate_dataset",
    "true_cif",
    "true_grouped_mean",
    "coverage_experiment",
    "coverage_sweep",
    "lr_coverage_experiment",
    "rate_experiment",
]


@dataclass(frozen=True)
class GammaLaw:
    """Gamma event-time law in (shape, scale) form; scale 0 is a point mass at 0."""

    shape: float
    scale: float

    def __post_init__(self):
        if self.shape <= 0:
            raise ValueError("shape must be positive")
        if self.scale < 0:
            raise ValueError("scale must be nonnegative")


@dataclass(frozen=True)
class ObservationModel:
    """Inspection-time law: discrete grid, continuous range, or grouped range."""

    model: str
    grid: np.ndarray | None = None
    time_range: tuple[float, float] | None = None
    scheme: GroupingScheme | None = None
    label: str = ""

    def __post_init__(self):
        if self.model not in ("discrete", "smooth", "grouped"):
            raise ValueError("model must be discrete, smooth or grouped")
        if self.model == "discrete":
            if self.grid is None:
                raise ValueError("discrete model requires a grid")
            grid = np.asarray(self.grid, dtype=float)
            if grid.ndim != 1 or len(grid) == 0 or np.any(np.diff(grid) <= 0):
                raise ValueError("grid must be strictly increasing")
            object.__setattr__(self, "grid", grid)
        else:
            if self.time_range is None or self.time_range[0] >= self.time_range[1]:
                raise ValueError("continuous models require a valid time range")
            if self.model == "grouped" and self.scheme is None:
                raise ValueError("grouped model requires a grouping scheme")

    def spec(self) -> ModelSpec:
        return ModelSpec(self.model, self.scheme)


@dataclass(frozen=True)
class SimulationConfig:
    cause_probabilities: tuple[float, ...]
    event_time_laws: tuple[GammaLaw, ...]
    observation: ObservationModel
    n: int
    replications: int
    seed: int
    evaluation_points: tuple[float, ...] = ()

    def __post_init__(self):
        probs = tuple(float(p) for p in self.cause_probabilities)
        if len(probs) != len(self.event_time_laws) or not probs:
            raise ValueError("need one event-time law per cause probability")
        if min(probs) < 0 or sum(probs) > 1 + 1e-12:
            raise ValueError("cause probabilities must be nonnegative with sum <= 1")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.replications < 1:
            raise ValueError("replications must be positive")
        object.__setattr__(self, "cause_probabilities", probs)
        object.__setattr__(self, "event_time_laws", tuple(self.event_time_laws))
        object.__setattr__(self, "evaluation_points", tuple(float(t) for t in self.evaluation_points))

    @property
    def K(self) -> int:
        return len(self.cause_probabilities)


def default_grid_suite() -> dict[str, np.ndarray]:
    """The four benchmark inspection grids, labeled by their spacing."""
    return {
        "gap10": np.array([10.0, 20.0, 30.0]),
        "gap2": np.arange(6.0, 34.0 + 1e-9, 2.0),
        "gap0.5": np.arange(5.5, 35.0 + 1e-9, 0.5),
        "gap0.1": np.round(np.arange(5.1, 35.0 + 1e-9, 0.1), 10),
    }


def generate_dataset(config: SimulationConfig, replication_index: int) -> Dataset:
    """Draw one replication's observations, deterministic in (seed, index).

    Each subject draws a cause (or none) from the cause probabilities, an
    event time from that cause's gamma law, and an independent inspection
    time from the observation model; the recorded status indicates which
    cause, if any, had occurred by the inspection time.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(config.seed), int(replication_index)]))
    n, K = config.n, config.K
    probs = np.array(config.cause_probabilities + (1.0 - sum(config.cause_probabilities),))
    probs = np.maximum(probs, 0.0)
    probs /= probs.sum()
    causes = rng.choice(K + 1, size=n, p=probs)  # K encodes "no event ever"
    event_times = np.full(n, np.inf)
    for k, law in enumerate(config.event_time_laws):
        mask = causes == k
        if mask.any():
            event_times[mask] = rng.gamma(law.shape, law.scale, size=int(mask.sum())) if law.scale > 0 else 0.0
    obs = config.observation
    if obs.model == "discrete":
        inspections = rng.choice(obs.grid, size=n)
    else:
        lo, hi = obs.time_range
        inspections = rng.uniform(lo, hi, size=n)
    statuses = np.where(event_times <= inspections, causes + 1, 0)
    return Dataset(inspections, statuses)


def true_cif(config: SimulationConfig, t: float) -> np.ndarray:
    """True cumulative incidence vector at time t under the config's mixture."""
    return np.array(
        [p * gamma_cdf(t, law.shape, law.scale) for p, law in zip(config.cause_probabilities, config.event_time_laws)]
    )


def true_grouped_mean(config: SimulationConfig, representative: float) -> np.ndarray:
    """True estimand in the grouped model: per-cause average incidence over
    the representative's interval, weighted by the inspection law."""
    obs = config.observation
    if obs.model != "grouped":
        raise ValueError("grouped truth requires a grouped observation model")
    idx = int(np.searchsorted(obs.scheme.representatives, representative))
    reps = obs.scheme.representatives
    if idx == len(reps) or reps[idx] != representative:
        raise ValueError(f"{representative} is not a scheme representative")
    iv = obs.scheme.intervals[idx]
    lo, hi = obs.time_range
    lower, upper = max(iv.lower, lo), min(iv.upper, hi)
    return np.array(
        [
            p * gamma_cdf_interval_mean(lower, upper, law.shape, law.scale)
            for p, law in zip(config.cause_probabilities, config.event_time_laws)
        ]
    )


@dataclass(frozen=True)
class CoverageRow:
    grid_label: str
    grid_size: int
    t0: float
    cause: int
    method: str
    estimator: str
    level: float
    coverage: float
    avg_width: float
    mc_se: float
    effective_replications: int
    replications: int

    def as_dict(self) -> dict:
        return {
            "grid_label": self.grid_label,
            "grid_size": self.grid_size,
            "t0": self.t0,
            "cause": self.cause,
            "method": self.method,
            "estimator": self.estimator,
            "level": self.level,
            "coverage": self.coverage,
            "avg_width": self.avg_width,
            "mc_se": self.mc_se,
            "effective_replications": self.effective_replications,
            "replications": self.replications,
        }


@dataclass
class CoverageReport:
    rows: list[CoverageRow]
    meta: dict = field(default_factory=dict)

    CSV_COLUMNS = (
        "grid_label",
        "grid_size",
        "t0",
        "cause",
        "method",
        "estimator",
        "level",
        "coverage",
        "avg_width",
        "mc_se",
        "effective_replications",
        "replications",
    )

    def find(self, **criteria) -> list[CoverageRow]:
        out = self.rows
        for key, value in criteria.items():
            out = [r for r in out if getattr(r, key) == value]
        return out

    def write_csv(self, path, manifest: dict | None = None):
        with open(path, "w", newline="") as fh:
            if manifest is not None:
                fh.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
            writer = csv.writer(fh)
            writer.writerow(self.CSV_COLUMNS)
            for row in self.rows:
                d = row.as_dict()
                writer.writerow([_fmt(d[c]) for c in self.CSV_COLUMNS])

    def write_json(self, path, manifest: dict | None = None):
        payload = {"meta": self.meta, "rows": [r.as_dict() for r in self.rows]}
        if manifest is not None:
            payload["manifest"] = manifest
        with open(path, "w") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)
            fh.write("\n")


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".12g")
    return value


def _boot_seed(seed: int, rep: int, salt: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(salt), int(rep)]).generate_state(1)[0])


def _coverage_replication(config, methods, estimators, level, B, settings, rep):
    """One replication's covered/width/defined tables.

    Returns arrays of shape (P, K, n_methods, n_estimators).
    """
    points = np.asarray(config.evaluation_points)
    K = config.K
    shape = (len(points), K, len(methods), len(estimators))
    covered = np.zeros(shape, dtype=np.int64)
    width = np.zeros(shape)
    defined = np.zeros(shape, dtype=np.int64)

    data = generate_dataset(config, rep)
    spec = config.observation.spec()
    tally = spec.tally(data, K)
    truth = _truth_table(config)
    in_support = np.isin(points, tally.support)

    fits = {}
    for e_idx, est_kind in enumerate(estimators):
        fit = (
            fit_mle(tally, settings=settings, model=config.observation.model)
            if est_kind == "mle"
            else None
        )
        estimate = fit.estimate if fit is not None else naive_estimate_all(tally, model=config.observation.model)
        fits[est_kind] = estimate
        for m_idx, method in enumerate(methods):
            if method == "normal":
                for p_idx, t0 in enumerate(points):
                    if not in_support[p_idx]:
                        continue
                    for k in range(1, K + 1):
                        ci = ci_normal(tally, estimate, t0, k, level)
                        defined[p_idx, k - 1, m_idx, e_idx] = 1
                        covered[p_idx, k - 1, m_idx, e_idx] = int(ci.contains(truth[p_idx, k - 1]))
                        width[p_idx, k - 1, m_idx, e_idx] = ci.width
            elif method == "bootstrap":
                boot_seed = _boot_seed(config.seed, rep, 7919 + e_idx)
                theta_hat, devs = bootstrap_deviations(
                    data, spec, est_kind, K, points, list(range(1, K + 1)), B, boot_seed, settings
                )
                q_index = min(B, math.ceil(B * level)) - 1
                q = np.sort(np.abs(devs), axis=0)[q_index]
                for p_idx in range(len(points)):
                    if not in_support[p_idx]:
                        continue
                    for k in range(1, K + 1):
                        defined[p_idx, k - 1, m_idx, e_idx] = 1
                        dev_true = abs(theta_hat[p_idx, k - 1] - truth[p_idx, k - 1])
                        covered[p_idx, k - 1, m_idx, e_idx] = int(dev_true <= q[p_idx, k - 1])
                        width[p_idx, k - 1, m_idx, e_idx] = 2.0 * q[p_idx, k - 1]
            else:
                raise ValueError(f"unsupported method {method!r}")
    return covered, width, defined


def _truth_table(config: SimulationConfig) -> np.ndarray:
    points = config.evaluation_points
    if config.observation.model == "grouped":
        return np.vstack([true_grouped_mean(config, t0) for t0 in points])
    return np.vstack([true_cif(config, t0) for t0 in points])


def _validate_evaluation_points(config: SimulationConfig):
    obs = config.observation
    if not config.evaluation_points:
        raise ValueError("no evaluation points configured")
    if obs.model == "discrete":
        missing = [t for t in config.evaluation_points if t not in obs.grid]
    elif obs.model == "grouped":
        missing = [t for t in config.evaluation_points if t not in obs.scheme.representatives]
    else:
        raise ValueError("coverage_experiment requires a discrete or grouped observation model")
    if missing:
        raise ValueError(f"evaluation points not in the observation grid: {missing}")


def coverage_experiment(
    config: SimulationConfig,
    methods=("normal", "bootstrap"),
    estimators=("mle", "naive"),
    level: float = 0.95,
    B: int = 200,
    settings: SolverSettings | None = None,
    threads: int = 1,
) -> CoverageReport:
    """Monte Carlo coverage and width of pointwise confidence intervals.

    Per replication, each requested estimator is refit and each requested
    interval method evaluated at every evaluation point and cause; coverage
    is the fraction of replications whose interval contains the true estimand
    (cumulative incidence, or its within-cell average in the grouped model).
    Replications where an evaluation point received no observations are
    excluded from that point's tally and reported via the effective count.

    Replications use seeds derived from (config.seed, replication index), so
    single-threaded and multi-process runs produce identical reports.
    """
    methods = list(methods)
    estimators = list(estimators)
    for m in methods:
        if m not in ("normal", "bootstrap"):
            raise ValueError("methods must be a subset of {normal, bootstrap}")
    for e in estimators:
        if e not in ("mle", "naive"):
            raise ValueError("estimators must be a subset of {mle, naive}")
    _validate_evaluation_points(config)
    points = np.asarray(config.evaluation_points)
    K = config.K
    shape = (len(points), K, len(methods), len(estimators))
    covered = np.zeros(shape, dtype=np.int64)
    width = np.zeros(shape)
    defined = np.zeros(shape, dtype=np.int64)

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = pool.map(
                _coverage_replication_star,
                [(config, methods, estimators, level, B, settings, rep) for rep in range(config.replications)],
            )
            for cov_r, wid_r, def_r in results:
                covered += cov_r
                width += wid_r
                defined += def_r
    else:
        for rep in range(config.replications):
            cov_r, wid_r, def_r = _coverage_replication(config, methods, estimators, level, B, settings, rep)
            covered += cov_r
            width += wid_r
            defined += def_r

    label = config.observation.label or config.observation.model
    grid_size = len(config.observation.grid) if config.observation.model == "discrete" else len(config.observation.scheme)
    rows = []
    for p_idx, t0 in enumerate(points):
        for k in range(1, K + 1):
            for m_idx, method in enumerate(methods):
                for e_idx, est in enumerate(estimators):
                    eff = int(defined[p_idx, k - 1, m_idx, e_idx])
                    cov = covered[p_idx, k - 1, m_idx, e_idx] / eff if eff else float("nan")
                    mc_se = math.sqrt(cov * (1 - cov) / eff) if eff else float("nan")
                    rows.append(
                        CoverageRow(
                            grid_label=label,
                            grid_size=grid_size,
                            t0=float(t0),
                            cause=k,
                            method=method,
                            estimator=est,
                            level=level,
                            coverage=cov,
                            avg_width=float(width[p_idx, k - 1, m_idx, e_idx] / eff) if eff else float("nan"),
                            mc_se=mc_se,
                            effective_replications=eff,
                            replications=config.replications,
                        )
                    )
    meta = {
        "n": config.n,
        "replications": config.replications,
        "seed": config.seed,
        "model": config.observation.model,
        "bootstrap_resamples": B if "bootstrap" in methods else None,
        "level": level,
    }
    return CoverageReport(rows, meta)


def _coverage_replication_star(args):
    return _coverage_replication(*args)


def coverage_sweep(
    config: SimulationConfig,
    observations: list[ObservationModel],
    methods=("normal", "bootstrap"),
    estimators=("mle", "naive"),
    level: float = 0.95,
    B: int = 200,
    settings: SolverSettings | None = None,
    threads: int = 1,
) -> CoverageReport:
    """Run coverage_experiment over several observation models, one report."""
    rows: list[CoverageRow] = []
    meta: dict = {}
    for obs in observations:
        report = coverage_experiment(
            replace(config, observation=obs), methods, estimators, level, B, settings, threads
        )
        rows.extend(report.rows)
        meta[obs.label or obs.model] = report.meta
    return CoverageReport(rows, meta)


def lr_coverage_experiment(
    config: SimulationConfig,
    level: float = 0.95,
    critical_value: float | None = None,
    causes=None,
) -> CoverageReport:
    """Coverage of likelihood ratio intervals under a continuous inspection law.

    Evaluation points are mapped per replication to the largest observed
    support point below or at them (step-function semantics); the truth is
    evaluated at the mapped point.
    """
    if config.observation.model != "smooth":
        raise ValueError("likelihood ratio coverage uses the smooth observation model")
    causes = list(causes) if causes is not None else list(range(1, config.K + 1))
    points = np.asarray(config.evaluation_points)
    covered = np.zeros((len(points), len(causes)), dtype=np.int64)
    width = np.zeros((len(points), len(causes)))
    defined = np.zeros((len(points), len(causes)), dtype=np.int64)
    for rep in range(config.replications):
        data = generate_dataset(config, rep)
        tally = config.observation.spec().tally(data, config.K)
        for p_idx, t0 in enumerate(points):
            idx = int(np.searchsorted(tally.support, t0, side="right")) - 1
            if idx < 0:
                continue
            t_star = float(tally.support[idx])
            truth = true_cif(config, t_star)
            for c_idx, k in enumerate(causes):
                ci = ci_likelihood_ratio(tally, k, t_star, level, critical_value)
                defined[p_idx, c_idx] += 1
                covered[p_idx, c_idx] += int(ci.contains(truth[k - 1]))
                width[p_idx, c_idx] += ci.width
    rows = []
    for p_idx, t0 in enumerate(points):
        for c_idx, k in enumerate(causes):
            eff = int(defined[p_idx, c_idx])
            cov = covered[p_idx, c_idx] / eff if eff else float("nan")
            rows.append(
                CoverageRow(
                    grid_label=config.observation.label or "smooth",
                    grid_size=0,
                    t0=float(t0),
                    cause=k,
                    method="likelihood_ratio",
                    estimator="naive",
                    level=level,
                    coverage=cov,
                    avg_width=float(width[p_idx, c_idx] / eff) if eff else float("nan"),
                    mc_se=math.sqrt(cov * (1 - cov) / eff) if eff else float("nan"),
                    effective_replications=eff,
                    replications=config.replications,
                )
            )
    return CoverageReport(rows, {"n": config.n, "replications": config.replications, "seed": config.seed})


@dataclass(frozen=True)
class RateRow:
    n: int
    spacing: float
    t_n: float
    mean_deviation: float
    sd_deviation: float
    scaled_variance_sparse: float
    scaled_variance_cuberoot: float
    target_variance: float
    replications: int


def rate_experiment(
    gamma_exponent: float,
    n_values,
    t0: float,
    law: GammaLaw,
    cause_probability: float = 1.0,
    time_range: tuple[float, float] = (5.0, 35.0),
    replications: int = 500,
    seed: int = 0,
) -> list[RateRow]:
    """Sampling-rate exploration on grids whose spacing shrinks with n.

    For each n, inspections are uniform on an equidistant grid over [0, 1]
    (rescaled to ``time_range``) with spacing n**(-gamma_exponent); the
    univariate monotone MLE is evaluated at the largest grid point strictly
    below ``t0`` and the deviation from the truth is recorded.  The returned
    rows carry the empirical variance under the two candidate scalings
    n**(1-gamma) and n**(2/3), with the sparse-regime target
    F0(t0) * (1 - F0(t0)) for comparison.
    """
    if not 0 < gamma_exponent < 1:
        raise ValueError("gamma_exponent must lie in (0, 1)")
    if not 0 < t0 < 1:
        raise ValueError("t0 must lie in (0, 1) on the rescaled axis")
    lo, hi = time_range
    span = hi - lo
    rows = []
    for n in n_values:
        n = int(n)
        spacing = n ** (-gamma_exponent)
        npts = int(math.floor(1.0 / spacing + 1e-9))
        if npts < 1:
            raise ValueError(f"grid for n={n} has no points")
        grid01 = spacing * np.arange(1, npts + 1)
        below = grid01[grid01 < t0]
        if len(below) == 0:
            raise ValueError(f"no grid point below t0={t0} for n={n}")
        t_n = float(below[-1])
        grid_times = lo + span * grid01
        t_n_time = lo + span * t_n
        config = SimulationConfig(
            cause_probabilities=(cause_probability,),
            event_time_laws=(law,),
            observation=ObservationModel("discrete", grid=grid_times, label=f"rate-n{n}"),
            n=n,
            replications=replications,
            seed=seed + n,
        )
        truth_tn = cause_probability * gamma_cdf(t_n_time, law.shape, law.scale)
        deviations = np.empty(replications)
        for rep in range(replications):
            data = generate_dataset(config, rep)
            tally = config.observation.spec().tally(data, 1)
            estimate = fit_mle(tally).estimate
            deviations[rep] = estimate.value_at(t_n_time, 1) - truth_tn
        var = float(np.var(deviations, ddof=1))
        t0_time = lo + span * t0
        f0 = cause_probability * gamma_cdf(t0_time, law.shape, law.scale)
        rows.append(
            RateRow(
                n=n,
                spacing=spacing,
                t_n=t_n,
                mean_deviation=float(deviations.mean()),
                sd_deviation=math.sqrt(var),
                scaled_variance_sparse=var * n ** (1.0 - gamma_exponent),
                scaled_variance_cuberoot=var * n ** (2.0 / 3.0),
                target_variance=f0 * (1.0 - f0),
                replications=replications,
            )
        )
    return rows
