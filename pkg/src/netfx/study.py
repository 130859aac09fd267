"""Replication studies: graph -> data -> estimator loops and their metrics."""
from __future__ import annotations

import json
import platform
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import stats
from threadpoolctl import threadpool_limits

from .errors import ConfigError, SingularDesignError
from .estimator import VARIANTS, RegressorSpec, fit_estimate, network_weights
from .interference import FeatureSpec, dependency_graph, loglog_slope, max_degree
from .sem import SemConfig, mc_tau_oracle, parse_generator, simulate, preset_sem, true_tau

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


@dataclass(frozen=True)
class StudyConfig:
    generator: str = "er:10/N"
    sizes: tuple = (300, 600, 1200, 2400, 4800)
    nrep_graph: int = 50
    nrep_data: int = 100
    sem: SemConfig = field(default_factory=SemConfig)
    features: str = "frac-parents"
    pi: float = 0.7
    eta: float = 0.2
    variants: tuple = VARIANTS
    adjustment: tuple = ("C2",)
    seed: int = 0
    output: str | None = None
    n_jobs: int = 1
    level: float = 0.95
    track_dmax: bool = False
    oracle_checks: int = 5
    oracle_reps: int = 200
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "variants", tuple(self.variants))
        object.__setattr__(self, "adjustment", tuple(self.adjustment))
        if not self.sizes:
            raise ConfigError("sizes must be nonempty")
        if self.nrep_graph < 1 or self.nrep_data < 1:
            raise ConfigError("nrep_graph and nrep_data must be >= 1")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}; choose from {VARIANTS}")
        for name in ("pi", "eta"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if not 0.0 < self.level < 1.0:
            raise ConfigError("level must lie in (0, 1)")
        try:
            parse_generator(self.generator)
            spec = FeatureSpec.parse(self.features)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if spec.n_features != self.sem.n_features:
            raise ConfigError(f"{spec.n_features} features but the SEM has {self.sem.n_features} feature coefficients")
        missing = [z for z in self.adjustment if z not in self.sem.covariate_names]
        if missing:
            raise ConfigError(f"adjustment columns {missing} are not SEM covariates")

    @property
    def feature_spec(self) -> FeatureSpec:
        return FeatureSpec.parse(self.features)

    def network_generator(self):
        return parse_generator(self.generator)

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "sem"}
        out["sizes"] = list(self.sizes)
        out["variants"] = list(self.variants)
        out["adjustment"] = list(self.adjustment)
        out["sem"] = self.sem.to_dict()
        return out


# generator, features, sizes, target and SEM preset for each simulation setting
PRESETS = {
    "er-10/N": ("er:10/N", "frac-parents", (300, 600, 1200, 2400, 4800), (0.7, 0.2), "erdos-renyi"),
    "er-0.2": ("er:0.2", "frac-parents", (300, 600, 1200, 2400, 4800), (0.7, 0.2), "erdos-renyi"),
    "er-N^-2/3": ("er:N^-2/3", "frac-parents", (300, 600, 1200, 2400, 4800), (0.7, 0.2), "erdos-renyi"),
    "family": ("family", "frac-parents", (300, 600, 1200, 2400, 4800), (1.0, 0.0), "family"),
    "lattice": ("lattice", "frac-parents,frac-parents-of-parents", (289, 576, 1225, 2401, 4761),
                (0.5, 0.1), "lattice"),
}


def preset(name: str, **overrides) -> StudyConfig:
    """Study configuration for one of the built-in simulation settings."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    gen, feats, sizes, (pi, eta), sem = PRESETS[name]
    cfg = StudyConfig(generator=gen, features=feats, sizes=sizes, pi=pi, eta=eta,
                      sem=preset_sem(sem), label=name)
    return replace(cfg, **overrides) if overrides else cfg


_TOP_KEYS = {"preset", "seed", "sizes", "nrep_graph", "nrep_data", "pi", "eta", "variants",
             "adjustment", "output", "n_jobs", "level", "track_dmax", "oracle_checks",
             "oracle_reps", "label", "network", "sem"}
_NETWORK_KEYS = {"generator", "features"}


def study_config_from_dict(data: dict) -> StudyConfig:
    """Validate a parsed config mapping (see the README for the schema)."""
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    network = dict(data.get("network", {}))
    if set(network) - _NETWORK_KEYS:
        raise ConfigError(f"unknown [network] keys: {sorted(set(network) - _NETWORK_KEYS)}")
    sem_in = dict(data.get("sem", {}))
    base = preset(data["preset"]) if "preset" in data else StudyConfig()
    sem_preset = sem_in.pop("preset", None)
    sem = preset_sem(sem_preset) if sem_preset else base.sem
    if sem_in:
        unknown_sem = set(sem_in) - set(SemConfig.__dataclass_fields__)
        if unknown_sem:
            raise ConfigError(f"unknown [sem] keys: {sorted(unknown_sem)}")
        try:
            sem = replace(sem, **sem_in)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid [sem] section: {exc}") from None
    fields = {k: v for k, v in data.items() if k not in ("preset", "network", "sem")}
    if "generator" in network:
        fields["generator"] = network["generator"]
    if "features" in network:
        feats = network["features"]
        fields["features"] = ",".join(feats) if isinstance(feats, list) else str(feats)
    try:
        return replace(base, sem=sem, **fields)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def load_study_config(path) -> StudyConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return study_config_from_dict(data)


# --- running -------------------------------------------------------------


def _graph_cell(args):
    cfg, size_idx, g = args
    with threadpool_limits(1):
        return size_idx, g, _run_graph(cfg, cfg.sizes[size_idx], g)


def _run_graph(cfg: StudyConfig, n: int, g: int) -> dict:
    spec = cfg.feature_spec
    net = cfg.network_generator()(n, np.random.default_rng([cfg.seed, n, g, 0]))
    weights = network_weights(net, spec, cfg.pi, cfg.eta, seed=cfg.seed)
    tau = true_tau(cfg.sem, weights)
    nv = len(cfg.variants)
    tau_hat = np.full((cfg.nrep_data, nv), np.nan)
    sigma2 = np.full((cfg.nrep_data, nv), np.nan)
    specs = [RegressorSpec(v, cfg.adjustment if v in ("confounding", "full") else ()) for v in cfg.variants]
    for r in range(cfg.nrep_data):
        ds = simulate(cfg.sem, net, spec, np.random.default_rng([cfg.seed, n, g, 1, r]))
        for j, rs in enumerate(specs):
            try:
                rep = fit_estimate(ds, rs, weights, cfg.pi, cfg.eta, cfg.level)
            except SingularDesignError:
                continue
            tau_hat[r, j] = rep.tau_hat
            sigma2[r, j] = rep.sigma2_hat
    dmax = max_degree(dependency_graph(net, spec)) if cfg.track_dmax else -1
    return {"tau": tau, "tau_hat": tau_hat, "sigma2": sigma2, "dmax": dmax}


def run_study(cfg: StudyConfig, progress=None) -> "MetricsTable":
    """Run every (size, graph, data replication, variant) cell.

    Each graph draws from a stream seeded by ``(seed, N, graph)`` and each
    data replication from ``(seed, N, graph, 1, rep)``, so results do not
    depend on ``n_jobs`` or the order in which cells finish.
    """
    start = time.time()
    ns, ng, nr, nv = len(cfg.sizes), cfg.nrep_graph, cfg.nrep_data, len(cfg.variants)
    tau_hat = np.full((ns, ng, nr, nv), np.nan)
    sigma2 = np.full((ns, ng, nr, nv), np.nan)
    tau = np.full((ns, ng), np.nan)
    dmax = np.full((ns, ng), -1, dtype=int)
    cells = [(cfg, i, g) for i in range(ns) for g in range(ng)]
    if cfg.n_jobs == 1:
        results = map(_graph_cell, cells)
    else:
        pool = ProcessPoolExecutor(cfg.n_jobs)
        results = pool.map(_graph_cell, cells)
    try:
        for done, (i, g, res) in enumerate(results, 1):
            tau[i, g] = res["tau"]
            tau_hat[i, g] = res["tau_hat"]
            sigma2[i, g] = res["sigma2"]
            dmax[i, g] = res["dmax"]
            if progress:
                progress(done, len(cells))
    finally:
        if cfg.n_jobs != 1:
            pool.shutdown()
    table = MetricsTable(cfg, tau_hat, sigma2, tau, dmax)
    table.manifest["runtime_seconds"] = time.time() - start
    if cfg.oracle_checks:
        table.manifest["oracle_checks"] = oracle_spot_checks(cfg, tau, cfg.oracle_checks, cfg.oracle_reps)
    return table


def oracle_spot_checks(cfg: StudyConfig, tau: np.ndarray, count: int, reps: int) -> list[dict]:
    """Compare the closed-form true effect with the brute-force simulation oracle."""
    rng = np.random.default_rng([cfg.seed, 7919])
    ns, ng = tau.shape
    picks = rng.choice(ns * ng, size=min(count, ns * ng), replace=False)
    out = []
    spec = cfg.feature_spec
    for flat in sorted(int(p) for p in picks):
        i, g = divmod(flat, ng)
        n = cfg.sizes[i]
        net = cfg.network_generator()(n, np.random.default_rng([cfg.seed, n, g, 0]))
        est, se = mc_tau_oracle(cfg.sem, net, spec, cfg.pi, cfg.eta, reps,
                                np.random.default_rng([cfg.seed, n, g, 2]), return_se=True)
        out.append({"n": n, "graph": g, "true_tau": float(tau[i, g]), "oracle": est, "se": se,
                    "within_3se": bool(abs(est - tau[i, g]) <= 3 * se)})
    return out


# --- metrics -------------------------------------------------------------


class MetricsTable:
    """Raw replication results plus per-graph and averaged metrics.

    Arrays are indexed ``[size, graph, data_rep, variant]``. Per-graph
    statistics use the population variance (``ddof=0``), so
    ``rmse**2 == bias**2 + variance`` holds cell by cell; averages are then
    taken over graphs.
    """

    def __init__(self, cfg: StudyConfig, tau_hat, sigma2, tau, dmax):
        self.cfg = cfg
        self.sizes = np.asarray(cfg.sizes)
        self.variants = list(cfg.variants)
        self.tau_hat = tau_hat
        self.sigma2 = sigma2
        self.tau = tau
        self.dmax = dmax
        err = tau_hat - tau[:, :, None, None]
        with warnings.catch_warnings():
            # graphs whose replications were all singular yield empty slices
            warnings.simplefilter("ignore", RuntimeWarning)
            self.graph_bias = np.nanmean(err, axis=2)
            self.graph_variance = np.nanvar(tau_hat, axis=2)
            self.graph_rmse = np.sqrt(np.nanmean(err ** 2, axis=2))
            self.bias = np.nanmean(self.graph_bias, axis=1)
            self.variance = np.nanmean(self.graph_variance, axis=1)
            self.rmse = np.nanmean(self.graph_rmse, axis=1)
            self.log_variance = np.nanmean(np.log(self.graph_variance), axis=1)
        self.singular = np.isnan(tau_hat).sum(axis=(1, 2))
        self.manifest = {"config": cfg.to_dict(), "singular_fits": self._singular_dict(),
                         "outcome_noise": _noise_note(cfg.sem), "environment": _environment()}

    def _singular_dict(self):
        return {v: {int(n): int(self.singular[i, j]) for i, n in enumerate(self.sizes)}
                for j, v in enumerate(self.variants)}

    def _vidx(self, variant: str) -> int:
        if variant not in self.variants:
            raise KeyError(f"variant {variant!r} was not run")
        return self.variants.index(variant)

    def metric(self, name: str) -> np.ndarray:
        """``rmse``, ``bias``, ``variance`` or ``log_variance``; shape (sizes, variants)."""
        return getattr(self, name)

    def variance_slope(self, variant: str) -> float:
        return variance_slope(self, variant)

    def coverage(self, variant: str, level: float | None = None) -> float:
        """Share of replications whose normal interval covers the graph's true effect."""
        level = self.cfg.level if level is None else level
        j = self._vidx(variant)
        z = stats.norm.ppf(1 - (1 - level) / 2)
        n = self.sizes[:, None, None]
        half = z * np.sqrt(self.sigma2[..., j] / n)
        err = np.abs(self.tau_hat[..., j] - self.tau[:, :, None])
        ok = ~np.isnan(err)
        return float(np.mean(err[ok] <= half[ok]))

    def coverage_by_size(self, variant: str, level: float | None = None) -> np.ndarray:
        level = self.cfg.level if level is None else level
        j = self._vidx(variant)
        z = stats.norm.ppf(1 - (1 - level) / 2)
        out = []
        for i, n in enumerate(self.sizes):
            err = np.abs(self.tau_hat[i, :, :, j] - self.tau[i, :, None])
            half = z * np.sqrt(self.sigma2[i, :, :, j] / n)
            ok = ~np.isnan(err)
            out.append(np.mean(err[ok] <= half[ok]))
        return np.asarray(out)

    def variance_estimator_check(self, variant: str = "full") -> np.ndarray:
        return variance_estimator_check(self, variant)

    def normality(self, variant: str = "full", size_index: int = -1, **kw) -> "NormalityResult":
        j = self._vidx(variant)
        n = self.sizes[size_index]
        z = np.sqrt(n) * (self.tau_hat[size_index, :, :, j] - self.tau[size_index, :, None])
        return normality_diagnostic(z, **kw)

    def write(self, outdir, plots: bool = True) -> Path:
        """One CSV per metric, a JSON manifest and optional SVG plots."""
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        header = "N," + ",".join(self.variants)
        for name in ("rmse", "bias", "variance", "log_variance"):
            np.savetxt(out / f"{name}.csv", np.column_stack([self.sizes, self.metric(name)]),
                       delimiter=",", header=header, comments="", fmt="%.10g")
        cov = np.column_stack([self.coverage_by_size(v) for v in self.variants])
        np.savetxt(out / "coverage.csv", np.column_stack([self.sizes, cov]), delimiter=",",
                   header=header, comments="", fmt="%.10g")
        if "full" in self.variants:
            vc = self.variance_estimator_check("full")
            np.savetxt(out / "variance_estimator_rmse.csv", np.column_stack([self.sizes, vc]),
                       delimiter=",", header="N,scaled_rmse", comments="", fmt="%.10g")
        np.savez_compressed(out / "raw.npz", tau_hat=self.tau_hat, sigma2=self.sigma2,
                            true_tau=self.tau, dmax=self.dmax, sizes=self.sizes)
        manifest = dict(self.manifest)
        if len(self.sizes) >= 2:
            manifest["variance_slopes"] = {v: variance_slope(self, v) for v in self.variants}
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=_plain))
        if plots:
            x = np.log(self.sizes)
            for name, ylabel in (("rmse", "RMSE"), ("bias", "bias"), ("log_variance", "log variance")):
                series = {v: self.metric(name)[:, j] for j, v in enumerate(self.variants)}
                (out / f"{name}.svg").write_text(svg_line_plot(x, series, f"{ylabel} vs log N", "log N", ylabel))
        return out


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def _noise_note(sem: SemConfig) -> str:
    if sem.outcome_noise == "uniform":
        half = float(np.sqrt(3 * sem.outcome_noise_var))
        return f"outcome noise Uniform(-{half:.6g}, {half:.6g}), variance {sem.outcome_noise_var}"
    return f"outcome noise Normal(0, {sem.outcome_noise_var})"


def _environment() -> dict:
    import scipy
    return {"python": sys.version.split()[0], "numpy": np.__version__, "scipy": scipy.__version__,
            "platform": platform.platform()}


def variance_slope(m: MetricsTable, variant: str) -> float:
    """Least-squares slope of the average log empirical variance against log N."""
    j = m._vidx(variant)
    if np.unique(m.sizes).size < 2:
        raise ValueError("need at least two sizes to fit a slope")
    slope, _ = np.polyfit(np.log(m.sizes), m.log_variance[:, j], 1)
    return float(slope)


def variance_estimator_check(m: MetricsTable, variant: str = "full") -> np.ndarray:
    """Size-scaled RMSE of ``sigma2_hat / N`` around the empirical variance of ``tau_hat``.

    The empirical variance is the pooled within-graph variance over all
    replications at that size; the result is ``N * RMSE`` per size.
    """
    j = m._vidx(variant)
    out = []
    for i, n in enumerate(m.sizes):
        th = m.tau_hat[i, :, :, j]
        s2 = m.sigma2[i, :, :, j]
        emp = np.nanmean(np.nanvar(th, axis=1, ddof=1))
        out.append(n * np.sqrt(np.nanmean((s2 / n - emp) ** 2)))
    return np.asarray(out)


# --- normality -----------------------------------------------------------


def lilliefors_statistic(x: np.ndarray) -> np.ndarray:
    """KS distance to a normal with the sample's own mean and sd, row by row."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    n = x.shape[1]
    z = (x - x.mean(axis=1, keepdims=True)) / x.std(axis=1, ddof=1, keepdims=True)
    f = stats.norm.cdf(np.sort(z, axis=1))
    i = np.arange(1, n + 1)
    return np.maximum((i / n - f).max(axis=1), (f - (i - 1) / n).max(axis=1))


@lru_cache(maxsize=32)
def _lilliefors_null(n: int, draws: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng([seed, n, draws])
    return np.sort(lilliefors_statistic(rng.standard_normal((draws, n))))


def lilliefors_pvalues(samples, draws: int = 2000, seed: int = 20240) -> np.ndarray:
    """Monte Carlo p-values for normality, one per row of ``samples``."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n = samples.shape[1]
    if n < 4:
        raise ValueError("need at least 4 observations per sample")
    null = _lilliefors_null(n, draws, seed)
    d = lilliefors_statistic(samples)
    exceed = draws - np.searchsorted(null, d, side="left")
    return (1 + exceed) / (draws + 1)


def normality_pvalues(samples, method: str = "lilliefors", draws: int = 2000) -> np.ndarray:
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    samples = samples[:, ~np.isnan(samples).any(axis=0)] if samples.size else samples
    if method == "lilliefors":
        return lilliefors_pvalues(samples, draws)
    if method == "shapiro":
        return np.array([stats.shapiro(row).pvalue for row in samples])
    raise ValueError(f"unknown normality test {method!r}")


def ks_to_uniform(p: np.ndarray) -> float:
    return float(stats.kstest(np.asarray(p), "uniform").statistic)


@dataclass
class NormalityResult:
    pvalues: np.ndarray
    ks_distance: float
    reference_ks: np.ndarray
    grid: np.ndarray
    ecdf: np.ndarray
    band_lo: np.ndarray
    band_hi: np.ndarray

    @property
    def within_band(self) -> bool:
        """True if the p-value ecdf is no farther from uniform than the worst reference draw."""
        return bool(self.ks_distance <= self.reference_ks.max())

    @property
    def fraction_inside_envelope(self) -> float:
        return float(np.mean((self.ecdf >= self.band_lo) & (self.ecdf <= self.band_hi)))

    def table(self) -> np.ndarray:
        """Columns: grid, ecdf, envelope low, envelope high."""
        return np.column_stack([self.grid, self.ecdf, self.band_lo, self.band_hi])


def normality_diagnostic(samples, method: str = "lilliefors", reference_draws: int = 100,
                         seed: int = 0, grid_points: int = 101, draws: int = 2000) -> NormalityResult:
    """Per-row normality p-values and their ecdf against uniform reference draws.

    ``samples`` has one row per network graph and one column per data
    replication. The reference consists of ``reference_draws`` samples of as
    many Uniform(0, 1) values as there are rows.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[1] < 20:
        raise ValueError("normality checks need at least 20 replications per graph")
    p = normality_pvalues(samples, method, draws)
    grid = np.linspace(0, 1, grid_points)
    ecdf = np.searchsorted(np.sort(p), grid, side="right") / len(p)
    rng = np.random.default_rng([seed, len(p), reference_draws])
    ref = rng.random((reference_draws, len(p)))
    ref_ecdf = np.array([np.searchsorted(np.sort(r), grid, side="right") / len(p) for r in ref])
    ref_ks = np.array([ks_to_uniform(r) for r in ref])
    return NormalityResult(p, ks_to_uniform(p), ref_ks, grid, ecdf, ref_ecdf.min(axis=0), ref_ecdf.max(axis=0))


# --- plots ---------------------------------------------------------------

_COLOURS = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02")


def svg_line_plot(x, series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
                  width: int = 480, height: int = 320) -> str:
    """Small standalone SVG line chart, one polyline per series."""
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    finite = np.concatenate([v[np.isfinite(v)] for v in ys.values()] or [np.zeros(1)])
    if finite.size == 0:
        finite = np.zeros(1)
    y0, y1 = float(finite.min()), float(finite.max())
    if y1 == y0:
        y0, y1 = y0 - 1, y1 + 1
    x0, x1 = float(x.min()), float(x.max())
    if x1 == x0:
        x0, x1 = x0 - 1, x1 + 1
    left, right, top, bottom = 60, 110, 30, 45
    pw, ph = width - left - right, height - top - bottom

    def sx(v):
        return left + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return top + (1 - (v - y0) / (y1 - y0)) * ph

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
             f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
             f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{_esc(title)}</text>',
             f'<text x="{left + pw / 2}" y="{height - 8}" text-anchor="middle">{_esc(xlabel)}</text>',
             f'<text x="14" y="{top + ph / 2}" text-anchor="middle" transform="rotate(-90 14 {top + ph / 2})">{_esc(ylabel)}</text>']
    for t in np.linspace(x0, x1, 5):
        parts.append(f'<text x="{sx(t):.1f}" y="{top + ph + 14}" text-anchor="middle">{t:.3g}</text>')
    for t in np.linspace(y0, y1, 5):
        parts.append(f'<text x="{left - 4}" y="{sy(t) + 4:.1f}" text-anchor="end">{t:.3g}</text>')
    for k, (name, y) in enumerate(ys.items()):
        colour = _COLOURS[k % len(_COLOURS)]
        pts = " ".join(f"{sx(a):.1f},{sy(b):.1f}" for a, b in zip(x, y) if np.isfinite(b))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{colour}" stroke-width="2"/>')
        ly = top + 12 + 16 * k
        parts.append(f'<line x1="{left + pw + 8}" y1="{ly}" x2="{left + pw + 24}" y2="{ly}" stroke="{colour}" stroke-width="2"/>')
        parts.append(f'<text x="{left + pw + 28}" y="{ly + 4}">{_esc(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts)


def _esc(text: str) -> str:
    return str(text).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


__all__ = [
    "StudyConfig", "PRESETS", "preset", "load_study_config", "study_config_from_dict", "run_study",
    "MetricsTable", "variance_slope", "variance_estimator_check", "lilliefors_statistic",
    "lilliefors_pvalues", "normality_pvalues", "normality_diagnostic", "NormalityResult",
    "ks_to_uniform", "svg_line_plot", "oracle_spot_checks", "loglog_slope",
]
