"""Weights, OLS fitting, plug-in global effects and sandwich variances.

Design matrices always use the global column order::

    (1, X1..XP, W, O1..OP, Z...)

Variants drop blocks but never reorder them, so the contrast vector used by
the sandwich variance is unambiguous. Coefficients of dropped blocks are
treated as zero when forming the plug-in estimate.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import linalg, stats

from .errors import ConfigError, IdentifiabilityError, NoClosedFormError, SingularDesignError
from .graph import Dag, enumerate_valid_adjustment_sets, exposure_nodes, is_valid_adjustment
from .interference import FeatureSpec, InteractionNetwork, compute_features, dependency_graph, max_degree

COND_THRESHOLD = 1e10
VARIANTS = ("naive", "confounding", "interference", "full")


# --- weights -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Weights:
    """Weight vectors turning ``(alpha0, alpha1)`` into the global effect.

    ``omega0`` multiplies ``alpha0``; ``omega1`` multiplies ``alpha0 + alpha1``.
    Monte Carlo weights also carry componentwise standard errors.
    """

    omega0: np.ndarray
    omega1: np.ndarray
    provenance: dict = field(default_factory=lambda: {"method": "closed-form"})
    omega0_se: np.ndarray | None = None
    omega1_se: np.ndarray | None = None

    def __post_init__(self):
        o0 = np.asarray(self.omega0, dtype=float)
        o1 = np.asarray(self.omega1, dtype=float)
        if o0.shape != o1.shape or o0.ndim != 1:
            raise ValueError("omega0 and omega1 must be vectors of equal length")
        if not (np.isfinite(o0).all() and np.isfinite(o1).all()):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "omega0", o0)
        object.__setattr__(self, "omega1", o1)

    @property
    def length(self) -> int:
        return len(self.omega0)

    def to_dict(self) -> dict:
        out = {"omega0": self.omega0.tolist(), "omega1": self.omega1.tolist(),
               "provenance": dict(self.provenance)}
        if self.omega0_se is not None:
            out["omega0_se"] = np.asarray(self.omega0_se).tolist()
            out["omega1_se"] = np.asarray(self.omega1_se).tolist()
        return out


def _check_prob(name, value):
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name}={value} is not a probability")


def _weights_from_means(pi, eta, mean_pi, mean_eta):
    one_pi = np.r_[1.0, mean_pi]
    one_eta = np.r_[1.0, mean_eta]
    omega0 = (1 - pi) * one_pi - (1 - eta) * one_eta
    omega1 = pi * one_pi - eta * one_eta
    return omega0, omega1


def weights_from_expectations(pi: float, eta: float, m_pi, m_eta, provenance=None) -> Weights:
    """Weights from per-unit expected features ``m_pi``, ``m_eta`` of shape (N, P)."""
    _check_prob("pi", pi)
    _check_prob("eta", eta)
    m_pi, m_eta = np.atleast_2d(m_pi), np.atleast_2d(m_eta)
    o0, o1 = _weights_from_means(pi, eta, m_pi.mean(axis=0), m_eta.mean(axis=0))
    return Weights(o0, o1, provenance or {"method": "closed-form"})


def feature_expectations(net: InteractionNetwork, spec: FeatureSpec, theta: float) -> np.ndarray:
    """Per-unit expected features under iid Bernoulli(theta) treatments, shape (N, P)."""
    return np.column_stack([np.asarray(k.expectation(net, theta), dtype=float) for k in spec.kinds])


def closed_form_weights(net: InteractionNetwork, spec: FeatureSpec, pi: float, eta: float,
                        units=None) -> Weights:
    """Exact weights from registered feature expectations.

    ``units`` restricts the average to a subset of units (rows actually
    observed); the default averages over all units of ``net``.
    """
    _check_prob("pi", pi)
    _check_prob("eta", eta)
    m_pi = feature_expectations(net, spec, pi)
    m_eta = feature_expectations(net, spec, eta)
    if units is not None:
        m_pi, m_eta = m_pi[units], m_eta[units]
    return weights_from_expectations(pi, eta, m_pi, m_eta, {"method": "closed-form"})


def assumed_weights(n_features: int, pi: float, eta: float) -> Weights:
    """Weights when every unit's expected feature equals the treatment probability.

    Exact for fraction-type features on networks where every unit has a
    nonempty affector set; used when no network is available.
    """
    m = np.ones((1, n_features))
    w = weights_from_expectations(pi, eta, pi * m, eta * m)
    return Weights(w.omega0, w.omega1, {"method": "assumed-fraction-means"})


def mc_weights(net: InteractionNetwork, spec: FeatureSpec, pi: float, eta: float, reps: int,
               rng: np.random.Generator, common_random_numbers: bool = False, units=None,
               batch: int = 500, seed=None) -> Weights:
    """Monte Carlo weights: feature means under simulated Bernoulli treatment vectors.

    With ``common_random_numbers`` both interventions share the same uniforms,
    so ``pi == eta`` yields exactly zero weights.
    """
    _check_prob("pi", pi)
    _check_prob("eta", eta)
    if reps < 1:
        raise ValueError("reps must be >= 1")
    n = net.n_units
    rows = np.arange(n) if units is None else np.asarray(units)
    draws_pi = np.empty((reps, spec.n_features))
    draws_eta = np.empty((reps, spec.n_features))
    done = 0
    while done < reps:
        b = min(batch, reps - done)
        u = rng.random((n, b))
        u_eta = u if common_random_numbers else rng.random((n, b))
        x_pi = compute_features(net, (u < pi).astype(float), spec)
        x_eta = compute_features(net, (u_eta < eta).astype(float), spec)
        draws_pi[done:done + b] = x_pi[rows].mean(axis=0).T
        draws_eta[done:done + b] = x_eta[rows].mean(axis=0).T
        done += b
    o0, o1 = _weights_from_means(pi, eta, draws_pi.mean(axis=0), draws_eta.mean(axis=0))
    # per-draw weight contributions give componentwise standard errors
    one = np.ones((reps, 1))
    c0 = (1 - pi) * np.hstack([one, draws_pi]) - (1 - eta) * np.hstack([one, draws_eta])
    c1 = pi * np.hstack([one, draws_pi]) - eta * np.hstack([one, draws_eta])
    denom = np.sqrt(reps)
    se0 = c0.std(axis=0, ddof=1) / denom if reps > 1 else np.full(len(o0), np.nan)
    se1 = c1.std(axis=0, ddof=1) / denom if reps > 1 else np.full(len(o1), np.nan)
    prov = {"method": "monte-carlo", "reps": int(reps), "seed": seed,
            "common_random_numbers": bool(common_random_numbers)}
    return Weights(o0, o1, prov, se0, se1)


def network_weights(net: InteractionNetwork, spec: FeatureSpec, pi: float, eta: float,
                    units=None, mc_reps: int = 1000, seed: int = 0) -> Weights:
    """Closed-form weights when every feature has one, Monte Carlo otherwise."""
    try:
        return closed_form_weights(net, spec, pi, eta, units)
    except NoClosedFormError:
        return mc_weights(net, spec, pi, eta, mc_reps, np.random.default_rng(seed),
                          units=units, seed=seed)


# --- designs -------------------------------------------------------------


@dataclass(frozen=True)
class RegressorSpec:
    """Which blocks enter the regression and which covariates adjust for confounding."""

    variant: str = "full"
    adjustment: tuple = ()

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown estimator variant {self.variant!r}; choose from {VARIANTS}")
        object.__setattr__(self, "adjustment", tuple(self.adjustment))
        if self.variant in ("naive", "interference") and self.adjustment:
            raise ConfigError(f"variant {self.variant!r} takes no adjustment columns")

    @property
    def uses_features(self) -> bool:
        return self.variant in ("interference", "full")

    @classmethod
    def naive(cls):
        return cls("naive")

    @classmethod
    def confounding(cls, adjustment):
        return cls("confounding", adjustment)

    @classmethod
    def interference(cls):
        return cls("interference")

    @classmethod
    def full(cls, adjustment):
        return cls("full", adjustment)


@dataclass(frozen=True, eq=False)
class Design:
    """Design matrix with its column names and weight-slot bookkeeping.

    ``alpha0_slots[k]`` is the design column holding the k-th entry of
    ``alpha0`` (or -1 when the block was dropped); likewise ``alpha1_slots``.
    """

    M: np.ndarray
    y: np.ndarray
    columns: tuple
    spec: RegressorSpec
    alpha0_slots: tuple
    alpha1_slots: tuple

    @property
    def n_rows(self) -> int:
        return self.M.shape[0]

    def contrast(self, weights: Weights) -> np.ndarray:
        """Vector ``v`` with ``tau_hat = v . coef``."""
        if weights.length != len(self.alpha0_slots):
            raise ValueError(f"weights have length {weights.length}, design expects {len(self.alpha0_slots)}")
        v = np.zeros(self.M.shape[1])
        both = weights.omega0 + weights.omega1
        for k, col in enumerate(self.alpha0_slots):
            if col >= 0:
                v[col] += both[k]
        for k, col in enumerate(self.alpha1_slots):
            if col >= 0:
                v[col] += weights.omega1[k]
        return v

    def split(self, coef: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Coefficients rearranged into ``(alpha0_hat, alpha1_hat)``; dropped slots are 0."""
        a0 = np.array([coef[c] if c >= 0 else 0.0 for c in self.alpha0_slots])
        a1 = np.array([coef[c] if c >= 0 else 0.0 for c in self.alpha1_slots])
        return a0, a1


def build_design(ds, spec: RegressorSpec) -> Design:
    """Assemble ``(M, y)`` for a dataset in the global column order."""
    p = ds.n_features
    n = ds.n_units
    cols, names = [np.ones(n)], ["1"]
    a0 = [0] + [-1] * p
    a1 = [-1] * (p + 1)
    if spec.uses_features:
        for k in range(p):
            a0[k + 1] = len(cols)
            cols.append(ds.X[:, k])
            names.append(f"X{k + 1}")
    a1[0] = len(cols)
    cols.append(ds.W)
    names.append("W")
    if spec.uses_features:
        for k in range(p):
            a1[k + 1] = len(cols)
            cols.append(ds.O[:, k])
            names.append(f"O{k + 1}")
    for z in spec.adjustment:
        reserved = {"1", "W", "Y"} | {f"X{k + 1}" for k in range(p)} | {f"O{k + 1}" for k in range(p)}
        if z in reserved:
            raise ConfigError(f"adjustment column {z!r} overlaps the exposure or outcome columns")
        try:
            cols.append(ds.column(z))
        except KeyError:
            raise ConfigError(f"adjustment column {z!r} is not in the dataset") from None
        names.append(z)
    return Design(np.column_stack(cols), np.asarray(ds.Y, dtype=float), tuple(names), spec,
                  tuple(a0), tuple(a1))


# --- fitting -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OlsFit:
    coef: np.ndarray
    residuals: np.ndarray
    R: np.ndarray
    condition_number: float


def condition_number(M: np.ndarray) -> float:
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else float("inf")


def _collinear_columns(M, names):
    _, s, vt = np.linalg.svd(M, full_matrices=False)
    null = np.abs(vt[-1])
    involved = np.flatnonzero(null > 1e-3 * null.max())
    return [names[j] for j in involved]


def ols_fit(M, y, names: Sequence[str] | None = None, cond_threshold: float = COND_THRESHOLD) -> OlsFit:
    """Least squares via Householder QR with a condition-number guard."""
    M = np.asarray(M, dtype=float)
    y = np.asarray(y, dtype=float)
    n, q = M.shape
    names = list(names) if names is not None else [f"col{j}" for j in range(q)]
    if n < q:
        raise SingularDesignError(f"design has {n} rows but {q} columns", names)
    if len(y) != n:
        raise ValueError("response length does not match the design")
    cond = condition_number(M)
    if not cond <= cond_threshold:
        cols = _collinear_columns(M, names)
        raise SingularDesignError(
            f"design is numerically singular (condition number {cond:.3g}); collinear columns: {', '.join(cols)}",
            cols)
    q_mat, r = np.linalg.qr(M)
    coef = linalg.solve_triangular(r, q_mat.T @ y)
    return OlsFit(coef, y - M @ coef, r, cond)


def estimate_tau(alpha0_hat, alpha1_hat, w: Weights) -> float:
    """Plug-in global effect ``omega0 . alpha0 + omega1 . (alpha0 + alpha1)``."""
    a0, a1 = np.asarray(alpha0_hat, float), np.asarray(alpha1_hat, float)
    if len(a0) != w.length or len(a1) != w.length:
        raise ValueError(f"coefficient slices must have length {w.length}")
    return float(w.omega0 @ a0 + w.omega1 @ (a0 + a1))


def sandwich_from_factor(M: np.ndarray, R: np.ndarray, residuals: np.ndarray, v: np.ndarray) -> float:
    """``v' (M'M/N)^-1 (M' diag(e^2) M / N) (M'M/N)^-1 v`` using the QR factor of ``M``."""
    n = M.shape[0]
    if np.min(np.abs(np.diag(R))) <= 0:
        raise SingularDesignError("inner matrix of the sandwich is singular")
    # (M'M/N)^-1 v = N R^-1 R^-T v
    u = n * linalg.solve_triangular(R, linalg.solve_triangular(R, v, trans="T"))
    proj = M @ u
    return float(np.sum((residuals * proj) ** 2) / n)


def sandwich_variance(design: Design, residuals, weights: Weights, R=None) -> float:
    """Asymptotic variance estimate of ``sqrt(N) tau_hat`` for a fitted design."""
    v = design.contrast(weights)
    if R is None:
        R = np.linalg.qr(design.M, mode="r")
    return sandwich_from_factor(design.M, R, np.asarray(residuals, float), v)


def confidence_interval(tau_hat: float, sigma2_hat: float, n: int, level: float = 0.95) -> tuple[float, float]:
    """Normal interval ``tau_hat +- z sqrt(sigma2_hat / n)``."""
    if not 0.0 < level < 1.0:
        raise ValueError("level must lie strictly between 0 and 1")
    if sigma2_hat < 0:
        raise ValueError("variance estimate must be nonnegative")
    half = stats.norm.ppf(1 - (1 - level) / 2) * np.sqrt(sigma2_hat / n)
    return float(tau_hat - half), float(tau_hat + half)


# --- reports -------------------------------------------------------------


@dataclass
class EstimateReport:
    variant: str
    columns: list
    alpha_full_hat: list
    alpha0_hat: list
    alpha1_hat: list
    tau_hat: float
    sigma2_hat: float
    ci: tuple
    level: float
    n_units: int
    pi: float
    eta: float
    weights: dict
    adjustment_set: list
    diagnostics: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        out["ci"] = list(self.ci)
        return out

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), indent=2, default=_json_default, **kw)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def fit_estimate(ds, spec: RegressorSpec, weights: Weights, pi: float, eta: float,
                 level: float = 0.95) -> EstimateReport:
    """Fit one estimator variant and assemble the report (no graph logic)."""
    design = build_design(ds, spec)
    fit = ols_fit(design.M, design.y, design.columns)
    a0, a1 = design.split(fit.coef)
    tau = estimate_tau(a0, a1, weights)
    s2 = sandwich_from_factor(design.M, fit.R, fit.residuals, design.contrast(weights))
    return EstimateReport(
        variant=spec.variant, columns=list(design.columns), alpha_full_hat=fit.coef.tolist(),
        alpha0_hat=a0.tolist(), alpha1_hat=a1.tolist(), tau_hat=tau, sigma2_hat=s2,
        ci=confidence_interval(tau, s2, design.n_rows, level), level=level, n_units=design.n_rows,
        pi=pi, eta=eta, weights=weights.to_dict(), adjustment_set=list(spec.adjustment),
        diagnostics={"condition_number": fit.condition_number})


def select_adjustment(g: Dag, observed: Sequence[str], adjustment="auto") -> tuple[str, ...]:
    """Smallest valid adjustment set among observed covariates, or validate a given one."""
    exposure, outcome = exposure_nodes(g)
    if not exposure or outcome is None:
        raise ConfigError("graph needs treatment, feature-block, interaction-block and outcome roles")
    candidates = sorted(g.nodes_with_role("covariate") & set(observed))
    if adjustment == "auto" or adjustment is None:
        found = enumerate_valid_adjustment_sets(g, exposure, outcome, candidates)
        if not found:
            raise IdentifiabilityError(
                f"no valid adjustment set among observed covariates {candidates}")
        return tuple(sorted(found[0]))
    z = tuple(adjustment)
    missing = [c for c in z if c not in observed]
    if missing:
        raise ConfigError(f"adjustment columns not observed: {missing}")
    if not is_valid_adjustment(g, exposure, outcome, z):
        raise IdentifiabilityError(f"{sorted(z)} is not a valid adjustment set")
    return z


def adjust_and_estimate(ds, g: Dag, pi: float, eta: float, adjustment="auto", observed=None,
                        variant: str = "full", level: float = 0.95, weights: Weights | None = None,
                        mc_reps: int = 1000, seed: int = 0, units=None,
                        compute_dmax: bool = True) -> EstimateReport:
    """Pick an adjustment set from the generic graph, fit and report.

    ``observed`` lists the covariates that may be adjusted for (defaults to
    the dataset's covariate columns). Weights come from the dataset's network
    and feature spec unless given explicitly.
    """
    observed = list(ds.covariate_names if observed is None else observed)
    z = select_adjustment(g, observed, adjustment)
    notes = []
    if weights is None:
        if ds.net is None or ds.spec is None:
            weights = assumed_weights(ds.n_features, pi, eta)
            notes.append("no network supplied: weights assume every unit has a nonempty affector set")
        else:
            rows = units if units is not None else ds.rows
            weights = network_weights(ds.net, ds.spec, pi, eta, rows, mc_reps, seed)
    spec = RegressorSpec(variant, z if variant in ("confounding", "full") else ())
    report = fit_estimate(ds, spec, weights, pi, eta, level)
    report.adjustment_set = list(z)
    report.notes.extend(notes)
    if compute_dmax and ds.net is not None and ds.spec is not None:
        report.diagnostics["d_max"] = max_degree(dependency_graph(ds.net, ds.spec))
        aff = ds.spec.affector_matrix(ds.net)
        report.diagnostics["units_without_affectors"] = int(np.sum(np.diff(aff.indptr) == 0))
    return report


__all__ = [
    "Weights", "closed_form_weights", "mc_weights", "assumed_weights", "network_weights",
    "weights_from_expectations", "feature_expectations", "RegressorSpec", "Design", "build_design",
    "OlsFit", "ols_fit", "condition_number", "estimate_tau", "sandwich_variance",
    "sandwich_from_factor", "confidence_interval", "EstimateReport", "fit_estimate",
    "select_adjustment", "adjust_and_estimate", "VARIANTS", "COND_THRESHOLD",
]
