"""Network generators and data simulation from linear-outcome explicit SEMs.

The default model has three covariates and a logistic treatment model::

    C1 = -2 + e1,  C2 = 2 C1 + e2,  C3 = 0.5 + e3
    W  ~ Bernoulli(1 / (1 + exp(-C2 - 5 C3)))
    X  = h(W_{-i}, I),  O = W X
    Y  = (1, X) a0 + (W, O) a1 + 1.5 C1 + eY

with standard normal covariate errors and ``eY ~ Uniform(-sqrt 3, sqrt 3)``
(mean 0, variance 1).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, asdict

import numpy as np
import pandas as pd
from scipy.special import expit

from .graph import Dag
from .interference import FeatureSpec, InteractionNetwork, compute_features

# --- network generators --------------------------------------------------


def gen_erdos_renyi(n: int, p: float, rng: np.random.Generator) -> InteractionNetwork:
    """Symmetric Erdos-Renyi network: each unordered pair gets both edges w.p. ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability {p} outside [0, 1]")
    rows, cols = [], []
    for i in range(n - 1):
        hit = np.flatnonzero(rng.random(n - i - 1) < p)
        if hit.size:
            rows.append(np.full(hit.size, i))
            cols.append(hit + i + 1)
    if not rows:
        return InteractionNetwork.empty(n)
    r, c = np.concatenate(rows), np.concatenate(cols)
    return InteractionNetwork.from_edges(n, np.column_stack([np.r_[r, c], np.r_[c, r]]))


def gen_family(n: int, rng: np.random.Generator, min_size: int = 1, max_size: int = 6) -> InteractionNetwork:
    """Disjoint fully connected families; the last family is clipped to fill ``n``."""
    if n < 1:
        raise ValueError("need at least one unit")
    if not 1 <= min_size <= max_size:
        raise ValueError("family sizes must satisfy 1 <= min_size <= max_size")
    edges = []
    start = 0
    while start < n:
        size = min(int(rng.integers(min_size, max_size + 1)), n - start)
        members = range(start, start + size)
        edges.extend((i, j) for i in members for j in members if i != j)
        start += size
    return InteractionNetwork.from_edges(n, edges)


def gen_lattice2d(side: int) -> InteractionNetwork:
    """Square grid with one edge per adjacent pair, pointing right and down."""
    if side < 1:
        raise ValueError("side must be >= 1")
    idx = np.arange(side * side).reshape(side, side)
    right = np.column_stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()])
    down = np.column_stack([idx[:-1, :].ravel(), idx[1:, :].ravel()])
    return InteractionNetwork.from_edges(side * side, np.vstack([right, down]))


_P_RATIO = re.compile(r"^\s*([0-9.]+)\s*/\s*N\s*$")
_P_POWER = re.compile(r"^\s*N\s*\^\s*\(?\s*(-?[0-9.]+)\s*(?:/\s*([0-9.]+))?\s*\)?\s*$")


def parse_edge_probability(expr):
    """Turn ``0.2``, ``"10/N"`` or ``"N^-2/3"`` into a function of N."""
    if callable(expr):
        return expr
    if isinstance(expr, (int, float)):
        return lambda n, p=float(expr): p
    text = str(expr)
    m = _P_RATIO.match(text)
    if m:
        c = float(m.group(1))
        return lambda n: min(1.0, c / n)
    m = _P_POWER.match(text)
    if m:
        a = float(m.group(1)) / (float(m.group(2)) if m.group(2) else 1.0)
        return lambda n: min(1.0, float(n) ** a)
    try:
        return parse_edge_probability(float(text))
    except ValueError:
        raise ValueError(f"cannot parse edge probability {expr!r}") from None


@dataclass(frozen=True)
class ErdosRenyi:
    p: object = "10/N"
    kind = "erdos-renyi"

    def __call__(self, n, rng):
        return gen_erdos_renyi(n, parse_edge_probability(self.p)(n), rng)

    def label(self):
        return f"I(N,{self.p})"


@dataclass(frozen=True)
class FamilyPartition:
    min_size: int = 1
    max_size: int = 6
    kind = "family"

    def __call__(self, n, rng):
        return gen_family(n, rng, self.min_size, self.max_size)

    def label(self):
        return "family"


@dataclass(frozen=True)
class Lattice2d:
    kind = "lattice"

    def __call__(self, n, rng=None):
        side = int(round(np.sqrt(n)))
        if side * side != n:
            raise ValueError(f"lattice size {n} is not a perfect square")
        return gen_lattice2d(side)

    def label(self):
        return "2d-lattice"


def parse_generator(text: str):
    """``er:10/N``, ``er:0.2``, ``er:N^-2/3``, ``family`` or ``lattice``."""
    kind, _, arg = text.partition(":")
    kind = kind.strip().lower()
    if kind in ("er", "erdos-renyi"):
        parse_edge_probability(arg or "10/N")
        return ErdosRenyi(arg or "10/N")
    if kind == "family":
        if arg:
            lo, _, hi = arg.partition("-")
            return FamilyPartition(int(lo), int(hi))
        return FamilyPartition()
    if kind == "lattice":
        return Lattice2d()
    raise ValueError(f"unknown network generator {text!r}")


# --- SEM -----------------------------------------------------------------


@dataclass(frozen=True)
class SemConfig:
    """Linear-outcome explicit SEM with recursive linear covariates.

    ``covariate_links[k][l]`` (``l < k``) is the coefficient of ``C_l`` in the
    equation of ``C_k``. The treatment is Bernoulli with logit
    ``treatment_intercept + treatment_coefs . C``.
    """

    alpha0: tuple = (2.0, 1.0)
    alpha1: tuple = (0.4, 1.1)
    gamma: tuple = (1.5, 0.0, 0.0)
    covariate_names: tuple = ("C1", "C2", "C3")
    covariate_intercepts: tuple = (-2.0, 0.0, 0.5)
    covariate_links: tuple = ((), (2.0,), (0.0, 0.0))
    covariate_noise_var: tuple = (1.0, 1.0, 1.0)
    treatment_intercept: float = 0.0
    treatment_coefs: tuple = (0.0, 1.0, 5.0)
    outcome_noise: str = "uniform"
    outcome_noise_var: float = 1.0

    def __post_init__(self):
        for name in ("alpha0", "alpha1", "gamma", "covariate_names", "covariate_intercepts",
                     "covariate_noise_var", "treatment_coefs"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "covariate_links", tuple(tuple(r) for r in self.covariate_links))
        if len(self.alpha0) != len(self.alpha1):
            raise ValueError("alpha0 and alpha1 must have equal length")
        k = len(self.covariate_names)
        for name in ("gamma", "covariate_intercepts", "covariate_noise_var", "treatment_coefs"):
            if len(getattr(self, name)) != k:
                raise ValueError(f"{name} must have one entry per covariate ({k})")
        if len(self.covariate_links) != k or any(len(r) > i for i, r in enumerate(self.covariate_links)):
            raise ValueError("covariate_links must be lower triangular with one row per covariate")
        if self.outcome_noise not in ("uniform", "normal"):
            raise ValueError("outcome_noise must be 'uniform' or 'normal'")

    @property
    def n_features(self) -> int:
        return len(self.alpha0) - 1

    def to_dict(self) -> dict:
        return asdict(self)


def preset_sem(graph: str) -> SemConfig:
    """The simulation-study SEMs: ``erdos-renyi``, ``family`` or ``lattice``."""
    if graph == "lattice":
        return SemConfig(alpha0=(2.0, 1.0, 0.5), alpha1=(0.4, 1.1, 0.5))
    if graph in ("erdos-renyi", "family"):
        return SemConfig()
    raise ValueError(f"unknown graph type {graph!r}")


@dataclass
class Dataset:
    """Per-unit observations plus the network and features that produced them.

    ``rows`` maps dataset rows to units of ``net`` (all units by default);
    panels observe only a subset of the units of their expanded network.
    """

    C: np.ndarray
    W: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    covariate_names: tuple = ("C1", "C2", "C3")
    net: InteractionNetwork | None = None
    spec: FeatureSpec | None = None
    rows: np.ndarray | None = None
    O: np.ndarray = field(init=False)

    def __post_init__(self):
        self.C = np.asarray(self.C, dtype=float).reshape(len(self.Y), -1)
        self.W = np.asarray(self.W, dtype=float)
        self.X = np.asarray(self.X, dtype=float).reshape(len(self.Y), -1)
        self.Y = np.asarray(self.Y, dtype=float)
        self.covariate_names = tuple(self.covariate_names)
        if self.C.shape[1] != len(self.covariate_names):
            raise ValueError("one covariate name per covariate column required")
        if not np.isin(self.W, (0.0, 1.0)).all():
            raise ValueError("treatment column must be binary")
        if not (len(self.W) == len(self.X) == len(self.C) == len(self.Y)):
            raise ValueError("dataset columns have different lengths")
        self.O = self.W[:, None] * self.X

    @property
    def n_units(self) -> int:
        return len(self.Y)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def columns(self) -> list[str]:
        p = self.n_features
        return (list(self.covariate_names) + ["W"] + [f"X{k + 1}" for k in range(p)]
                + [f"O{k + 1}" for k in range(p)] + ["Y"])

    def column(self, name: str) -> np.ndarray:
        if name in self.covariate_names:
            return self.C[:, self.covariate_names.index(name)]
        if name in ("W", "Y"):
            return getattr(self, name)
        m = re.fullmatch(r"([XO])(\d+)", name)
        if m and 1 <= int(m.group(2)) <= self.n_features:
            return getattr(self, m.group(1))[:, int(m.group(2)) - 1]
        raise KeyError(f"dataset has no column {name!r}")

    def to_frame(self) -> pd.DataFrame:
        data = {"unit": np.arange(1, self.n_units + 1)}
        for name in self.columns():
            data[name] = self.column(name)
        return pd.DataFrame(data)

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.17g")

    @classmethod
    def from_frame(cls, df: pd.DataFrame, net=None, spec=None) -> "Dataset":
        for col in ("W", "Y"):
            if col not in df.columns:
                raise ValueError(f"missing column {col!r}")
        xcols = sorted((c for c in df.columns if re.fullmatch(r"X\d+", c)), key=lambda c: int(c[1:]))
        if not xcols:
            raise ValueError("dataset needs at least one feature column X1")
        reserved = {"unit", "W", "Y"} | set(xcols) | {f"O{c[1:]}" for c in xcols}
        cov = [c for c in df.columns if c not in reserved]
        ds = cls(df[cov].to_numpy(float) if cov else np.zeros((len(df), 0)),
                 df["W"].to_numpy(float), df[xcols].to_numpy(float), df["Y"].to_numpy(float),
                 tuple(cov), net, spec)
        ocols = [f"O{c[1:]}" for c in xcols]
        if all(c in df.columns for c in ocols) and not np.allclose(df[ocols].to_numpy(float), ds.O):
            raise ValueError("O columns do not equal W * X")
        return ds

    @classmethod
    def read_csv(cls, path, net=None, spec=None) -> "Dataset":
        return cls.from_frame(pd.read_csv(path, float_precision="round_trip"), net, spec)


def _covariates(cfg: SemConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    k = len(cfg.covariate_names)
    eps = rng.standard_normal((n, k)) * np.sqrt(cfg.covariate_noise_var)
    c = np.empty((n, k))
    for j in range(k):
        c[:, j] = cfg.covariate_intercepts[j] + eps[:, j]
        for l, b in enumerate(cfg.covariate_links[j]):
            if b:
                c[:, j] += b * c[:, l]
    return c


def _outcome_noise(cfg: SemConfig, n: int, rng: np.random.Generator) -> np.ndarray:
    if cfg.outcome_noise == "uniform":
        half = np.sqrt(3.0 * cfg.outcome_noise_var)
        return rng.uniform(-half, half, n)
    return rng.standard_normal(n) * np.sqrt(cfg.outcome_noise_var)


def outcome(cfg: SemConfig, C, W, X, eps_y) -> np.ndarray:
    a0, a1 = np.asarray(cfg.alpha0), np.asarray(cfg.alpha1)
    return (a0[0] + X @ a0[1:] + W * (a1[0] + X @ a1[1:])
            + C @ np.asarray(cfg.gamma) + eps_y)


def simulate(cfg: SemConfig, net: InteractionNetwork, spec: FeatureSpec,
             rng: np.random.Generator, treatment_prob: float | None = None) -> Dataset:
    """Draw one dataset. With ``treatment_prob`` the treatment is set by
    ``do(W ~ iid Bernoulli(treatment_prob))`` instead of the logistic model."""
    if spec.n_features != cfg.n_features:
        raise ValueError(f"config has {cfg.n_features} feature coefficients, spec has {spec.n_features} features")
    n = net.n_units
    c = _covariates(cfg, n, rng)
    u = rng.random(n)
    if treatment_prob is None:
        prob = expit(cfg.treatment_intercept + c @ np.asarray(cfg.treatment_coefs))
    else:
        prob = np.full(n, float(treatment_prob))
    w = (u < prob).astype(float)
    x = compute_features(net, w, spec)
    y = outcome(cfg, c, w, x, _outcome_noise(cfg, n, rng))
    return Dataset(c, w, x, y, cfg.covariate_names, net, spec)


def true_tau(cfg: SemConfig, weights) -> float:
    """Global effect implied by the SEM's coefficients and the given weights."""
    a0, a1 = np.asarray(cfg.alpha0), np.asarray(cfg.alpha1)
    w0, w1 = np.asarray(weights.omega0), np.asarray(weights.omega1)
    if len(w0) != len(a0) or len(w1) != len(a0):
        raise ValueError("weight vectors must have length P + 1")
    return float(w0 @ a0 + w1 @ (a0 + a1))


def mc_tau_oracle(cfg: SemConfig, net: InteractionNetwork, spec: FeatureSpec,
                  pi: float, eta: float, reps: int, rng: np.random.Generator,
                  return_se: bool = False):
    """Brute-force global effect: average outcomes under both stochastic
    interventions, simulated from the full SEM on a fixed network."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    diffs = np.empty(reps)
    for r in range(reps):
        y_pi = simulate(cfg, net, spec, rng, treatment_prob=pi).Y.mean()
        y_eta = simulate(cfg, net, spec, rng, treatment_prob=eta).Y.mean()
        diffs[r] = y_pi - y_eta
    est = float(diffs.mean())
    if return_se:
        se = float(diffs.std(ddof=1) / np.sqrt(reps)) if reps > 1 else float("nan")
        return est, se
    return est


def cell_rng(*keys: int) -> np.random.Generator:
    """Independent generator for a replication cell keyed by integers."""
    return np.random.default_rng([int(k) for k in keys])


def simulation_graph() -> Dag:
    """Generic graph of the default SEM with a single feature block."""
    edges = [("W", "Y"), ("C2", "W"), ("X", "Y"), ("O", "Y"), ("X", "O"), ("W", "O"),
             ("C1", "C2"), ("C1", "Y"), ("C3", "W")]
    roles = {"W": "treatment", "X": "feature-block", "O": "interaction-block", "Y": "outcome",
             "C1": "covariate", "C2": "covariate", "C3": "covariate"}
    return Dag(edges, roles)


__all__ = [
    "gen_erdos_renyi", "gen_family", "gen_lattice2d", "ErdosRenyi", "FamilyPartition", "Lattice2d",
    "parse_generator", "parse_edge_probability", "SemConfig", "preset_sem", "Dataset", "simulate",
    "true_tau", "mc_tau_oracle", "cell_rng", "outcome", "simulation_graph",
]
