"""Simulation and GMM estimation of the state-dependence parameter.

The exact-arithmetic modules certify which moment functions exist; this
module demonstrates that they identify the common parameters.  Everything
here is floating point: probability rows are evaluated on a ladder of
fixed-effect values, the moment basis is the SVD nullspace of those rows,
and gamma is estimated by minimizing the quadratic form in the sample
moment averages (identity weighting).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model_core import ModelSpec, all_outcomes, outcome_index
from .moment_space import expected_dimension

SVD_RELATIVE_THRESHOLD = 1e-9
ALPHA_LADDER_SPAN = 4.0


class UnidentifiedModelError(ValueError):
    """Raised when the spec admits no (or too few) moment functions."""


class BasisDimensionError(RuntimeError):
    """Raised when the float nullspace dimension disagrees with the exact one."""


@dataclass(frozen=True)
class SimConfig:
    """Data-generating configuration for the fixed-effects panel logit."""

    N: int
    spec: ModelSpec
    true_gamma: tuple[float, ...]
    true_beta: float = 0.0
    alpha_dist: tuple = ("normal", 0.0, 1.0)  # normal(m,s) | uniform(lo,hi) | two_point(a,b,prob)
    init_scheme: tuple = ("fixed", 0)  # fixed(value) | random_bernoulli(q)
    x_scheme: tuple = ("none",)  # none | iid_normal(sd)
    seed: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("need at least one individual")
        if len(self.true_gamma) != self.spec.p:
            raise ValueError("true_gamma length must equal the lag order")


@dataclass(frozen=True)
class PanelDataset:
    """Simulated panel: init histories, covariate indices x't*beta, outcomes."""

    init: np.ndarray  # (N, p) int
    x_index: np.ndarray  # (N, T) float, x_it' beta
    y: np.ndarray  # (N, T) int


def _draw_alpha(rng: np.random.Generator, dist: tuple, n: int) -> np.ndarray:
    kind = dist[0]
    if kind == "normal":
        return rng.normal(dist[1], dist[2], size=n)
    if kind == "uniform":
        return rng.uniform(dist[1], dist[2], size=n)
    if kind == "two_point":
        a, b, prob = dist[1], dist[2], dist[3]
        return np.where(rng.random(n) < prob, a, b)
    if kind == "degenerate":
        return np.full(n, float(dist[1]))
    raise ValueError(f"unknown alpha distribution {kind!r}")


def simulate_panel(cfg: SimConfig) -> PanelDataset:
    """Sequential Bernoulli draws from the logistic hazard, seeded."""
    rng = np.random.default_rng(cfg.seed)
    N, T, p = cfg.N, cfg.spec.T, cfg.spec.p
    alpha = _draw_alpha(rng, cfg.alpha_dist, N)
    if cfg.init_scheme[0] == "fixed":
        init = np.full((N, p), int(cfg.init_scheme[1]), dtype=np.int64)
    elif cfg.init_scheme[0] == "random_bernoulli":
        init = (rng.random((N, p)) < cfg.init_scheme[1]).astype(np.int64)
    else:
        raise ValueError(f"unknown init scheme {cfg.init_scheme[0]!r}")
    if cfg.x_scheme[0] == "none":
        x_index = np.zeros((N, T))
    elif cfg.x_scheme[0] == "iid_normal":
        x_index = rng.normal(0.0, cfg.x_scheme[1], size=(N, T)) * cfg.true_beta
    else:
        raise ValueError(f"unknown covariate scheme {cfg.x_scheme[0]!r}")
    gamma = np.asarray(cfg.true_gamma)
    y = np.zeros((N, T), dtype=np.int64)
    # history[:, 0] = y_{t-1}, history[:, 1] = y_{t-2}, ...
    history = init.copy()
    for t in range(T):
        index = x_index[:, t] + alpha
        if p:
            index = index + history @ gamma
        prob_one = 1.0 / (1.0 + np.exp(-index))
        y[:, t] = rng.random(N) < prob_one
        if p:
            history = np.column_stack([y[:, t], history[:, :-1]])
    return PanelDataset(init=init, x_index=x_index, y=y)


def float_prob_rows(spec: ModelSpec, gamma, beta_index, alphas) -> np.ndarray:
    """Probability rows Pr(y | alpha) for every outcome, at each ladder alpha."""
    T = spec.T
    outcomes = all_outcomes(T)
    beta_index = np.zeros(T) if beta_index is None else np.asarray(beta_index, dtype=float)
    rows = np.empty((len(alphas), 2**T))
    for g, a in enumerate(alphas):
        for j, y in enumerate(outcomes):
            logp = 0.0
            for t in range(1, T + 1):
                idx = beta_index[t - 1] + a
                for lag in range(1, spec.p + 1):
                    k = t - lag  # resolve from the outcome or the conditioning history
                    prev = y[k - 1] if k >= 1 else spec.init[-k]
                    idx += gamma[lag - 1] * prev
                z = idx if y[t - 1] else -idx
                logp += z - math.log1p(math.exp(z)) if z < 30 else -math.log1p(math.exp(-z))
            rows[g, j] = math.exp(logp)
    return rows


def default_alpha_ladder(spec: ModelSpec, beta_zero: bool) -> np.ndarray:
    n = 2 * (2**spec.T - expected_dimension(spec.p, spec.T, beta_zero))
    return np.linspace(-ALPHA_LADDER_SPAN, ALPHA_LADDER_SPAN, n)


def float_moment_basis(spec: ModelSpec, gamma, beta_index=None,
                       alpha_ladder=None) -> np.ndarray:
    """Numerical moment basis: SVD nullspace of ladder probability rows,
    canonicalized to reduced column echelon form.

    The column count must match the exact-arithmetic dimension for the
    same spec; a mismatch means the SVD threshold failed and is an error.
    """
    if spec.p not in (1, 2):
        raise ValueError("float moment basis supports p in {1, 2}")
    beta_zero = beta_index is None or not np.any(beta_index)
    if alpha_ladder is None:
        alpha_ladder = default_alpha_ladder(spec, beta_zero)
    rows = float_prob_rows(spec, gamma, beta_index, alpha_ladder)
    _, s, vt = np.linalg.svd(rows, full_matrices=True)
    threshold = SVD_RELATIVE_THRESHOLD * s[0]
    null_dim = vt.shape[0] - int(np.sum(s > threshold))
    expected = expected_dimension(spec.p, spec.T, beta_zero)
    if null_dim != expected:
        raise BasisDimensionError(
            f"float nullspace dimension {null_dim} != exact dimension {expected}"
        )
    basis = vt[vt.shape[0] - null_dim:].T  # (2^T, d)
    return _float_column_echelon(basis)


def _float_column_echelon(basis: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Reduced column echelon with pivots on the lowest row indices."""
    b = basis.copy()
    n, d = b.shape
    col = 0
    for row in range(n):
        if col == d:
            break
        piv = col + int(np.argmax(np.abs(b[row, col:])))
        if abs(b[row, piv]) <= tol * max(1.0, np.abs(b).max()):
            continue
        b[:, [col, piv]] = b[:, [piv, col]]
        b[:, col] /= b[row, col]
        for j in range(d):
            if j != col:
                b[:, j] -= b[row, j] * b[:, col]
        col += 1
    return b


@dataclass(frozen=True)
class SearchConfig:
    grid_lo: float = -1.0
    grid_hi: float = 2.0
    grid_step: float = 0.1
    refine_tol: float = 1e-6


@dataclass(frozen=True)
class EstimateResult:
    gamma_hat: tuple[float, ...]
    objective_value: float
    evaluations: int
    converged: bool


def _moment_counts(data: PanelDataset, spec: ModelSpec) -> dict:
    """Outcome-index counts per distinct initial history."""
    n_out = 2**spec.T
    counts: dict[tuple, np.ndarray] = {}
    h_idx = np.array([outcome_index(tuple(row)) - 1 for row in data.y])
    for i in range(data.y.shape[0]):
        key = tuple(int(v) for v in data.init[i])
        if key not in counts:
            counts[key] = np.zeros(n_out)
        counts[key][h_idx[i]] += 1
    return counts


def make_objective(data: PanelDataset, spec: ModelSpec):
    """Q(gamma) = gbar' gbar with gbar the sample average of the basis moments."""
    counts = _moment_counts(data, spec)
    n_total = data.y.shape[0]
    if np.any(data.x_index):
        raise NotImplementedError("GMM estimation with covariates is out of scope")

    def objective(gamma_vec) -> float:
        gbar_blocks = []
        for init_key, cnt in sorted(counts.items()):
            try:
                basis = float_moment_basis(
                    ModelSpec(spec.p, spec.T, init_key), tuple(gamma_vec)
                )
            except BasisDimensionError:
                # degenerate candidate (e.g. gamma ~ 0 collapses the span);
                # exclude it from the search rather than abort
                return math.inf
            gbar_blocks.append((cnt / n_total) @ basis)
        gbar = np.concatenate(gbar_blocks)
        return float(gbar @ gbar)

    return objective


_GOLDEN = (math.sqrt(5) - 1) / 2


def _golden_section(f, lo: float, hi: float, tol: float) -> tuple[float, float, int]:
    """Standard golden-section minimization on [lo, hi]."""
    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    evals = 2
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = f(x2)
        evals += 1
    x = x1 if f1 <= f2 else x2
    return x, min(f1, f2), evals


def estimate_gmm(data: PanelDataset, spec: ModelSpec,
                 search: SearchConfig = SearchConfig()) -> EstimateResult:
    """Coarse grid over gamma followed by golden-section refinement.

    Scalar gamma (p=1) without covariates; p=2 runs an experimental
    coordinate search over (gamma_1, gamma_2).
    """
    d = expected_dimension(spec.p, spec.T, True)
    if d == 0:
        raise UnidentifiedModelError(f"no valid moment functions for p={spec.p}, T={spec.T}")
    if d < spec.p:
        raise UnidentifiedModelError("fewer moment functions than parameters")
    objective = make_objective(data, spec)
    if spec.p == 1:
        grid = np.arange(search.grid_lo, search.grid_hi + 0.5 * search.grid_step,
                         search.grid_step)
        values = [objective((g,)) for g in grid]
        if not any(np.isfinite(values)):
            raise ArithmeticError("non-finite GMM objective on the whole search grid")
        k = int(np.argmin(values))
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, len(grid) - 1)]
        x, fx, evals = _golden_section(lambda g: objective((g,)), lo, hi,
                                       search.refine_tol)
        return EstimateResult((float(x),), fx, len(grid) + evals, True)
    # experimental 2-D path: coarse grid then coordinatewise golden sections
    grid = np.arange(search.grid_lo, search.grid_hi + 0.5 * search.grid_step,
                     search.grid_step)
    best, best_val = None, math.inf
    for g1 in grid:
        for g2 in grid:
            v = objective((g1, g2))
            if v < best_val:
                best, best_val = [g1, g2], v
    evals = len(grid) ** 2
    for _ in range(3):
        for coord in (0, 1):
            def line(g, coord=coord):
                point = list(best)
                point[coord] = g
                return objective(tuple(point))
            x, fx, e = _golden_section(line, best[coord] - search.grid_step,
                                       best[coord] + search.grid_step,
                                       search.refine_tol)
            best[coord], best_val = x, fx
            evals += e
    return EstimateResult(tuple(float(g) for g in best), best_val, evals, True)


@dataclass(frozen=True)
class MonteCarloSummary:
    N: int
    T: int
    p: int
    gamma_true: float
    reps: int
    mean_bias: float
    median_bias: float
    rmse: float
    failures: int
    seed: int

    def to_json(self) -> dict:
        return {
            "N": self.N, "T": self.T, "p": self.p, "gamma_true": self.gamma_true,
            "reps": self.reps, "mean_bias": self.mean_bias,
            "median_bias": self.median_bias, "rmse": self.rmse,
            "failures": self.failures, "seed": self.seed,
        }


MC_CSV_COLUMNS = ("N", "T", "p", "gamma_true", "reps", "mean_bias", "median_bias",
                  "rmse", "failures", "seed")


def monte_carlo(cfg: SimConfig, reps: int, search: SearchConfig = SearchConfig(),
                n_values: tuple[int, ...] = (500, 2000)) -> list[MonteCarloSummary]:
    """Independent simulate+estimate cycles for each sample size.

    Failed replications are counted and excluded from the summary, never
    silently dropped.  Replication r uses seed cfg.seed*100000 + r so the
    whole table is reproducible from cfg.seed.
    """
    if reps < 2:
        raise ValueError("need at least two replications")
    summaries = []
    gamma_true = cfg.true_gamma[0]
    for n in n_values:
        estimates = []
        failures = 0
        for r in range(reps):
            rep_cfg = SimConfig(
                N=n, spec=cfg.spec, true_gamma=cfg.true_gamma,
                true_beta=cfg.true_beta, alpha_dist=cfg.alpha_dist,
                init_scheme=cfg.init_scheme, x_scheme=cfg.x_scheme,
                seed=cfg.seed * 100000 + r,
            )
            try:
                result = estimate_gmm(simulate_panel(rep_cfg), cfg.spec, search)
                estimates.append(result.gamma_hat[0])
            except (ArithmeticError, BasisDimensionError):
                failures += 1
        est = np.asarray(estimates)
        summaries.append(MonteCarloSummary(
            N=n, T=cfg.spec.T, p=cfg.spec.p, gamma_true=gamma_true,
            reps=reps, mean_bias=float(np.mean(est - gamma_true)),
            median_bias=float(np.median(est - gamma_true)),
            rmse=float(np.sqrt(np.mean((est - gamma_true) ** 2))),
            failures=failures, seed=cfg.seed,
        ))
    return summaries
