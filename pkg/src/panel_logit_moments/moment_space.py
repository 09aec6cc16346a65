"""Moment-space dimension certificates, nullspace moment bases, and the
covariate-pattern / stacked-covariate experiments.

A valid moment function is a vector m over the 2^T outcomes with
sum_y Pr(y | alpha) m(y) = 0 for every fixed effect alpha.  The valid
functions therefore form the nullspace of the fixed-effect span of the
probability rows; its dimension is 2^T minus the span rank.  Span ranks
are certified either exactly through the polynomial coefficient matrix
(no covariates) or as multi-seed-stable exact ranks of sampled rows.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .exact_linalg import RationalMatrix, nullspace, rank, rat_to_str
from .matrix_builders import (
    AlphaDraws,
    build_Pbar,
    random_alpha_draws,
    random_rationals,
    unit_b,
)
from .model_core import ModelSpec, spec_to_json
from .polynomialization import RankCertificate, coeff_matrix_rank

DEFAULT_ROW_MARGIN = 4


def expected_span_rank(p: int, T: int, beta_zero: bool) -> int:
    """Span rank the theory predicts (conjectured value for p=3)."""
    if p == 0:
        return T + 1
    if p == 1:
        return 2 * T
    if p == 2:
        return 3 * T - 2 if beta_zero else 4 * (T - 1)
    return (T - 2) * 2**3  # p=3: conjectured (T+1-p)*2^p, informational only


def expected_dimension(p: int, T: int, beta_zero: bool) -> int:
    return 2**T - expected_span_rank(p, T, beta_zero)


def _derive_seed(base_seed: int, *parts: int) -> int:
    s = base_seed
    for part in parts:
        s = s * 1_000_003 + part + 1
    return s & 0x7FFFFFFF


def _is_beta_zero(b) -> bool:
    return b is None or all(x == 1 for x in b)


@dataclass(frozen=True)
class Budget:
    """Sampling budget for rank certification."""

    rows: int
    seeds: int = 3
    base_seed: int = 0

    def __post_init__(self):
        if self.rows < 1 or self.seeds < 3:
            raise ValueError("budget needs rows >= 1 and seeds >= 3")


def default_budget(p: int, T: int, beta_zero: bool, base_seed: int = 0) -> Budget:
    return Budget(expected_span_rank(p, T, beta_zero) + DEFAULT_ROW_MARGIN, 3, base_seed)


def _sampled_draw_sets(spec: ModelSpec, budget: Budget) -> list[AlphaDraws]:
    sets = []
    used: set = set()
    for s in range(budget.seeds):
        draws = random_alpha_draws(
            budget.rows, _derive_seed(budget.base_seed, spec.p, spec.T, s), exclude=used
        )
        used.update(draws.u_list)
        sets.append(draws)
    return sets


def span_rank(spec: ModelSpec, c, b, budget: Budget, force_sampled: bool = False) -> RankCertificate:
    """Certified rank of the fixed-effect span of probability rows.

    Without covariates and p in {1, 2} the rank is exact via the
    polynomial route; otherwise it is the exact rank of sampled rows,
    stable across independent seeds (a certified lower bound that is the
    true rank almost surely).
    """
    beta_zero = _is_beta_zero(b)
    if beta_zero and spec.p in (1, 2) and not force_sampled:
        return coeff_matrix_rank(spec, c)
    expected = expected_span_rank(spec.p, spec.T, beta_zero)
    if budget.rows < min(expected, 2**spec.T) + 2:
        raise ValueError(
            f"budget rows={budget.rows} too small for expected rank {expected}"
        )
    b = unit_b(spec.T) if b is None else tuple(b)
    ranks = []
    seeds = []
    for draws in _sampled_draw_sets(spec, budget):
        ranks.append(rank(build_Pbar(spec, draws, c, b).matrix))
        seeds.append(draws.seed)
    return RankCertificate(
        claimed_rank=max(ranks),
        method="sampled_lower_bound",
        draws_used=budget.rows * budget.seeds,
        seeds=tuple(seeds),
        stable_across_trials=len(set(ranks)) == 1,
    )


@dataclass(frozen=True)
class MomentBasis:
    """Canonical exact basis of valid moment functions (2^T x d)."""

    spec: ModelSpec
    c: tuple
    b: tuple
    basis: RationalMatrix
    d: int
    construction_draws: tuple = ()

    def to_json(self) -> dict:
        return {
            "spec": spec_to_json(self.spec),
            "c": [rat_to_str(x) for x in self.c],
            "b": [rat_to_str(x) for x in self.b],
            "d": self.d,
            "basis": self.basis.to_json(),
        }


def moment_basis(spec: ModelSpec, c, b, budget: Budget) -> MomentBasis:
    """Canonical nullspace of stacked probability rows at fixed (init, c, b).

    The stacked rows pool all sampling seeds; the resulting dimension is
    cross-checked against the independent span-rank certificate.
    """
    cert = span_rank(spec, c, b, budget)
    b_full = unit_b(spec.T) if b is None else tuple(b)
    draw_sets = _sampled_draw_sets(spec, budget)
    stacked = build_Pbar(spec, draw_sets[0], c, b_full).matrix
    for draws in draw_sets[1:]:
        stacked = stacked.stack(build_Pbar(spec, draws, c, b_full).matrix)
    basis = nullspace(stacked)
    if basis.cols != 2**spec.T - cert.claimed_rank:
        raise ArithmeticError(
            f"nullspace dimension {basis.cols} disagrees with certified rank "
            f"{cert.claimed_rank}; draws were not generic enough"
        )
    draws_used = tuple(u for ds in draw_sets for u in ds.u_list)
    return MomentBasis(spec, tuple(c), b_full, basis, basis.cols, draws_used)


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    n_fresh: int
    seed: int
    exact_zero: bool
    offending: tuple = ()  # (row index, column index) of first violation

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "n_fresh": self.n_fresh,
            "seed": self.seed,
            "exact_zero": self.exact_zero,
            "offending": list(self.offending),
        }


def _canonical_pivot_rows(basis: RationalMatrix) -> list[int]:
    pivots = []
    for j in range(basis.cols):
        col = basis.column(j)
        lead = next((i for i, x in enumerate(col) if x != 0), None)
        if lead is None or col[lead] != 1:
            raise ArithmeticError(f"column {j} is not in canonical form")
        pivots.append(lead)
    return pivots


def validate_basis(basis: MomentBasis, n_fresh: int, seed: int) -> ValidationReport:
    """Check the basis against freshly drawn fixed effects, exactly.

    Fresh draws are disjoint from the construction draws; the product of
    fresh probability rows with the basis must be identically zero as
    rational numbers, and the canonical pivot structure must certify
    column independence.
    """
    if n_fresh < 1:
        raise ValueError("need at least one fresh draw")
    pivots = _canonical_pivot_rows(basis.basis)
    if len(set(pivots)) != basis.d:
        raise ArithmeticError("basis columns are not independent")
    if basis.d == 0:
        return ValidationReport(True, n_fresh, seed, True)
    rng = random.Random(seed)
    fresh = AlphaDraws(
        random_rationals(rng, n_fresh, exclude=basis.construction_draws), seed
    )
    product = build_Pbar(basis.spec, fresh, basis.c, basis.b).matrix @ basis.basis
    for i, row in enumerate(product.data):
        for j, x in enumerate(row):
            if x != 0:
                return ValidationReport(False, n_fresh, seed, False, (i, j))
    return ValidationReport(True, n_fresh, seed, True)


@dataclass(frozen=True)
class DimensionRow:
    p: int
    T: int
    init: tuple[int, ...]
    pattern: str  # beta0 | generic | tied:<spec>
    rank: int
    dim: int
    expected: int
    match: bool | None  # None = informational (p=3)
    method: str
    seeds: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "T": self.T,
            "init": "".join(str(v) for v in self.init),
            "pattern": self.pattern,
            "rank": self.rank,
            "dim": self.dim,
            "expected": self.expected,
            "match": self.match,
            "method": self.method,
            "seeds": list(self.seeds),
        }


CSV_COLUMNS = ("p", "T", "init", "pattern", "rank", "dim", "expected", "match", "method", "seeds")


@dataclass(frozen=True)
class DimensionReport:
    rows: tuple[DimensionRow, ...]

    @property
    def all_match(self) -> bool:
        return all(r.match for r in self.rows if r.match is not None)

    def to_json(self) -> list[dict]:
        return [r.to_json() for r in self.rows]


def _generic_b(T: int, rng: random.Random, tied: tuple[int, ...] = ()) -> tuple:
    """Distinct random b entries; the (1-based) periods in `tied` share one value."""
    n_free = T - max(len(tied) - 1, 0)
    vals = random_rationals(rng, n_free)
    b = []
    it = iter(vals)
    tied_val = None
    for t in range(1, T + 1):
        if t in tied:
            if tied_val is None:
                tied_val = next(it)
            b.append(tied_val)
        else:
            b.append(next(it))
    return tuple(b)


def default_c(p: int, rng: random.Random) -> tuple:
    """Random nondegenerate state-dependence parameters (c_l != 1; c1*c2 != 1)."""
    while True:
        c = random_rationals(rng, p)
        if all(x != 1 for x in c) and (p < 2 or c[0] * c[1] != 1):
            return c


def dimension_cell(p: int, T: int, init: tuple[int, ...], pattern: str,
                   base_seed: int = 0) -> DimensionRow:
    """Certify one (p, T, init, covariate-pattern) cell of the dimension grid."""
    pattern_code = sum(pattern.encode())  # stable across processes
    rng = random.Random(_derive_seed(base_seed, p, T, sum(init), pattern_code))
    c = default_c(p, rng)
    if pattern == "beta0":
        b = None
    elif pattern == "generic":
        b = _generic_b(T, rng)
    elif pattern.startswith("tied:"):
        tied = tuple(int(x) for x in pattern.split(":", 1)[1].split("-"))
        b = _generic_b(T, rng, tied)
    else:
        raise ValueError(f"unknown covariate pattern {pattern!r}")
    beta_zero = _is_beta_zero(b)
    budget = default_budget(p, T, beta_zero, base_seed)
    cert = span_rank(ModelSpec(p, T, init), c, b, budget)
    dim = 2**T - cert.claimed_rank
    expected = expected_dimension(p, T, beta_zero)
    return DimensionRow(
        p=p,
        T=T,
        init=init,
        pattern=pattern,
        rank=cert.claimed_rank,
        dim=dim,
        expected=expected,
        match=None if p == 3 else (dim == expected and cert.stable_across_trials),
        method=cert.method,
        seeds=cert.seeds,
    )


def default_init(p: int) -> tuple[int, ...]:
    return (0,) * p


def dimension_report(cells, base_seed: int = 0) -> DimensionReport:
    """Certify a list of (p, T, init, pattern) cells."""
    rows = [dimension_cell(p, T, init, pattern, base_seed) for p, T, init, pattern in cells]
    return DimensionReport(tuple(rows))


def standard_grid() -> list[tuple]:
    """The full dimension grid: p=0 T=2..6, p=1 T=2..8, p=2 T=3..5, p=3 T=4..5."""
    cells = []
    for T in range(2, 7):
        cells.append((0, T, (), "beta0"))
    for T in range(2, 9):
        cells.append((1, T, (0,), "beta0"))
        cells.append((1, T, (0,), "generic"))
    for T in range(3, 6):
        cells.append((2, T, (0, 0), "beta0"))
        cells.append((2, T, (0, 0), "generic"))
    for T in range(4, 6):
        cells.append((3, T, (0, 0, 0), "beta0"))
    return cells


@dataclass(frozen=True)
class PatternReport:
    T: int
    init: tuple[int, ...]
    tied: tuple[int, ...]
    pattern_dim: int
    generic_dim: int
    surplus: int
    surplus_lower_bound: int
    meets_bound: bool

    def to_json(self) -> dict:
        return {
            "T": self.T,
            "init": "".join(str(v) for v in self.init),
            "tied": list(self.tied),
            "pattern_dim": self.pattern_dim,
            "generic_dim": self.generic_dim,
            "surplus": self.surplus,
            "surplus_lower_bound": self.surplus_lower_bound,
            "meets_bound": self.meets_bound,
        }


def covariate_pattern_experiment(T: int, seed: int = 0, init: tuple[int, int] = (0, 0),
                                 tied: tuple[int, ...] | None = None) -> PatternReport:
    """AR(2): dimension surplus from tying covariates (x_2 = ... = x_T by default).

    The surplus counts the "special" moment functions valid only under
    the covariate restriction; the theoretical lower bound is T - 2.
    """
    if T not in (3, 4, 5):
        raise ValueError("the covariate-pattern experiment covers T in {3, 4, 5}")
    tied = tuple(range(2, T + 1)) if tied is None else tuple(tied)
    rng = random.Random(_derive_seed(seed, 2, T, 77))
    c = default_c(2, rng)
    spec = ModelSpec(2, T, init)
    rows = expected_span_rank(2, T, False) + DEFAULT_ROW_MARGIN
    budget = Budget(rows, 3, seed)
    generic = span_rank(spec, c, _generic_b(T, rng), budget)
    pattern = span_rank(spec, c, _generic_b(T, rng, tied), budget)
    pattern_dim = 2**T - pattern.claimed_rank
    generic_dim = 2**T - generic.claimed_rank
    surplus = pattern_dim - generic_dim
    bound = T - 2
    return PatternReport(
        T, init, tied, pattern_dim, generic_dim, surplus, bound, surplus >= bound
    )


@dataclass(frozen=True)
class StackedXReport:
    T: int
    x_draw_count: int
    per_b_ranks: tuple[int, ...]
    stacked_rank: int
    exceeds_2T: bool

    def to_json(self) -> dict:
        return {
            "T": self.T,
            "x_draw_count": self.x_draw_count,
            "per_b_ranks": list(self.per_b_ranks),
            "stacked_rank": self.stacked_rank,
            "exceeds_2T": self.exceeds_2T,
        }


def stacked_x_rank(T: int, x_draw_count: int, seed: int = 0) -> StackedXReport:
    """AR(1): rank of probability rows stacked across distinct covariate paths.

    A moment function that works for every covariate path must annihilate
    the whole stack; its rank generally exceeds the single-path rank 2T.
    """
    if x_draw_count < 2:
        raise ValueError("need at least two covariate draws")
    rng = random.Random(_derive_seed(seed, 1, T, 99))
    c = default_c(1, rng)
    spec = ModelSpec(1, T, (0,))
    rows = min(2 * T + DEFAULT_ROW_MARGIN, 2**T)
    per_b_ranks = []
    stacked = None
    used: set = set()
    for k in range(x_draw_count):
        b = _generic_b(T, rng)
        draws = random_alpha_draws(rows, _derive_seed(seed, 1, T, k), exclude=used)
        used.update(draws.u_list)
        block = build_Pbar(spec, draws, c, b).matrix
        per_b_ranks.append(rank(block))
        stacked = block if stacked is None else stacked.stack(block)
    stacked_rank = rank(stacked)
    return StackedXReport(T, x_draw_count, tuple(per_b_ranks), stacked_rank,
                          stacked_rank > 2 * T)
