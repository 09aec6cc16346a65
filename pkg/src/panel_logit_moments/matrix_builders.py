"""Builders for the probability matrices and their structured variants.

Rows index fixed-effect draws u_g = e^{alpha_g}; columns index outcomes in
h-order.  Pbar holds raw probabilities; Pbreve is the diagonally rescaled
form whose entries are free of the 1/(1+odds) normalizers; Pddot is the
further rescaled, polynomial-in-u form defined for the model without
covariates; Ptilde is the 2T x 2T submatrix on the first-k-ones /
last-k-ones columns that witnesses the 2T lower rank bound.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .exact_linalg import Q, QONE, RationalMatrix, rank
from .model_core import (
    ExpParams,
    ModelSpec,
    all_outcomes,
    outcome_index,
    prob_general,
    spec_to_json,
)

RATIONAL_DRAW_BOUND = 10**4


def unit_b(T: int) -> tuple:
    """Covariate index for the model without covariates (b_t = 1 for all t)."""
    return (QONE,) * T


def random_rationals(rng: random.Random, n: int, bound: int = RATIONAL_DRAW_BOUND,
                     exclude=()) -> tuple:
    """n distinct positive rationals with numerator/denominator <= bound."""
    seen = set(exclude)
    out = []
    while len(out) < n:
        x = Q(rng.randint(1, bound), rng.randint(1, bound))
        if x not in seen:
            seen.add(x)
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class AlphaDraws:
    """Distinct positive fixed-effect draws u_g = e^{alpha_g}."""

    u_list: tuple
    seed: int = 0

    def __post_init__(self):
        if len(set(self.u_list)) != len(self.u_list):
            raise ValueError("fixed-effect draws must be pairwise distinct")
        if any(u <= 0 for u in self.u_list):
            raise ValueError("fixed-effect draws must be positive")

    def __len__(self):
        return len(self.u_list)


def random_alpha_draws(n: int, seed: int, bound: int = RATIONAL_DRAW_BOUND,
                       exclude=()) -> AlphaDraws:
    rng = random.Random(seed)
    return AlphaDraws(random_rationals(rng, n, bound, exclude), seed)


@dataclass(frozen=True)
class BuiltMatrix:
    """A constructed matrix plus the outcome index attached to each column."""

    kind: str  # Pbar | Pbreve | Pddot | Ptilde
    spec: ModelSpec
    matrix: RationalMatrix
    column_index_map: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "spec": spec_to_json(self.spec),
            "column_index_map": list(self.column_index_map),
            "entries": self.matrix.to_json(),
        }


def build_Pbar(spec: ModelSpec, draws: AlphaDraws, c=(), b=None) -> BuiltMatrix:
    """Probability matrix: entry (g, h) = Pr(outcome h | init, u_g) exactly."""
    b = unit_b(spec.T) if b is None else tuple(b)
    outcomes = all_outcomes(spec.T)
    rows = []
    for u in draws.u_list:
        params = ExpParams(u, tuple(c), b)
        rows.append([prob_general(y, spec, params) for y in outcomes])
    return BuiltMatrix(
        "Pbar", spec, RationalMatrix.from_rows(rows), tuple(range(1, 2**spec.T + 1))
    )


def _pbreve_entry_ar1(y, P, c):
    """P_{g,T}^{y_T} * prod_{t<T} (P_t (1+P_{t+1}) / (1+P_{t+1} c))^{y_t}."""
    T = len(y)
    val = P[T - 1] if y[T - 1] else QONE
    for t in range(1, T):
        if y[t - 1]:
            val = val * P[t - 1] * (1 + P[t]) / (1 + P[t] * c)
    return val


def _pbreve_entry_ar2(y, y0, P, c1, c2):
    """Three-part AR(2) rescaling with a distinct final (t = T-1) factor.

    Each period's odds denominator 1+P_t c1^{y_{t-1}} c2^{y_{t-2}} is traded
    for 1+P_t, so the entry differs from the raw probability only by a
    row rescaling and a column rescaling.  The (1+P_{t+1})/(1+P_{t+1}c2)
    factor therefore carries exponent 1-y_t: period t+1 owes a lone
    second-lag correction exactly when y_t = 0 and y_{t-1} = 1.
    """
    T = len(y)

    def ylag(k):  # y_k with y_0 from the conditioning history
        return y[k - 1] if k >= 1 else y0

    val = P[T - 1] if y[T - 1] else QONE
    for t in range(2, T):
        if ylag(t - 1):
            scale = c1 * c2 if ylag(t - 2) else c1
            factor = P[t - 2] * (1 + P[t - 1]) / (1 + P[t - 1] * scale)
            if not y[t - 1]:
                factor = factor * (1 + P[t]) / (1 + P[t] * c2)
            val = val * factor
    if ylag(T - 1):
        scale = c1 * c2 if ylag(T - 2) else c1
        val = val * P[T - 2] * (1 + P[T - 1]) / (1 + P[T - 1] * scale)
    if y0 and not y[0]:
        # second-lag correction for period 2, driven by the conditioning history
        val = val * (1 + P[1]) / (1 + P[1] * c2)
    return val


def build_Pbreve(spec: ModelSpec, draws: AlphaDraws, c, b=None) -> BuiltMatrix:
    """Rescaled probability matrix (diagonal relation Pbreve = Dbar Pbar Dbreve)."""
    if spec.p not in (1, 2):
        raise ValueError("Pbreve is defined for p in {1, 2}")
    b = unit_b(spec.T) if b is None else tuple(b)
    c = tuple(c)
    outcomes = all_outcomes(spec.T)
    rows = []
    for u in draws.u_list:
        P = [bt * u for bt in b]
        if spec.p == 1:
            rows.append([_pbreve_entry_ar1(y, P, c[0]) for y in outcomes])
        else:
            y0 = spec.init[0]
            rows.append([_pbreve_entry_ar2(y, y0, P, c[0], c[1]) for y in outcomes])
    return BuiltMatrix(
        "Pbreve", spec, RationalMatrix.from_rows(rows), tuple(range(1, 2**spec.T + 1))
    )


def ratio_rank1_check(pbar: BuiltMatrix, pbreve: BuiltMatrix) -> bool:
    """True iff the elementwise ratio Pbreve/Pbar has rank 1, i.e. the two
    matrices differ by row and column diagonal rescalings."""
    if pbar.spec != pbreve.spec or pbar.column_index_map != pbreve.column_index_map:
        raise ValueError("matrices were built on different specs or column orders")
    if pbar.matrix.rows != pbreve.matrix.rows:
        raise ValueError("row counts differ")
    ratio = []
    for rb, rv in zip(pbar.matrix.data, pbreve.matrix.data):
        if any(x == 0 for x in rb):
            raise ArithmeticError("zero probability entry")  # impossible by positivity
        ratio.append([v / b for v, b in zip(rv, rb)])
    return rank(RationalMatrix.from_rows(ratio)) == 1


def _pddot_entry_ar1(y, u, c):
    T = len(y)
    yS = sum(y)
    s = sum(y[: T - 1])
    val = (1 + u * c) ** (T - 1 - s) * (1 + u) ** s
    return val * u**yS


def _pddot_entry_ar2(y, y0, u, c1, c2, T):
    one = 1 + u
    A = 1 + u * c1
    B = 1 + u * c2
    C = 1 + u * c1 * c2
    if y0 == 1:
        val = A ** ((T - 1) // 2) * B ** ((T - 2) // 2) * C ** (T - 1)
    else:
        val = A ** (T // 2) * B ** ((T - 1) // 2) * C ** (T - 2)
    val = val * u ** sum(y)

    def ylag(k):
        return y[k - 1] if k >= 1 else y0

    for t in range(2, T):
        if ylag(t - 1):
            if ylag(t - 2):
                val = val * one / C
            else:
                val = val * one * one / (A * B)
    if ylag(T - 1):
        val = val * one / (C if ylag(T - 2) else A)
    return val


def build_Pddot(spec: ModelSpec, draws: AlphaDraws, c) -> BuiltMatrix:
    """Polynomial-in-u rescaling of Pbreve for the model without covariates."""
    if spec.p not in (1, 2):
        raise ValueError("Pddot is defined for p in {1, 2}")
    c = tuple(c)
    outcomes = all_outcomes(spec.T)
    rows = []
    for u in draws.u_list:
        if spec.p == 1:
            rows.append([_pddot_entry_ar1(y, u, c[0]) for y in outcomes])
        else:
            y0 = spec.init[0]
            rows.append([_pddot_entry_ar2(y, y0, u, c[0], c[1], spec.T) for y in outcomes])
    return BuiltMatrix(
        "Pddot", spec, RationalMatrix.from_rows(rows), tuple(range(1, 2**spec.T + 1))
    )


def lemma1_columns(T: int) -> tuple[int, ...]:
    """Outcome indices of the 2T first-k-ones / last-k-ones columns.

    Odd slots 2k+1 hold the first-k-ones outcome (k = 0..T-1), even slots
    2(k+1) hold the last-(k+1)-ones outcome.
    """
    if T < 2:
        raise ValueError("T must be at least 2")
    out = []
    for k in range(T):
        first_k = tuple(1 if t < k else 0 for t in range(T))
        last_k1 = tuple(1 if t >= T - (k + 1) else 0 for t in range(T))
        out.append(outcome_index(first_k))
        out.append(outcome_index(last_k1))
    return tuple(out)


def footnote1_columns(T: int, rng: random.Random) -> tuple[int, ...]:
    """A random admissible column selection: the all-zeros and all-ones
    outcomes plus, for each 1 <= k <= T-1, one outcome with k ones ending
    in 0 and one ending in 1."""
    import itertools

    out = [1, 2**T]
    for k in range(1, T):
        with_last0 = []
        with_last1 = []
        for ones_pos in itertools.combinations(range(T), k):
            y = tuple(1 if t in ones_pos else 0 for t in range(T))
            (with_last1 if y[T - 1] else with_last0).append(outcome_index(y))
        out.append(rng.choice(with_last0))
        out.append(rng.choice(with_last1))
    return tuple(out)


def build_Ptilde(T: int, draws: AlphaDraws, c) -> BuiltMatrix:
    """The 2T x 2T matrix on the lemma1_columns selection, built from its
    closed-form entries (u(1+u)/(1+cu))^k and u * (u(1+u)/(1+cu))^k."""
    if len(draws) != 2 * T:
        raise ValueError(f"Ptilde needs exactly {2 * T} fixed-effect draws")
    if c == 1:
        raise ValueError("Ptilde requires c != 1 (nonzero state dependence)")
    rows = []
    for u in draws.u_list:
        base = u * (1 + u) / (1 + c * u)
        row = []
        for k in range(T):
            row.append(base**k)
            row.append(u * base**k)
        rows.append(row)
    spec = ModelSpec(1, T, (0,))
    return BuiltMatrix("Ptilde", spec, RationalMatrix.from_rows(rows), lemma1_columns(T))
