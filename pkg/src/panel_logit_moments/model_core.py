"""Model specification and exact outcome probabilities for panel logit AR(p).

Parameters live in exponentiated space: u = e^alpha (fixed effect),
c_l = e^{gamma_l} (state dependence), b_t = e^{x_t' beta} (covariate
index).  Every conditional outcome probability is then a rational
function of these, so probabilities are computed exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exact_linalg import Q, QONE

SUPPORTED_LAGS = (0, 1, 2, 3)


@dataclass(frozen=True)
class ModelSpec:
    """Lag order, horizon, and conditioning history (y_0, y_-1, ...)."""

    p: int
    T: int
    init: tuple[int, ...] = ()

    def __post_init__(self):
        if self.p not in SUPPORTED_LAGS:
            raise ValueError(f"unsupported lag order p={self.p}")
        if self.T < 2:
            raise ValueError(f"horizon must be at least 2, got T={self.T}")
        if len(self.init) != self.p:
            raise ValueError(f"init must have length p={self.p}, got {self.init}")
        if any(v not in (0, 1) for v in self.init):
            raise ValueError(f"init entries must be 0/1, got {self.init}")


@dataclass(frozen=True)
class ExpParams:
    """Exponentiated parameters (u, c_1..c_p, b_1..b_T), all positive rationals."""

    u: object
    c: tuple = ()
    b: tuple = ()

    def __post_init__(self):
        if self.u <= 0 or any(x <= 0 for x in self.c) or any(x <= 0 for x in self.b):
            raise ValueError("exponentiated parameters must be strictly positive")

    @classmethod
    def make(cls, u, c=(), b=()) -> "ExpParams":
        conv = lambda x: Q(x) if isinstance(x, int) else x
        return cls(conv(u), tuple(conv(x) for x in c), tuple(conv(x) for x in b))


def outcome_index(y) -> int:
    """1-based index h = 1 + sum_t 2^(t-1) y_t of an outcome bit vector."""
    return 1 + sum(bit << t for t, bit in enumerate(y))


def index_outcome(h: int, T: int) -> tuple[int, ...]:
    """Inverse of outcome_index: the bit vector (y_1, ..., y_T) for index h."""
    if not 1 <= h <= 2**T:
        raise ValueError(f"outcome index {h} out of range for T={T}")
    return tuple((h - 1) >> t & 1 for t in range(T))


def all_outcomes(T: int):
    """All outcome bit vectors in index order h = 1..2^T."""
    return [index_outcome(h, T) for h in range(1, 2**T + 1)]


def _lagged(y, init, k: int) -> int:
    """y_k with k <= 0 resolved from the conditioning history."""
    return y[k - 1] if k >= 1 else init[-k]


def prob_ar1(y, spec: ModelSpec, params: ExpParams):
    """Exact AR(1) outcome probability: product of logistic factors with
    odds b_t * c^{y_{t-1}} * u."""
    if spec.p != 1:
        raise ValueError("prob_ar1 requires p=1")
    (c,) = params.c
    prob = QONE
    prev = spec.init[0]
    for t in range(1, spec.T + 1):
        odds = params.b[t - 1] * params.u
        if prev:
            odds = odds * c
        prob = prob * (odds if y[t - 1] else QONE) / (1 + odds)
        prev = y[t - 1]
    return prob


def prob_ar2(y, spec: ModelSpec, params: ExpParams):
    """Exact AR(2) outcome probability with odds b_t * c1^{y_{t-1}} * c2^{y_{t-2}} * u."""
    if spec.p != 2:
        raise ValueError("prob_ar2 requires p=2")
    c1, c2 = params.c
    prob = QONE
    for t in range(1, spec.T + 1):
        odds = params.b[t - 1] * params.u
        if _lagged(y, spec.init, t - 1):
            odds = odds * c1
        if _lagged(y, spec.init, t - 2):
            odds = odds * c2
        prob = prob * (odds if y[t - 1] else QONE) / (1 + odds)
    return prob


def prob_general(y, spec: ModelSpec, params: ExpParams):
    """Exact AR(p) outcome probability for p in {0, 1, 2, 3}."""
    if spec.p not in SUPPORTED_LAGS:
        raise ValueError(f"unsupported lag order p={spec.p}")
    prob = QONE
    for t in range(1, spec.T + 1):
        odds = params.b[t - 1] * params.u
        for lag in range(1, spec.p + 1):
            if _lagged(y, spec.init, t - lag):
                odds = odds * params.c[lag - 1]
        prob = prob * (odds if y[t - 1] else QONE) / (1 + odds)
    return prob


def spec_to_json(spec: ModelSpec) -> dict:
    return {"p": spec.p, "T": spec.T, "init": "".join(str(v) for v in spec.init)}


def spec_from_json(obj: dict) -> ModelSpec:
    return ModelSpec(obj["p"], obj["T"], tuple(int(ch) for ch in obj["init"]))
