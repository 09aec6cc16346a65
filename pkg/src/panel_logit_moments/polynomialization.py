"""Columns of the rescaled probability matrix as exact polynomials in u.

For the model without covariates, every column of Pddot is a polynomial
in u = e^alpha of bounded degree (2T-1 when p=1, 3(T-1) when p=2).  The
rank of the fixed-effect span then equals the rank of the stacked
coefficient matrix, because evaluating polynomials at distinct points is
a full-rank Vandermonde transform.  This gives exact rank certificates
with no sampling at all.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exact_linalg import Q, QONE, QZERO, RationalMatrix, rank, rat_to_str
from .model_core import ModelSpec, index_outcome


@dataclass(frozen=True)
class RationalPoly:
    """Univariate polynomial over exact rationals, coefficient index = power."""

    coeffs: tuple

    @classmethod
    def make(cls, coeffs) -> "RationalPoly":
        cs = [Q(x) if isinstance(x, int) else x for x in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        return cls(tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, u):
        acc = QZERO
        for coef in reversed(self.coeffs):
            acc = acc * u + coef
        return acc

    def __add__(self, other: "RationalPoly") -> "RationalPoly":
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [QZERO] * (n - len(self.coeffs))
        b = list(other.coeffs) + [QZERO] * (n - len(other.coeffs))
        return RationalPoly.make([x + y for x, y in zip(a, b)])

    def __mul__(self, other: "RationalPoly") -> "RationalPoly":
        if not self.coeffs or not other.coeffs:
            return RationalPoly(())
        out = [QZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[i + j] = out[i + j] + a * b
        return RationalPoly.make(out)

    def __pow__(self, n: int) -> "RationalPoly":
        result = RationalPoly.make([1])
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def divexact(self, divisor: "RationalPoly") -> "RationalPoly":
        """Exact polynomial division; raises if the remainder is nonzero."""
        if not divisor.coeffs:
            raise ZeroDivisionError("division by the zero polynomial")
        rem = list(self.coeffs)
        dn = len(divisor.coeffs)
        lead = divisor.coeffs[-1]
        quot = [QZERO] * max(len(rem) - dn + 1, 0)
        for i in range(len(rem) - dn, -1, -1):
            q = rem[i + dn - 1] / lead
            quot[i] = q
            if q:
                for j, d in enumerate(divisor.coeffs):
                    rem[i + j] = rem[i + j] - q * d
        if any(x != 0 for x in rem):
            raise ArithmeticError("polynomial division left a nonzero remainder")
        return RationalPoly.make(quot)

    def to_json(self) -> list[str]:
        return [rat_to_str(x) for x in self.coeffs]


U = RationalPoly.make([0, 1])
ONE_POLY = RationalPoly.make([1])


def _linear(scale) -> RationalPoly:
    """The polynomial 1 + scale*u."""
    return RationalPoly.make([QONE, scale])


def column_poly(spec: ModelSpec, h: int, c) -> RationalPoly:
    """Exact polynomial expansion of the Pddot column for outcome h.

    Evaluating the result at any u reproduces the matrix entry exactly.
    """
    if spec.p not in (1, 2):
        raise ValueError("column polynomials are defined for p in {1, 2}")
    c = tuple(c)
    T = spec.T
    y = index_outcome(h, T)
    if spec.p == 1:
        s = sum(y[: T - 1])
        return (
            _linear(c[0]) ** (T - 1 - s)
            * _linear(QONE) ** s
            * RationalPoly.make([0] * sum(y) + [1])
        )

    c1, c2 = c
    y0 = spec.init[0]
    A, B, C = _linear(c1), _linear(c2), _linear(c1 * c2)
    one = _linear(QONE)
    if y0 == 1:
        num = A ** ((T - 1) // 2) * B ** ((T - 2) // 2) * C ** (T - 1)
    else:
        num = A ** (T // 2) * B ** ((T - 1) // 2) * C ** (T - 2)
    num = num * RationalPoly.make([0] * sum(y) + [1])
    den = ONE_POLY

    def ylag(k):
        return y[k - 1] if k >= 1 else y0

    for t in range(2, T):
        if ylag(t - 1):
            if ylag(t - 2):
                num, den = num * one, den * C
            else:
                num, den = num * one * one, den * A * B
    if ylag(T - 1):
        num, den = num * one, den * (C if ylag(T - 2) else A)
    return num.divexact(den)


def max_degree(spec: ModelSpec) -> int:
    """Stated degree bound: 2T-1 for p=1, 3(T-1) for p=2."""
    return 2 * spec.T - 1 if spec.p == 1 else 3 * (spec.T - 1)


@dataclass(frozen=True)
class RankCertificate:
    """A certified span rank together with how it was obtained."""

    claimed_rank: int
    method: str  # polynomial_exact | sampled_lower_bound
    draws_used: int = 0
    seeds: tuple[int, ...] = ()
    stable_across_trials: bool = True

    def __post_init__(self):
        if self.method not in ("polynomial_exact", "sampled_lower_bound"):
            raise ValueError(f"unknown certification method {self.method!r}")
        if self.method == "sampled_lower_bound" and len(self.seeds) < 3:
            raise ValueError("sampled certificates need at least 3 seeds")

    def to_json(self) -> dict:
        return {
            "claimed_rank": self.claimed_rank,
            "method": self.method,
            "draws_used": self.draws_used,
            "seeds": list(self.seeds),
            "stable_across_trials": self.stable_across_trials,
        }


def coeff_matrix(spec: ModelSpec, c) -> RationalMatrix:
    """Stack all 2^T column polynomials into a (max degree + 1) x 2^T matrix."""
    polys = [column_poly(spec, h, c) for h in range(1, 2**spec.T + 1)]
    nrows = max(p.degree for p in polys) + 1
    cols = []
    for p in polys:
        cols.append(list(p.coeffs) + [QZERO] * (nrows - len(p.coeffs)))
    return RationalMatrix.from_rows(list(zip(*cols)))


def coeff_matrix_rank(spec: ModelSpec, c) -> RankCertificate:
    """Exact span rank via the polynomial coefficient matrix (no covariates)."""
    return RankCertificate(rank(coeff_matrix(spec, c)), "polynomial_exact")
