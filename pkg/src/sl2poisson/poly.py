"""Exact multivariate polynomials with rational coefficients.

The whole exact layer of the library (graded fields, Schouten brackets,
Chevalley-Eilenberg matrices, the norm ring) is built on this class, so it
favors exactness and canonical ordering over raw speed.  Coefficients are
`fractions.Fraction`; exponent keys are tuples of non-negative ints.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DivisionFails

Exponent = tuple[int, ...]


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"coefficient must be exact (int/Fraction/str), got {type(c)!r}")


class PolyExpr:
    """Polynomial in ``nvars`` variables over Q, stored sparsely.

    Zero coefficients are never stored, which makes equality and zero tests
    structural.
    """

    __slots__ = ("nvars", "coeffs")

    def __init__(self, nvars: int, coeffs: Mapping[Exponent, Fraction] | None = None):
        self.nvars = nvars
        clean: dict[Exponent, Fraction] = {}
        if coeffs:
            for expo, c in coeffs.items():
                c = _as_fraction(c)
                if c == 0:
                    continue
                if len(expo) != nvars or any(e < 0 for e in expo):
                    raise ValueError(f"bad exponent {expo} for nvars={nvars}")
                clean[tuple(expo)] = c
        self.coeffs = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, nvars: int) -> "PolyExpr":
        return cls(nvars, {})

    @classmethod
    def constant(cls, nvars: int, c) -> "PolyExpr":
        return cls(nvars, {(0,) * nvars: _as_fraction(c)})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "PolyExpr":
        expo = [0] * nvars
        expo[i] = 1
        return cls(nvars, {tuple(expo): Fraction(1)})

    @classmethod
    def monomial(cls, nvars: int, expo: Sequence[int], c=1) -> "PolyExpr":
        return cls(nvars, {tuple(expo): _as_fraction(c)})

    # -- ring operations ----------------------------------------------------

    def __add__(self, other) -> "PolyExpr":
        other = self._coerce(other)
        out = dict(self.coeffs)
        for expo, c in other.coeffs.items():
            s = out.get(expo, Fraction(0)) + c
            if s == 0:
                out.pop(expo, None)
            else:
                out[expo] = s
        return PolyExpr(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "PolyExpr":
        return PolyExpr(self.nvars, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other) -> "PolyExpr":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "PolyExpr":
        return self._coerce(other) - self

    def __mul__(self, other) -> "PolyExpr":
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            if c == 0:
                return PolyExpr.zero(self.nvars)
            return PolyExpr(self.nvars, {e: c * v for e, v in self.coeffs.items()})
        other = self._coerce(other)
        out: dict[Exponent, Fraction] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, Fraction(0)) + c1 * c2
                if s == 0:
                    out.pop(e, None)
                else:
                    out[e] = s
        return PolyExpr(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "PolyExpr":
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        out = PolyExpr.constant(self.nvars, 1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def _coerce(self, other) -> "PolyExpr":
        if isinstance(other, PolyExpr):
            if other.nvars != self.nvars:
                raise ValueError("mixing polynomials with different nvars")
            return other
        if isinstance(other, (int, Fraction)):
            return PolyExpr.constant(self.nvars, other)
        raise TypeError(f"cannot coerce {type(other)!r} to PolyExpr")

    # -- predicates ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = PolyExpr.constant(self.nvars, other)
        if not isinstance(other, PolyExpr):
            return NotImplemented
        return self.nvars == other.nvars and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.nvars, frozenset(self.coeffs.items())))

    def total_degree(self) -> int:
        if not self.coeffs:
            return 0
        return max(sum(e) for e in self.coeffs)

    # -- calculus -----------------------------------------------------------

    def partial(self, i: int) -> "PolyExpr":
        """Plain partial derivative d/dx_i (no factorial normalization)."""
        out: dict[Exponent, Fraction] = {}
        for expo, c in self.coeffs.items():
            if expo[i] == 0:
                continue
            e = list(expo)
            k = e[i]
            e[i] = k - 1
            key = tuple(e)
            s = out.get(key, Fraction(0)) + c * k
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
        return PolyExpr(self.nvars, out)

    def substitute(self, images: Sequence["PolyExpr"]) -> "PolyExpr":
        """Ring homomorphism sending x_i to images[i] (all in the same ring)."""
        if len(images) != self.nvars:
            raise ValueError("need one image per variable")
        target_nvars = images[0].nvars
        out = PolyExpr.zero(target_nvars)
        for expo, c in self.coeffs.items():
            term = PolyExpr.constant(target_nvars, c)
            for i, k in enumerate(expo):
                if k:
                    term = term * images[i] ** k
            out = out + term
        return out

    def divide_exact(self, divisor: "PolyExpr") -> "PolyExpr":
        """Exact division; raises DivisionFails when the remainder is nonzero.

        Multivariate reduction against a single divisor with graded-lex
        leading term; sufficient for the divisors used here (x, y, x*y,
        x^2+y^2).
        """
        divisor = self._coerce(divisor)
        if divisor.is_zero():
            raise DivisionFails("division by zero polynomial")
        lead = max(divisor.coeffs, key=_gradedlex_key)
        lead_c = divisor.coeffs[lead]
        rem = self
        quot = PolyExpr.zero(self.nvars)
        while not rem.is_zero():
            cand = max(rem.coeffs, key=_gradedlex_key)
            diff = tuple(a - b for a, b in zip(cand, lead))
            if any(d < 0 for d in diff):
                raise DivisionFails(f"not divisible: remainder term {cand}")
            c = rem.coeffs[cand] / lead_c
            mono = PolyExpr.monomial(self.nvars, diff, c)
            quot = quot + mono
            rem = rem - mono * divisor
        return quot

    # -- evaluation ---------------------------------------------------------

    def eval_exact(self, point: Sequence) -> Fraction:
        """Evaluate at a rational point; exact."""
        total = Fraction(0)
        for expo, c in self.coeffs.items():
            term = c
            for x, k in zip(point, expo):
                if k:
                    term *= Fraction(x) ** k
            total += term
        return total

    def eval_batch(self, points: np.ndarray) -> np.ndarray:
        """Evaluate at float points, shape (N, nvars) -> (N,)."""
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        if single:
            points = points[None, :]
        if not self.coeffs:
            out = np.zeros(points.shape[0])
            return out[0] if single else out
        expos = np.array(sorted(self.coeffs), dtype=np.int64)  # (K, nvars)
        cs = np.array([float(self.coeffs[tuple(e)]) for e in expos])
        # (N, K) monomial matrix
        mono = np.prod(points[:, None, :] ** expos[None, :, :], axis=2)
        out = mono @ cs
        return out[0] if single else out

    # -- canonical text form --------------------------------------------------

    def canonical_str(self, names: Sequence[str] | None = None) -> str:
        """Deterministic text form: graded-lex sorted, rationals as p/q."""
        if not self.coeffs:
            return "0"
        if names is None:
            names = [f"x{i}" for i in range(self.nvars)]
        parts = []
        for expo in sorted(self.coeffs, key=_gradedlex_key, reverse=True):
            c = self.coeffs[expo]
            factors = [f"{names[i]}^{k}" if k > 1 else names[i]
                       for i, k in enumerate(expo) if k]
            head = f"{c.numerator}" if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
            parts.append("*".join([head] + factors) if factors else head)
        return " + ".join(parts)

    def __repr__(self):
        return f"PolyExpr({self.canonical_str()})"


def _gradedlex_key(expo: Exponent):
    return (sum(expo), expo)


def gradedlex_monomials(nvars: int, degree: int) -> list[Exponent]:
    """All exponents of total degree exactly ``degree``, graded-lex descending."""
    out: list[Exponent] = []

    def rec(prefix: list[int], remaining: int, pos: int):
        if pos == nvars - 1:
            out.append(tuple(prefix + [remaining]))
            return
        for k in range(remaining, -1, -1):
            rec(prefix + [k], remaining - k, pos + 1)

    rec([], degree, 0)
    out.sort(key=_gradedlex_key, reverse=True)
    return out


def multi_factorial(a: Iterable[int]) -> int:
    out = 1
    for k in a:
        out *= math.factorial(k)
    return out
