"""Graded fields on R^6: multivector fields and differential forms.

Coefficients are exact (`PolyExpr`, or `RationalCoeff` for objects with a
power of the squared radius in the denominator) or point-callables for
purely numeric objects.  Antisymmetry is implicit: components are keyed by
strictly increasing index tuples.

The Schouten bracket uses the odd-coordinate ("theta") calculus: writing a
multivector as a superfield in anticommuting coordinates theta_i ~ d/dx_i,

    [P, Q] = P*Q - (-1)^((p-1)(q-1)) Q*P,
    P*Q    = sum_i (dP/dtheta_i) ^ (dQ/dx_i).

The sign conventions are pinned by executable identities: on vector fields
the bracket is the Lie bracket, on (vector, function) it is the directional
derivative, and [pi, g] is the Hamiltonian field with {g, h} = pi(dg, dh).
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DegreeOverflow,
    NotPoisson,
    NumericCoefficient,
    VarianceMismatch,
)
from .poly import PolyExpr

Index = tuple[int, ...]

MULTIVECTOR = "multivector"
FORM = "form"


class RationalCoeff:
    """Coefficient of the shape P / rho^m with rho = sum of squared coordinates.

    Exact: numerator is a PolyExpr, denominator a power of rho.  Supports the
    ring/calculus operations GradedField needs, normalizing by exact division
    when the numerator is divisible by rho.
    """

    __slots__ = ("num", "m", "nvars")

    def __init__(self, num: PolyExpr, m: int = 0):
        if m < 0:
            raise ValueError("denominator power must be >= 0")
        self.nvars = num.nvars
        while m > 0:
            try:
                num = num.divide_exact(_rho(num.nvars))
                m -= 1
            except Exception:
                break
        self.num = num
        self.m = m

    def _align(self, other: "RationalCoeff") -> tuple[PolyExpr, PolyExpr, int]:
        m = max(self.m, other.m)
        rho = _rho(self.nvars)
        a = self.num * rho ** (m - self.m)
        b = other.num * rho ** (m - other.m)
        return a, b, m

    def __add__(self, other):
        other = _coerce_rational(other, self.nvars)
        a, b, m = self._align(other)
        return RationalCoeff(a + b, m)

    __radd__ = __add__

    def __neg__(self):
        return RationalCoeff(-self.num, self.m)

    def __sub__(self, other):
        return self + (-_coerce_rational(other, self.nvars))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RationalCoeff(self.num * other, self.m)
        other = _coerce_rational(other, self.nvars)
        return RationalCoeff(self.num * other.num, self.m + other.m)

    __rmul__ = __mul__

    def partial(self, i: int) -> "RationalCoeff":
        rho = _rho(self.nvars)
        dnum = self.num.partial(i)
        if self.m == 0:
            return RationalCoeff(dnum, 0)
        drho = rho.partial(i)  # 2 x_i
        return RationalCoeff(dnum * rho - self.num * drho * self.m, self.m + 1)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, PolyExpr)):
            other = _coerce_rational(other, self.nvars)
        if not isinstance(other, RationalCoeff):
            return NotImplemented
        a, b, _ = self._align(other)
        return a == b

    def __hash__(self):
        return hash((self.num, self.m))

    def eval_batch(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        rho = np.sum(np.atleast_2d(points) ** 2, axis=1)
        vals = self.num.eval_batch(points) / rho ** self.m
        return vals if points.ndim > 1 else vals

    def canonical_str(self, names=None) -> str:
        s = self.num.canonical_str(names)
        return s if self.m == 0 else f"({s})/rho^{self.m}"

    def __repr__(self):
        return f"RationalCoeff({self.canonical_str()})"


def _rho(nvars: int) -> PolyExpr:
    out = PolyExpr.zero(nvars)
    for i in range(nvars):
        out = out + PolyExpr.variable(nvars, i) ** 2
    return out


def _coerce_rational(c, nvars: int) -> RationalCoeff:
    if isinstance(c, RationalCoeff):
        return c
    if isinstance(c, PolyExpr):
        return RationalCoeff(c, 0)
    if isinstance(c, (int, Fraction)):
        return RationalCoeff(PolyExpr.constant(nvars, c), 0)
    raise TypeError(f"cannot coerce {type(c)!r} to RationalCoeff")


def merge_sign(left: Index, right: Index) -> tuple[int, Index] | None:
    """Sign and merged key for wedging dx_left ^ dx_right; None if they overlap."""
    if set(left) & set(right):
        return None
    merged = left + right
    # count inversions between the two sorted halves
    inv = 0
    for a in left:
        for b in right:
            if a > b:
                inv += 1
    return (-1) ** inv, tuple(sorted(merged))


def removal_sign(key: Index, i: int) -> int:
    """Sign of d/dtheta_i acting on theta_key (i must be in key)."""
    return (-1) ** key.index(i)


class GradedField:
    """Homogeneous multivector field or differential form of fixed degree."""

    __slots__ = ("variance", "nvars", "degree", "coeffs")

    def __init__(self, variance: str, degree: int, coeffs: Mapping[Index, object],
                 nvars: int = 6):
        if variance not in (MULTIVECTOR, FORM):
            raise ValueError(f"variance must be multivector|form, got {variance}")
        if not 0 <= degree <= nvars:
            raise DegreeOverflow(f"degree {degree} outside 0..{nvars}")
        self.variance = variance
        self.nvars = nvars
        self.degree = degree
        clean: dict[Index, object] = {}
        for key, c in coeffs.items():
            key = tuple(key)
            if len(key) != degree or list(key) != sorted(set(key)):
                raise ValueError(f"component key {key} must be strictly increasing of length {degree}")
            if _is_zero_coeff(c):
                continue
            clean[key] = c
        self.coeffs = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, variance: str, degree: int, nvars: int = 6) -> "GradedField":
        return cls(variance, degree, {}, nvars)

    @classmethod
    def function(cls, variance: str, c, nvars: int = 6) -> "GradedField":
        return cls(variance, 0, {(): c}, nvars)

    @classmethod
    def basis(cls, variance: str, key: Sequence[int], nvars: int = 6) -> "GradedField":
        one = PolyExpr.constant(nvars, 1)
        return cls(variance, len(key), {tuple(key): one}, nvars)

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "GradedField") -> "GradedField":
        self._check_compatible(other)
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            if key in out:
                s = out[key] + c
                if _is_zero_coeff(s):
                    del out[key]
                else:
                    out[key] = s
            else:
                out[key] = c
        return GradedField(self.variance, self.degree, out, self.nvars)

    def __neg__(self) -> "GradedField":
        return GradedField(self.variance, self.degree,
                           {k: -c for k, c in self.coeffs.items()}, self.nvars)

    def __sub__(self, other: "GradedField") -> "GradedField":
        return self + (-other)

    def __mul__(self, scalar) -> "GradedField":
        return GradedField(self.variance, self.degree,
                           {k: c * scalar for k, c in self.coeffs.items()}, self.nvars)

    __rmul__ = __mul__

    def _check_compatible(self, other: "GradedField"):
        if self.variance != other.variance:
            raise VarianceMismatch(f"{self.variance} vs {other.variance}")
        if self.degree != other.degree or self.nvars != other.nvars:
            raise ValueError("degree/nvars mismatch")

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if not isinstance(other, GradedField):
            return NotImplemented
        if self.variance != other.variance or self.degree != other.degree:
            return False
        return (self - other).is_zero()

    def has_exact_coeffs(self) -> bool:
        return all(not callable(c) for c in self.coeffs.values())

    def _require_exact(self, op: str):
        if not self.has_exact_coeffs():
            raise NumericCoefficient(f"{op} requires exact coefficients")

    # -- graded algebra ------------------------------------------------------

    def wedge(self, other: "GradedField") -> "GradedField":
        if self.variance != other.variance:
            raise VarianceMismatch(f"{self.variance} vs {other.variance}")
        if self.degree + other.degree > self.nvars:
            raise DegreeOverflow(
                f"wedge degree {self.degree}+{other.degree} exceeds {self.nvars}")
        out: dict[Index, object] = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                merged = merge_sign(k1, k2)
                if merged is None:
                    continue
                sign, key = merged
                term = c1 * c2 if sign == 1 else -(c1 * c2)
                if key in out:
                    s = out[key] + term
                    if _is_zero_coeff(s):
                        del out[key]
                    else:
                        out[key] = s
                else:
                    out[key] = term
        return GradedField(self.variance, self.degree + other.degree, out, self.nvars)

    def theta_partial(self, i: int) -> "GradedField":
        """Odd partial derivative: drop index i with its positional sign."""
        out: dict[Index, object] = {}
        for key, c in self.coeffs.items():
            if i not in key:
                continue
            sign = removal_sign(key, i)
            newkey = tuple(j for j in key if j != i)
            out[newkey] = c if sign == 1 else -c
        return GradedField(self.variance, self.degree - 1, out, self.nvars)

    def coeff_partial(self, i: int) -> "GradedField":
        self._require_exact("coefficient derivative")
        return GradedField(self.variance, self.degree,
                           {k: c.partial(i) for k, c in self.coeffs.items()}, self.nvars)

    # -- calculus -------------------------------------------------------------

    def ext_deriv(self) -> "GradedField":
        """Exterior derivative of an exact-coefficient form."""
        if self.variance != FORM:
            raise VarianceMismatch("exterior derivative acts on forms")
        self._require_exact("exterior derivative")
        out = GradedField.zero(FORM, self.degree + 1, self.nvars)
        for key, c in self.coeffs.items():
            for i in range(self.nvars):
                dc = c.partial(i)
                if _is_zero_coeff(dc):
                    continue
                merged = merge_sign((i,), key)
                if merged is None:
                    continue
                sign, newkey = merged
                term = GradedField(FORM, self.degree + 1,
                                   {newkey: dc if sign == 1 else -dc}, self.nvars)
                out = out + term
        return out

    def contract(self, other: "GradedField") -> "GradedField":
        """Interior product pairing a 1-form into a multivector (or a
        1-vector into a form): contraction on the first slot."""
        if other.degree != 1:
            raise ValueError("contraction argument must have degree 1")
        if other.variance == self.variance:
            raise VarianceMismatch("contraction needs opposite variance")
        out = GradedField.zero(self.variance, self.degree - 1, self.nvars)
        for (i,), xi in other.coeffs.items():
            part = self.theta_partial(i)
            if part.is_zero():
                continue
            out = out + GradedField(self.variance, self.degree - 1,
                                    {k: xi * c for k, c in part.coeffs.items()},
                                    self.nvars)
        return out

    # -- Schouten-Nijenhuis ----------------------------------------------------

    def schouten(self, other: "GradedField") -> "GradedField":
        """Schouten-Nijenhuis bracket of two multivector fields.

        Computed monomial-pair-wise from the odd-Laplacian generator
        identity, normalized to the convention where the bracket of two
        vector fields is the Lie bracket and [pi, g] = -i_{dg} pi.
        """
        if self.variance != MULTIVECTOR or other.variance != MULTIVECTOR:
            raise VarianceMismatch("Schouten bracket acts on multivector fields")
        self._require_exact("Schouten bracket")
        other._require_exact("Schouten bracket")
        p, q = self.degree, other.degree
        out_degree = p + q - 1
        if out_degree < 0:
            return GradedField.zero(MULTIVECTOR, 0, self.nvars)
        if out_degree > self.nvars:
            raise DegreeOverflow(f"bracket degree {out_degree} exceeds {self.nvars}")
        acc: dict[Index, object] = {}
        psign = (-1) ** (p + 1)
        for key_i, a in self.coeffs.items():
            set_i = set(key_i)
            for key_j, b in other.coeffs.items():
                set_j = set(key_j)
                for i in key_i:
                    s = removal_sign(key_i, i)
                    left = tuple(t for t in key_i if t != i)
                    merged = merge_sign(left, key_j)
                    if merged is None:
                        continue
                    msign, key = merged
                    if i not in set_j:
                        c = a * b.partial(i)
                    else:
                        c = -(b * a.partial(i))
                    _accumulate(acc, key, c, psign * s * msign)
                for i in key_j:
                    s = removal_sign(key_j, i)
                    right = tuple(t for t in key_j if t != i)
                    merged = merge_sign(key_i, right)
                    if merged is None:
                        continue
                    msign, key = merged
                    if i not in set_i:
                        c = b * a.partial(i)
                        sgn = (-1) ** p
                    else:
                        c = a * b.partial(i)
                        sgn = -((-1) ** p)
                    _accumulate(acc, key, c, psign * sgn * s * msign)
        return GradedField(MULTIVECTOR, out_degree, acc, self.nvars)

    # -- evaluation -------------------------------------------------------------

    def eval_coeffs(self, points: np.ndarray) -> dict[Index, np.ndarray]:
        """Evaluate all component functions at float points (N, nvars)."""
        points = np.asarray(points, dtype=float)
        out = {}
        for key, c in self.coeffs.items():
            if callable(c):
                out[key] = np.asarray(c(points), dtype=float)
            else:
                out[key] = c.eval_batch(points)
        return out

    def eval_multilinear(self, points: np.ndarray, vectors: Sequence[np.ndarray]) -> np.ndarray:
        """Evaluate the field as an alternating multilinear map.

        ``points``: (N, nvars); ``vectors``: degree-many arrays (N, nvars).
        Forms eat vectors; multivectors eat covector components the same way.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n = points.shape[0]
        if len(vectors) != self.degree:
            raise ValueError(f"need {self.degree} argument slots")
        vals = np.zeros(n)
        if self.degree == 0:
            for key, c in self.eval_coeffs(points).items():
                vals = vals + c
            return vals
        vecs = [np.broadcast_to(np.asarray(v, dtype=float), (n, self.nvars))
                for v in vectors]
        stack = np.stack(vecs, axis=1)  # (N, k, nvars)
        for key, cvals in self.eval_coeffs(points).items():
            minor = stack[:, :, key]  # (N, k, k)
            vals = vals + cvals * np.linalg.det(minor)
        return vals

    # -- canonical text ---------------------------------------------------------

    def canonical_str(self, names: Sequence[str] | None = None) -> str:
        if names is None:
            names = [f"x{i}" for i in range(self.nvars)]
        sym = "d" if self.variance == FORM else "@"
        lines = [f"{self.variance} degree={self.degree}"]
        for key in sorted(self.coeffs):
            c = self.coeffs[key]
            cs = c.canonical_str(names) if hasattr(c, "canonical_str") else "<callable>"
            basis = "^".join(f"{sym}{names[i]}" for i in key) if key else "1"
            lines.append(f"{basis}: {cs}")
        return "\n".join(lines)

    def __repr__(self):
        return f"GradedField({self.variance}, deg={self.degree}, {len(self.coeffs)} terms)"


def _accumulate(acc: dict, key: Index, c, sign: int) -> None:
    term = c if sign == 1 else -c
    if key in acc:
        s = acc[key] + term
        if _is_zero_coeff(s):
            del acc[key]
        else:
            acc[key] = s
    else:
        if not _is_zero_coeff(term):
            acc[key] = term


def _is_zero_coeff(c) -> bool:
    if callable(c):
        return False
    if isinstance(c, (int, Fraction)):
        return c == 0
    return c.is_zero()


_POISSON_VERIFIED: set[int] = set()


def lichnerowicz(pi: GradedField, field: GradedField) -> GradedField:
    """Differential [pi, .] of a Poisson bivector; checks [pi,pi]=0 once per pi."""
    if pi.degree != 2 or pi.variance != MULTIVECTOR:
        raise NotPoisson("pi must be a bivector field")
    key = id(pi)
    if key not in _POISSON_VERIFIED:
        if not pi.schouten(pi).is_zero():
            raise NotPoisson("[pi, pi] != 0")
        _POISSON_VERIFIED.add(key)
    return pi.schouten(field)


def wedge(a: GradedField, b: GradedField) -> GradedField:
    return a.wedge(b)


def ext_deriv(omega: GradedField) -> GradedField:
    return omega.ext_deriv()


def schouten(a: GradedField, b: GradedField) -> GradedField:
    return a.schouten(b)


def all_index_tuples(nvars: int, degree: int) -> list[Index]:
    return list(combinations(range(nvars), degree))
