"""Flat-at-zero test inputs: the closed family exp(-c/rho) * P / rho^m.

rho is the squared euclidean norm.  The family is closed under plain partial
differentiation, which is what makes exterior derivatives of the test forms
available in closed form, and every member vanishes to infinite order at 0,
which is what the tail bounds of the homotopy operators require.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import combinations

import numpy as np

from .poly import PolyExpr

_EXP_CLIP = 700.0


def _rho_poly(dim: int) -> PolyExpr:
    out = PolyExpr.zero(dim)
    for i in range(dim):
        out = out + PolyExpr.variable(dim, i) ** 2
    return out


@dataclass
class FlatTestFunction:
    """exp(-c / rho) * P / rho^m on R^dim, extended by 0 at the origin."""

    dim: int
    c: Fraction
    P: PolyExpr
    m: int = 0
    _partials: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.c = Fraction(self.c)
        if self.c <= 0:
            raise ValueError("decay rate c must be positive")
        if self.m < 0:
            raise ValueError("denominator power m must be >= 0")
        # keep the representation small: strip rho factors shared with rho^m
        while self.m > 0:
            try:
                self.P = self.P.divide_exact(_rho_poly(self.dim))
                self.m -= 1
            except Exception:
                break

    @classmethod
    def constant_profile(cls, dim: int, c=1) -> "FlatTestFunction":
        return cls(dim=dim, c=Fraction(c), P=PolyExpr.constant(dim, 1), m=0)

    def partial(self, i: int) -> "FlatTestFunction":
        """Plain d/dx_i; stays in the family."""
        if i in self._partials:
            return self._partials[i]
        rho = _rho_poly(self.dim)
        xi2 = 2 * PolyExpr.variable(self.dim, i)
        newp = (self.P.partial(i) * rho) * rho \
            + (self.P * xi2) * self.c - (self.P * xi2 * rho) * self.m
        out = FlatTestFunction(dim=self.dim, c=self.c, P=newp, m=self.m + 2)
        self._partials[i] = out
        return out

    def scaled(self, a) -> "FlatTestFunction":
        return FlatTestFunction(dim=self.dim, c=self.c, P=self.P * Fraction(a), m=self.m)

    def mul_poly(self, q: PolyExpr) -> "FlatTestFunction":
        return FlatTestFunction(dim=self.dim, c=self.c, P=self.P * q, m=self.m)

    def eval_batch(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        rho = np.sum(points ** 2, axis=1)
        safe = np.where(rho == 0.0, 1.0, rho)
        # exp(-c/rho - m log rho) avoids 0 * inf at small rho
        expo = -float(self.c) / safe - self.m * np.log(safe)
        damp = np.exp(np.clip(expo, -_EXP_CLIP, _EXP_CLIP))
        vals = self.P.eval_batch(points) * damp
        return np.where(rho == 0.0, 0.0, vals)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.eval_batch(points)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "c": str(self.c),
            "m": self.m,
            "P": {",".join(map(str, e)): str(v) for e, v in self.P.coeffs.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FlatTestFunction":
        dim = int(data["dim"])
        coeffs = {tuple(int(t) for t in key.split(",")): Fraction(v)
                  for key, v in data["P"].items()}
        return cls(dim=dim, c=Fraction(data["c"]),
                   P=PolyExpr(dim, coeffs), m=int(data["m"]))


class FlatForm:
    """Differential form with FlatTestFunction coefficients on R^6."""

    def __init__(self, degree: int, coeffs: dict[tuple[int, ...], FlatTestFunction],
                 dim: int = 6, name: str = ""):
        self.degree = degree
        self.dim = dim
        self.name = name
        self.coeffs = {tuple(k): v for k, v in coeffs.items() if v is not None}
        for k in self.coeffs:
            if len(k) != degree or list(k) != sorted(set(k)):
                raise ValueError(f"bad component key {k}")
        self.singular_locus = None  # smooth everywhere (flat at 0)
        self.derivative_budget = None  # closed-form derivatives, unbounded

    def d(self) -> "FlatForm":
        """Exterior derivative, closed form within the family."""
        out: dict[tuple[int, ...], FlatTestFunction] = {}
        for key, coeff in self.coeffs.items():
            for i in range(self.dim):
                if i in key:
                    continue
                dcoeff = coeff.partial(i)
                pos = sum(1 for t in key if t < i)
                sign = (-1) ** pos
                newkey = tuple(sorted(key + (i,)))
                term = dcoeff if sign == 1 else dcoeff.scaled(-1)
                out[newkey] = _add_flat(out[newkey], term) if newkey in out else term
        return FlatForm(self.degree + 1, out, self.dim, name=f"d({self.name})")

    def eval(self, points: np.ndarray, vectors) -> np.ndarray:
        """Alternating evaluation; points (N, dim), vectors k arrays (N, dim)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        n = points.shape[0]
        if self.degree == 0:
            total = np.zeros(n)
            for coeff in self.coeffs.values():
                total += coeff.eval_batch(points)
            return total
        vecs = [np.broadcast_to(np.asarray(v, dtype=float), (n, self.dim))
                for v in vectors]
        stack = np.stack(vecs, axis=1)
        total = np.zeros(n)
        for key, coeff in self.coeffs.items():
            total += coeff.eval_batch(points) * np.linalg.det(stack[:, :, key])
        return total

    def wedge_poly_form(self, other) -> "FlatForm":
        """Wedge with an exact polynomial-coefficient form (GradedField)."""
        out: dict[tuple[int, ...], FlatTestFunction] = {}
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                if set(k1) & set(k2):
                    continue
                inv = sum(1 for a in k1 for b in k2 if a > b)
                sign = (-1) ** inv
                key = tuple(sorted(k1 + k2))
                term = c1.mul_poly(c2 * Fraction(sign))
                out[key] = _add_flat(out[key], term) if key in out else term
        return FlatForm(self.degree + other.degree, out, self.dim,
                        name=f"{self.name}^poly")

    def scaled(self, a) -> "FlatForm":
        return FlatForm(self.degree, {k: c.scaled(a) for k, c in self.coeffs.items()},
                        self.dim, name=self.name)

    def component_functions(self) -> dict[tuple[int, ...], FlatTestFunction]:
        return dict(self.coeffs)

    def __repr__(self):
        return f"FlatForm(deg={self.degree}, {len(self.coeffs)} comps, {self.name!r})"


def _add_flat(a: FlatTestFunction, b: FlatTestFunction) -> FlatTestFunction:
    """Sum of two family members sharing the decay rate c."""
    if a.c != b.c or a.dim != b.dim:
        raise ValueError("cannot merge components with different decay rates")
    m = max(a.m, b.m)
    rho = _rho_poly(a.dim)
    pa = a.P * rho ** (m - a.m)
    pb = b.P * rho ** (m - b.m)
    return FlatTestFunction(dim=a.dim, c=a.c, P=pa + pb, m=m)


def canonical_flat_family() -> list[FlatForm]:
    """The five canonical flat test forms shipped as package data."""
    raw = json.loads(resources.files("sl2poisson.data")
                     .joinpath("flat_family.json").read_text())
    out = []
    for item in raw["forms"]:
        coeffs = {}
        for comp in item["components"]:
            key = tuple(comp["key"])
            coeffs[key] = FlatTestFunction.from_dict(comp["coeff"])
        out.append(FlatForm(item["degree"], coeffs, dim=6, name=item["name"]))
    return out


def flat_profile(dim: int, c, poly_coeffs: dict, m: int = 0) -> FlatTestFunction:
    """Convenience constructor with {exponent tuple: rational} coefficients."""
    return FlatTestFunction(dim=dim, c=Fraction(c),
                            P=PolyExpr(dim, {tuple(k): Fraction(v)
                                             for k, v in poly_coeffs.items()}), m=m)
