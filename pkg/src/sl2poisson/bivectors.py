"""The exact distinguished objects on sl2(C) ~ R^6.

Coordinates are ordered (x1, y1, x2, y2, x3, y3) with z_j = x_j + i*y_j.
Everything here is a polynomial-coefficient `GradedField`, so identities
among these objects are checked as identically-zero polynomial objects.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import NoConventionPasses
from .multivector import FORM, MULTIVECTOR, GradedField
from .poly import PolyExpr

NVARS = 6
COORD_NAMES = ("x1", "y1", "x2", "y2", "x3", "y3")

# indices into the coordinate tuple
X = (0, 2, 4)
Y = (1, 3, 5)

_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def var(i: int) -> PolyExpr:
    return PolyExpr.variable(NVARS, i)


@lru_cache(maxsize=None)
def casimir_parts() -> tuple[PolyExpr, PolyExpr]:
    """Real and imaginary part of f = z1^2 + z2^2 + z3^2."""
    f1 = PolyExpr.zero(NVARS)
    f2 = PolyExpr.zero(NVARS)
    for j in range(3):
        f1 = f1 + var(X[j]) ** 2 - var(Y[j]) ** 2
        f2 = f2 + 2 * (var(X[j]) * var(Y[j]))
    return f1, f2


def d_of_function(g: PolyExpr) -> GradedField:
    return GradedField(FORM, 1, {(i,): g.partial(i) for i in range(NVARS)}, NVARS)


@lru_cache(maxsize=None)
def leaf_defining_form() -> GradedField:
    """The closed 2-form df1 ^ df2 cutting out the foliation."""
    f1, f2 = casimir_parts()
    return d_of_function(f1).wedge(d_of_function(f2))


def _pq_bivectors(i: int, j: int, k: int) -> tuple[GradedField, GradedField]:
    """P = dxj^dxk - dyj^dyk and Q = dxj^dyk + dyj^dxk as bivectors."""
    one = Fraction(1)

    def biv(a, b, c=one):
        key = tuple(sorted((a, b)))
        sign = 1 if (a, b) == key else -1
        return GradedField(MULTIVECTOR, 2,
                           {key: PolyExpr.constant(NVARS, sign * c)}, NVARS)

    p = biv(X[j], X[k]) - biv(Y[j], Y[k])
    q = biv(X[j], Y[k]) + biv(Y[j], X[k])
    return p, q


@dataclass(frozen=True)
class PoissonBivectors:
    """pi_C = pi1/4 + i*pi2/4 together with its real normalizations."""

    pi1: GradedField
    pi2: GradedField

    @property
    def piC_re(self) -> GradedField:
        return self.pi1 * Fraction(1, 4)

    @property
    def piC_im(self) -> GradedField:
        return self.pi2 * Fraction(1, 4)

    def verify_exact(self) -> None:
        """[pi1,pi1] = [pi2,pi2] = [pi1,pi2] = 0 as zero polynomials."""
        for a, b in ((self.pi1, self.pi1), (self.pi2, self.pi2), (self.pi1, self.pi2)):
            if not a.schouten(b).is_zero():
                raise AssertionError("Poisson compatibility identity failed")


@lru_cache(maxsize=None)
def poisson_bivectors() -> PoissonBivectors:
    """pi1 = 4 Re(pi_C), pi2 = 4 Im(pi_C) for pi_C = sum_cyc z_i dz_j ^ dz_k duals."""
    pi1 = GradedField.zero(MULTIVECTOR, 2, NVARS)
    pi2 = GradedField.zero(MULTIVECTOR, 2, NVARS)
    for i, j, k in _CYCLIC:
        p, q = _pq_bivectors(i, j, k)
        xi, yi = var(X[i]), var(Y[i])
        pi1 = pi1 + _scale(p, xi) + _scale(q, yi)
        pi2 = pi2 + _scale(p, yi) - _scale(q, xi)
    return PoissonBivectors(pi1=pi1, pi2=pi2)


def _scale(field: GradedField, g: PolyExpr) -> GradedField:
    return GradedField(field.variance, field.degree,
                       {k: c * g for k, c in field.coeffs.items()}, field.nvars)


@lru_cache(maxsize=None)
def cartan_cocycles() -> tuple[GradedField, GradedField]:
    """The two constant trivectors generating the degree-3 cohomology.

    Each has four terms with coefficients +-1/2; they are 4x the real and
    imaginary part of the complex trivector dual to dz1^dz2^dz3.
    """
    half = Fraction(1, 2)

    def tri(a, b, c, s):
        key = tuple(sorted((a, b, c)))
        # all our triples are already sorted by construction below
        return GradedField(MULTIVECTOR, 3,
                           {key: PolyExpr.constant(NVARS, s * half)}, NVARS)

    x1, y1, x2, y2, x3, y3 = 0, 1, 2, 3, 4, 5
    c_r = (tri(x1, x2, x3, 1) + tri(y1, y2, x3, -1)
           + tri(x1, y2, y3, -1) + tri(y1, x2, y3, -1))
    c_i = (tri(y1, y2, y3, 1) + tri(y1, x2, x3, -1)
           + tri(x1, y2, x3, -1) + tri(x1, x2, y3, -1))
    return c_r, c_i


def euler_field(which: str, scale: Fraction) -> GradedField:
    """Euler-type vector fields: 'radial' = sum x d/dx + y d/dy, 'rotation' =
    sum (x d/dy - y d/dx), times ``scale``."""
    coeffs = {}
    for j in range(3):
        xj, yj = X[j], Y[j]
        if which == "radial":
            coeffs[(xj,)] = var(xj) * scale
            coeffs[(yj,)] = var(yj) * scale
        elif which == "rotation":
            coeffs[(yj,)] = coeffs.get((yj,), PolyExpr.zero(NVARS)) + var(xj) * scale
            coeffs[(xj,)] = coeffs.get((xj,), PolyExpr.zero(NVARS)) - var(yj) * scale
        else:
            raise ValueError(which)
    return GradedField(MULTIVECTOR, 1, coeffs, NVARS)


_EULER_CANDIDATES = (
    ("rotation/2", "rotation", Fraction(1, 2)),
    ("-rotation/2", "rotation", Fraction(-1, 2)),
    ("rotation", "rotation", Fraction(1)),
    ("-rotation", "rotation", Fraction(-1)),
)


def euler_identity_check() -> tuple[GradedField, str]:
    """Find the convention for E2 with pi2 = 2[pi1, E2] exactly.

    The complex Euler field E_C = E1 + i E2 is only pinned by the identity
    [pi1, E_C] = 2 pi_C, so we try the natural candidates (the rotation
    generator at half/full speed, both signs) and record the convention that
    makes the residual vanish as an exact polynomial object.

    Returns (residual, convention_name); the residual of the recorded
    convention is identically zero.
    """
    piv = poisson_bivectors()
    for name, which, scale in _EULER_CANDIDATES:
        e2 = euler_field(which, scale)
        residual = piv.pi2 - 2 * _int_scale(piv.pi1.schouten(e2))
        if residual.is_zero():
            # cross-check the complex form [pi1, E_C] = 2 pi_C:
            # real part forces E1 = radial/2.
            e1 = euler_field("radial", Fraction(1, 2))
            re_res = piv.pi1 * Fraction(1, 2) - piv.pi1.schouten(e1)
            im_res = piv.pi2 * Fraction(1, 2) - piv.pi1.schouten(e2)
            if not (re_res.is_zero() and im_res.is_zero()):
                continue
            return residual, name
    raise NoConventionPasses("no Euler convention satisfies pi2 = 2[pi1, E2]")


def _int_scale(field: GradedField) -> GradedField:
    return field


@lru_cache(maxsize=None)
def euler_convention() -> str:
    return euler_identity_check()[1]
