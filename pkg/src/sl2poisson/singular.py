"""Singular frame off the cone: V_1, V_2, omega-tilde_1/2, gamma_1/2.

These have exact rational-function coefficients (denominator a power of the
squared coordinate radius rho = R^2/2), so the exterior derivative feeding
gamma_i = i_{V_i} d(omega-tilde_1) is symbolic; only the final evaluation is
floating point.  The frame trivializes the normal directions of the leaf
foliation and splits pointwise multivectors into (tangent, normal) bidegrees.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np

from .bivectors import NVARS, X, Y, casimir_parts, poisson_bivectors, var
from .core import Sl2Point
from .errors import OnCone, OriginSingularity
from .multivector import FORM, MULTIVECTOR, GradedField, RationalCoeff
from .poly import PolyExpr

_CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))


def _rc(p: PolyExpr, m: int = 0) -> RationalCoeff:
    return RationalCoeff(p, m)


@lru_cache(maxsize=None)
def v_field(i: int) -> GradedField:
    """V_1 = (x d/dx - y d/dy)/R^2, V_2 = (x d/dy + y d/dx)/R^2 (summed over j).

    With rho = sum(x^2 + y^2) = R^2/2 the prefactor is 1/(2 rho).
    """
    half = Fraction(1, 2)
    coeffs: dict[tuple[int, ...], RationalCoeff] = {}
    for j in range(3):
        xj, yj = X[j], Y[j]
        if i == 1:
            coeffs[(xj,)] = _rc(var(xj) * half, 1)
            coeffs[(yj,)] = _rc(-(var(yj) * half), 1)
        elif i == 2:
            coeffs[(yj,)] = _rc(var(xj) * half, 1)
            coeffs[(xj,)] = _rc(var(yj) * half, 1)
        else:
            raise ValueError(i)
    return GradedField(MULTIVECTOR, 1, coeffs, NVARS)


@lru_cache(maxsize=None)
def omega_tilde(i: int) -> GradedField:
    """The leafwise-symplectic extensions; 2/R^2 = 1/rho prefactor."""
    out = GradedField.zero(FORM, 2, NVARS)
    for a, b, c in _CYCLIC:
        xa, ya = var(X[a]), var(Y[a])
        dydy = GradedField.basis(FORM, tuple(sorted((Y[b], Y[c]))), NVARS) * _sort_sign(Y[b], Y[c])
        dxdx = GradedField.basis(FORM, tuple(sorted((X[b], X[c]))), NVARS) * _sort_sign(X[b], X[c])
        dxdy = GradedField.basis(FORM, tuple(sorted((X[b], Y[c]))), NVARS) * _sort_sign(X[b], Y[c])
        dydx = GradedField.basis(FORM, tuple(sorted((Y[b], X[c]))), NVARS) * _sort_sign(Y[b], X[c])
        if i == 1:
            combo = _scale_rational(dydy - dxdx, xa, 1) + _scale_rational(-(dxdy + dydx), ya, 1)
        elif i == 2:
            combo = _scale_rational(dydy - dxdx, ya, 1) + _scale_rational(dxdy + dydx, xa, 1)
        else:
            raise ValueError(i)
        out = out + combo
    return out


def _sort_sign(a: int, b: int) -> int:
    return 1 if a < b else -1


def _scale_rational(field: GradedField, g: PolyExpr, extra_m: int) -> GradedField:
    out = {}
    for k, c in field.coeffs.items():
        rc = c if isinstance(c, RationalCoeff) else RationalCoeff(c, 0)
        out[k] = RationalCoeff(rc.num * g, rc.m + extra_m)
    return GradedField(field.variance, field.degree, out, field.nvars)


@lru_cache(maxsize=None)
def gamma_form(i: int) -> GradedField:
    """gamma_i = i_{V_i} d(omega-tilde_1), exact in the rational ring."""
    d_omega1 = omega_tilde(1).ext_deriv()
    return d_omega1.contract(v_field(i))


# -- pointwise evaluation helpers ---------------------------------------------


def antisym_matrix(field: GradedField, p: np.ndarray) -> np.ndarray:
    """Degree-2 field at a point as the full antisymmetric 6x6 matrix."""
    if field.degree != 2:
        raise ValueError("need a degree-2 field")
    m = np.zeros((NVARS, NVARS))
    vals = field.eval_coeffs(np.asarray(p, dtype=float)[None, :])
    for (i, j), v in vals.items():
        m[i, j] = v[0]
        m[j, i] = -v[0]
    return m


def vector_value(field: GradedField, p: np.ndarray) -> np.ndarray:
    if field.degree != 1:
        raise ValueError("need a degree-1 field")
    out = np.zeros(NVARS)
    vals = field.eval_coeffs(np.asarray(p, dtype=float)[None, :])
    for (i,), v in vals.items():
        out[i] = v[0]
    return out


def sharp(bivector_mat: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """pi#(xi) = i_xi pi, first-slot contraction: component k = sum_i xi_i pi^{ik}."""
    return xi @ bivector_mat


def flat(form_mat: np.ndarray, v: np.ndarray) -> np.ndarray:
    """omega_flat(v) = i_v omega, first-slot: component k = sum_i v_i omega_{ik}."""
    return v @ form_mat


@dataclass(frozen=True)
class SingularFrame:
    """All frame data at one off-origin point."""

    point: np.ndarray
    V1: np.ndarray
    V2: np.ndarray
    omega1: np.ndarray  # 6x6 antisymmetric
    omega2: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    df1: np.ndarray
    df2: np.ndarray
    pi1: np.ndarray  # 6x6 antisymmetric (bivector components)
    pi2: np.ndarray


ORIGIN_TOL = 1e-12


def singular_frame(p: Sl2Point | np.ndarray) -> SingularFrame:
    """Evaluate (V_i, omega-tilde_i, gamma_i) and companions at p != 0."""
    coords = p.coords if isinstance(p, Sl2Point) else np.asarray(p, dtype=float)
    if float(np.dot(coords, coords)) < ORIGIN_TOL:
        raise OriginSingularity("frame objects have 1/R^2 factors at the origin")
    f1, f2 = casimir_parts()
    piv = poisson_bivectors()
    grad = lambda g: np.array([g.partial(i).eval_batch(coords[None, :])[0]
                               for i in range(NVARS)])
    return SingularFrame(
        point=coords,
        V1=vector_value(v_field(1), coords),
        V2=vector_value(v_field(2), coords),
        omega1=antisym_matrix(omega_tilde(1), coords),
        omega2=antisym_matrix(omega_tilde(2), coords),
        gamma1=antisym_matrix(gamma_form(1), coords),
        gamma2=antisym_matrix(gamma_form(2), coords),
        df1=grad(f1),
        df2=grad(f2),
        pi1=antisym_matrix(piv.pi1, coords),
        pi2=antisym_matrix(piv.pi2, coords),
    )


# -- pointwise bigraded splitting ---------------------------------------------


CONE_TOL = 1e-9


def _point_multivector_eval(components: dict[tuple[int, ...], float],
                            covectors: list[np.ndarray]) -> float:
    """Evaluate a pointwise multivector (component dict) on covectors."""
    k = len(covectors)
    if k == 0:
        return sum(components.values())
    stack = np.stack(covectors, axis=0)  # (k, 6)
    total = 0.0
    for key, c in components.items():
        if c == 0.0:
            continue
        total += c * np.linalg.det(stack[:, list(key)])
    return total


def _shuffles(n: int, p: int):
    """(p, n-p) shuffles as (positions, sign)."""
    for pos in combinations(range(n), p):
        rest = [i for i in range(n) if i not in pos]
        perm = list(pos) + rest
        sign = _perm_sign(perm)
        yield pos, rest, sign


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, cycle = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            cycle += 1
        if cycle % 2 == 0:
            sign = -sign
    return sign


@dataclass
class BigradeSplit:
    """The (p, q) components of a pointwise multivector in the frame."""

    degree: int
    frame: SingularFrame
    tangent_basis: np.ndarray   # (4, 6) spanning the leaf tangent space
    sigma_covectors: np.ndarray  # (4, 6): sigma applied to the tangent basis
    components: dict[tuple[int, int], dict[tuple, float]]

    def component_norm(self, p: int, q: int) -> float:
        comp = self.components.get((p, q), {})
        return max((abs(v) for v in comp.values()), default=0.0)


def bigrade_split(x_components: dict[tuple[int, ...], float],
                  p: Sl2Point | np.ndarray) -> BigradeSplit:
    """Split a pointwise degree-n multivector into (tangent, normal) bidegrees.

    The normal directions are spanned by V_1, V_2 (paired with df_1, df_2);
    the tangent slots are fed through the splitting covector sigma(Y) =
    flat(omega1, Y), whose image annihilates V_1 and V_2.
    """
    fr = singular_frame(p)
    coords = fr.point
    z = coords[0::2] + 1j * coords[1::2]
    absf = abs(np.sum(z * z))
    r2 = 2.0 * float(np.dot(coords, coords))
    if absf < CONE_TOL * (1.0 + r2):
        raise OnCone("bigraded splitting needs a regular (off-cone) point")
    degree = len(next(iter(x_components))) if x_components else 0

    # leaf tangent space = ker(df1) \cap ker(df2)
    a = np.stack([fr.df1, fr.df2], axis=0)
    _, _, vt = np.linalg.svd(a, full_matrices=True)
    tangent = vt[2:]  # (4, 6), orthonormal

    sigma = np.stack([flat(fr.omega1, y) for y in tangent], axis=0)
    # pin the sign so that pi1#(sigma(Y)) = Y on the tangent space
    probe = sharp(fr.pi1, sigma[0])
    if np.dot(probe, tangent[0]) < 0:
        sigma = -sigma

    conormal = np.stack([fr.df1, fr.df2], axis=0)

    components: dict[tuple[int, int], dict[tuple, float]] = {}
    for q in range(0, min(2, degree) + 1):
        pdeg = degree - q
        if pdeg > 4:
            continue
        comp: dict[tuple, float] = {}
        for a_idx in combinations(range(4), pdeg):
            for j_idx in combinations(range(2), q):
                covs = [sigma[a] for a in a_idx] + [conormal[j] for j in j_idx]
                comp[(a_idx, j_idx)] = _point_multivector_eval(x_components, covs)
        components[(pdeg, q)] = comp
    return BigradeSplit(degree=degree, frame=fr, tangent_basis=tangent,
                        sigma_covectors=sigma, components=components)


def bigrade_reconstruct(split: BigradeSplit) -> dict[tuple[int, ...], float]:
    """Rebuild the coordinate components from the bigraded pieces.

    Inverts the splitting with the shuffle-sum right inverses: a covector
    slot eta contributes its leafwise part through pi1#(eta) (expanded in the
    tangent basis) and its normal part through (eta(V1), eta(V2)).
    """
    fr = split.frame
    n = split.degree
    tangent = split.tangent_basis

    def sharp_in_basis(eta: np.ndarray) -> np.ndarray:
        v = sharp(fr.pi1, eta)
        return tangent @ v  # orthonormal rows

    def kappa_coords(eta: np.ndarray) -> np.ndarray:
        return np.array([np.dot(eta, fr.V1), np.dot(eta, fr.V2)])

    basis_etas = np.eye(NVARS)
    sharp_tab = np.stack([sharp_in_basis(e) for e in basis_etas], axis=0)  # (6, 4)
    kappa_tab = np.stack([kappa_coords(e) for e in basis_etas], axis=0)    # (6, 2)

    out: dict[tuple[int, ...], float] = {}
    for key in combinations(range(NVARS), n):
        total = 0.0
        for (pdeg, q), comp in split.components.items():
            for pos, rest, sign in _shuffles(n, pdeg):
                u = np.stack([sharp_tab[key[i]] for i in pos], axis=0) if pdeg else None
                w = np.stack([kappa_tab[key[i]] for i in rest], axis=0) if q else None
                val = 0.0
                for (a_idx, j_idx), c in comp.items():
                    if c == 0.0:
                        continue
                    du = np.linalg.det(u[:, list(a_idx)]) if pdeg else 1.0
                    dw = np.linalg.det(w[:, list(j_idx)]) if q else 1.0
                    val += c * du * dw
                total += sign * val
        if total != 0.0:
            out[key] = total
    return out
