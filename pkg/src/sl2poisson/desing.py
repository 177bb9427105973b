"""Desingularization of the skeleton: rho(w, lambda) = lambda * w in coordinates.

rho maps S^2 x C onto the normal matrices, two-to-one away from lambda = 0,
and every exact pullback identity it satisfies is checkable pointwise with
the chart frames below.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Sl2Point
from .errors import NotUnit, OnCone
from .singular import antisym_matrix, singular_frame, vector_value, v_field
from .bivectors import leaf_defining_form

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class DesingPoint:
    """A point (w, lambda) of S^2 x C."""

    w: np.ndarray
    lam: complex

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).reshape(3).copy()
        if abs(np.linalg.norm(w) - 1.0) > UNIT_TOL:
            raise NotUnit("w must be a unit vector to 1e-12")
        w.flags.writeable = False
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "lam", complex(self.lam))

    @property
    def lam1(self) -> float:
        return self.lam.real

    @property
    def lam2(self) -> float:
        return self.lam.imag


def rho(d: DesingPoint) -> Sl2Point:
    """Coordinates z_j = lambda * w_j."""
    z = d.lam * d.w
    coords = np.empty(6)
    coords[0::2] = z.real
    coords[1::2] = z.imag
    return Sl2Point(coords)


def chart_tangent(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two orthonormal tangent vectors at w; chart switch at |w3| = 0.9."""
    w = np.asarray(w, dtype=float)
    pole = np.array([0.0, 0.0, 1.0]) if abs(w[2]) <= 0.9 else np.array([1.0, 0.0, 0.0])
    t1 = np.cross(pole, w)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(w, t1)
    return t1, t2


def rho_jacobian(d: DesingPoint) -> np.ndarray:
    """Differential of rho as a 6x4 matrix.

    Columns: the two chart tangents of S^2 at w, then d/d(lambda1), d/d(lambda2).
    Rank is 4 off lambda = 0 and drops to 2 at lambda = 0 (the w-columns die).
    """
    t1, t2 = chart_tangent(d.w)
    jac = np.zeros((6, 4))

    def embed(xpart: np.ndarray, ypart: np.ndarray) -> np.ndarray:
        out = np.zeros(6)
        out[0::2] = xpart
        out[1::2] = ypart
        return out

    jac[:, 0] = embed(d.lam1 * t1, d.lam2 * t1)
    jac[:, 1] = embed(d.lam1 * t2, d.lam2 * t2)
    jac[:, 2] = embed(d.w, np.zeros(3))
    jac[:, 3] = embed(np.zeros(3), d.w)
    return jac


def omega_s2_value(w: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """The standard area form sum_cyc w1 dw2^dw3 on tangent vectors a, b."""
    return float(np.dot(w, np.cross(a, b)))


def pullback_identity_phi(d: DesingPoint) -> float:
    """Residual of rho^*(df1^df2) = 4|lambda|^2 dlam1^dlam2, full 4x4 chart form."""
    p = rho(d)
    phi = antisym_matrix(leaf_defining_form(), p.coords)
    jac = rho_jacobian(d)
    pulled = jac.T @ phi @ jac
    target = np.zeros((4, 4))
    target[2, 3] = 4.0 * abs(d.lam) ** 2
    target[3, 2] = -target[2, 3]
    return float(np.abs(pulled - target).max())


def pullback_identity_omega(d: DesingPoint) -> tuple[float, float]:
    """Residuals of rho^*(omega-tilde_1) = -lam1 * omega_S2 and
    rho^*(omega-tilde_2) = +lam2 * omega_S2, compared on the full chart."""
    if abs(d.lam) == 0.0:
        raise OnCone("omega-tilde is singular over lambda = 0")
    p = rho(d)
    fr = singular_frame(p.coords)
    jac = rho_jacobian(d)
    t1, t2 = chart_tangent(d.w)
    s2val = omega_s2_value(d.w, t1, t2)
    target = np.zeros((4, 4))
    target[0, 1] = s2val
    target[1, 0] = -s2val
    res = []
    for mat, coef in ((fr.omega1, -d.lam1), (fr.omega2, d.lam2)):
        pulled = jac.T @ mat @ jac
        res.append(float(np.abs(pulled - coef * target).max()))
    return res[0], res[1]


def w_fields_related(d: DesingPoint) -> tuple[float, float]:
    """Residuals of d(rho)(W_i) = V_i at rho(d), for the upstairs fields
    W1 = (lam1 d/dlam1 - lam2 d/dlam2)/(2|lam|^2) and
    W2 = (lam2 d/dlam1 + lam1 d/dlam2)/(2|lam|^2)."""
    if abs(d.lam) == 0.0:
        raise OnCone("W_i are singular over lambda = 0")
    jac = rho_jacobian(d)
    denom = 2.0 * abs(d.lam) ** 2
    img1 = (d.lam1 * jac[:, 2] - d.lam2 * jac[:, 3]) / denom
    img2 = (d.lam2 * jac[:, 2] + d.lam1 * jac[:, 3]) / denom
    p = rho(d)
    v1 = vector_value(v_field(1), p.coords)
    v2 = vector_value(v_field(2), p.coords)
    return float(np.abs(img1 - v1).max()), float(np.abs(img2 - v2).max())


def random_desing_points(rng: np.random.Generator, n: int,
                         min_abs_lam: float = 0.05,
                         max_abs_lam: float = 2.0) -> list[DesingPoint]:
    pts = []
    while len(pts) < n:
        w = rng.normal(size=3)
        w /= np.linalg.norm(w)
        lam = complex(rng.uniform(-max_abs_lam, max_abs_lam),
                      rng.uniform(-max_abs_lam, max_abs_lam))
        if not (min_abs_lam <= abs(lam) <= max_abs_lam):
            continue
        pts.append(DesingPoint(w=w, lam=lam))
    return pts
