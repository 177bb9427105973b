"""Matrix model of sl2(C): coordinates, invariants, characteristic identities.

A point is carried in two pictures at once: six real coordinates
(x1, y1, x2, y2, x3, y3) with z_j = x_j + i*y_j, and the traceless matrix

    A = [[ i z1, -z2 + i z3 ],
         [ z2 + i z3, -i z1 ]].

Every derived scalar is computed in both pictures and cross-checked; the
pictures agree only up to rounding, so the tolerance is a few ulp.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CrossCheckError, NotSpecialUnitary

ULP_FACTOR = 8


def coords_to_matrix(coords) -> np.ndarray:
    """Coordinates (..., 6) to traceless 2x2 complex matrices (..., 2, 2)."""
    c = np.asarray(coords, dtype=float)
    z1 = c[..., 0] + 1j * c[..., 1]
    z2 = c[..., 2] + 1j * c[..., 3]
    z3 = c[..., 4] + 1j * c[..., 5]
    out = np.empty(c.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = 1j * z1
    out[..., 0, 1] = -z2 + 1j * z3
    out[..., 1, 0] = z2 + 1j * z3
    out[..., 1, 1] = -1j * z1
    return out


def matrix_to_coords(matrix) -> np.ndarray:
    """Inverse of coords_to_matrix; ignores any trace component."""
    m = np.asarray(matrix, dtype=complex)
    z1 = -1j * m[..., 0, 0]
    z2 = (m[..., 1, 0] - m[..., 0, 1]) / 2
    z3 = -1j * (m[..., 1, 0] + m[..., 0, 1]) / 2
    out = np.empty(m.shape[:-2] + (6,), dtype=float)
    out[..., 0], out[..., 1] = z1.real, z1.imag
    out[..., 2], out[..., 3] = z2.real, z2.imag
    out[..., 4], out[..., 5] = z3.real, z3.imag
    return out


@dataclass(frozen=True)
class Sl2Point:
    """A point of sl2(C), coordinates plus derived matrix."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float).reshape(6).copy()
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    @classmethod
    def from_coords(cls, coords) -> "Sl2Point":
        return cls(np.asarray(coords, dtype=float))

    @classmethod
    def from_matrix(cls, matrix) -> "Sl2Point":
        return cls(matrix_to_coords(matrix))

    @property
    def matrix(self) -> np.ndarray:
        return coords_to_matrix(self.coords)

    @property
    def norm(self) -> float:
        """|A| = sqrt(tr(A A*)) = sqrt(2) * euclidean coordinate norm."""
        return float(np.sqrt(2.0) * np.linalg.norm(self.coords))

    def __repr__(self):
        return f"Sl2Point({np.array2string(self.coords, precision=6)})"


@dataclass(frozen=True)
class InvariantScalars:
    f: complex
    f1: float
    f2: float
    R2: float
    absF: float


def _ulp_close(a: float, b: float, scale: float, factor: int = ULP_FACTOR) -> bool:
    return abs(a - b) <= factor * np.spacing(max(abs(a), abs(b), scale, 1.0))


def invariants(p: Sl2Point) -> InvariantScalars:
    """Casimir f = det(A) and norm R^2 = tr(A A*), cross-checked both ways."""
    c = p.coords
    z = c[0::2] + 1j * c[1::2]
    f_coords = complex(np.sum(z * z))
    a = p.matrix
    f_matrix = complex(np.linalg.det(a))
    r2_coords = 2.0 * float(np.sum(c * c))
    r2_matrix = float(np.trace(a @ a.conj().T).real)
    scale = max(r2_coords, 1.0)
    if not (_ulp_close(f_coords.real, f_matrix.real, scale)
            and _ulp_close(f_coords.imag, f_matrix.imag, scale)):
        raise CrossCheckError(
            f"Casimir mismatch: coords {f_coords} vs matrix {f_matrix}")
    if not _ulp_close(r2_coords, r2_matrix, scale):
        raise CrossCheckError(
            f"norm mismatch: coords {r2_coords} vs matrix {r2_matrix}")
    f = f_coords
    return InvariantScalars(f=f, f1=f.real, f2=f.imag, R2=r2_coords, absF=abs(f))


def char_residuals(p: Sl2Point) -> tuple[np.ndarray, np.ndarray]:
    """Residuals of the characteristic equations of A and of A A*.

    Returns (A^2 + f*I, (AA*)^2 - R^2*AA* + |f|^2*I); both vanish identically,
    so any nonzero entries measure rounding only.
    """
    a = p.matrix
    inv = invariants(p)
    eye = np.eye(2)
    r1 = a @ a + inv.f * eye
    s = a @ a.conj().T
    r2 = s @ s - inv.R2 * s + inv.absF ** 2 * eye
    return r1, r2


def skeleton_gap(p: Sl2Point) -> float:
    """R^2 - 2|f| >= 0; zero exactly on the normal matrices."""
    inv = invariants(p)
    return inv.R2 - 2.0 * inv.absF


def commutator_norm(p: Sl2Point) -> float:
    """Frobenius norm of [A, A*]; the direct a-normality measure."""
    a = p.matrix
    k = a @ a.conj().T - a.conj().T @ a
    return float(np.linalg.norm(k))


def hopf(u: np.ndarray) -> np.ndarray:
    """Hopf projection SU(2) -> S^2 in R^3 for u = [[a, b], [-conj(b), conj(a)]]."""
    u = np.asarray(u, dtype=complex)
    eye = np.eye(2)
    if np.linalg.norm(u @ u.conj().T - eye) > 1e-12 or abs(np.linalg.det(u) - 1) > 1e-12:
        raise NotSpecialUnitary("input is not special unitary to 1e-12")
    a, b = u[0, 0], u[0, 1]
    w = np.array([abs(a) ** 2 - abs(b) ** 2,
                  (-2 * a * b).imag,
                  (-2 * a * b).real])
    return w


def random_points(rng: np.random.Generator, n: int, radius: float = 2.0,
                  min_absf: float = 0.0) -> np.ndarray:
    """Coordinates of n random points with |A| <= radius, optionally |f| >= min_absf."""
    out = np.empty((n, 6))
    have = 0
    while have < n:
        c = rng.uniform(-radius / np.sqrt(2.0), radius / np.sqrt(2.0), size=(4 * n, 6))
        norms = np.sqrt(2.0) * np.linalg.norm(c, axis=1)
        keep = norms <= radius
        if min_absf > 0.0:
            z = c[:, 0::2] + 1j * c[:, 1::2]
            keep &= np.abs(np.sum(z * z, axis=1)) >= min_absf
        c = c[keep]
        take = min(n - have, c.shape[0])
        out[have:have + take] = c[:take]
        have += take
    return out
