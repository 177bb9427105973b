"""Quadrature plumbing: 1-D panels, adaptive Simpson, and fixed symmetric
rules on S^2 and S^3 (unit quaternions).

The S^3 sets are the 24-cell vertices (a 5-design) and the 600-cell
vertices (an 11-design); both are deterministic and seedless.  Integrands
are always batched callables: values = f(array_of_nodes).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import QuadratureNonConverged


@dataclass(frozen=True)
class QuadratureSpec:
    scheme: str = "gauss"  # gauss | simpson
    abs_tol: float = 1e-11
    rel_tol: float = 1e-10
    max_subdiv: int = 12
    initial_panels: int = 4
    nodes_per_panel: int = 8


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    evals: int


@lru_cache(maxsize=None)
def _gl_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panel_nodes(a: float, b: float, panels: int, nodes: int):
    x, w = _gl_nodes(nodes)
    edges = np.linspace(a, b, panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def integrate_batched(f, a: float, b: float, spec: QuadratureSpec) -> QuadResult:
    """Integral of a batched scalar integrand with panel-doubling control."""
    if b <= a:
        return QuadResult(0.0, 0.0, 0)
    if spec.scheme == "simpson":
        return _adaptive_simpson(f, a, b, spec)
    panels = spec.initial_panels
    pts, wts = _panel_nodes(a, b, panels, spec.nodes_per_panel)
    prev = float(np.dot(np.asarray(f(pts), dtype=float), wts))
    evals = pts.size
    for _ in range(spec.max_subdiv):
        panels *= 2
        pts, wts = _panel_nodes(a, b, panels, spec.nodes_per_panel)
        cur = float(np.dot(np.asarray(f(pts), dtype=float), wts))
        evals += pts.size
        err = abs(cur - prev)
        if err <= spec.abs_tol + spec.rel_tol * abs(cur):
            return QuadResult(cur, err, evals)
        prev = cur
    raise QuadratureNonConverged(
        f"panel doubling did not reach tol on [{a}, {b}] (last err {err:.3e})")


def _adaptive_simpson(f, a: float, b: float, spec: QuadratureSpec) -> QuadResult:
    count = [0]

    def feval(x: float) -> float:
        count[0] += 1
        return float(f(np.array([x]))[0])

    def simps(x0, x2, f0, f2):
        x1 = (x0 + x2) / 2.0
        f1 = feval(x1)
        return x1, f1, (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def rec(x0, x2, f0, f2, whole, x1, f1, tol, depth):
        lm, flm, left = simps(x0, x1, f0, f1)
        rm, frm, right = simps(x1, x2, f1, f2)
        if depth >= spec.max_subdiv + 20:
            raise QuadratureNonConverged("adaptive Simpson depth exceeded")
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0, abs(left + right - whole) / 15.0
        lv, le = rec(x0, x1, f0, f1, left, lm, flm, tol / 2.0, depth + 1)
        rv, re = rec(x1, x2, f1, f2, right, rm, frm, tol / 2.0, depth + 1)
        return lv + rv, le + re

    f0, f2 = feval(a), feval(b)
    x1, f1, whole = simps(a, b, f0, f2)
    tol = max(spec.abs_tol, spec.rel_tol * abs(whole))
    val, err = rec(a, b, f0, f2, whole, x1, f1, tol, 0)
    return QuadResult(val, err, count[0])


# -- fixed symmetric point sets -------------------------------------------------


@lru_cache(maxsize=None)
def cell24_quaternions() -> np.ndarray:
    """The 24-cell vertex set on S^3 (strength-5 spherical design)."""
    pts = []
    for i in range(4):
        for s in (1.0, -1.0):
            q = np.zeros(4)
            q[i] = s
            pts.append(q)
    for signs in range(16):
        q = np.array([0.5 * (1.0 if signs >> b & 1 else -1.0) for b in range(4)])
        pts.append(q)
    return np.array(pts)


@lru_cache(maxsize=None)
def cell600_quaternions() -> np.ndarray:
    """The 600-cell vertex set (binary icosahedral group, 11-design)."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    base = cell24_quaternions()
    pts = list(base)
    trip = (phi, 1.0, 1.0 / phi)
    even_perms = ((0, 1, 2, 3), (0, 2, 3, 1), (0, 3, 1, 2),
                  (1, 0, 3, 2), (1, 2, 0, 3), (1, 3, 2, 0),
                  (2, 0, 1, 3), (2, 1, 3, 0), (2, 3, 0, 1),
                  (3, 0, 2, 1), (3, 1, 0, 2), (3, 2, 1, 0))
    for sa in (1, -1):
        for sb in (1, -1):
            for sc in (1, -1):
                vec = (sa * trip[0] / 2.0, sb * trip[1] / 2.0, sc * trip[2] / 2.0, 0.0)
                for perm in even_perms:
                    q = np.empty(4)
                    for dst, src in enumerate(perm):
                        q[dst] = vec[src]
                    pts.append(q)
    arr = np.array(pts)
    arr = np.unique(np.round(arr, 12), axis=0)
    assert arr.shape[0] == 120, arr.shape
    return arr


def quaternion_to_su2(q: np.ndarray) -> np.ndarray:
    """q = (q0, q1, q2, q3) -> [[a, b], [-conj b, conj a]], a=q0+iq1, b=q2+iq3."""
    q = np.asarray(q, dtype=float)
    a = q[..., 0] + 1j * q[..., 1]
    b = q[..., 2] + 1j * q[..., 3]
    out = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = -b.conj()
    out[..., 1, 1] = a.conj()
    return out


def s3_rule(strength: int) -> np.ndarray:
    """Unit quaternions of a symmetric rule with at least the asked strength."""
    if strength <= 5:
        return cell24_quaternions()
    if strength <= 11:
        return cell600_quaternions()
    return _s3_product_rule(strength)


@lru_cache(maxsize=None)
def _s3_product_rule(strength: int) -> np.ndarray:
    n = strength + 1
    x, w = _gl_nodes(n)  # theta on [0, pi] against sin^2
    theta = (x + 1.0) * (np.pi / 2.0)
    s2 = s2_rule(strength)
    ws2 = s2_weights(s2, strength)
    pts = []
    wts = []
    for th, ww in zip(theta, w * (np.pi / 2.0) * np.sin(theta) ** 2 * (2.0 / np.pi)):
        for nvec, nw in zip(s2, ws2):
            pts.append([np.cos(th), *(np.sin(th) * nvec)])
            wts.append(ww * nw)
    pts = np.array(pts)
    _s3_weights_cache[strength] = np.array(wts) / np.sum(wts)
    return pts


_s3_weights_cache: dict[int, np.ndarray] = {}


def s3_weights(points: np.ndarray, strength: int) -> np.ndarray:
    if strength <= 11:
        return np.full(points.shape[0], 1.0 / points.shape[0])
    return _s3_weights_cache[strength]


@lru_cache(maxsize=None)
def icosahedron_vertices() -> np.ndarray:
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    pts = []
    for a in (-1.0, 1.0):
        for b in (-phi, phi):
            pts.extend([[0, a, b], [a, b, 0], [b, 0, a]])
    arr = np.array(pts)
    return arr / np.linalg.norm(arr[0])


def s2_rule(strength: int) -> np.ndarray:
    """Unit vectors averaging polynomials exactly up to the asked strength."""
    if strength <= 5:
        return icosahedron_vertices()
    n = strength // 2 + 1
    x, w = _gl_nodes(n)
    azi = np.linspace(0.0, 2.0 * np.pi, 2 * n + 1, endpoint=False)
    pts = []
    for c in x:
        s = np.sqrt(1.0 - c * c)
        for a in azi:
            pts.append([s * np.cos(a), s * np.sin(a), c])
    return np.array(pts)


def s2_weights(points: np.ndarray, strength: int) -> np.ndarray:
    if strength <= 5:
        return np.full(points.shape[0], 1.0 / points.shape[0])
    n = strength // 2 + 1
    _, w = _gl_nodes(n)
    nazi = 2 * n + 1
    wts = np.repeat(w, nazi) / (2.0 * nazi)
    return wts / np.sum(wts)
