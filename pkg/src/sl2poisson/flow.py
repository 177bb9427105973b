"""The normalizing vector field W = 1/4 [A,[A,A*]] and its closed-form flow.

The flow conjugates A by g_t(A) = (I + tanh(|f|t)/|f| * AA*)^(1/2) and
converges to the retraction onto the normal matrices.  All nearly-singular
quotients (tanh(u)/u, sinh(u)/u) go through even-function forms so that the
f -> 0 limit is branch-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import Sl2Point, coords_to_matrix, matrix_to_coords

_SERIES_SWITCH = 1e-8  # on u = x^2; |x| < 1e-4 per the even-function design

# tanh(x)/x = 1 - u/3 + 2u^2/15 - 17u^3/315 + 62u^4/2835, u = x^2
_THETA1_SERIES = (1.0, -1.0 / 3.0, 2.0 / 15.0, -17.0 / 315.0, 62.0 / 2835.0)
# sinh(x)/x = 1 + u/6 + u^2/120 + u^3/5040
_THETA3_SERIES = (1.0, 1.0 / 6.0, 1.0 / 120.0, 1.0 / 5040.0)


def _poly_eval(series, u):
    out = np.zeros_like(u)
    for c in reversed(series):
        out = out * u + c
    return out


def theta1(u):
    """Smooth function with theta1(x^2) = tanh(x)/x."""
    u = np.asarray(u, dtype=float)
    small = u < _SERIES_SWITCH
    x = np.sqrt(np.where(small, 1.0, u))
    val = np.where(small, _poly_eval(_THETA1_SERIES, u), np.tanh(x) / x)
    return val if val.ndim else float(val)


def theta2(u):
    """theta2(x^2) = cosh(x)."""
    u = np.asarray(u, dtype=float)
    val = np.cosh(np.sqrt(u))
    return val if val.ndim else float(val)


def theta3(u):
    """theta3(x^2) = sinh(x)/x."""
    u = np.asarray(u, dtype=float)
    small = u < _SERIES_SWITCH
    x = np.sqrt(np.where(small, 1.0, u))
    val = np.where(small, _poly_eval(_THETA3_SERIES, u), np.sinh(x) / x)
    return val if val.ndim else float(val)


MAX_THETA_DERIVATIVE = 6
_THETA_SERIES_RADIUS = 0.25
_THETA_SERIES_DEGREE = 26


@lru_cache(maxsize=None)
def _theta_derivative_callables(which: int, n: int):
    """(series_coeffs, closed_form) for the n-th u-derivative of theta_which."""
    if n > MAX_THETA_DERIVATIVE:
        raise ValueError(f"theta derivatives supported up to order {MAX_THETA_DERIVATIVE}")
    import sympy as sp

    u = sp.symbols("u", positive=True)
    x = sp.sqrt(u)
    base = {1: sp.tanh(x) / x, 2: sp.cosh(x), 3: sp.sinh(x) / x}[which]
    series = sp.series(base, u, 0, _THETA_SERIES_DEGREE).removeO()
    expr = base
    series_expr = series
    for _ in range(n):
        expr = sp.diff(expr, u)
        series_expr = sp.diff(series_expr, u)
    poly = sp.Poly(series_expr, u)
    coeffs = [float(c) for c in poly.all_coeffs()[::-1]]
    closed = sp.lambdify(u, sp.together(expr), modules="numpy")
    return tuple(coeffs), closed


def theta_derivative(which: int, n: int, u):
    """n-th derivative (in the squared variable) of theta_1/2/3, vectorized."""
    u = np.asarray(u, dtype=float)
    if n == 0:
        return {1: theta1, 2: theta2, 3: theta3}[which](u)
    coeffs, closed = _theta_derivative_callables(which, n)
    small = u < _THETA_SERIES_RADIUS
    safe = np.where(small, _THETA_SERIES_RADIUS, u)
    with np.errstate(all="ignore"):
        big_vals = closed(safe)
    val = np.where(small, _poly_eval(tuple(coeffs), u), big_vals)
    return val if val.ndim else float(val)


def theta_bounds_check(n: int, xs=None) -> dict[str, float]:
    """Fitted constants for the derivative decay of theta_1/2/3.

    Evaluates |theta_i^(n)(x^2)| against the envelopes 1/(1+x)^(2n+1),
    cosh(x)/(1+x)^n and cosh(x)/(1+x)^(n+1) on a grid and returns the
    maximal ratios; all three must come out finite.
    """
    if xs is None:
        xs = np.concatenate([np.linspace(0.0, 2.0, 201), np.geomspace(2.0, 50.0, 200)])
    xs = np.asarray(xs, dtype=float)
    u = xs ** 2
    cosh = np.cosh(xs)
    c1 = np.max(np.abs(theta_derivative(1, n, u)) * (1.0 + xs) ** (2 * n + 1))
    c2 = np.max(np.abs(theta_derivative(2, n, u)) * (1.0 + xs) ** n / cosh)
    c3 = np.max(np.abs(theta_derivative(3, n, u)) * (1.0 + xs) ** (n + 1) / cosh)
    return {"theta1": float(c1), "theta2": float(c2), "theta3": float(c3)}


# -- the vector field and its flow -------------------------------------------


def w_field_matrix(a: np.ndarray) -> np.ndarray:
    """W_A = 1/4 [A, [A, A*]] for a batch (..., 2, 2)."""
    astar = np.swapaxes(a, -1, -2).conj()
    k = a @ astar - astar @ a
    return 0.25 * (a @ k - k @ a)


def w_field(p: Sl2Point) -> np.ndarray:
    """The field at one point, as a matrix."""
    return w_field_matrix(p.matrix)


def w_field_coords(coords: np.ndarray) -> np.ndarray:
    """The field in coordinates, batched (N, 6) -> (N, 6)."""
    return matrix_to_coords(w_field_matrix(coords_to_matrix(coords)))


def _hermitian_sqrt_2x2(m: np.ndarray) -> np.ndarray:
    """sqrt(M) = (M + sqrt(det M) I) / sqrt(tr M + 2 sqrt(det M)); M pos. def."""
    det = (m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]).real
    tr = (m[..., 0, 0] + m[..., 1, 1]).real
    s = np.sqrt(det)
    denom = np.sqrt(tr + 2.0 * s)
    out = m + s[..., None, None] * np.eye(2)
    return out / denom[..., None, None]


def _inv_2x2(m: np.ndarray) -> np.ndarray:
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 1, 1] = m[..., 0, 0]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    return out / det[..., None, None]


def _base_invariants(coords: np.ndarray):
    z = coords[..., 0::2] + 1j * coords[..., 1::2]
    f = np.sum(z * z, axis=-1)
    absf = np.abs(f)
    r2 = 2.0 * np.sum(coords * coords, axis=-1)
    return f, absf, r2


def flow_coords(coords: np.ndarray, t) -> np.ndarray:
    """Closed-form flow in coordinates; broadcasts (..., 6) with t (...)."""
    coords = np.asarray(coords, dtype=float)
    t = np.asarray(t, dtype=float)
    a = coords_to_matrix(coords)
    astar = np.swapaxes(a, -1, -2).conj()
    _, absf, _ = _base_invariants(coords)
    # tanh(|f| t)/|f| = t * theta1((|f| t)^2), smooth through f = 0
    tau = t * theta1((absf * t) ** 2)
    m = np.eye(2) + tau[..., None, None] * (a @ astar)
    g = _hermitian_sqrt_2x2(m)
    a_t = _inv_2x2(g) @ a @ g
    return matrix_to_coords(a_t)


def norm_flow(r2, absf, t):
    """Closed form for R_t^2 along the flow, branch-free in |f|."""
    r2 = np.asarray(r2, dtype=float)
    absf = np.asarray(absf, dtype=float)
    t = np.asarray(t, dtype=float)
    u2 = (2.0 * absf * t) ** 2
    th1 = theta1(u2)
    num = (2.0 * absf) ** 2 * t * th1 + r2
    den = 1.0 + r2 * t * th1
    return num / den


def eps_factor(r2, absf, t):
    """eps_t = 1 / (cosh(2|f|t) + sinh(2|f|t) R^2 / (2|f|)), in (0, 1]."""
    r2 = np.asarray(r2, dtype=float)
    absf = np.asarray(absf, dtype=float)
    t = np.asarray(t, dtype=float)
    u2 = (2.0 * absf * t) ** 2
    return 1.0 / (theta2(u2) + r2 * t * theta3(u2))


@dataclass(frozen=True)
class FlowState:
    point: Sl2Point
    t: float
    R2_t: float
    K_t: np.ndarray
    eps_t: float


def flow_closed(p: Sl2Point, t: float) -> FlowState:
    """Flow for time t >= 0 from p, with the derived closed-form scalars."""
    if t < 0:
        raise ValueError("the flow is only defined for t >= 0")
    c_t = flow_coords(p.coords, t)
    _, absf, r2 = _base_invariants(p.coords)
    a = p.matrix
    astar = a.conj().T
    k0 = a @ astar - astar @ a
    eps = float(eps_factor(r2, absf, t))
    return FlowState(point=Sl2Point(c_t), t=float(t),
                     R2_t=float(norm_flow(r2, absf, t)),
                     K_t=eps * k0, eps_t=eps)


def flow_rk4_coords(coords: np.ndarray, t: float, steps: int) -> np.ndarray:
    """Classical fixed-step RK4 oracle for the defining ODE A' = W_A."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    a = coords_to_matrix(np.asarray(coords, dtype=float))
    h = t / steps
    for _ in range(steps):
        k1 = w_field_matrix(a)
        k2 = w_field_matrix(a + 0.5 * h * k1)
        k3 = w_field_matrix(a + 0.5 * h * k2)
        k4 = w_field_matrix(a + h * k3)
        a = a + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return matrix_to_coords(a)


def flow_rk4(p: Sl2Point, t: float, steps: int) -> Sl2Point:
    return Sl2Point(flow_rk4_coords(p.coords, t, steps))


RETRACT_CONE_TOL = 1e-13


def retract_coords(coords: np.ndarray) -> np.ndarray:
    """Retraction onto the normal matrices, batched; cone points map to 0."""
    coords = np.asarray(coords, dtype=float)
    f, absf, r2 = _base_invariants(coords)
    on_cone = absf < RETRACT_CONE_TOL * (1.0 + r2)
    safe = np.where(on_cone, 1.0, absf)
    a = coords_to_matrix(coords)
    astar = np.swapaxes(a, -1, -2).conj()
    m = np.eye(2) + (a @ astar) / safe[..., None, None]
    g = _hermitian_sqrt_2x2(m)
    out = matrix_to_coords(_inv_2x2(g) @ a @ g)
    return np.where(on_cone[..., None], 0.0, out)


def retract(p: Sl2Point) -> Sl2Point:
    return Sl2Point(retract_coords(p.coords))


# -- the comparison polynomials mu_{u,v} --------------------------------------


def mu_eval(u, v: int, t, r):
    """mu_{u,v}(t, R) = sum_{j=0}^{min(2u, v)} t^(u - j/2) R^(v - j).

    ``u`` is a half-integer >= 0 (int, Fraction, or float k/2); exact sum.
    """
    uq = Fraction(u).limit_denominator(2)
    if uq < 0 or uq.denominator not in (1, 2) or v < 0:
        raise ValueError("need half-integer u >= 0 and integer v >= 0")
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    p = min(int(2 * uq), v)
    total = np.zeros(np.broadcast(t, r).shape)
    for j in range(p + 1):
        te = float(uq - Fraction(j, 2))
        re = v - j
        term_t = np.ones_like(total) if te == 0 else t ** te
        term_r = np.ones_like(total) if re == 0 else r ** re
        total = total + term_t * term_r
    return total if total.ndim else float(total)


def eps_bound_check(q: float, ts: np.ndarray, coords: np.ndarray) -> float:
    """Max of eps_t R_t^(2q) (1 + t R^2)^q / R^(2q) over a (t, point) grid.

    The bound says this ratio is finite for every q >= 1; the returned
    fitted constant must stay stable under grid refinement.
    """
    if q < 1:
        raise ValueError("q >= 1 required")
    _, absf, r2 = _base_invariants(np.asarray(coords, dtype=float))
    ts = np.asarray(ts, dtype=float)[:, None]
    eps = eps_factor(r2[None, :], absf[None, :], ts)
    r2t = norm_flow(r2[None, :], absf[None, :], ts)
    ratio = eps * r2t ** q * (1.0 + ts * r2[None, :]) ** q / r2[None, :] ** q
    return float(np.max(ratio))
