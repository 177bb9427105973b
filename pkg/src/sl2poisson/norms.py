"""Flat norms ||s||_{n,k,r} and empirical operator-bound (SLB) ratios.

The norm is the sup over the closed r-ball of |x|^{-k} |D^a s(x)| for all
|a| <= n, where D^a carries the 1/a! normalization.  That normalization
lives only here; everything else in the library differentiates plainly.

The SLB sweeps are falsification-style: they fit the best constant in
||L(alpha)||_{n,k,r} <= C ||alpha||_{n+a, k+b*n+c, r} over a sample family
and report it; a diverging fit under refinement would falsify the bound.
"""

from __future__ import annotations

from itertools import product

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import DerivativeBudgetExceeded
from .poly import multi_factorial


def multi_indices(dim: int, n: int) -> list[tuple[int, ...]]:
    """All multi-indices with |a| <= n, lexicographic."""
    out = []
    for total in range(n + 1):
        def rec(prefix, remaining, pos):
            if pos == dim - 1:
                out.append(tuple(prefix + [remaining]))
                return
            for kk in range(remaining + 1):
                rec(prefix + [kk], remaining - kk, pos + 1)
        rec([], total, 0)
    return out


def _directions(dim: int, count: int) -> np.ndarray:
    if dim == 2:
        ang = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    size = 1
    while size < 2 * (count + 2):
        size *= 2
    sob = qmc.Sobol(d=dim, scramble=False)
    raw = sob.random(size)
    normals = ndtri(np.clip(raw, 1e-12, 1 - 1e-12))
    lens = np.linalg.norm(normals, axis=1)
    keep = lens > 1e-9
    normals, lens = normals[keep][:count], lens[keep][:count]
    return normals / lens[:, None]


def _radii(r: float, uniform: int) -> np.ndarray:
    base = np.linspace(r / uniform, r, uniform)
    near0 = r * 2.0 ** (-np.arange(0, 21, dtype=float))
    near_boundary = r * (1.0 - 2.0 ** (-np.arange(1, 9, dtype=float)))
    return np.unique(np.concatenate([base, near0, near_boundary]))


def ball_grid(dim: int, r: float, n_dirs: int | None = None,
              n_radii: int = 24) -> np.ndarray:
    """Evaluation grid on the closed r-ball: radially clustered, no origin."""
    if n_dirs is None:
        n_dirs = 64 if dim == 2 else 200
    dirs = _directions(dim, n_dirs)
    radii = _radii(r, n_radii)
    return (radii[:, None, None] * dirs[None, :, :]).reshape(-1, dim)


def flat_norm(s, n: int, k: int, r: float, grid: np.ndarray | None = None) -> float:
    """||s||_{n,k,r} for a scalar with closed-form partials (family member)."""
    dim = s.dim
    if grid is None:
        grid = ball_grid(dim, r)
    absx = np.linalg.norm(grid, axis=1)
    weight = absx ** (-float(k)) if k else np.ones_like(absx)
    best = 0.0
    for a in multi_indices(dim, n):
        deriv = s
        for i, reps in enumerate(a):
            for _ in range(reps):
                deriv = deriv.partial(i)
        vals = np.abs(deriv.eval_batch(grid)) / multi_factorial(a)
        best = max(best, float(np.max(vals * weight)))
    return best


class NumericScalarField:
    """Scalar given only by a batched callable; derivatives by central FD."""

    def __init__(self, func, dim: int = 6, budget: int = 1, step_scale: float = 1e-5):
        self.func = func
        self.dim = dim
        self.budget = budget
        self.step_scale = step_scale

    def eval_batch(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(np.atleast_2d(points)), dtype=float)

    def norm_derivative_values(self, grid: np.ndarray, a: tuple[int, ...]) -> np.ndarray:
        order = sum(a)
        if order == 0:
            return self.eval_batch(grid)
        if order > self.budget:
            raise DerivativeBudgetExceeded(
                f"order {order} exceeds budget {self.budget}")
        i = next(idx for idx, reps in enumerate(a) if reps)
        h = self.step_scale * (1.0 + np.linalg.norm(grid, axis=1, keepdims=True))
        e = np.zeros(self.dim)
        e[i] = 1.0
        rest = tuple(reps - (1 if idx == i else 0) for idx, reps in enumerate(a))
        up = NumericScalarField(self.func, self.dim, self.budget, self.step_scale) \
            .norm_derivative_values(grid + h * e, rest)
        dn = NumericScalarField(self.func, self.dim, self.budget, self.step_scale) \
            .norm_derivative_values(grid - h * e, rest)
        return (up - dn) / (2.0 * h[:, 0])


def flat_norm_numeric(field: NumericScalarField, n: int, k: int, r: float,
                      grid: np.ndarray | None = None) -> float:
    if grid is None:
        grid = ball_grid(field.dim, r)
    absx = np.linalg.norm(grid, axis=1)
    weight = absx ** (-float(k)) if k else np.ones_like(absx)
    best = 0.0
    for a in multi_indices(field.dim, n):
        vals = np.abs(field.norm_derivative_values(grid, a)) / multi_factorial(a)
        best = max(best, float(np.max(vals * weight)))
    return best


def flat_norm_form(form, n: int, k: int, r: float,
                   grid: np.ndarray | None = None, budget: int = 1,
                   step_scale: float = 1e-5) -> float:
    """Flat norm of a form: max of the component norms in the coordinate frame.

    Closed-form coefficients are used when the form exposes
    ``component_functions``; otherwise components come from evaluating on
    coordinate tuples and derivatives from central differences.
    """
    dim = getattr(form, "dim", 6)
    if grid is None:
        grid = ball_grid(dim, r)
    if hasattr(form, "component_functions"):
        return max((flat_norm(c, n, k, r, grid)
                    for c in form.component_functions().values()), default=0.0)
    from itertools import combinations
    best = 0.0
    basis = np.eye(dim)
    for key in combinations(range(dim), form.degree):
        def comp(points, key=key):
            vecs = [np.broadcast_to(basis[i], (points.shape[0], dim)) for i in key]
            return form.eval(points, vecs)
        field = NumericScalarField(comp, dim, budget, step_scale)
        best = max(best, flat_norm_numeric(field, n, k, r, grid))
    return best


def slb_ratio(op, triple: tuple[int, int, int], n: int, k: int, r: float,
              family, grid: np.ndarray | None = None, budget: int = 1,
              log=None) -> float:
    """Fitted constant max ||op(a)|| / ||a|| over the family, at one (n,k,r).

    Degenerate family members (zero source norm) are skipped and logged.
    """
    a_, b_, c_ = triple
    best = 0.0
    for alpha in family:
        den = flat_norm_form(alpha, n + a_, k + b_ * n + c_, r, grid)
        if den == 0.0:
            if log is not None:
                log.append(f"skipped degenerate sample (zero norm): {alpha!r}")
            continue
        num = flat_norm_form(op(alpha), n, k, r, grid, budget=budget)
        best = max(best, num / den)
    return best
