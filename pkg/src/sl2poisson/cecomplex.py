"""Chevalley-Eilenberg complex of the real 6-dimensional Lie algebra,
with coefficients in homogeneous polynomials on the dual.

The basis of the Lie algebra is transported through the trace form so that
the basis elements G_i correspond to the six real coordinates; the module
action is then G_i . h = {x_i, h} read straight off the linear Poisson
bivector.  All matrices are integer, deterministic, and graded by the
polynomial degree; ranks go through three word-size primes with exact
escalation on disagreement.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .bivectors import poisson_bivectors
from .core import coords_to_matrix, matrix_to_coords
from .errors import (DegreeCap, ModularDisagreement, StructureMismatch,
                     WitnessNotClosed, WitnessNotIndependent)
from .poly import PolyExpr, gradedlex_monomials
from .ratrank import MODULAR_PRIMES, rank_exact_fraction, rank_mod_p

NVARS = 6
DEFAULT_DEGREE_CAP = 8

# diagonal signs of the three commuting involutive automorphisms used to
# block-split the differential: flip z1,z2; flip z2,z3; conjugate (flip y's)
_INVOLUTION_SIGNS = (
    (-1, -1, -1, -1, 1, 1),
    (1, 1, -1, -1, -1, -1),
    (1, -1, 1, -1, 1, -1),
)


@dataclass(frozen=True)
class LieStructure:
    """Structure constants in the coordinate-transported basis."""

    brackets: dict  # (i, j) i<j -> {k: Fraction}
    basis_matrices: tuple  # the six G_i as exact 2x2 complex matrices

    def bracket_coeffs(self, i: int, j: int) -> dict:
        if i == j:
            return {}
        if i < j:
            return self.brackets.get((i, j), {})
        return {k: -c for k, c in self.brackets.get((j, i), {}).items()}


def _exact_inverse(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(mat)
    aug = [[Fraction(mat[i][j]) for j in range(n)] + [Fraction(int(i == j)) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        piv = next(i for i in range(col, n) if aug[i][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for i in range(n):
            if i != col and aug[i][col]:
                f = aug[i][col]
                aug[i] = [vi - f * vc for vi, vc in zip(aug[i], aug[col])]
    return [row[n:] for row in aug]


@lru_cache(maxsize=None)
def derive_structure_constants() -> LieStructure:
    """Structure constants two ways (matrix commutators vs bivector read-off).

    Raises StructureMismatch unless both routes agree exactly; also checks
    the Jacobi identity and the Poisson-bracket compatibility
    {l_X, l_Y} = l_[X,Y] on all basis pairs.
    """
    basis_b = [coords_to_matrix(np.eye(NVARS)[i]) for i in range(NVARS)]
    # trace transport: l_{B_k}(A) = Re tr(B_k A) as integer coordinate rows
    l_rows = []
    for bk in basis_b:
        row = []
        for i in range(NVARS):
            val = np.trace(bk @ basis_b[i]).real
            ival = int(round(val))
            assert abs(val - ival) == 0.0
            row.append(Fraction(ival))
        l_rows.append(row)
    g_coeff = _exact_inverse(l_rows)  # rows: G_j = sum_k g[j][k] B_k
    basis_g = [sum((float(g_coeff[j][k]) * basis_b[k] for k in range(NVARS)),
                   np.zeros((2, 2), dtype=complex))
               for j in range(NVARS)]

    # gamma: columns are the coordinate vectors of the G_k
    gamma = [[Fraction(matrix_to_coords(basis_g[k])[i]) for k in range(NVARS)]
             for i in range(NVARS)]
    gamma_inv = _exact_inverse(gamma)

    def expand_in_g(mat: np.ndarray) -> list[Fraction]:
        coords = matrix_to_coords(mat)
        vec = [Fraction(float(v)) for v in coords]
        return [sum(gamma_inv[k][i] * vec[i] for i in range(NVARS))
                for k in range(NVARS)]

    piv = poisson_bivectors()
    brackets: dict = {}
    for i, j in combinations(range(NVARS), 2):
        comm = basis_g[i] @ basis_g[j] - basis_g[j] @ basis_g[i]
        route_a = expand_in_g(comm)
        # route b: {x_i, x_j} = pi1 component (i, j), a linear polynomial
        poly = piv.pi1.coeffs.get((i, j), PolyExpr.zero(NVARS))
        route_b = [Fraction(0)] * NVARS
        for expo, c in poly.coeffs.items():
            if sum(expo) != 1:
                raise StructureMismatch("bivector component is not linear")
            route_b[expo.index(1)] = c
        if route_a != route_b:
            raise StructureMismatch(
                f"structure constants disagree at pair ({i},{j}): "
                f"{route_a} vs {route_b}")
        entry = {k: route_a[k] for k in range(NVARS) if route_a[k]}
        if entry:
            brackets[(i, j)] = entry

    struct = LieStructure(brackets=brackets,
                          basis_matrices=tuple(map(tuple, (m.tolist() for m in basis_g))))
    _check_jacobi(struct)
    _check_poisson_compatibility(basis_b, l_rows, piv)
    return struct


def _check_jacobi(struct: LieStructure) -> None:
    def ad(i, vec):
        out = {}
        for j, c in vec.items():
            for k, ck in struct.bracket_coeffs(i, j).items():
                out[k] = out.get(k, Fraction(0)) + c * ck
        return {k: v for k, v in out.items() if v}

    for i, j, k in combinations(range(NVARS), 3):
        total: dict = {}
        for (a, b, c) in ((i, j, k), (j, k, i), (k, i, j)):
            inner = struct.bracket_coeffs(b, c)
            for m, v in ad(a, inner).items():
                total[m] = total.get(m, Fraction(0)) + v
        if any(total.values()):
            raise StructureMismatch(f"Jacobi fails on ({i},{j},{k})")


def _check_poisson_compatibility(basis_b, l_rows, piv) -> None:
    """{l_X, l_Y}_{pi1} = l_[X,Y] for all 15 pairs of trace-form generators."""
    def linpoly(row) -> PolyExpr:
        return PolyExpr(NVARS, {tuple(int(t == i) for t in range(NVARS)): c
                                for i, c in enumerate(row) if c})

    for i, j in combinations(range(NVARS), 2):
        li, lj = linpoly(l_rows[i]), linpoly(l_rows[j])
        bracket = PolyExpr.zero(NVARS)
        for (a, b), comp in piv.pi1.coeffs.items():
            pa_i, pb_j = li.partial(a), lj.partial(b)
            pa_j, pb_i = lj.partial(a), li.partial(b)
            bracket = bracket + comp * (pa_i * pb_j - pa_j * pb_i)
        comm = basis_b[i] @ basis_b[j] - basis_b[j] @ basis_b[i]
        target = PolyExpr(NVARS, {tuple(int(t == m) for t in range(NVARS)):
                                  Fraction(float(np.trace(comm @ basis_b[m]).real))
                                  for m in range(NVARS)})
        if not (bracket - target).is_zero():
            raise StructureMismatch(f"Poisson pairing fails on generators ({i},{j})")


# -- bases and the differential -------------------------------------------------


@lru_cache(maxsize=None)
def _action_table() -> dict:
    """G_j . x^e rules: j -> list of (m, k, coeff): x_m-derivative, times x_k."""
    piv = poisson_bivectors()
    full = {}
    for (i, j), poly in piv.pi1.coeffs.items():
        for expo, c in poly.coeffs.items():
            k = expo.index(1)
            full.setdefault(i, []).append((j, k, c))
            full.setdefault(j, []).append((i, k, -c))
    return full


def monomial_basis(d: int) -> list[tuple[int, ...]]:
    return gradedlex_monomials(NVARS, d)


def wedge_basis(k: int) -> list[tuple[int, ...]]:
    return list(combinations(range(NVARS), k))


@dataclass(frozen=True)
class CEMatrix:
    """One graded piece of the differential, with its bases."""

    k: int
    d: int
    matrix: sp.csr_matrix  # shape (rows, cols), integer
    col_wedges: tuple
    row_wedges: tuple
    monomials: tuple


@lru_cache(maxsize=None)
def ce_differential(k: int, d: int, cap: int = DEFAULT_DEGREE_CAP) -> CEMatrix:
    """Matrix of the differential Lambda^k x Poly_d -> Lambda^(k+1) x Poly_d."""
    if d > cap:
        raise DegreeCap(f"degree {d} exceeds cap {cap}")
    if not 0 <= k <= NVARS:
        raise ValueError("k out of range")
    struct = derive_structure_constants()
    action = _action_table()
    monos = monomial_basis(d)
    mono_index = {m: i for i, m in enumerate(monos)}
    cols_w = wedge_basis(k)
    rows_w = wedge_basis(k + 1) if k < NVARS else ()
    colw_index = {w: i for i, w in enumerate(cols_w)}
    roww_index = {w: i for i, w in enumerate(rows_w)}
    nm = len(monos)

    data, rows, cols = [], [], []

    def emit(row_wedge, mono, col, coeff):
        if coeff == 0:
            return
        r = roww_index[row_wedge] * nm + mono_index[mono]
        rows.append(r)
        cols.append(col)
        data.append(int(coeff))

    for iw, wedge in enumerate(cols_w):
        wset = set(wedge)
        for im, mono in enumerate(monos):
            col = iw * nm + im
            # module-action part: sum_j xi_j ^ xi_I (x) G_j . m
            for j in range(NVARS):
                if j in wset:
                    continue
                row_wedge = tuple(sorted(wedge + (j,)))
                sgn = (-1) ** row_wedge.index(j)
                for (m, kvar, c) in action.get(j, ()):
                    if mono[m] == 0:
                        continue
                    newmono = list(mono)
                    newmono[m] -= 1
                    newmono[kvar] += 1
                    emit(row_wedge, tuple(newmono), col, sgn * c * mono[m])
            # Lie-cochain part: pairs (u, v) replacing w in the wedge
            for pos_w, w in enumerate(wedge):
                core = tuple(t for t in wedge if t != w)
                coreset = set(core)
                for (u, v), entry in struct.brackets.items():
                    cuvw = entry.get(w)
                    if not cuvw or u in coreset or v in coreset:
                        continue
                    row_wedge = tuple(sorted(core + (u, v)))
                    if len(row_wedge) != k + 1:
                        continue
                    sgn = (-1) ** (row_wedge.index(u) + row_wedge.index(v))
                    sgn *= (-1) ** pos_w
                    emit(row_wedge, mono, col, sgn * cuvw)

    shape = (len(rows_w) * nm, len(cols_w) * nm)
    mat = sp.csr_matrix((np.asarray(data, dtype=np.int64), (rows, cols)),
                        shape=shape)
    mat.sum_duplicates()
    return CEMatrix(k=k, d=d, matrix=mat, col_wedges=tuple(cols_w),
                    row_wedges=tuple(rows_w), monomials=tuple(monos))


def d_squared_is_zero(k: int, d: int) -> bool:
    """Certified integer check that the composite differential vanishes.

    Entries of the product are bounded far below the int64 range, so the
    sparse integer product being the zero matrix is an exact statement.
    """
    if k + 1 > NVARS:
        return True
    m1 = ce_differential(k, d).matrix
    m2 = ce_differential(k + 1, d).matrix
    prod = m2 @ m1
    return prod.nnz == 0 or not prod.data.any()


# -- character blocking and exact ranks ----------------------------------------


def _character_bits(wedge: tuple[int, ...], mono: tuple[int, ...]) -> int:
    bits = 0
    for b, signs in enumerate(_INVOLUTION_SIGNS):
        neg = sum(1 for i in wedge if signs[i] < 0)
        neg += sum(mono[i] for i in range(NVARS) if signs[i] < 0)
        if neg % 2:
            bits |= 1 << b
    return bits


def _basis_characters(wedges, monos) -> np.ndarray:
    out = np.empty(len(wedges) * len(monos), dtype=np.int8)
    idx = 0
    for w in wedges:
        for m in monos:
            out[idx] = _character_bits(w, m)
            idx += 1
    return out


def _blocked_rank_mod_p(cem: CEMatrix, p: int) -> int:
    mat = cem.matrix
    if mat.shape[0] == 0 or mat.shape[1] == 0 or mat.nnz == 0:
        return 0
    col_chi = _basis_characters(cem.col_wedges, cem.monomials)
    row_chi = _basis_characters(cem.row_wedges, cem.monomials)
    total = 0
    seen_nnz = 0
    csc = mat.tocsc()
    for chi in range(8):
        cols = np.nonzero(col_chi == chi)[0]
        rows = np.nonzero(row_chi == chi)[0]
        if cols.size == 0 or rows.size == 0:
            continue
        block = csc[:, cols][rows, :]
        seen_nnz += block.nnz
        if block.nnz == 0:
            continue
        total += rank_mod_p(block.toarray(), p)
    if seen_nnz != mat.nnz:
        raise StructureMismatch("differential does not respect the character grading")
    return total


@lru_cache(maxsize=None)
def ce_rank(k: int, d: int, cap: int = DEFAULT_DEGREE_CAP) -> int:
    """Rank of the (k, d) differential, certified across the fixed primes."""
    cem = ce_differential(k, d, cap)
    if cem.matrix.shape[0] == 0 or cem.matrix.shape[1] == 0:
        return 0
    ranks = [_blocked_rank_mod_p(cem, p) for p in MODULAR_PRIMES]
    if len(set(ranks)) != 1:
        # Las-Vegas escalation: exact fraction elimination settles it
        exact = rank_exact_fraction(
            [[Fraction(int(v)) for v in row] for row in cem.matrix.toarray()])
        if exact not in ranks:
            raise ModularDisagreement(
                f"ranks {ranks} disagree and exact rank {exact} matches none")
        return exact
    return ranks[0]


def betti(k: int, d: int, cap: int = DEFAULT_DEGREE_CAP) -> int:
    """dim ker(d on Lambda^k) - rank(d from Lambda^(k-1)) in poly degree d."""
    cem = ce_differential(k, d, cap)
    ncols = cem.matrix.shape[1]
    rank_k = ce_rank(k, d, cap) if k < NVARS else 0
    rank_prev = ce_rank(k - 1, d, cap) if k >= 1 else 0
    return ncols - rank_k - rank_prev


def expected_betti(k: int, d: int) -> int:
    """m(d) copies of the constant-coefficient cohomology (1,0,0,2,0,0,1)."""
    if d % 2:
        return 0
    mult = d // 2 + 1
    return mult * (1, 0, 0, 2, 0, 0, 1)[k]


def betti_table(max_d: int, ks=None, cap: int = DEFAULT_DEGREE_CAP) -> dict:
    ks = tuple(ks) if ks is not None else tuple(range(NVARS + 1))
    return {(k, d): betti(k, d, cap) for d in range(max_d + 1) for k in ks}


# -- cocycle witnesses in degree 3 ----------------------------------------------


def _casimir_powers(a: int, b: int) -> PolyExpr:
    from .bivectors import casimir_parts
    f1, f2 = casimir_parts()
    return f1 ** a * f2 ** b


def cocycle_witness(k: int, d: int, cap: int = DEFAULT_DEGREE_CAP):
    """Integer CE cochains for f1^a f2^b * C_R and * C_I, verified.

    Each witness is checked to be in ker(d) exactly (integer matvec), and
    the family is checked to be independent modulo the image of d on all
    the fixed primes.  Returns the list of (label, vector) pairs.
    """
    if k != 3:
        raise ValueError("witnesses are provided in degree 3 only")
    if d % 2:
        return []
    from .bivectors import cartan_cocycles
    cem3 = ce_differential(3, d, cap)
    monos = {m: i for i, m in enumerate(cem3.monomials)}
    nm = len(cem3.monomials)
    wedge_idx = {w: i for i, w in enumerate(cem3.col_wedges)}
    cr, ci = cartan_cocycles()

    witnesses = []
    for a in range(d // 2 + 1):
        b = d // 2 - a
        casimir = _casimir_powers(a, b)
        for label, tri in ((f"f1^{a} f2^{b} C_R", cr), (f"f1^{a} f2^{b} C_I", ci)):
            vec = np.zeros(len(cem3.col_wedges) * nm, dtype=np.int64)
            for key, coeff in tri.coeffs.items():
                # clear the 1/2 in the trivectors: store 2 * component
                poly = casimir * coeff * 2
                for expo, c in poly.coeffs.items():
                    assert c.denominator == 1
                    vec[wedge_idx[key] * nm + monos[expo]] = int(c)
            witnesses.append((label, vec))

    for label, vec in witnesses:
        img = cem3.matrix @ vec
        if img.size and np.any(img):
            raise WitnessNotClosed(label)

    mat2 = ce_differential(2, d, cap).matrix
    wmat = np.stack([v for _, v in witnesses], axis=1)
    for p in MODULAR_PRIMES:
        base = _blocked_rank_mod_p(ce_differential(2, d, cap), p)
        aug = sp.hstack([mat2, sp.csr_matrix(wmat)]).toarray()
        if rank_mod_p(aug, p) != base + len(witnesses):
            raise WitnessNotIndependent(
                f"witnesses dependent modulo the image at prime {p}")
    return witnesses
