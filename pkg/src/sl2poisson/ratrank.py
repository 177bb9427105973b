"""Exact and modular ranks of integer matrices.

Two engines: fraction-free (Bareiss) elimination over the integers for small
matrices, and mod-p elimination for word-size primes.  The modular engine
keeps residues in float64 and does its trailing updates with BLAS panels;
with p < 2^21 and panel width <= 64 every intermediate value stays below
2^53, so the float arithmetic is exact.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

# the three largest primes below 2^20; products fit float64 panels exactly
MODULAR_PRIMES = (1048573, 1048571, 1048559)

_PANEL = 48


def _mod_p(x: np.ndarray, p: float, invp: float) -> np.ndarray:
    """Fast x mod p for float64 integers |x| < 2^52; result in [0, p)."""
    r = x - np.floor(x * invp) * p
    r[r < 0] += p
    r[r >= p] -= p
    return r


def rank_mod_p(mat: np.ndarray, p: int, panel: int = _PANEL) -> int:
    """Rank over F_p by blocked elimination; exact for p < 2^21."""
    if p * p * panel >= 2 ** 53:
        raise ValueError("prime too large for exact float64 panels")
    a = np.asarray(mat)
    if a.size == 0:
        return 0
    a = np.remainder(a, p).astype(np.float64)
    m, n = a.shape
    pf, invp = float(p), 1.0 / float(p)
    r = 0  # row frontier = rank so far
    c = 0
    while r < m and c < n:
        w = min(panel, n - c)
        k = 0  # pivots found in this panel
        lower = np.zeros((m - r, w))  # unit-lower multipliers, LU storage
        for dj in range(w):
            j = c + dj
            col = a[r + k:, j]
            nz = np.nonzero(col)[0]
            if nz.size == 0:
                continue
            pr = r + k + int(nz[0])
            if pr != r + k:
                a[[r + k, pr]] = a[[pr, r + k]]
                lower[[k, pr - r]] = lower[[pr - r, k]]
            inv = float(pow(int(a[r + k, j]), -1, p))
            below = a[r + k + 1:, j]
            f = _mod_p(below * inv, pf, invp)
            if f.size:
                a[r + k + 1:, c:c + w] = _mod_p(
                    a[r + k + 1:, c:c + w] - np.outer(f, a[r + k, c:c + w]),
                    pf, invp)
                lower[k + 1:, k] = f
            k += 1
        if k == 0:
            c += w
            continue
        if c + w < n:
            trail = a[r:, c + w:]
            # forward substitution on the pivot rows, then one panel update
            for jj in range(1, k):
                trail[jj] = _mod_p(trail[jj] - lower[jj, :jj] @ trail[:jj],
                                   pf, invp)
            if m - r > k:
                trail[k:] = _mod_p(trail[k:] - lower[k:, :k] @ trail[:k],
                                   pf, invp)
        r += k
        c += w
    return r


def rank_modular_certified(mat_int: np.ndarray,
                           primes=MODULAR_PRIMES) -> tuple[int, bool]:
    """Rank modulo several primes; (rank, agreed)."""
    ranks = [rank_mod_p(mat_int, p) for p in primes]
    return ranks[0], all(rk == ranks[0] for rk in ranks)


def rank_exact_fraction(rows: list[list[Fraction]]) -> int:
    """Plain fraction elimination; only for genuinely rational input."""
    a = [list(map(Fraction, row)) for row in rows]
    m = len(a)
    if m == 0:
        return 0
    n = len(a[0])
    rank = 0
    row = 0
    for col in range(n):
        piv = None
        for i in range(row, m):
            if a[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        inv = 1 / a[row][col]
        a[row] = [v * inv for v in a[row]]
        for i in range(row + 1, m):
            f = a[i][col]
            if f:
                a[i] = [vi - f * vr for vi, vr in zip(a[i], a[row])]
        rank += 1
        row += 1
        if row == m:
            break
    return rank
