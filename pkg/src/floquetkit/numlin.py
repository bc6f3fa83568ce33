"""Small dense linear algebra: LU determinant and solve, eigenvalues, and an
exact rational solver used for cofactor discovery.

Real matrices are plain 2-D ``numpy`` float arrays; rational matrices are
lists of lists of :class:`fractions.Fraction`.
"""

from fractions import Fraction
import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (ConvergenceFailure, DimensionMismatch, NoSolution,
                     NotSquare, SingularMatrix)

__all__ = [
    "as_matrix",
    "lu_factor",
    "determinant",
    "solve_linear",
    "eigenvalues",
    "solve_exact",
]

MAX_EIG_SIZE = 8


def as_matrix(m, square=False):
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.size == 0:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if square and a.shape[0] != a.shape[1]:
        raise NotSquare(f"matrix is {a.shape[0]}x{a.shape[1]}")
    return a


def lu_factor(m):
    """Doolittle LU with partial pivoting.

    Returns ``(lu, perm, sign, min_pivot)``; ``lu`` holds L (unit diagonal,
    strictly below) and U packed together.
    """
    a = as_matrix(m, square=True).copy()
    n = a.shape[0]
    perm = np.arange(n)
    sign = 1.0
    min_pivot = np.inf
    for j in range(n):
        p = j + int(np.argmax(np.abs(a[j:, j])))
        if p != j:
            a[[j, p]] = a[[p, j]]
            perm[[j, p]] = perm[[p, j]]
            sign = -sign
        piv = a[j, j]
        min_pivot = min(min_pivot, abs(piv))
        if piv != 0.0:
            a[j + 1:, j] /= piv
            a[j + 1:, j + 1:] -= np.outer(a[j + 1:, j], a[j, j + 1:])
    return a, perm, sign, min_pivot


def determinant(m):
    lu, _, sign, _ = lu_factor(m)
    return float(sign * np.prod(np.diag(lu)))


def solve_linear(a, b):
    """Solve ``a x = b``; raises SingularMatrix when a pivot drops below
    ``1e-14 * ||a||_inf``."""
    a = as_matrix(a, square=True)
    b = np.array(b, dtype=float)
    if b.shape != (a.shape[0],):
        raise DimensionMismatch(f"rhs has shape {b.shape}, expected ({a.shape[0]},)")
    lu, perm, _, min_pivot = lu_factor(a)
    norm = np.abs(a).sum(axis=1).max()
    if min_pivot <= 1e-14 * norm:
        raise SingularMatrix(f"pivot {min_pivot:.3e} below 1e-14*||a|| = {1e-14 * norm:.3e}")
    n = a.shape[0]
    y = b[perm].copy()
    for i in range(n):
        y[i] -= lu[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - lu[i, i + 1:] @ y[i + 1:]) / lu[i, i]
    return y


def _diagonal_blocks(a):
    """Index sets of the diagonal blocks of the block-triangular form that
    ``a``'s exact zero pattern admits (strongly connected components)."""
    n_comp, labels = connected_components(csr_matrix(a != 0), directed=True,
                                          connection="strong")
    return [np.flatnonzero(labels == c) for c in range(n_comp)]


def _eig2(a, b, c, d):
    """Eigenvalues of ``[[a, b], [c, d]]`` without the cancellation of the
    textbook formula: the smaller real root is ``det / (larger root)``."""
    mid = 0.5 * (a + d)
    half = 0.5 * (a - d)
    disc = half * half + b * c
    if disc < 0:
        r = math.sqrt(-disc)
        return [complex(mid, r), complex(mid, -r)]
    big = mid + math.copysign(math.sqrt(disc), mid)
    det = a * d - b * c
    small = det / big if big != 0 else 0.0
    return [complex(big), complex(small)]


def eigenvalues(m):
    """All eigenvalues (with multiplicity) sorted by (re, im) descending.

    The matrix is first split along exact zeros into its irreducible
    diagonal blocks, which are solved separately.  A multiplier isolated by
    structural zeros then keeps full relative accuracy even when other
    entries are many orders of magnitude larger.  Blocks of size 1 and 2 are
    solved in closed form, larger ones with LAPACK (``numpy.linalg.eigvals``).
    """
    a = as_matrix(m, square=True)
    if a.shape[0] > MAX_EIG_SIZE:
        raise DimensionMismatch(f"eigenvalues supports up to {MAX_EIG_SIZE}x{MAX_EIG_SIZE}")
    w = []
    for idx in _diagonal_blocks(a):
        block = a[np.ix_(idx, idx)]
        if block.shape == (1, 1):
            w.append(complex(block[0, 0]))
            continue
        if block.shape == (2, 2):
            w.extend(_eig2(*block.ravel()))
            continue
        try:
            w.extend(complex(x) for x in np.linalg.eigvals(block))
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure(str(exc)) from exc
    return sorted(w, key=lambda z: (z.real, z.imag), reverse=True)


def solve_exact(a, b):
    """Exact solution of a (possibly rectangular) rational system.

    Gauss-Jordan elimination choosing pivot columns left to right; free
    unknowns are set to zero.  Raises NoSolution if inconsistent.
    """
    rows = [[Fraction(x) for x in row] for row in a]
    rhs = [Fraction(x) for x in b]
    if len(rows) != len(rhs):
        raise DimensionMismatch(f"{len(rows)} equations but {len(rhs)} right-hand sides")
    ncols = len(rows[0]) if rows else 0
    if any(len(r) != ncols for r in rows):
        raise DimensionMismatch("ragged coefficient matrix")
    aug = [r + [v] for r, v in zip(rows, rhs)]
    pivots = []
    r = 0
    for col in range(ncols):
        pr = next((i for i in range(r, len(aug)) if aug[i][col] != 0), None)
        if pr is None:
            continue
        aug[r], aug[pr] = aug[pr], aug[r]
        inv = 1 / aug[r][col]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(len(aug)):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(col)
        r += 1
        if r == len(aug):
            break
    for i in range(r, len(aug)):
        if aug[i][ncols] != 0:
            raise NoSolution("inconsistent linear system")
    x = [Fraction(0)] * ncols
    for i, col in enumerate(pivots):
        x[col] = aug[i][ncols]
    return x
