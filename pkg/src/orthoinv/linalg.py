"""Exact linear solves by fraction-free (Bareiss) elimination.

Rational rows are scaled to integers first, so every intermediate value is
an integer; pivots are chosen by largest magnitude in the column.  Only the
final back-substitution produces fractions.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence


class SingularMatrixError(ValueError):
    pass


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        den = 1
        for v in row:
            den = math.lcm(den, Fraction(v).denominator)
        out.append([int(Fraction(v) * den) for v in row])
    return out


def _bareiss(aug: list[list[int]], ncols: int) -> list[list[int]]:
    """In-place Bareiss forward elimination on the first ``ncols`` columns."""
    n = len(aug)
    prev = 1
    for k in range(ncols):
        piv = max(range(k, n), key=lambda r: abs(aug[r][k]))
        if aug[piv][k] == 0:
            raise SingularMatrixError("matrix is singular (no pivot in column %d)" % k)
        if piv != k:
            aug[k], aug[piv] = aug[piv], aug[k]
        pk = aug[k][k]
        rowk = aug[k]
        for i in range(k + 1, n):
            rowi = aug[i]
            a = rowi[k]
            for j in range(k + 1, len(rowi)):
                rowi[j] = (pk * rowi[j] - a * rowk[j]) // prev
            rowi[k] = 0
        prev = pk
    return aug


def solve(a: Sequence[Sequence], b: Sequence[Sequence] | Sequence) -> list:
    """Solve ``a x = b`` exactly for square ``a``.

    ``b`` may be a vector or a list of right-hand-side columns given as rows
    of a matrix (``len(b) == len(a)``).  Returns Fractions in the same shape.
    """
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix must be square")
    vector = bool(len(b)) and not isinstance(b[0], (list, tuple))
    rhs = [[v] for v in b] if vector else [list(r) for r in b]
    if len(rhs) != n:
        raise ValueError("right-hand side has wrong length")
    m = len(rhs[0]) if n else 0
    aug = _integer_rows([list(a[i]) + rhs[i] for i in range(n)])
    _bareiss(aug, n)
    x = [[Fraction(0)] * m for _ in range(n)]
    for i in range(n - 1, -1, -1):
        row = aug[i]
        for c in range(m):
            s = Fraction(row[n + c])
            for j in range(i + 1, n):
                if row[j]:
                    s -= row[j] * x[j][c]
            x[i][c] = s / row[i]
    return [r[0] for r in x] if vector else x


def inverse(a: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(a)
    eye = [[int(i == j) for j in range(n)] for i in range(n)]
    return solve(a, eye)


def determinant(a: Sequence[Sequence]) -> Fraction:
    n = len(a)
    if n == 0:
        return Fraction(1)
    rows = [[Fraction(v) for v in row] for row in a]
    den = 1
    for row in rows:
        den *= math.lcm(1, *(v.denominator for v in row))
    aug = _integer_rows(rows)
    # track row swaps for the sign
    sign = 1
    prev = 1
    for k in range(n):
        piv = max(range(k, n), key=lambda r: abs(aug[r][k]))
        if aug[piv][k] == 0:
            return Fraction(0)
        if piv != k:
            aug[k], aug[piv] = aug[piv], aug[k]
            sign = -sign
        pk = aug[k][k]
        for i in range(k + 1, n):
            a_ik = aug[i][k]
            for j in range(k + 1, n):
                aug[i][j] = (pk * aug[i][j] - a_ik * aug[k][j]) // prev
            aug[i][k] = 0
        prev = pk
    return Fraction(sign * aug[n - 1][n - 1], den)


def mat_vec(m: Sequence[Sequence], v: Sequence) -> list:
    return [sum((x * y for x, y in zip(row, v) if x), 0) for row in m]
