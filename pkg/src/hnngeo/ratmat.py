"""Small exact linear algebra over Fractions.

Group arithmetic must be exact: inclusion matrices are integer, the
conjugating automorphism is rational, and Britton reduction decides
lattice membership by exact division.  Matrices are tuples of tuples so
they hash and compare structurally; numpy is reserved for the floating
geometry elsewhere.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

IntMatrix = tuple[tuple[int, ...], ...]
FracMatrix = tuple[tuple[Fraction, ...], ...]
IntVector = tuple[int, ...]
FracVector = tuple[Fraction, ...]


def int_matrix(rows: Sequence[Sequence[int]]) -> IntMatrix:
    m = tuple(tuple(int(v) for v in row) for row in rows)
    n = len(m)
    if n == 0 or any(len(row) != n for row in m):
        raise ValueError("matrix must be square and nonempty")
    return m


def frac_matrix(rows: Sequence[Sequence]) -> FracMatrix:
    m = tuple(tuple(Fraction(v) for v in row) for row in rows)
    n = len(m)
    if n == 0 or any(len(row) != n for row in m):
        raise ValueError("matrix must be square and nonempty")
    return m


def identity(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def det(m: Sequence[Sequence]) -> Fraction:
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    n = len(m)
    a = [[Fraction(v) for v in row] for row in m]
    sign = 1
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            sign = -sign
        for r in range(col + 1, n):
            f = a[r][col] / a[col][col]
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    out = Fraction(sign)
    for i in range(n):
        out *= a[i][i]
    return out


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> FracMatrix:
    n = len(a)
    return tuple(
        tuple(sum((Fraction(a[i][k]) * Fraction(b[k][j]) for k in range(n)), Fraction(0))
              for j in range(n))
        for i in range(n)
    )


def mat_vec(a: Sequence[Sequence], v: Sequence) -> FracVector:
    n = len(a)
    return tuple(sum((Fraction(a[i][k]) * Fraction(v[k]) for k in range(n)), Fraction(0))
                 for i in range(n))


def mat_inv(m: Sequence[Sequence]) -> FracMatrix:
    """Exact inverse by Gauss-Jordan; raises ZeroDivisionError if singular."""
    n = len(m)
    a = [[Fraction(v) for v in row] for row in m]
    inv = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        f = a[col][col]
        a[col] = [v / f for v in a[col]]
        inv[col] = [v / f for v in inv[col]]
        for r in range(n):
            if r != col and a[r][col]:
                g = a[r][col]
                a[r] = [x - g * y for x, y in zip(a[r], a[col])]
                inv[r] = [x - g * y for x, y in zip(inv[r], inv[col])]
    return tuple(tuple(row) for row in inv)


def mat_eq(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    n = len(a)
    return all(Fraction(a[i][j]) == Fraction(b[i][j]) for i in range(n) for j in range(n))


def vec_add(u: Sequence, v: Sequence):
    return tuple(x + y for x, y in zip(u, v))


def vec_sub(u: Sequence, v: Sequence):
    return tuple(x - y for x, y in zip(u, v))


def vec_neg(u: Sequence):
    return tuple(-x for x in u)


def parse_fraction(s) -> Fraction:
    """Accepts ints, "a/b" strings, and plain decimal strings."""
    if isinstance(s, Fraction):
        return s
    if isinstance(s, int):
        return Fraction(s)
    return Fraction(str(s))
