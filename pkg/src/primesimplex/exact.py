"""Small exact integer linear algebra: Bareiss determinant, proportionality, inverse mod p."""

from __future__ import annotations

from collections.abc import Sequence


def det(matrix: Sequence[Sequence[int]]) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    if any(len(row) != n for row in a):
        raise ValueError("matrix must be square")
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def proportional(u: Sequence[int], v: Sequence[int]) -> bool:
    """True iff the 2 x n integer matrix [u; v] has rank < 2 (all 2x2 minors vanish)."""
    n = len(u)
    if len(v) != n:
        raise ValueError("length mismatch")
    # Pivot on one nonzero entry of u: rank < 2 iff every minor through it vanishes.
    piv = next((i for i in range(n) if u[i] != 0), None)
    if piv is None:
        return True
    return all(u[piv] * v[j] - u[j] * v[piv] == 0 for j in range(n))


def inverse_mod(matrix: Sequence[Sequence[int]], p: int) -> list[list[int]]:
    """Inverse of a square integer matrix modulo a prime p (Gauss-Jordan)."""
    n = len(matrix)
    a = [[int(x) % p for x in row] + [int(i == j) for j in range(n)] for i, row in enumerate(matrix)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError(f"matrix is singular modulo {p}")
        a[col], a[piv] = a[piv], a[col]
        inv = pow(a[col][col], -1, p)
        a[col] = [x * inv % p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [(x - f * y) % p for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def is_prime_int(n: int) -> bool:
    """Deterministic trial division; moduli here are small."""
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True
