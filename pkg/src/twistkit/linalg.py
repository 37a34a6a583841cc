"""Small exact-matrix helpers over expressions (lists of lists of Expr)."""

from __future__ import annotations

from .core import Expr, ONE, ZERO, normalize
from .errors import DimensionMismatch, SingularMatrix


def mat(rows):
    return [[normalize(v) for v in row] for row in rows]


def mat_shape(M):
    return len(M), len(M[0]) if M else 0


def identity(n: int):
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def zeros(n: int, m: int | None = None):
    m = n if m is None else m
    return [[ZERO for _ in range(m)] for _ in range(n)]


def mat_add(A, B):
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_sub(A, B):
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def mat_scale(A, s):
    return [[v * s for v in row] for row in A]


def mat_mul(A, B):
    n, k = mat_shape(A)
    k2, m = mat_shape(B)
    if k != k2:
        raise DimensionMismatch("matrix product shape mismatch")
    out = zeros(n, m)
    for i in range(n):
        for j in range(m):
            acc = ZERO
            for t in range(k):
                acc = acc + A[i][t] * B[t][j]
            out[i][j] = acc
    return out


def mat_vec(A, v):
    return [sum((a * x for a, x in zip(row, v)), ZERO) for row in A]


def mat_map(A, f):
    return [[f(v) for v in row] for row in A]


def mat_eq(A, B) -> bool:
    return all((a - b).is_zero() for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def mat_is_zero(A) -> bool:
    return all(v.is_zero() for row in A for v in row)


def det(M) -> Expr:
    n, m = mat_shape(M)
    if n != m:
        raise DimensionMismatch("determinant of a non-square matrix")
    if n == 1:
        return M[0][0]
    total = ZERO
    sign = 1
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        total = total + Expr.const(sign) * M[0][j] * det(minor)
        sign = -sign
    return total


def adjugate(M):
    n, _ = mat_shape(M)
    if n == 1:
        return [[ONE]]
    out = zeros(n)
    for i in range(n):
        for j in range(n):
            minor = [row[:i] + row[i + 1:] for k, row in enumerate(M) if k != j]
            out[i][j] = Expr.const((-1) ** (i + j)) * det(minor)
    return out


def matrix_inverse(M):
    """Exact inverse via adjugate over determinant; raises on singular input."""
    n, m = mat_shape(M)
    if n != m:
        raise DimensionMismatch("inverse of a non-square matrix")
    d = det(M)
    if d.is_zero():
        raise SingularMatrix("matrix determinant is identically zero")
    adj = adjugate(M)
    return mat_map(adj, lambda v: v / d)
