"""Small dense linear algebra and combinatorial enumeration.

Everything here works on complex ``numpy`` arrays of modest size (at most
32 x 32).  Index subsets are plain tuples of increasing integers; the
bit-set form used by the Grassmann code lives in :mod:`superkraw.superpoly`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

ATOL = 1e-12
RTOL = 1e-9
MAX_DIM = 32


class DimensionError(ValueError):
    """Raised when array shapes or index sets are inconsistent."""


class DegeneracyError(ValueError):
    """Raised when an input makes a construction singular or undefined."""


@dataclass(frozen=True)
class Tolerance:
    atol: float = ATOL
    rtol: float = RTOL

    def close(self, a, b) -> bool:
        return bool(np.allclose(a, b, rtol=self.rtol, atol=self.atol))


@dataclass(frozen=True)
class Residual:
    """Maximum deviation over a sweep together with the place it occurred."""

    value: float
    witness: Any = None
    count: int = 0
    extra: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)

    @classmethod
    def combine(cls, residuals):
        residuals = list(residuals)
        if not residuals:
            return cls(0.0, None, 0)
        worst = max(residuals, key=lambda r: r.value)
        return cls(worst.value, worst.witness, sum(r.count for r in residuals))


class ResidualTracker:
    """Accumulate ``|lhs - rhs|`` values and remember the worst one."""

    def __init__(self):
        self.value = 0.0
        self.witness = None
        self.count = 0

    def add(self, delta, witness):
        delta = float(abs(delta))
        self.count += 1
        if self.witness is None or delta > self.value:
            self.value = delta
            self.witness = witness

    def result(self) -> Residual:
        return Residual(self.value, self.witness, self.count)


def as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {M.shape}")
    return M


def _cofactor_det(M):
    n = M.shape[0]
    if n == 0:
        return 1.0 + 0j
    if n == 1:
        return M[0, 0]
    if n == 2:
        return M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    total = 0j
    for j in range(n):
        if M[0, j] == 0:
            continue
        sub = np.delete(M[1:], j, axis=1)
        total += (-1) ** j * M[0, j] * _cofactor_det(sub)
    return total


def det(M) -> complex:
    """Determinant of a square matrix.

    Cofactor expansion up to 4 x 4, LAPACK LU with partial pivoting above.
    """
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"determinant of non-square {M.shape} matrix")
    if M.shape[0] > MAX_DIM:
        raise DimensionError(f"matrix size {M.shape[0]} exceeds {MAX_DIM}")
    if M.shape[0] <= 4:
        return complex(_cofactor_det(M))
    return complex(np.linalg.det(M))


def minor(M, rows, cols) -> complex:
    """Determinant of the submatrix on ``rows`` x ``cols`` (sorted order)."""
    M = as_matrix(M)
    rows, cols = tuple(rows), tuple(cols)
    if len(rows) != len(cols):
        raise DimensionError(f"minor with {len(rows)} rows and {len(cols)} columns")
    for idx, bound in ((rows, M.shape[0]), (cols, M.shape[1])):
        if any(i < 0 or i >= bound for i in idx):
            raise DimensionError(f"index out of range in {idx} (size {bound})")
    rows, cols = sorted(rows), sorted(cols)
    return det(M[np.ix_(rows, cols)])


def orthonormal_complete(v):
    """Orthogonal matrix whose first row is ``v / |v|``.

    Built from a single Householder reflection, with the first row negated
    when needed so that the reflection direction stays well conditioned.

    Returns
    -------
    O : ndarray
        Real orthogonal matrix.
    det : float
        Its determinant, +1 or -1.
    """
    v = np.asarray(v)
    if np.iscomplexobj(v):
        if np.any(np.abs(v.imag) > 0):
            raise DegeneracyError("orthonormal_complete needs a real vector")
        v = v.real
    v = np.asarray(v, dtype=float).ravel()
    norm = np.linalg.norm(v)
    if norm == 0:
        raise DegeneracyError("cannot complete the zero vector")
    u = v / norm
    n = u.size
    e0 = np.zeros(n)
    e0[0] = 1.0
    if u[0] > 0:
        # reflection through u + e0 sends e0 to -u; flip the first row back
        w = u + e0
        H = np.eye(n) - 2.0 * np.outer(w, w) / (w @ w)
        H[0] *= -1.0
        return H, 1.0
    w = u - e0
    if w @ w == 0:
        return np.eye(n), 1.0
    H = np.eye(n) - 2.0 * np.outer(w, w) / (w @ w)
    return H, -1.0


def householder_swap(u):
    """Symmetric orthogonal reflection exchanging ``e0`` and the unit vector ``u``."""
    u = np.asarray(u, dtype=float)
    e0 = np.zeros_like(u)
    e0[0] = 1.0
    w = u - e0
    ww = w @ w
    if ww < 1e-300:
        return np.eye(u.size)
    return np.eye(u.size) - 2.0 * np.outer(w, w) / ww


def enumerate_compositions(total: int, parts: int) -> list[tuple[int, ...]]:
    """All vectors of ``parts`` non-negative integers summing to ``total``.

    Ordered lexicographically with the first coordinate descending.
    """
    if parts < 1:
        raise DimensionError("parts must be >= 1")
    if parts == 1:
        return [(total,)]
    out = []
    for first in range(total, -1, -1):
        for rest in enumerate_compositions(total - first, parts - 1):
            out.append((first,) + rest)
    return out


def enumerate_subsets(n_plus_1: int, d: int) -> list[tuple[int, ...]]:
    """All ``d``-subsets of ``range(n_plus_1)`` in colex order."""
    if d < 0 or d > n_plus_1:
        return []
    subsets = itertools.combinations(range(n_plus_1), d)
    return sorted(subsets, key=lambda s: tuple(reversed(s)))


def factorial_vec(alpha) -> int:
    return math.prod(math.factorial(a) for a in alpha)


def power_vec(base, alpha) -> complex:
    """``prod(base[i] ** alpha[i])`` (the multi-index power)."""
    out = 1.0 + 0j
    for b, a in zip(base, alpha):
        if a:
            out *= complex(b) ** a
    return out


def max_abs(M) -> float:
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0
