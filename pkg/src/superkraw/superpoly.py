"""Polynomials in commuting ``x_0..x_m`` and anticommuting ``xi_0..xi_n``.

A monomial ``x^alpha xi^eps`` is stored as ``(alpha, eps)`` with ``alpha`` a
tuple of exponents and ``eps`` an ``int`` bit set (bit ``j`` set iff
``xi_j`` occurs).  The Grassmann factor is always read in normal order
``xi_0^eps_0 ... xi_n^eps_n``; any product that reorders variables must
account for the sign itself, which :func:`wedge_mul` does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .numkern import DimensionError, enumerate_compositions, enumerate_subsets

PRUNE_TOL = 1e-15
MAX_ODD = 31


def popcount(x: int) -> int:
    return bin(x).count("1")


def bits_of(eps: int) -> tuple[int, ...]:
    out = []
    j = 0
    while eps:
        if eps & 1:
            out.append(j)
        eps >>= 1
        j += 1
    return tuple(out)


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        if m >> i & 1:
            raise DimensionError(f"repeated index {i}")
        m |= 1 << i
    return m


def sign_prefix(eps: int, j: int) -> int:
    """Number of set bits of ``eps`` strictly below position ``j``."""
    return popcount(eps & ((1 << j) - 1))


def wedge_mul(a: int, b: int) -> tuple[int, int]:
    """``xi^a * xi^b = sign * xi^(a|b)``; sign is 0 when the sets overlap."""
    if a & b:
        return 0, 0
    inversions = 0
    for j in bits_of(b):
        # elements of a above j must be moved past xi_j
        inversions += popcount(a >> (j + 1))
    return (-1 if inversions & 1 else 1), a | b


class SuperPolynomial:
    """Sparse element of the super polynomial ring.

    ``terms`` maps ``(alpha, eps)`` to a complex coefficient; coefficients
    below ``PRUNE_TOL`` in absolute value are dropped.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for key, c in terms.items():
                self._add_term(key, c)

    def _add_term(self, key, c):
        c = complex(c)
        new = self.terms.get(key, 0j) + c
        if abs(new) <= PRUNE_TOL:
            self.terms.pop(key, None)
        else:
            self.terms[key] = new

    @classmethod
    def monomial(cls, alpha, eps=0, coeff=1.0):
        return cls({(tuple(alpha), int(eps)): coeff})

    @classmethod
    def linear(cls, even_coeffs, odd_coeffs):
        """``sum_k a_k x_k + sum_k b_k xi_k``."""
        m1 = len(even_coeffs)
        terms = {}
        for k, c in enumerate(even_coeffs):
            if c != 0:
                alpha = tuple(1 if i == k else 0 for i in range(m1))
                terms[(alpha, 0)] = c
        zero = (0,) * m1
        for k, c in enumerate(odd_coeffs):
            if c != 0:
                terms[(zero, 1 << k)] = c
        return cls(terms)

    def copy(self):
        out = SuperPolynomial()
        out.terms = dict(self.terms)
        return out

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def coefficient(self, alpha, eps=0) -> complex:
        return self.terms.get((tuple(alpha), int(eps)), 0j)

    def __add__(self, other):
        out = self.copy()
        for key, c in other.terms.items():
            out._add_term(key, c)
        return out

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        if isinstance(scalar, SuperPolynomial):
            return scalar.__mul__(self)
        out = SuperPolynomial()
        for key, c in self.terms.items():
            out._add_term(key, scalar * c)
        return out

    def __mul__(self, other):
        if not isinstance(other, SuperPolynomial):
            return self.__rmul__(other)
        out = SuperPolynomial()
        for (a1, e1), c1 in self.terms.items():
            for (a2, e2), c2 in other.terms.items():
                s, e = wedge_mul(e1, e2)
                if s == 0:
                    continue
                if not a1:
                    alpha = a2
                elif not a2:
                    alpha = a1
                else:
                    alpha = tuple(x + y for x, y in zip(a1, a2))
                out._add_term((alpha, e), s * c1 * c2)
        return out

    def __neg__(self):
        return (-1) * self

    def degrees(self) -> set:
        return {sum(a) + popcount(e) for a, e in self.terms}

    def max_abs_diff(self, other) -> float:
        keys = set(self.terms) | set(other.terms)
        if not keys:
            return 0.0
        return max(abs(self.terms.get(k, 0j) - other.terms.get(k, 0j)) for k in keys)

    def to_vector(self, basis: "Basis") -> np.ndarray:
        vec = np.zeros(len(basis), dtype=complex)
        for key, c in self.terms.items():
            try:
                vec[basis.index[key]] = c
            except KeyError:
                raise DimensionError(f"monomial {key} is not in the basis") from None
        return vec

    def __repr__(self):
        if not self.terms:
            return "SuperPolynomial(0)"
        parts = []
        for (a, e), c in sorted(self.terms.items()):
            xs = "".join(f"x{i}^{k}" if k > 1 else f"x{i}" for i, k in enumerate(a) if k)
            xis = "".join(f"xi{j}" for j in bits_of(e))
            parts.append(f"({c:.6g}){xs}{xis}")
        return "SuperPolynomial(" + " + ".join(parts) + ")"


def expand_odd_product(C, rows, m_plus_1: int = 0) -> SuperPolynomial:
    """Expand ``prod_{i in rows} (sum_j C[i, j] xi_j)`` in normal order.

    ``rows`` are taken in increasing order; ``C`` is indexed by the full row
    range.  The coefficient of ``xi_J`` is ``minor(C, rows, J)``.
    """
    C = np.asarray(C, dtype=complex)
    zero = (0,) * m_plus_1
    acc = {0: 1.0 + 0j}
    for i in sorted(rows):
        nxt = {}
        for e, c in acc.items():
            for j in range(C.shape[1]):
                cij = C[i, j]
                if cij == 0:
                    continue
                s, e2 = wedge_mul(e, 1 << j)
                if s:
                    nxt[e2] = nxt.get(e2, 0j) + s * c * cij
        acc = nxt
    return SuperPolynomial({(zero, e): c for e, c in acc.items()})


def expand_even_product(C, atilde) -> dict:
    """Coefficients of ``prod_i (sum_j C[i, j] x_j)^atilde[i]`` keyed by ``alpha``."""
    C = np.asarray(C, dtype=complex)
    k = C.shape[1]
    acc = {(0,) * k: 1.0 + 0j}
    units = [tuple(1 if t == j else 0 for t in range(k)) for j in range(k)]
    for i, power in enumerate(atilde):
        for _ in range(power):
            nxt = {}
            for alpha, c in acc.items():
                for j in range(k):
                    cij = C[i, j]
                    if cij == 0:
                        continue
                    a2 = tuple(x + y for x, y in zip(alpha, units[j]))
                    nxt[a2] = nxt.get(a2, 0j) + c * cij
            acc = nxt
    return {a: c for a, c in acc.items() if abs(c) > PRUNE_TOL}


def slice_dimension(m: int, n: int, D: int, d: int) -> int:
    """``C(D-d+m, m) * C(n+1, d)``; zero outside ``0 <= d <= min(D, n+1)``."""
    if d < 0 or d > D or d > n + 1:
        return 0
    return math.comb(D - d + m, m) * math.comb(n + 1, d)


@dataclass(frozen=True, eq=False)
class Basis:
    """Ordered monomial basis of the degree-``D`` component (or one odd-degree slice).

    Order: odd degree ``d`` ascending, then ``alpha`` in descending-lex
    composition order, then ``eps`` in colex order.
    """

    m: int
    n: int
    D: int
    d: int | None
    monomials: tuple
    index: dict
    blocks: dict

    def __len__(self):
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)

    def odd_degrees(self):
        return sorted(self.blocks)


def basis(m: int, n: int, D: int, d: int | None = None) -> Basis:
    if n + 1 > MAX_ODD:
        raise DimensionError(f"at most {MAX_ODD} Grassmann variables are supported")
    ds = range(0, min(D, n + 1) + 1) if d is None else [d]
    monos = []
    blocks = {}
    for dd in ds:
        if dd < 0 or dd > D or dd > n + 1:
            continue
        start = len(monos)
        subsets = [mask_of(s) for s in enumerate_subsets(n + 1, dd)]
        for alpha in enumerate_compositions(D - dd, m + 1):
            for e in subsets:
                monos.append((alpha, e))
        blocks[dd] = slice(start, len(monos))
    monos = tuple(monos)
    return Basis(m, n, D, d, monos, {k: i for i, k in enumerate(monos)}, blocks)


def substitution_matrices(ps):
    """Rows ``i`` give x~_i and xi~_i as linear forms in the plain variables."""
    nm = ps.norms
    Cx = nm.theta_tilde * ps.U * ps.p_tilde[None, :]
    Cxi = nm.kappa_tilde * ps.V * ps.q_tilde[None, :]
    return Cx, Cxi


def to_monomial_basis(target, ps) -> SuperPolynomial:
    """Expand ``x~^atilde xi~^eps_tilde`` in the plain monomials.

    ``target`` is ``(atilde, eps_tilde)`` with ``eps_tilde`` a bit set.
    """
    atilde, etilde = target
    atilde = tuple(atilde)
    if len(atilde) != ps.m + 1:
        raise DimensionError(f"exponent vector {atilde} does not match m = {ps.m}")
    Cx, Cxi = substitution_matrices(ps)
    even = expand_even_product(Cx, atilde)
    odd = expand_odd_product(Cxi, bits_of(etilde))
    out = SuperPolynomial()
    for alpha, ce in even.items():
        for (_, e), co in odd.terms.items():
            out._add_term((alpha, e), ce * co)
    return out


def transition_columns(ps, bas: Basis) -> np.ndarray:
    """Matrix whose column ``k`` is ``to_monomial_basis(bas[k])`` in ``bas`` coordinates.

    Works block by block on the odd degree, sharing one even expansion per
    ``atilde`` and one odd expansion per ``eps_tilde``.
    """
    Cx, Cxi = substitution_matrices(ps)
    T = np.zeros((len(bas), len(bas)), dtype=complex)
    even_cache, odd_cache = {}, {}
    for col, (atilde, etilde) in enumerate(bas.monomials):
        if atilde not in even_cache:
            even_cache[atilde] = expand_even_product(Cx, atilde)
        if etilde not in odd_cache:
            odd_cache[etilde] = expand_odd_product(Cxi, bits_of(etilde)).terms
        for alpha, ce in even_cache[atilde].items():
            for (_, e), co in odd_cache[etilde].items():
                T[bas.index[(alpha, e)], col] += ce * co
    return T
