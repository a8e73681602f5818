"""gl(m+1|n+1) acting on the degree-D super polynomials.

Generators are the elementary matrices ``E_{i,j}`` with ``i, j`` running over
``0..m+n+1``; indices ``<= m`` are even (the ``x`` variables), the rest are
odd (``xi_{i-m-1}``).  ``E_{i,j}`` acts as ``w_i d/dw_j``.  The *tilde*
generators are the conjugates by ``(R|S)`` and act on the tilde monomials
by the very same formulas, so one action routine serves both frames.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numkern import DimensionError, ResidualTracker, factorial_vec, power_vec
from .superpoly import (
    Basis,
    SuperPolynomial,
    basis,
    bits_of,
    popcount,
    sign_prefix,
    to_monomial_basis,
    transition_columns,
)

PLAIN = "plain"
TILDE = "tilde"


@dataclass(frozen=True)
class GeneratorId:
    row: int
    col: int
    frame: str = PLAIN

    def __post_init__(self):
        if self.frame not in (PLAIN, TILDE):
            raise ValueError(f"unknown frame {self.frame!r}")

    def parity(self, m: int) -> int:
        return (int(self.row > m) + int(self.col > m)) % 2

    def block(self, m: int) -> str:
        return {(0, 0): "A", (0, 1): "B", (1, 0): "C", (1, 1): "D"}[
            (int(self.row > m), int(self.col > m))
        ]

    def multicolor(self, m: int) -> int:
        """Multicolor degree as a bit set over the odd indices."""
        bits = 0
        for idx in (self.row, self.col):
            if idx > m:
                bits ^= 1 << (idx - m - 1)
        return bits

    def transpose(self):
        return GeneratorId(self.col, self.row, self.frame)


def generators(m: int, n: int, frame: str = PLAIN):
    N = m + n + 2
    return [GeneratorId(i, j, frame) for i in range(N) for j in range(N)]


def act(i: int, j: int, mono, m: int):
    """Apply ``w_i d/dw_j`` to the monomial ``(alpha, eps)``.

    Returns ``(coeff, (alpha', eps'))`` or ``None`` when the result vanishes.
    """
    alpha, eps = mono
    coeff = 1
    alpha = list(alpha)
    if j <= m:
        if alpha[j] == 0:
            return None
        coeff *= alpha[j]
        alpha[j] -= 1
    else:
        jj = j - m - 1
        if not eps >> jj & 1:
            return None
        if sign_prefix(eps, jj) & 1:
            coeff = -coeff
        eps ^= 1 << jj
    if i <= m:
        alpha[i] += 1
    else:
        ii = i - m - 1
        if eps >> ii & 1:
            return None
        if sign_prefix(eps, ii) & 1:
            coeff = -coeff
        eps |= 1 << ii
    return coeff, (tuple(alpha), eps)


def apply_generator(X: GeneratorId, poly, ps=None, m: int | None = None) -> SuperPolynomial:
    """Action of ``X`` on a monomial or polynomial written in ``X``'s own frame.

    A plain generator acts on ``{x^alpha xi^eps}``; a tilde generator acts on
    tilde-monomial coordinates ``{x~^a xi~^e}`` with identical formulas.  Use
    :func:`operator_matrix` for the cross-frame action.
    """
    if m is None:
        if ps is None:
            raise ValueError("need ps or m")
        m = ps.m
    if not isinstance(poly, SuperPolynomial):
        alpha, eps = poly
        poly = SuperPolynomial.monomial(alpha, eps)
    degs = poly.degrees()
    if len(degs) > 1:
        raise DimensionError(f"input is not homogeneous (degrees {sorted(degs)})")
    out = SuperPolynomial()
    for (alpha, eps), c in poly.terms.items():
        if len(alpha) != m + 1:
            raise DimensionError(f"exponent vector {alpha} does not match m = {m}")
        r = act(X.row, X.col, (alpha, eps), m)
        if r is not None:
            out._add_term(r[1], c * r[0])
    return out


@lru_cache(maxsize=64)
def _elementary_matrices(m: int, n: int, D: int, d):
    bas = basis(m, n, D, d)
    N = m + n + 2
    mats = {}
    for i in range(N):
        for j in range(N):
            M = np.zeros((len(bas), len(bas)))
            for col, mono in enumerate(bas.monomials):
                r = act(i, j, mono, m)
                if r is not None:
                    M[bas.index[r[1]], col] = r[0]
            M.setflags(write=False)
            mats[(i, j)] = M
    return mats


def elementary_matrix(i: int, j: int, bas: Basis) -> np.ndarray:
    """Matrix of ``E_{i,j}`` on ``bas`` in its own frame (real, exact integers)."""
    return _elementary_matrices(bas.m, bas.n, bas.D, bas.d)[(i, j)]


def frame_matrix(ps):
    """``(R|S)`` and its inverse ``(R^-1|S^-1)``."""
    nm = ps.norms
    a, b = ps.m + 1, ps.n + 1
    M = np.zeros((a + b, a + b), dtype=complex)
    Mi = np.zeros_like(M)
    M[:a, :a], M[a:, a:] = nm.R, nm.S
    Mi[:a, :a], Mi[a:, a:] = nm.R_inv, nm.S_inv
    return M, Mi


def operator_matrix(X: GeneratorId, bas: Basis, ps, on: str = PLAIN) -> np.ndarray:
    """Matrix of ``X`` acting on the ``on``-frame monomials of ``bas``.

    Same frame: the elementary matrix.  Tilde generator on plain monomials:
    ``E~_{ij} = sum_kl M[k,i] Minv[j,l] E_kl``.  Plain generator on tilde
    monomials: ``E_{ij} = sum_ab Minv[a,i] M[j,b] E~_ab``.
    """
    if X.frame == on:
        return elementary_matrix(X.row, X.col, bas).astype(complex)
    M, Mi = frame_matrix(ps)
    if X.frame == TILDE:
        left, right = M[:, X.row], Mi[X.col, :]
    else:
        left, right = Mi[:, X.row], M[X.col, :]
    out = np.zeros((len(bas), len(bas)), dtype=complex)
    for k in np.nonzero(left)[0]:
        for l in np.nonzero(right)[0]:
            out += left[k] * right[l] * elementary_matrix(k, l, bas)
    return out


def phi(X: GeneratorId, ps):
    """Image of a generator under the antiautomorphism: ``(generator, coefficient)``.

    The image is always the transposed generator in the same frame.
    """
    m = ps.m
    nm = ps.norms
    if X.frame == PLAIN:
        pw, qw, th, ka = ps.p_tilde, ps.q_tilde, nm.theta, nm.kappa
    else:
        pw, qw, th, ka = ps.p, ps.q, nm.theta_tilde, nm.kappa_tilde
    i, j = X.row, X.col
    img = X.transpose()
    if i == j:
        return img, 1.0 + 0j
    blk = X.block(m)
    if blk == "A":
        c = pw[j] / pw[i]
    elif blk == "B":
        c = -(th * qw[j - m - 1]) / (ka * pw[i])
    elif blk == "C":
        c = (ka * pw[j]) / (th * qw[i - m - 1])
    else:
        c = qw[j - m - 1] / qw[i - m - 1]
    return img, complex(c)


def phi_matrix(X: np.ndarray, ps) -> np.ndarray:
    """``Lambda X^st Lambda^-1`` on ``(m+n+2)``-square matrices.

    ``Lambda = (P~/theta | Q~/kappa)``; independent of the table in :func:`phi`.
    """
    a = ps.m + 1
    nm = ps.norms
    X = np.asarray(X, dtype=complex)
    st = np.zeros_like(X)
    st[:a, :a] = X[:a, :a].T
    st[:a, a:] = X[a:, :a].T
    st[a:, :a] = -X[:a, a:].T
    st[a:, a:] = X[a:, a:].T
    lam = np.concatenate([ps.p_tilde / nm.theta, ps.q_tilde / nm.kappa])
    return (lam[:, None] * st) / lam[None, :]


def gram_diagonal(bas: Basis, ps) -> np.ndarray:
    """``<x^a xi^e, x^a xi^e> = a! / (p~^a q~^e) theta^|a| kappa^|e|`` along ``bas``."""
    nm = ps.norms
    out = np.empty(len(bas), dtype=complex)
    for k, (alpha, eps) in enumerate(bas.monomials):
        d = popcount(eps)
        out[k] = (
            factorial_vec(alpha)
            / (power_vec(ps.p_tilde, alpha) * np.prod(ps.q_tilde[list(bits_of(eps))]))
            * nm.theta ** sum(alpha)
            * nm.kappa**d
        )
    return out


def tilde_norms(bas: Basis, ps) -> np.ndarray:
    """Expected tilde-basis norms ``a!/(p^a q^e) theta~^|a| kappa~^|e|``."""
    nm = ps.norms
    out = np.empty(len(bas), dtype=complex)
    for k, (alpha, eps) in enumerate(bas.monomials):
        out[k] = (
            factorial_vec(alpha)
            / (power_vec(ps.p, alpha) * np.prod(ps.q[list(bits_of(eps))]))
            * nm.theta_tilde ** sum(alpha)
            * nm.kappa_tilde ** popcount(eps)
        )
    return out


def pair(u: SuperPolynomial, v: SuperPolynomial, ps) -> complex:
    """The bilinear form, diagonal on plain monomials."""
    nm = ps.norms
    total = 0j
    small, big = (u, v) if len(u) <= len(v) else (v, u)
    for key, cu in small.terms.items():
        cv = big.terms.get(key)
        if cv is None:
            continue
        alpha, eps = key
        w = (
            factorial_vec(alpha)
            / (power_vec(ps.p_tilde, alpha) * np.prod(ps.q_tilde[list(bits_of(eps))]))
            * nm.theta ** sum(alpha)
            * nm.kappa ** popcount(eps)
        )
        total += cu * cv * w
    return complex(total)


def tilde_gram(ps, D: int, bas: Basis | None = None):
    """Gram matrix of the tilde monomials under the plain form."""
    bas = bas or basis(ps.m, ps.n, D)
    T = transition_columns(ps, bas)
    G = gram_diagonal(bas, ps)
    return T.T @ (G[:, None] * T), bas


def tform_residual(ps, D: int):
    """Relative deviation of the tilde Gram matrix from the expected diagonal."""
    gram, bas = tilde_gram(ps, D)
    expected = tilde_norms(bas, ps)
    scale = np.sqrt(np.abs(np.outer(expected, expected)))
    dev = np.abs(gram - np.diag(expected)) / scale
    tr = ResidualTracker()
    if dev.size:
        k = np.unravel_index(np.argmax(dev), dev.shape)
        tr.add(dev[k], (bas.monomials[k[0]], bas.monomials[k[1]]))
        tr.count = dev.size
    return tr.result()


def cauchy_binet_odd_residual(ps, d: int):
    """Odd-sector tilde Gram computed two ways.

    Summing ``minor(A, E, I) minor(A, F, I) / q~^I`` over ``I`` (``A = V Q~``)
    must equal ``minor(A Q~^-1 A^t, E, F) = q0^d minor(Q^-1, E, F)``.
    """
    from .numkern import enumerate_subsets, minor

    N = ps.n + 1
    A = ps.V * ps.q_tilde[None, :]
    subs = enumerate_subsets(N, d)
    w = np.array([1 / np.prod(ps.q_tilde[list(I)]) for I in subs])
    M = np.array([[minor(A, E, I) for I in subs] for E in subs])
    summed = (M * w[None, :]) @ M.T
    product = A @ np.diag(1 / ps.q_tilde) @ A.T
    closed = np.diag(1 / ps.q)
    tr = ResidualTracker()
    for r, E in enumerate(subs):
        for c, F in enumerate(subs):
            via_product = minor(product, E, F)
            tr.add(abs(summed[r, c] - via_product), ("product", E, F))
            tr.add(abs(via_product - ps.q[0] ** d * minor(closed, E, F)), ("closed", E, F))
    return tr.result()


def contravariance_sign(X: GeneratorId, eps: int, m: int) -> int:
    """``(-1)^(|X| * Xbar . eps)`` with the dot product taken over the integers."""
    if X.parity(m) == 0:
        return 1
    return -1 if popcount(X.multicolor(m) & eps) & 1 else 1


def contravariance_residual(X: GeneratorId, u, v, ps) -> float:
    """``|<X.u, v> - sign <u, phi(X).v>|`` for monomials ``u``, ``v`` in ``X``'s frame."""
    m = ps.m
    Y, c = phi(X, ps)
    sign = contravariance_sign(X, u[1], m)
    if X.frame == PLAIN:
        lhs = pair(apply_generator(X, u, m=m), SuperPolynomial.monomial(*v), ps)
        rhs = pair(SuperPolynomial.monomial(*u), apply_generator(Y, v, m=m), ps)
        return abs(lhs - sign * c * rhs)
    # tilde frame: expand everything in plain monomials
    D = sum(u[0]) + popcount(u[1])
    bas = basis(ps.m, ps.n, D)
    uu = to_monomial_basis(u, ps).to_vector(bas)
    vv = to_monomial_basis(v, ps).to_vector(bas)
    G = gram_diagonal(bas, ps)
    Xu = operator_matrix(X, bas, ps, on=PLAIN) @ uu
    Yv = operator_matrix(Y, bas, ps, on=PLAIN) @ vv
    lhs = np.sum(Xu * G * vv)
    rhs = np.sum(uu * G * Yv)
    return float(abs(lhs - sign * c * rhs))


def contravariance_sweep(ps, D: int, frames=(PLAIN, TILDE)):
    """Max residual over all generators and all basis pairs of degree ``D``.

    Tilde generators are checked on tilde monomials entirely through their
    plain-frame expansions, so no tilde-frame property is assumed.
    """
    bas = basis(ps.m, ps.n, D)
    G = gram_diagonal(bas, ps)
    m = ps.m
    tr = ResidualTracker()
    if len(bas) == 0:
        return tr.result()
    eps = np.array([e for _, e in bas.monomials])
    for frame in frames:
        if frame == PLAIN:
            T = np.eye(len(bas), dtype=complex)
        else:
            T = transition_columns(ps, bas)
        GT = G[:, None] * T
        for X in generators(ps.m, ps.n, frame):
            Y, c = phi(X, ps)
            MX = operator_matrix(X, bas, ps, on=PLAIN)
            MY = operator_matrix(Y, bas, ps, on=PLAIN)
            lhs = (MX @ T).T @ GT  # [u, v] = <X.u, v>
            rhs = T.T @ (G[:, None] * (MY @ T))  # [u, v] = <u, phi(X).v>
            signs = np.array([contravariance_sign(X, int(e), m) for e in eps])
            dev = np.abs(lhs - signs[:, None] * c * rhs)
            k = np.unravel_index(np.argmax(dev), dev.shape)
            tr.add(dev[k], (X, bas.monomials[k[0]], bas.monomials[k[1]]))
            tr.count += dev.size - 1
    return tr.result()


CARTAN_IDENTITIES = ("tilde_even", "plain_even", "tilde_odd", "plain_odd")


def cartan_swap_residual(i: int, which: str, ps, D: int) -> float:
    """Max-norm mismatch of one Cartan change-of-frame identity on degree ``D``.

    ``tilde_even``: ``A~_ii = p_i/p_0 sum_kl p~_k u_ik u_il A_kl``
    ``plain_even``: ``A_ii = p~_i/p_0 sum_kl p_k u_ki u_li A~_kl``
    ``tilde_odd`` / ``plain_odd``: the same with ``(q, q~, V)`` and ``D``.

    Both sides are compared as operators through the tilde-to-plain matrix
    ``T`` built from the substitution: ``O_plain T = T O_tilde``.
    """
    if which not in CARTAN_IDENTITIES:
        raise ValueError(f"unknown identity {which!r}")
    bas = basis(ps.m, ps.n, D)
    if len(bas) == 0:
        return 0.0
    m = ps.m
    odd = which.endswith("odd")
    if odd:
        w, wt, M, offset, size = ps.q, ps.q_tilde, ps.V, m + 1, ps.n + 1
    else:
        w, wt, M, offset, size = ps.p, ps.p_tilde, ps.U, 0, ps.m + 1
    if not 0 <= i < size:
        raise DimensionError(f"index {i} out of range for {which}")
    T = transition_columns(ps, bas)
    diag = elementary_matrix(offset + i, offset + i, bas)
    weighted = np.zeros((len(bas), len(bas)), dtype=complex)
    if which.startswith("tilde"):
        for k in range(size):
            for l in range(size):
                c = w[i] / w[0] * wt[k] * M[i, k] * M[i, l]
                weighted += c * elementary_matrix(offset + k, offset + l, bas)
        diff = weighted @ T - T @ diag
    else:
        for k in range(size):
            for l in range(size):
                c = wt[i] / w[0] * w[k] * M[k, i] * M[l, i]
                weighted += c * elementary_matrix(offset + k, offset + l, bas)
        diff = diag @ T - T @ weighted
    return float(np.max(np.abs(diff)))


def supercommutator(A, B, pa: int, pb: int):
    return A @ B - (-1) ** (pa * pb) * B @ A


def supercommutator_residual(ps, D: int):
    """``[E_ij, E_kl]`` as operators vs ``d_jk E_il - (-1)^.. d_il E_kj``."""
    bas = basis(ps.m, ps.n, D)
    m = ps.m
    gens = generators(ps.m, ps.n)
    tr = ResidualTracker()
    if len(bas) == 0:
        return tr.result()
    for X in gens:
        for Y in gens:
            px, py = X.parity(m), Y.parity(m)
            MX = elementary_matrix(X.row, X.col, bas)
            MY = elementary_matrix(Y.row, Y.col, bas)
            lhs = supercommutator(MX, MY, px, py)
            rhs = np.zeros_like(lhs)
            if X.col == Y.row:
                rhs = rhs + elementary_matrix(X.row, Y.col, bas)
            if X.row == Y.col:
                rhs = rhs - (-1) ** (px * py) * elementary_matrix(Y.row, X.col, bas)
            tr.add(np.max(np.abs(lhs - rhs)), (X, Y))
    return tr.result()


def colorsign_residual(ps, D: int):
    """Closure of the multicolor grading under supercommutators and the action.

    Returns the number of violations (0 when the grading is respected),
    reported through the usual residual container.
    """
    m, n = ps.m, ps.n
    gens = generators(m, n)
    tr = ResidualTracker()
    for X in gens:
        for Y in gens:
            target = X.multicolor(m) ^ Y.multicolor(m)
            terms = []
            if X.col == Y.row:
                terms.append(GeneratorId(X.row, Y.col))
            if X.row == Y.col:
                terms.append(GeneratorId(Y.row, X.col))
            bad = sum(1 for Z in terms if Z.multicolor(m) != target)
            tr.add(bad, ("bracket", X, Y))
    for mono in basis(m, n, D).monomials:
        for X in gens:
            r = act(X.row, X.col, mono, m)
            if r is None:
                continue
            bad = int(r[1][1] != X.multicolor(m) ^ mono[1])
            tr.add(bad, ("action", X, mono))
    return tr.result()


def phi_antiautomorphism_residual(ps, D: int):
    """``phi([X,Y]) == (-1)^{|X||Y|} [phi(Y), phi(X)]`` as operators on degree ``D``."""
    bas = basis(ps.m, ps.n, D)
    m = ps.m
    gens = generators(ps.m, ps.n)
    tr = ResidualTracker()
    if len(bas) == 0:
        return tr.result()

    def phi_op(X):
        Y, c = phi(X, ps)
        return c * elementary_matrix(Y.row, Y.col, bas)

    for X in gens:
        for Y in gens:
            px, py = X.parity(m), Y.parity(m)
            lhs = np.zeros((len(bas), len(bas)), dtype=complex)
            if X.col == Y.row:
                lhs += phi_op(GeneratorId(X.row, Y.col))
            if X.row == Y.col:
                lhs -= (-1) ** (px * py) * phi_op(GeneratorId(Y.row, X.col))
            rhs = (-1) ** (px * py) * supercommutator(phi_op(Y), phi_op(X), py, px)
            tr.add(np.max(np.abs(lhs - rhs)), (X, Y))
    return tr.result()


def degree_operator_residual(ps, D: int) -> float:
    """``sum_i D_ii`` must act as the Grassmann degree."""
    bas = basis(ps.m, ps.n, D)
    if len(bas) == 0:
        return 0.0
    m = ps.m
    total = sum(elementary_matrix(m + 1 + i, m + 1 + i, bas) for i in range(ps.n + 1))
    expected = np.diag([popcount(e) for _, e in bas.monomials]).astype(float)
    return float(np.max(np.abs(total - expected)))


def reachable(ps, D: int, start=None) -> int:
    """Number of basis monomials reached from ``start`` by repeated generator action."""
    bas = basis(ps.m, ps.n, D)
    if len(bas) == 0:
        return 0
    start = bas.monomials[0] if start is None else start
    seen = {start}
    queue = deque([start])
    N = ps.m + ps.n + 2
    while queue:
        mono = queue.popleft()
        for i in range(N):
            for j in range(N):
                r = act(i, j, mono, ps.m)
                if r is not None and r[1] not in seen:
                    seen.add(r[1])
                    queue.append(r[1])
    return len(seen)
