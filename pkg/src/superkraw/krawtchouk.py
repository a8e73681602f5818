"""Super Krawtchouk polynomials and the identities they satisfy.

Notation for arguments: ``alpha``/``atilde`` are exponent tuples over the
even variables, ``eps``/``etilde`` are bit sets over the odd ones.  All
evaluators return complex numbers; ``P0``, ``P1`` and ``P`` are the even,
odd and mixed polynomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numkern import (
    DimensionError,
    Residual,
    ResidualTracker,
    enumerate_compositions,
    enumerate_subsets,
    factorial_vec,
    max_abs,
    minor,
    power_vec,
)
from .params import OddParams, ParamSet, dualize
from .glaction import gram_diagonal
from .superpoly import (
    Basis,
    SuperPolynomial,
    basis,
    bits_of,
    expand_even_product,
    expand_odd_product,
    mask_of,
    popcount,
    sign_prefix,
    transition_columns,
)

PLAIN_TO_TILDE = "plain->tilde"
TILDE_TO_PLAIN = "tilde->plain"


# --- evaluators --------------------------------------------------------------


def eval_p1(eps: int, etilde: int, odd: OddParams, full_sum: bool = False) -> complex:
    """Odd polynomial: ``det V[supp(etilde), supp(eps)] / d!``.

    With ``full_sum=True`` every ``d x d`` minor of
    ``diag(etilde) V diag(eps)`` is summed instead (all but one vanish).
    """
    d = popcount(eps)
    if popcount(etilde) != d:
        return 0j
    if full_sum:
        A = np.diag([etilde >> i & 1 for i in range(odd.size)]) @ odd.V
        A = A @ np.diag([eps >> i & 1 for i in range(odd.size)])
        subsets = enumerate_subsets(odd.size, d)
        total = sum(minor(A, I, J) for I in subsets for J in subsets)
        return complex(total) / math.factorial(d)
    return minor(odd.V, bits_of(etilde), bits_of(eps)) / math.factorial(d)


def p1_from_expansion(eps: int, etilde: int, odd: OddParams) -> complex:
    """Coefficient of ``xi^eps`` in ``prod_i (sum_j v_ij xi_j)^etilde_i``, over ``d!``."""
    d = popcount(etilde)
    if popcount(eps) != d:
        return 0j
    poly = expand_odd_product(odd.V, bits_of(etilde))
    return poly.coefficient((), eps) / math.factorial(d)


def eval_p0(alpha, atilde, even, k: int | None = None) -> complex:
    """Even polynomial of degree ``k = |alpha|`` from the generating function.

    ``(k!/alpha!) P0`` is the coefficient of ``x^alpha`` in
    ``prod_i (sum_j u_ij x_j)^atilde_i``.
    """
    alpha, atilde = tuple(alpha), tuple(atilde)
    if len(alpha) != even.size or len(atilde) != even.size:
        raise DimensionError("exponent vectors must have length m + 1")
    k = sum(alpha) if k is None else k
    if sum(alpha) != k or sum(atilde) != k:
        return 0j
    coeffs = expand_even_product(even.U, atilde)
    return coeffs.get(alpha, 0j) * factorial_vec(alpha) / math.factorial(k)


def eval_p(alpha, eps, atilde, etilde, ps: ParamSet, D: int | None = None) -> complex:
    """Mixed polynomial ``P = C(D, d)^-1 P0(alpha, atilde; D-d) P1(eps, etilde; d)``."""
    d = popcount(eps)
    if D is None:
        D = sum(alpha) + d
    if sum(alpha) + d != D or sum(atilde) + popcount(etilde) != D:
        return 0j
    if popcount(etilde) != d:
        return 0j
    return eval_p0(alpha, atilde, ps.even, D - d) * eval_p1(eps, etilde, ps.odd) / math.comb(D, d)


def p_from_generating_function(alpha, eps, atilde, etilde, ps: ParamSet) -> complex:
    """``P`` read off the full mixed generating function (independent of the factorization)."""
    alpha, atilde = tuple(alpha), tuple(atilde)
    D = sum(atilde) + popcount(etilde)
    m1 = ps.m + 1
    prod = SuperPolynomial.monomial((0,) * m1, 0)
    zeros_odd = np.zeros(ps.n + 1)
    zeros_even = np.zeros(m1)
    for i, power in enumerate(atilde):
        form = SuperPolynomial.linear(ps.U[i], zeros_odd)
        for _ in range(power):
            prod = prod * form
    for i in bits_of(etilde):
        prod = prod * SuperPolynomial.linear(zeros_even, ps.V[i])
    return prod.coefficient(alpha, eps) * factorial_vec(alpha) / math.factorial(D)


# --- matrices ----------------------------------------------------------------


def p0_matrix(even, k: int) -> np.ndarray:
    """``P0[alpha, atilde]`` over compositions of ``k`` (descending-lex order)."""
    comps = enumerate_compositions(k, even.size)
    idx = {a: r for r, a in enumerate(comps)}
    out = np.zeros((len(comps), len(comps)), dtype=complex)
    kf = math.factorial(k)
    for col, at in enumerate(comps):
        for alpha, c in expand_even_product(even.U, at).items():
            out[idx[alpha], col] = c * factorial_vec(alpha) / kf
    return out


def p1_matrix(odd: OddParams, d: int) -> np.ndarray:
    """``P1[eps, etilde]`` over ``d``-subsets in colex order."""
    subs = enumerate_subsets(odd.size, d)
    df = math.factorial(d)
    out = np.zeros((len(subs), len(subs)), dtype=complex)
    for r, J in enumerate(subs):
        for c, I in enumerate(subs):
            out[r, c] = minor(odd.V, I, J) / df
    return out


def p_matrix(ps: ParamSet, D: int, d: int) -> np.ndarray:
    """``P`` on the ``(D-d, d)`` slice, rows plain and columns tilde, in :func:`basis` order."""
    if d > D or d > ps.n + 1:
        return np.zeros((0, 0), dtype=complex)
    return np.kron(p0_matrix(ps.even, D - d), p1_matrix(ps.odd, d)) / math.comb(D, d)


def _plain_weights(bas: Basis, ps):
    """``p~^alpha q~^eps / alpha!`` along ``bas``."""
    return np.array(
        [
            power_vec(ps.p_tilde, a) * np.prod(ps.q_tilde[list(bits_of(e))]) / factorial_vec(a)
            for a, e in bas.monomials
        ],
        dtype=complex,
    )


def _tilde_weights(bas: Basis, ps):
    """``p^a q^e / a!`` along ``bas``."""
    return np.array(
        [
            power_vec(ps.p, a) * np.prod(ps.q[list(bits_of(e))]) / factorial_vec(a)
            for a, e in bas.monomials
        ],
        dtype=complex,
    )


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    direction: str
    basis: Basis
    entries: np.ndarray

    def block(self, d: int) -> np.ndarray:
        s = self.basis.blocks[d]
        return self.entries[s, s]


def transition_matrix(direction: str, ps: ParamSet, D: int) -> TransitionMatrix:
    """Change of basis on the degree-``D`` component built from ``P``.

    ``tilde->plain``: column ``(atilde, etilde)`` holds the plain coordinates
    of ``x~^atilde xi~^etilde``:
    ``theta~^(D-d) kappa~^d D! P p~^alpha q~^eps / alpha!``.

    ``plain->tilde``: column ``(alpha, eps)`` holds the tilde coordinates of
    ``x^alpha xi^eps``: ``theta^(D-d) kappa^d D! P p^atilde q^etilde / atilde!``.
    """
    bas = basis(ps.m, ps.n, D)
    nm = ps.norms
    out = np.zeros((len(bas), len(bas)), dtype=complex)
    Df = math.factorial(D)
    for d, s in bas.blocks.items():
        P = p_matrix(ps, D, d)
        sub = basis(ps.m, ps.n, D, d)
        if direction == TILDE_TO_PLAIN:
            scale = nm.theta_tilde ** (D - d) * nm.kappa_tilde**d * Df
            out[s, s] = scale * _plain_weights(sub, ps)[:, None] * P
        elif direction == PLAIN_TO_TILDE:
            scale = nm.theta ** (D - d) * nm.kappa**d * Df
            out[s, s] = scale * _tilde_weights(sub, ps)[:, None] * P.T
        else:
            raise ValueError(f"unknown direction {direction!r}")
    return TransitionMatrix(direction, bas, out)


def transition_residuals(ps: ParamSet, D: int) -> dict:
    """Round trip, agreement with the direct substitution, and off-block size."""
    fwd = transition_matrix(TILDE_TO_PLAIN, ps, D)
    back = transition_matrix(PLAIN_TO_TILDE, ps, D)
    bas = fwd.basis
    eye = np.eye(len(bas))
    direct = transition_columns(ps, bas)
    mask = np.ones((len(bas), len(bas)), dtype=bool)
    for s in bas.blocks.values():
        mask[s, s] = False
    return {
        "round_trip": max(max_abs(fwd.entries @ back.entries - eye), max_abs(back.entries @ fwd.entries - eye)),
        "vs_substitution": max_abs(fwd.entries - direct),
        "off_block": max(max_abs(direct[mask]), max_abs(fwd.entries[mask]), max_abs(back.entries[mask])),
        "block_sizes": {d: s.stop - s.start for d, s in bas.blocks.items()},
    }


def pairing_residual(ps: ParamSet, D: int) -> Residual:
    """``P == p0^(D-d) q0^d / D! <x~^atilde xi~^etilde, x^alpha xi^eps>`` on every slice."""
    bas = basis(ps.m, ps.n, D)
    T = transition_columns(ps, bas)
    G = gram_diagonal(bas, ps)
    form = G[:, None] * T  # [plain, tilde] = <tilde, plain>
    tr = ResidualTracker()
    for d, s in bas.blocks.items():
        P = p_matrix(ps, D, d)
        pred = ps.p[0] ** (D - d) * ps.q[0] ** d / math.factorial(D) * form[s, s]
        dev = np.abs(P - pred)
        k = np.unravel_index(np.argmax(dev), dev.shape)
        sub = basis(ps.m, ps.n, D, d)
        tr.add(dev[k], (sub.monomials[k[0]], sub.monomials[k[1]]))
    return tr.result()


def orthogonality_residual(ps: ParamSet, D: int, d: int) -> Residual:
    """Both orthogonality relations on the ``(D-d, d)`` slice.

    ``value`` is the absolute max deviation; ``extra['relative']`` divides
    each entry by ``sqrt(|rhs_ii rhs_jj|)``.
    """
    if d > D or d > ps.n + 1:
        return Residual(0.0, None, 0, {"relative": 0.0})
    sub = basis(ps.m, ps.n, D, d)
    P = p_matrix(ps, D, d)
    Df = math.factorial(D)
    const = ps.p[0] ** (D - d) * ps.q[0] ** d / Df
    w_plain = _plain_weights(sub, ps)  # p~^a q~^e / a!
    w_tilde = _tilde_weights(sub, ps)
    lhs1 = P.T @ ((Df * w_plain)[:, None] * P)
    rhs1 = np.diag(const / w_tilde)
    lhs2 = P @ ((Df * w_tilde)[:, None] * P.T)
    rhs2 = np.diag(const / w_plain)
    abs_tr, rel = ResidualTracker(), 0.0
    for label, lhs, rhs in (("tilde", lhs1, rhs1), ("plain", lhs2, rhs2)):
        dev = np.abs(lhs - rhs)
        k = np.unravel_index(np.argmax(dev), dev.shape)
        abs_tr.add(dev[k], (label, sub.monomials[k[0]], sub.monomials[k[1]]))
        dg = np.abs(np.diag(rhs))
        rel = max(rel, float(np.max(dev / np.sqrt(np.outer(dg, dg)))))
        abs_tr.count += dev.size - 1
    r = abs_tr.result()
    return Residual(r.value, r.witness, r.count, {"relative": rel})


def duality_residual(ps: ParamSet, D: int) -> Residual:
    """``P(alpha, eps, atilde, etilde; K, L) == P(atilde, etilde, alpha, eps; K', L')``."""
    dual = dualize(ps)
    tr = ResidualTracker()
    for d in range(0, min(D, ps.n + 1) + 1):
        P = p_matrix(ps, D, d)
        Pd = p_matrix(dual, D, d)
        dev = np.abs(P - Pd.T)
        if dev.size:
            k = np.unravel_index(np.argmax(dev), dev.shape)
            sub = basis(ps.m, ps.n, D, d)
            tr.add(dev[k], (sub.monomials[k[0]], sub.monomials[k[1]]))
    return tr.result()


# --- recurrences ---------------------------------------------------------------


def _shift(e: int, k: int, l: int):
    """``e + v_k - v_l`` as a bit set, or ``None`` when it leaves {0,1}^(n+1)."""
    if not e >> l & 1:
        return None
    e2 = e ^ (1 << l)
    if e2 >> k & 1:
        return None
    return e2 | (1 << k)


def _hop_sign(e: int, k: int, l: int) -> int:
    """``(-1)^(s_k(e - v_l) + s_l(e))``."""
    return -1 if (sign_prefix(e ^ (1 << l), k) + sign_prefix(e, l)) & 1 else 1


RECURRENCES = ("eps_i", "etilde_i", "eps_0", "etilde_0")


def _p1_cached(odd):
    cache = {}

    def f(eps, et):
        key = (eps, et)
        if key not in cache:
            cache[key] = eval_p1(eps, et, odd)
        return cache[key]

    return f


def _recurrence_rhs(eps, etilde, odd, which, i, P1):
    q, qt, V = odd.q, odd.q_tilde, odd.V
    N = odd.size
    total = 0j
    if which == "eps_i":
        for l in range(N):
            for k in range(N):
                sh = _shift(etilde, k, l)
                if sh is None:
                    continue
                total += q[k] * V[k, i] * V[l, i] * _hop_sign(etilde, k, l) * P1(eps, sh)
        return total * qt[i] / q[0]
    if which == "etilde_i":
        for l in range(N):
            for k in range(N):
                sh = _shift(eps, k, l)
                if sh is None:
                    continue
                total += qt[k] * V[i, k] * V[i, l] * _hop_sign(eps, k, l) * P1(sh, etilde)
        return total * q[i] / q[0]
    if which == "eps_0":
        total = sum(q[k] for k in bits_of(etilde)) * P1(eps, etilde)
        for l in range(N):
            for k in range(N):
                if k == l:
                    continue
                sh = _shift(etilde, k, l)
                if sh is not None:
                    total += q[k] * _hop_sign(etilde, k, l) * P1(eps, sh)
        return total
    if which == "etilde_0":
        total = sum(qt[k] for k in bits_of(eps)) * P1(eps, etilde)
        for l in range(N):
            for k in range(N):
                if k == l:
                    continue
                sh = _shift(eps, k, l)
                if sh is not None:
                    total += qt[k] * _hop_sign(eps, k, l) * P1(sh, etilde)
        return total
    raise ValueError(f"unknown recurrence {which!r}")


def recurrence_residual(eps: int, etilde: int, odd: OddParams, which: str, i: int | None = None, _p1=None) -> float:
    """``|lhs - rhs|`` of one recurrence for ``P1(eps, etilde)``.

    ``eps_i``: ``eps_i P1 = q~_i/q_0 sum_kl q_k v_ki v_li (+-) P1(eps, etilde+v_k-v_l)``;
    ``etilde_i`` is its transpose; ``eps_0``/``etilde_0`` are the forms with
    the index-0 eigenvalue.  ``i=None`` takes the max over all ``i``.
    """
    if popcount(eps) != popcount(etilde):
        raise DimensionError("eps and etilde must have the same weight")
    P1 = _p1 or _p1_cached(odd)
    if which in ("eps_0", "etilde_0"):
        lhs = (eps & 1 if which == "eps_0" else etilde & 1) * P1(eps, etilde)
        return float(abs(lhs - _recurrence_rhs(eps, etilde, odd, which, 0, P1)))
    indices = range(odd.size) if i is None else [i]
    worst = 0.0
    for ii in indices:
        bit = (eps if which == "eps_i" else etilde) >> ii & 1
        lhs = bit * P1(eps, etilde)
        worst = max(worst, float(abs(lhs - _recurrence_rhs(eps, etilde, odd, which, ii, P1))))
    return worst


def tautology_residual(eps: int, etilde: int, odd: OddParams, _p1=None) -> float:
    """Summing the ``eps_i`` recurrence over all ``i`` must give ``d P1 = d P1``."""
    P1 = _p1 or _p1_cached(odd)
    d = popcount(eps)
    rhs = sum(_recurrence_rhs(eps, etilde, odd, "eps_i", i, P1) for i in range(odd.size))
    return float(abs(d * P1(eps, etilde) - rhs))


def recurrence_sweep(odd: OddParams, which=RECURRENCES) -> Residual:
    P1 = _p1_cached(odd)
    tr = ResidualTracker()
    for d in range(odd.size + 1):
        subs = [mask_of(s) for s in enumerate_subsets(odd.size, d)]
        for e in subs:
            for et in subs:
                for w in which:
                    tr.add(recurrence_residual(e, et, odd, w, _p1=P1), (w, bits_of(e), bits_of(et)))
    return tr.result()


def tautology_sweep(odd: OddParams) -> Residual:
    P1 = _p1_cached(odd)
    tr = ResidualTracker()
    for d in range(odd.size + 1):
        subs = [mask_of(s) for s in enumerate_subsets(odd.size, d)]
        for e in subs:
            for et in subs:
                tr.add(tautology_residual(e, et, odd, _p1=P1), (bits_of(e), bits_of(et)))
    return tr.result()


def sum_lemma_residual(odd: OddParams) -> float:
    """``sum_i q~_i v_ki v_li == q_0/q_k delta_kl`` (and the form without ``i = 0``)."""
    V, q, qt = odd.V, odd.q, odd.q_tilde
    full = V @ np.diag(qt) @ V.T
    expected = np.diag(q[0] / q)
    tail = full - qt[0] * np.outer(V[:, 0], V[:, 0])
    return max(max_abs(full - expected), max_abs(tail - (expected - qt[0])))


# --- wedge picture -----------------------------------------------------------


def hop_matrix(a: int, b: int, N: int, d: int) -> np.ndarray:
    """Matrix of ``xi_a d/dxi_b`` on the ``d``-subsets of ``N`` modes (colex)."""
    subs = [mask_of(s) for s in enumerate_subsets(N, d)]
    idx = {e: r for r, e in enumerate(subs)}
    M = np.zeros((len(subs), len(subs)))
    for col, e in enumerate(subs):
        sh = _shift(e, a, b)
        if sh is not None:
            M[idx[sh], col] = _hop_sign(e, a, b)
    return M


def transposed_cartan(odd: OddParams, d: int, side: str):
    """The commuting operators whose eigenvectors are the wedge vectors.

    ``side='plain'``: ``D_ii^t`` on the tilde wedge basis,
    ``q~_i/q_0 sum_kl q_k v_ki v_li xi~_l d/dxi~_k``.
    ``side='tilde'``: ``D~_ii^t`` on the plain wedge basis,
    ``q_i/q_0 sum_kl q~_k v_ik v_il xi_l d/dxi_k``.
    """
    N = odd.size
    q, qt, V = odd.q, odd.q_tilde, odd.V
    hops = {(k, l): hop_matrix(l, k, N, d) for k in range(N) for l in range(N)}
    ops = []
    for i in range(N):
        op = 0
        for (k, l), H in hops.items():
            if side == "plain":
                c = qt[i] / q[0] * q[k] * V[k, i] * V[l, i]
            else:
                c = q[i] / q[0] * qt[k] * V[i, k] * V[i, l]
            op = op + c * H
        ops.append(np.asarray(op, dtype=complex))
    return ops


@dataclass(frozen=True, eq=False)
class WedgeVector:
    label: tuple
    vector: np.ndarray
    eigen_residuals: tuple  # one per i, then the index-0 form
    basis: tuple


def wedge_vector(e: int, odd: OddParams, side: str = "plain", ops=None) -> WedgeVector:
    """Coefficient vector of ``sum_et P1(e, et) xi~^et`` (``side='plain'``) or
    ``sum_eps P1(eps, e) xi^eps`` (``side='tilde'``), with its eigen-residuals.
    """
    d = popcount(e)
    N = odd.size
    subs = [mask_of(s) for s in enumerate_subsets(N, d)]
    if side == "plain":
        vec = np.array([eval_p1(e, t, odd) for t in subs], dtype=complex)
    elif side == "tilde":
        vec = np.array([eval_p1(t, e, odd) for t in subs], dtype=complex)
    else:
        raise ValueError(f"unknown side {side!r}")
    ops = ops if ops is not None else transposed_cartan(odd, d, side)
    res = []
    for i, op in enumerate(ops):
        res.append(float(np.max(np.abs(op @ vec - (e >> i & 1) * vec))) if vec.size else 0.0)
    if vec.size:
        zero_op = d * np.eye(len(subs)) - sum(ops[1:], np.zeros((len(subs), len(subs))))
        res.append(float(np.max(np.abs(zero_op @ vec - (e & 1) * vec))))
    else:
        res.append(0.0)
    return WedgeVector(bits_of(e), vec, tuple(res), tuple(bits_of(s) for s in subs))


def wedge_sweep(odd: OddParams, sides=("plain", "tilde")) -> dict:
    """Max eigen-residual and the smallest normalized singular value per ``d``."""
    tr = ResidualTracker()
    min_sv = {}
    for d in range(odd.size + 1):
        subs = [mask_of(s) for s in enumerate_subsets(odd.size, d)]
        for side in sides:
            ops = transposed_cartan(odd, d, side)
            cols = []
            for e in subs:
                w = wedge_vector(e, odd, side, ops)
                tr.add(max(w.eigen_residuals), (side, w.label))
                cols.append(w.vector / np.linalg.norm(w.vector))
            sv = np.linalg.svd(np.array(cols), compute_uv=False)
            min_sv[(side, d)] = float(sv.min())
    return {"eigen": tr.result(), "min_singular_value": min_sv}
