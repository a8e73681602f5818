"""Fermionic picture of the odd polynomials.

For positive ``q, q~`` and real ``V`` the matrix
``g = q0^(-1/2) Q^(1/2) V Q~^(1/2)`` is orthogonal.  Its ``d x d`` minors are
transition amplitudes between occupation states ``xi_J -> xi_I`` of ``d``
fermions on ``n + 1`` modes, and ``P1`` is a zonal spherical function of the
pair ``(SO(n+1), SO(d) x SO(n+1-d))`` evaluated at ``g``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .numkern import DegeneracyError, ResidualTracker, enumerate_subsets, minor
from .params import OddParams
from .superpoly import expand_odd_product, popcount, bits_of
from .krawtchouk import eval_p1

ORTHO_TOL = 1e-12


class DomainError(DegeneracyError):
    """Input lies outside the positive/real setting of the fermionic layer."""


@dataclass(frozen=True, eq=False)
class OrthogonalFrame:
    g: np.ndarray
    sqrt_q: np.ndarray
    sqrt_q_tilde: np.ndarray  # includes the sign used to land in SO(n+1)
    flipped: int | None  # index whose root was negated, if any
    det_sign: int = 1

    @property
    def size(self):
        return self.g.shape[0]

    def orthogonality_residual(self) -> float:
        return float(np.max(np.abs(self.g @ self.g.T - np.eye(self.size))))

    def det_residual(self) -> float:
        return abs(float(np.linalg.det(self.g)) - 1.0)


def _real_positive(x, name):
    x = np.asarray(x)
    if np.iscomplexobj(x):
        if np.any(np.abs(x.imag) > 0):
            raise DomainError(f"{name} must be real")
        x = x.real
    return np.asarray(x, dtype=float)


def build_g(odd: OddParams, flip_index: int | None = None) -> OrthogonalFrame:
    """The special orthogonal matrix attached to real positive odd data.

    If the plain product has determinant -1 the root ``sqrt(q~_k)`` with
    ``k = flip_index`` (default: the last) is negated.
    """
    q = _real_positive(odd.q, "q")
    qt = _real_positive(odd.q_tilde, "q_tilde")
    V = _real_positive(odd.V, "V")
    if np.any(q <= 0) or np.any(qt <= 0):
        raise DomainError("q and q_tilde must be strictly positive")
    sq, sqt = np.sqrt(q), np.sqrt(qt)
    g = (sq[:, None] * V * sqt[None, :]) / np.sqrt(q[0])
    flipped = None
    if np.linalg.det(g) < 0:
        flipped = g.shape[0] - 1 if flip_index is None else flip_index
        sqt = sqt.copy()
        sqt[flipped] = -sqt[flipped]
        g[:, flipped] = -g[:, flipped]
    for a in (g, sq, sqt):
        a.setflags(write=False)
    return OrthogonalFrame(g, sq, sqt, flipped)


def _perm_parity(perm) -> int:
    inv = sum(1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b])
    return inv & 1


def sigma(I, n_plus_1: int, d: int | None = None) -> np.ndarray:
    """Rotation in SO(n+1) taking ``xi_0 ... xi_{d-1}`` to ``+xi_I``."""
    I = tuple(sorted(I))
    d = len(I) if d is None else d
    if len(I) != d:
        raise ValueError(f"|I| = {len(I)} but d = {d}")
    rest = [k for k in range(n_plus_1) if k not in I]
    perm = list(I) + rest
    S = np.zeros((n_plus_1, n_plus_1))
    S[perm, range(n_plus_1)] = 1.0
    if _perm_parity(perm):
        S[perm[d], d] = -1.0  # a complement column; exists whenever the parity is odd
    return S


def _leading(d: int, n_plus_1: int, variant: str):
    if variant == "plus":
        return tuple(range(d))
    if variant == "minus":
        return tuple(range(d, n_plus_1))
    raise ValueError(f"unknown variant {variant!r}")


def phi_d(h, d: int, variant: str = "plus", method: str = "minor") -> float:
    """``(v, h.v)`` for ``v = xi_0...xi_{d-1}`` (or ``xi_d...xi_n`` with ``variant='minus'``).

    ``method='minor'`` takes the determinant of the corresponding block;
    ``method='expand'`` expands ``h.v`` in the wedge basis and reads off the
    coefficient of ``v``.
    """
    h = np.asarray(h, dtype=float)
    N = h.shape[0]
    if np.max(np.abs(h @ h.T - np.eye(N))) > 1e-9:
        warnings.warn("phi_d called on a non-orthogonal matrix", RuntimeWarning, stacklevel=2)
    idx = _leading(d, N, variant)
    if method == "minor":
        return float(minor(h, idx, idx).real)
    if method == "expand":
        # h.xi_j = sum_i h[i, j] xi_i, i.e. row j of h^t
        poly = expand_odd_product(h.T, idx)
        return float(poly.coefficient((), sum(1 << i for i in idx)).real)
    raise ValueError(f"unknown method {method!r}")


def amplitude(g, I, J) -> float:
    """``(xi_I, g.xi_J)`` read off as a minor."""
    return float(minor(g, I, J).real)


def plucker_residual(g, d: int, sigmas=None) -> float:
    """Max over ``I, J`` of ``|(xi_I, g.xi_J) - phi_d(sigma_I^-1 g sigma_J)|``."""
    N = g.shape[0]
    subs = enumerate_subsets(N, d)
    sig = sigmas or {I: sigma(I, N, d) for I in subs}
    worst = 0.0
    for I in subs:
        for J in subs:
            h = sig[I].T @ g @ sig[J]
            worst = max(worst, abs(amplitude(g, I, J) - phi_d(h, d)))
    return worst


def random_stabilizer(n_plus_1: int, d: int, rng) -> np.ndarray:
    """A random element of SO(d) x SO(n+1-d), block diagonal."""
    K = np.zeros((n_plus_1, n_plus_1))
    for lo, hi in ((0, d), (d, n_plus_1)):
        k = hi - lo
        if k == 0:
            continue
        Q, R = np.linalg.qr(rng.standard_normal((k, k)))
        Q = Q * np.sign(np.diag(R))
        if np.linalg.det(Q) < 0:
            Q[:, 0] = -Q[:, 0]
        K[lo:hi, lo:hi] = Q
    return K


def sigma_independence_residual(g, d: int, seed: int = 0) -> float:
    """``phi_d`` changes by at most this much when every ``sigma_I`` is replaced
    by ``sigma_I k_I`` for random ``k_I`` in the stabilizer."""
    rng = np.random.default_rng(seed)
    N = g.shape[0]
    subs = enumerate_subsets(N, d)
    base = {I: sigma(I, N, d) for I in subs}
    alt = {I: base[I] @ random_stabilizer(N, d, rng) for I in subs}
    worst = 0.0
    for I in subs:
        for J in subs:
            a = phi_d(base[I].T @ g @ base[J], d)
            b = phi_d(alt[I].T @ g @ alt[J], d)
            worst = max(worst, abs(a - b))
    return worst


@dataclass(frozen=True)
class OccupationDistribution:
    J: tuple
    probs: dict = field(hash=False)
    seed: int = 0

    def total(self) -> float:
        return math.fsum(self.probs.values())


def occupation_probs(odd: OddParams, J, d: int | None = None, seed: int = 0, frame=None) -> OccupationDistribution:
    """``P(I | J) = det(g[I, J])^2`` over all ``d``-subsets ``I`` (colex order)."""
    J = tuple(sorted(J))
    d = len(J) if d is None else d
    if len(J) != d:
        raise ValueError(f"|J| = {len(J)} but d = {d}")
    frame = frame or build_g(odd)
    probs = {I: amplitude(frame.g, I, J) ** 2 for I in enumerate_subsets(frame.size, d)}
    return OccupationDistribution(J, probs, seed)


def sample_occupation(dist: OccupationDistribution, count: int, seed: int | None = None):
    """Draw ``count`` target states by inverse CDF; returns ``(frequencies, draws)``."""
    rng = np.random.default_rng(dist.seed if seed is None else seed)
    states = list(dist.probs)
    cdf = np.cumsum([dist.probs[s] for s in states])
    cdf /= cdf[-1]
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    idx = np.minimum(idx, len(states) - 1)
    counts = np.bincount(idx, minlength=len(states))
    freq = {s: float(counts[k] / count) for k, s in enumerate(states)}
    return freq, [states[k] for k in idx]


def krzonal_value(eps: int, etilde: int, odd: OddParams, frame=None) -> float:
    """``P1`` rebuilt from the spherical function.

    ``q0^(d/2)/d! * q_I^(-1/2) q~_J^(-1/2) phi_d(sigma_I^-1 g sigma_J)`` with
    ``I = supp(etilde)``, ``J = supp(eps)`` and the same square roots that
    went into ``g``.
    """
    frame = frame or build_g(odd)
    d = popcount(eps)
    if popcount(etilde) != d:
        return 0.0
    I, J = bits_of(etilde), bits_of(eps)
    N = frame.size
    h = sigma(I, N, d).T @ frame.g @ sigma(J, N, d)
    q0 = float(np.real(odd.q[0]))
    pref = q0 ** (d / 2) / math.factorial(d)
    pref /= np.prod(frame.sqrt_q[list(I)]) * np.prod(frame.sqrt_q_tilde[list(J)])
    return float(pref * phi_d(h, d))


def krzonal_check(odd: OddParams, eps: int, etilde: int, frame=None) -> float:
    """``|krzonal_value - P1(eps, etilde)|``."""
    return abs(krzonal_value(eps, etilde, odd, frame) - complex(eval_p1(eps, etilde, odd)))


def krzonal_sweep(odd: OddParams, flip_index: int | None = None):
    frame = build_g(odd, flip_index)
    tr = ResidualTracker()
    for d in range(frame.size + 1):
        masks = [sum(1 << i for i in s) for s in enumerate_subsets(frame.size, d)]
        for e in masks:
            for et in masks:
                tr.add(krzonal_check(odd, e, et, frame), (bits_of(e), bits_of(et)))
    return tr.result()
