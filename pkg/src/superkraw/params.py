"""Admissible parameter tuples and their normalizers.

An admissible tuple is ``(p, p_tilde, U)`` with ``p[0] == p_tilde[0] != 0``,
a first row and column of ones in ``U``, and

    diag(p) @ U @ diag(p_tilde) @ U.T == p[0] * I.

The even data K = (p, p_tilde, U) and the odd data Lambda = (q, q_tilde, V)
obey the same conditions, so both share :class:`Admissible`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .numkern import (
    DegeneracyError,
    DimensionError,
    det,
    householder_swap,
)

VALIDATE_TOL = 1e-10


class ParamFormatError(ValueError):
    """Malformed parameter file (bad keys, shapes or scalar encodings)."""


@dataclass(frozen=True, eq=False)
class Admissible:
    weights: np.ndarray
    dual_weights: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=complex).ravel()
        wt = np.asarray(self.dual_weights, dtype=complex).ravel()
        M = np.asarray(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionError(f"parameter matrix must be square, got {M.shape}")
        if w.size != M.shape[0] or wt.size != M.shape[0]:
            raise DimensionError(
                f"weights of length {w.size}/{wt.size} do not match a "
                f"{M.shape[0]}x{M.shape[0]} matrix"
            )
        for arr in (w, wt, M):
            if not np.all(np.isfinite(arr)):
                raise DegeneracyError("parameters must be finite")
            arr.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "dual_weights", wt)
        object.__setattr__(self, "matrix", M)

    @property
    def size(self) -> int:
        """Number of variables (``m + 1`` or ``n + 1``)."""
        return self.matrix.shape[0]

    def dual(self):
        return type(self)(self.dual_weights, self.weights, self.matrix.T)

    def residuals(self) -> dict:
        w, wt, M = self.weights, self.dual_weights, self.matrix
        k = self.size
        gram = np.diag(w) @ M @ np.diag(wt) @ M.T
        return {
            "first_weights_equal": abs(w[0] - wt[0]),
            "first_weight_nonzero": 0.0 if w[0] != 0 else np.inf,
            "first_row_ones": float(np.max(np.abs(M[0] - 1))),
            "first_col_ones": float(np.max(np.abs(M[:, 0] - 1))),
            "gram_identity": float(np.max(np.abs(gram - w[0] * np.eye(k)))),
            "weights_sum_one": abs(w.sum() - 1),
            "dual_weights_sum_one": abs(wt.sum() - 1),
        }

    def __eq__(self, other):
        return (
            type(self) is type(other)
            and np.array_equal(self.weights, other.weights)
            and np.array_equal(self.dual_weights, other.dual_weights)
            and np.array_equal(self.matrix, other.matrix)
        )

    __hash__ = None


class EvenParams(Admissible):
    """K = (p, p_tilde, U) for the commuting variables."""

    @property
    def p(self):
        return self.weights

    @property
    def p_tilde(self):
        return self.dual_weights

    @property
    def U(self):
        return self.matrix


class OddParams(Admissible):
    """Lambda = (q, q_tilde, V) for the Grassmann variables."""

    @property
    def q(self):
        return self.weights

    @property
    def q_tilde(self):
        return self.dual_weights

    @property
    def V(self):
        return self.matrix


@dataclass(frozen=True, eq=False)
class Normalizers:
    theta_tilde: complex
    theta: complex
    kappa_tilde: complex
    kappa: complex
    R: np.ndarray
    S: np.ndarray
    R_inv: np.ndarray
    S_inv: np.ndarray


def _principal_root(z: complex, k: int) -> complex:
    return complex(np.exp(np.log(complex(z)) / k))


def _normalize(t: Admissible):
    """Scalar ``c`` with ``det(c * diag(dual) @ M.T) == 1`` and its partner."""
    base = np.diag(t.dual_weights) @ t.matrix.T
    db = det(base)
    if db == 0:
        raise DegeneracyError("diag(p_tilde) U^t is singular")
    c_tilde = _principal_root(1.0 / db, t.size)
    c = 1.0 / (t.weights[0] * c_tilde)
    R = c_tilde * base
    # inverse from the admissibility relation, no numerical inversion
    R_inv = c * np.diag(t.weights) @ t.matrix
    return c_tilde, c, R, R_inv


def normalizers(even: EvenParams, odd: OddParams) -> Normalizers:
    """theta~, theta, kappa~, kappa and the unit-determinant matrices R, S.

    The principal complex root is taken for ``theta~`` and ``kappa~``.
    """
    tt, t, R, Ri = _normalize(even)
    kt, k, S, Si = _normalize(odd)
    for arr in (R, S, Ri, Si):
        arr.setflags(write=False)
    return Normalizers(tt, t, kt, k, R, S, Ri, Si)


@dataclass(frozen=True, eq=False)
class ParamSet:
    even: EvenParams
    odd: OddParams

    def __post_init__(self):
        if not isinstance(self.even, EvenParams):
            object.__setattr__(self, "even", EvenParams(*_fields(self.even)))
        if not isinstance(self.odd, OddParams):
            object.__setattr__(self, "odd", OddParams(*_fields(self.odd)))

    @cached_property
    def norms(self) -> Normalizers:
        return normalizers(self.even, self.odd)

    @property
    def m(self) -> int:
        return self.even.size - 1

    @property
    def n(self) -> int:
        return self.odd.size - 1

    # short aliases used throughout the formulas
    p = property(lambda self: self.even.p)
    p_tilde = property(lambda self: self.even.p_tilde)
    U = property(lambda self: self.even.U)
    q = property(lambda self: self.odd.q)
    q_tilde = property(lambda self: self.odd.q_tilde)
    V = property(lambda self: self.odd.V)

    def __eq__(self, other):
        return (
            isinstance(other, ParamSet)
            and self.even == other.even
            and self.odd == other.odd
        )

    __hash__ = None

    def concatenated_residual(self) -> float:
        """Max-norm of ``(P/p0 | Q/q0) Y (P~ | Q~) Y^t - I`` with ``Y = (U|V)``."""
        Y = _block(self.U, self.V)
        left = _block(np.diag(self.p) / self.p[0], np.diag(self.q) / self.q[0])
        right = _block(np.diag(self.p_tilde), np.diag(self.q_tilde))
        M = left @ Y @ right @ Y.T
        return float(np.max(np.abs(M - np.eye(M.shape[0]))))


def _fields(t):
    return t.weights, t.dual_weights, t.matrix


def _block(A, B):
    a, b = A.shape[0], B.shape[0]
    out = np.zeros((a + b, a + b), dtype=complex)
    out[:a, :a] = A
    out[a:, a:] = B
    return out


@dataclass
class ValidationReport:
    residuals: dict
    tol: float

    @property
    def ok(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    def failures(self) -> dict:
        return {k: v for k, v in self.residuals.items() if v > self.tol}


def validate(params, tol: float = VALIDATE_TOL) -> ValidationReport:
    """Residual of every admissibility condition for a tuple or a ParamSet."""
    if isinstance(params, ParamSet):
        items = {"even": params.even, "odd": params.odd}
    else:
        items = {"": params}
    residuals = {}
    for label, t in items.items():
        if not isinstance(t, Admissible):
            raise DimensionError(f"cannot validate {type(t).__name__}")
        for key, val in t.residuals().items():
            residuals[f"{label}.{key}" if label else key] = float(val)
    if isinstance(params, ParamSet):
        residuals["concatenated_identity"] = params.concatenated_residual()
        try:
            nm = params.norms
        except DegeneracyError:
            residuals["det_R_one"] = residuals["det_S_one"] = float("inf")
        else:
            residuals["det_R_one"] = abs(det(nm.R) - 1)
            residuals["det_S_one"] = abs(det(nm.S) - 1)
    return ValidationReport(residuals, tol)


def binary_params(t, cls=EvenParams):
    """The classical two-state tuple ``p = (t, 1-t)``, ``U = [[1, 1], [1, -t/(1-t)]]``."""
    t = complex(t)
    if t == 0 or t == 1:
        raise DegeneracyError(f"binary parameters need t not in {{0, 1}}, got {t}")
    w = np.array([t, 1 - t])
    U = np.array([[1, 1], [1, -t / (1 - t)]])
    return cls(w, w.copy(), U)


def binary_paramset(t=0.5, s=None) -> ParamSet:
    """Binary even and odd data (``m = n = 1``)."""
    return ParamSet(binary_params(t, EvenParams), binary_params(t if s is None else s, OddParams))


def trivial_params(cls=EvenParams):
    return cls([1.0], [1.0], [[1.0]])


def _random_tuple(k: int, rng: np.random.Generator, cls):
    if k == 1:
        return trivial_params(cls)
    raw = rng.uniform(0.5, 1.5, size=k)
    p = raw / raw.sum()
    sp = np.sqrt(p)
    # W orthogonal with first row and first column both sqrt(p)
    H1 = householder_swap(sp)
    r = sp[1:]
    H2 = householder_swap(r / np.linalg.norm(r))
    inner = np.eye(k - 1)
    if k > 2:
        G = rng.standard_normal((k - 2, k - 2))
        Qr, Rr = np.linalg.qr(G)
        inner[1:, 1:] = Qr * np.sign(np.diag(Rr))
    Qp = H2 @ inner @ H2
    W = H1 @ _block_real(np.eye(1), Qp)
    U = np.sqrt(p[0]) * (W / sp[:, None]) / sp[None, :]
    # the normalization holds up to rounding; pin it exactly
    U[0, :] = 1.0
    U[:, 0] = 1.0
    return cls(p, p.copy(), U)


def _block_real(A, B):
    a, b = A.shape[0], B.shape[0]
    out = np.zeros((a + b, a + b))
    out[:a, :a] = A
    out[a:, a:] = B
    return out


def random_admissible(size_minus_1: int, seed, cls=EvenParams):
    """Random admissible tuple with positive ``p == p_tilde`` of length ``size_minus_1 + 1``.

    Deterministic in ``seed`` (an int or a ``numpy`` Generator).
    """
    if size_minus_1 < 0:
        raise DimensionError("size must be non-negative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return _random_tuple(size_minus_1 + 1, rng, cls)


def random_paramset(m: int, n: int, seed: int) -> ParamSet:
    even_seq, odd_seq = np.random.SeedSequence(seed).spawn(2)
    return ParamSet(
        random_admissible(m, np.random.default_rng(even_seq), EvenParams),
        random_admissible(n, np.random.default_rng(odd_seq), OddParams),
    )


def dualize(ps: ParamSet) -> ParamSet:
    """``(p, p~, U, q, q~, V) -> (p~, p, U^t, q~, q, V^t)``."""
    return ParamSet(ps.even.dual(), ps.odd.dual())


# --- file codec -------------------------------------------------------------


def _encode_scalar(z):
    z = complex(z)
    if z.imag == 0:
        return z.real
    return [z.real, z.imag]


def _decode_scalar(x, where):
    if isinstance(x, bool):
        raise ParamFormatError(f"{where}: boolean is not a scalar")
    if isinstance(x, (int, float)):
        return complex(x)
    if (
        isinstance(x, list)
        and len(x) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)
    ):
        return complex(x[0], x[1])
    raise ParamFormatError(f"{where}: expected a number or [re, im], got {x!r}")


def _decode_vector(x, where):
    if not isinstance(x, list) or not x:
        raise ParamFormatError(f"{where}: expected a non-empty list")
    return np.array([_decode_scalar(v, f"{where}[{i}]") for i, v in enumerate(x)])


def _decode_matrix(x, where):
    if not isinstance(x, list) or not x or not all(isinstance(r, list) for r in x):
        raise ParamFormatError(f"{where}: expected a list of row lists")
    ncols = len(x[0])
    if any(len(r) != ncols for r in x) or ncols != len(x):
        raise ParamFormatError(f"{where}: matrix must be square with equal-length rows")
    return np.array(
        [[_decode_scalar(v, f"{where}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(x)]
    )


def to_dict(ps: ParamSet) -> dict:
    def vec(a):
        return [_encode_scalar(z) for z in a]

    def mat(a):
        return [vec(r) for r in a]

    return {
        "even": {"p": vec(ps.p), "p_tilde": vec(ps.p_tilde), "U": mat(ps.U)},
        "odd": {"q": vec(ps.q), "q_tilde": vec(ps.q_tilde), "V": mat(ps.V)},
    }


def from_dict(data) -> ParamSet:
    """Decode the parameter object; shape problems raise :class:`ParamFormatError`."""
    if not isinstance(data, dict):
        raise ParamFormatError("top level must be an object")
    layout = {"even": ("p", "p_tilde", "U"), "odd": ("q", "q_tilde", "V")}
    parts = {}
    for section, keys in layout.items():
        block = data.get(section)
        if not isinstance(block, dict):
            raise ParamFormatError(f"missing object {section!r}")
        missing = [k for k in keys if k not in block]
        if missing:
            raise ParamFormatError(f"{section}: missing keys {missing}")
        w = _decode_vector(block[keys[0]], f"{section}.{keys[0]}")
        wt = _decode_vector(block[keys[1]], f"{section}.{keys[1]}")
        M = _decode_matrix(block[keys[2]], f"{section}.{keys[2]}")
        if not (len(w) == len(wt) == M.shape[0]):
            raise ParamFormatError(
                f"{section}: lengths {len(w)}, {len(wt)} do not match matrix size {M.shape[0]}"
            )
        parts[section] = (w, wt, M)
    try:
        return ParamSet(EvenParams(*parts["even"]), OddParams(*parts["odd"]))
    except DegeneracyError as exc:
        raise ParamFormatError(str(exc)) from exc


def load(path) -> ParamSet:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParamFormatError(f"{path}: {exc}") from exc
    return from_dict(data)


def save(ps: ParamSet, path) -> None:
    Path(path).write_text(json.dumps(to_dict(ps), indent=2) + "\n")
