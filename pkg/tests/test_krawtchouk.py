import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superkraw import krawtchouk as kr
from superkraw.numkern import DimensionError, enumerate_compositions, enumerate_subsets, factorial_vec, power_vec
from superkraw.params import (
    EvenParams,
    OddParams,
    ParamSet,
    binary_params,
    binary_paramset,
    dualize,
    random_admissible,
    random_paramset,
    trivial_params,
)
from superkraw.superpoly import basis, bits_of, mask_of


def masks(N, d):
    return [mask_of(s) for s in enumerate_subsets(N, d)]


def test_p1_examples():
    odd = binary_params(0.5, OddParams)
    assert kr.eval_p1(0, 0, odd) == 1
    assert kr.eval_p1(0b10, 0b10, odd) == -1
    assert kr.eval_p1(0b01, 0b10, odd) == 1
    assert kr.eval_p1(0b11, 0b11, odd) == -1
    assert kr.eval_p1(0b01, 0b11, odd) == 0


@pytest.mark.parametrize("n,seed", [(1, 0), (2, 1), (3, 2), (4, 3)])
def test_p1_three_ways(n, seed):
    odd = random_admissible(n, seed, OddParams)
    for d in range(n + 2):
        for e in masks(n + 1, d):
            for et in masks(n + 1, d):
                ref = kr.eval_p1(e, et, odd)
                assert abs(kr.eval_p1(e, et, odd, full_sum=True) - ref) <= 1e-12
                assert abs(kr.p1_from_expansion(e, et, odd) - ref) <= 1e-12


def test_p0_examples():
    even = binary_params(0.5)
    assert kr.eval_p0((1, 0), (0, 1), even) == 1
    assert kr.eval_p0((0, 1), (0, 1), even) == -1
    ps = random_paramset(2, 0, 3)
    for alpha in enumerate_compositions(3, 3):
        assert abs(kr.eval_p0(alpha, (3, 0, 0), ps.even) - 1) <= 1e-12


def test_p0_mismatched_degree_and_length():
    even = binary_params(0.5)
    assert kr.eval_p0((1, 0), (2, 0), even) == 0
    with pytest.raises(DimensionError):
        kr.eval_p0((1, 0, 0), (1, 0), even)


@pytest.mark.parametrize("seed", range(3))
def test_p0_duality(seed):
    ps = random_paramset(2, 0, seed)
    dual = dualize(ps)
    for K in range(4):
        comps = enumerate_compositions(K, 3)
        for a in comps:
            for at in comps:
                assert abs(kr.eval_p0(a, at, ps.even) - kr.eval_p0(at, a, dual.even)) <= 1e-11


def brute_p0(alpha, atilde, U):
    """Sum over ways of choosing, for each factor of prod_i (sum_j u_ij x_j)^at_i, a variable j."""
    factors = [i for i, a in enumerate(atilde) for _ in range(a)]
    k = len(factors)
    total = 0.0
    for choice in np.ndindex(*([len(alpha)] * k)):
        if tuple(np.bincount(choice, minlength=len(alpha))) == tuple(alpha):
            total += math.prod(U[i, j] for i, j in zip(factors, choice))
    return total * factorial_vec(alpha) / math.factorial(k)


def test_p0_against_brute_force():
    ps = random_paramset(2, 0, 7)
    for alpha in enumerate_compositions(3, 3):
        for at in enumerate_compositions(3, 3):
            assert abs(kr.eval_p0(alpha, at, ps.even) - brute_p0(alpha, at, ps.U)) <= 1e-12


def test_p_reduces_to_factors(binary):
    assert kr.eval_p((1, 1), 0, (2, 0), 0, binary) == kr.eval_p0((1, 1), (2, 0), binary.even)
    assert kr.eval_p((0, 0), 0b11, (0, 0), 0b11, binary) == kr.eval_p1(0b11, 0b11, binary.odd)
    assert kr.eval_p((1, 0), 0b01, (1, 0), 0b11, binary) == 0


@pytest.mark.parametrize("ps", [binary_paramset(), random_paramset(1, 1, 0), random_paramset(2, 1, 5)])
def test_p_matches_generating_function(ps):
    D = 2
    bas = basis(ps.m, ps.n, D)
    for a, e in bas:
        for at, et in bas:
            ref = kr.p_from_generating_function(a, e, at, et, ps)
            assert abs(kr.eval_p(a, e, at, et, ps) - ref) <= 1e-12


def test_p_matrix_entries(binary):
    D = 3
    for d in range(3):
        sub = basis(1, 1, D, d)
        P = kr.p_matrix(binary, D, d)
        for r, (a, e) in enumerate(sub):
            for c, (at, et) in enumerate(sub):
                assert abs(P[r, c] - kr.eval_p(a, e, at, et, binary, D)) <= 1e-14


def test_transition_trivial():
    ps = ParamSet(trivial_params(EvenParams), trivial_params(OddParams))
    for D in range(3):
        T = kr.transition_matrix(kr.TILDE_TO_PLAIN, ps, D)
        for d in T.basis.blocks:
            assert T.block(d).tolist() == [[1]]
        assert np.array_equal(T.entries, np.eye(len(T.basis)))


def test_transition_binary_odd_block(binary):
    T = kr.transition_matrix(kr.TILDE_TO_PLAIN, binary, 1)
    expected = binary.norms.kappa_tilde * (binary.V * binary.q_tilde[None, :]).T
    assert np.max(np.abs(T.block(1) - expected)) <= 1e-14


def test_transition_rejects_unknown_direction(binary):
    with pytest.raises(ValueError):
        kr.transition_matrix("sideways", binary, 1)


@pytest.mark.parametrize("D", range(5))
def test_transition_residuals(random_ps, D):
    r = kr.transition_residuals(random_ps, D)
    assert r["round_trip"] <= 1e-9
    assert r["vs_substitution"] <= 1e-9
    assert r["off_block"] <= 1e-12


@pytest.mark.parametrize("D", range(4))
def test_pairing(random_ps, D):
    assert kr.pairing_residual(random_ps, D).value <= 1e-10


def test_orthogonality_by_direct_summation(binary):
    D, d = 2, 1
    sub = basis(1, 1, D, d)
    assert len(sub) == 4
    p, pt, q, qt = binary.p, binary.p_tilde, binary.q, binary.q_tilde
    for at, et in sub:
        for bt, ft in sub:
            total = 0j
            for a, e in sub:
                w = power_vec(pt, a) * np.prod(qt[list(bits_of(e))])
                prod = kr.eval_p(a, e, at, et, binary) * kr.eval_p(a, e, bt, ft, binary)
                total += prod * w * math.factorial(D) / factorial_vec(a)
            expected = 0
            if (at, et) == (bt, ft):
                qe = np.prod(q[list(bits_of(et))])
                expected = p[0] ** (D - d) * q[0] ** d / math.factorial(D) * factorial_vec(at) / (power_vec(p, at) * qe)
            assert abs(total - expected) <= 1e-10
    assert kr.orthogonality_residual(binary, D, d).value <= 1e-10


def test_orthogonality_trivial():
    ps = ParamSet(trivial_params(EvenParams), trivial_params(OddParams))
    assert kr.orthogonality_residual(ps, 2, 0).value == 0
    assert kr.orthogonality_residual(ps, 2, 5).value == 0


@pytest.mark.parametrize("D", range(6))
def test_orthogonality_sweep(D):
    for m in range(4):
        for n in range(4):
            ps = random_paramset(m, n, 100 + 4 * m + n)
            for d in range(min(D, n + 1) + 1):
                assert kr.orthogonality_residual(ps, D, d).value <= 1e-9


def test_orthogonality_complex_params():
    ps = binary_paramset(0.3 + 0.2j, -0.5)
    for D in range(4):
        for d in range(min(D, 2) + 1):
            r = kr.orthogonality_residual(ps, D, d)
            assert r.value <= 1e-9 and r.extra["relative"] <= 1e-12


@pytest.mark.parametrize("D", range(4))
def test_duality(random_ps, D):
    assert kr.duality_residual(random_ps, D).value <= 1e-11


def test_recurrence_degree_zero(binary):
    for which in kr.RECURRENCES:
        assert kr.recurrence_residual(0, 0, binary.odd, which) == 0


def test_recurrence_rejects_bad_input(binary):
    with pytest.raises(DimensionError):
        kr.recurrence_residual(0b01, 0b11, binary.odd, "eps_i")
    with pytest.raises(ValueError):
        kr.recurrence_residual(0b01, 0b01, binary.odd, "bogus")


@pytest.mark.parametrize("n,seed", [(1, 0), (2, 1), (3, 2), (5, 3)])
def test_recurrences(n, seed):
    odd = random_admissible(n, seed, OddParams)
    assert kr.recurrence_sweep(odd).value <= 1e-10
    assert kr.tautology_sweep(odd).value <= 1e-12
    assert kr.sum_lemma_residual(odd) <= 1e-12


def test_recurrence_detects_a_wrong_sign():
    # flipping one hop sign must break the identity: guards against vacuous passes
    odd = random_admissible(2, 4, OddParams)
    orig = kr._hop_sign
    try:
        kr._hop_sign = lambda e, k, l: -orig(e, k, l)
        assert kr.recurrence_sweep(odd, ("eps_i",)).value > 1e-3
    finally:
        kr._hop_sign = orig


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**31), st.data())
def test_recurrence_random_entries(n, seed, data):
    odd = random_admissible(n, seed, OddParams)
    d = data.draw(st.integers(0, n + 1))
    e = data.draw(st.sampled_from(masks(n + 1, d)))
    et = data.draw(st.sampled_from(masks(n + 1, d)))
    for which in kr.RECURRENCES:
        assert kr.recurrence_residual(e, et, odd, which) <= 1e-10


def test_wedge_vector_single_mode():
    odd = trivial_params(OddParams)
    w = kr.wedge_vector(0b1, odd)
    assert w.vector.tolist() == [1]
    assert max(w.eigen_residuals) == 0


def test_wedge_vectors_binary_span():
    odd = binary_params(0.5, OddParams)
    vs = np.array([kr.wedge_vector(e, odd).vector for e in (0b01, 0b10)])
    assert np.linalg.matrix_rank(vs) == 2


@pytest.mark.parametrize("n,seed", [(1, 0), (3, 1), (5, 2)])
def test_wedge_sweep(n, seed):
    odd = random_admissible(n, seed, OddParams)
    w = kr.wedge_sweep(odd)
    assert w["eigen"].value <= 1e-10
    assert min(w["min_singular_value"].values()) > 1e-8


def test_hop_matrix_is_derivation():
    # xi_a d/dxi_b composed with its transpose gives a projection for a != b
    H = kr.hop_matrix(0, 2, 4, 2)
    P = H @ H.T
    assert np.allclose(P, np.diag(np.diag(P)))
    assert set(np.diag(P)) <= {0.0, 1.0}
