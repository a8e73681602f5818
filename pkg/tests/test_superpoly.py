import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superkraw.numkern import DimensionError, enumerate_subsets, minor
from superkraw.params import EvenParams, OddParams, ParamSet, binary_paramset, random_paramset, trivial_params
from superkraw.superpoly import (
    SuperPolynomial,
    basis,
    bits_of,
    expand_even_product,
    expand_odd_product,
    mask_of,
    popcount,
    sign_prefix,
    slice_dimension,
    substitution_matrices,
    to_monomial_basis,
    transition_columns,
    wedge_mul,
)


def reorder_sign(seq):
    """Sign of sorting a word of distinct indices by adjacent swaps (bubble sort)."""
    seq, sign = list(seq), 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    return sign


def test_sign_prefix_examples():
    assert sign_prefix(0b101, 2) == 1
    assert all(sign_prefix(0, j) == 0 for j in range(8))


def test_shift_sign_identity_exhaustive():
    # s_i(e - v_j) + s_j(e) == s_i(e + v_i - v_j) + s_j(e - v_j) whenever e_j = 1
    for N in range(1, 8):
        for e in range(1 << N):
            for i in range(N):
                for j in range(N):
                    if not e >> j & 1:
                        continue
                    e_j = e ^ (1 << j)
                    lhs = sign_prefix(e_j, i) + sign_prefix(e, j)
                    rhs = sign_prefix(e_j | (1 << i), i) + sign_prefix(e_j, j)
                    assert lhs == rhs


def test_bits_and_masks():
    assert bits_of(0b1011) == (0, 1, 3)
    assert mask_of((0, 1, 3)) == 0b1011
    assert popcount(0b1011) == 3
    with pytest.raises(DimensionError):
        mask_of((1, 1))


def test_wedge_mul_examples():
    assert wedge_mul(0b01, 0b10) == (1, 0b11)
    assert wedge_mul(0b10, 0b01) == (-1, 0b11)
    assert wedge_mul(0b01, 0b01)[0] == 0


subsets7 = st.sets(st.integers(0, 6)).map(lambda s: mask_of(s))


@given(subsets7, subsets7)
def test_wedge_mul_matches_reordering(a, b):
    s, u = wedge_mul(a, b)
    if a & b:
        assert s == 0
    else:
        assert u == a | b
        assert s == reorder_sign(bits_of(a) + bits_of(b))


@given(subsets7, subsets7, subsets7)
def test_wedge_mul_associative(a, b, c):
    s1, ab = wedge_mul(a, b)
    s2, left = wedge_mul(ab, c) if s1 else (0, 0)
    t1, bc = wedge_mul(b, c)
    t2, right = wedge_mul(a, bc) if t1 else (0, 0)
    assert s1 * s2 == t1 * t2
    if s1 * s2:
        assert left == right


def test_expand_odd_product_examples():
    p = expand_odd_product(np.eye(2), (0, 1))
    assert p.terms == {((), 0b11): 1}
    q = expand_odd_product([[1, 1], [1, -1]], (0, 1))
    assert q.terms == {((), 0b11): -2}


@pytest.mark.parametrize("seed", range(3))
def test_expand_odd_product_coefficients_are_minors(seed):
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((5, 5))
    for d in range(6):
        for rows in enumerate_subsets(5, d):
            poly = expand_odd_product(C, rows)
            for J in enumerate_subsets(5, d):
                assert abs(poly.coefficient((), mask_of(J)) - minor(C, rows, J)) <= 1e-12


def test_expand_even_product_examples():
    assert expand_even_product(np.eye(2), (2, 0)) == {(2, 0): 1}
    assert expand_even_product([[1, 1], [1, -1]], (1, 1)) == {(2, 0): 1, (0, 2): -1}


@pytest.mark.parametrize("atilde", [(2, 0, 1), (0, 3, 1), (1, 1, 1), (0, 0, 0)])
def test_expand_even_product_evaluates_at_ones(atilde):
    C = np.random.default_rng(sum(atilde)).standard_normal((3, 3))
    coeffs = expand_even_product(C, atilde)
    direct = math.prod(C[i].sum() ** a for i, a in enumerate(atilde))
    assert abs(sum(coeffs.values()) - direct) <= 1e-12
    # at a random point too
    x = np.array([0.3, -1.1, 0.7])
    direct = math.prod((C[i] @ x) ** a for i, a in enumerate(atilde))
    got = sum(c * math.prod(x**np.array(al)) for al, c in coeffs.items())
    assert abs(got - direct) <= 1e-12


def test_super_product_anticommutes():
    xi0 = SuperPolynomial.monomial((0,), 0b01)
    xi1 = SuperPolynomial.monomial((0,), 0b10)
    assert (xi0 * xi1 + xi1 * xi0).terms == {}
    assert (xi0 * xi0).terms == {}
    x0 = SuperPolynomial.monomial((1,), 0)
    assert (x0 * xi1).max_abs_diff(xi1 * x0) == 0


def test_super_product_distributes():
    a = SuperPolynomial.linear([1, 2], [3, -1])
    b = SuperPolynomial.linear([0.5, 0], [1, 1])
    c = SuperPolynomial.linear([1, -1], [0, 2])
    assert (a * (b + c)).max_abs_diff(a * b + a * c) <= 1e-14
    assert ((a * b) * c).max_abs_diff(a * (b * c)) <= 1e-14


def test_basis_layout():
    bas = basis(1, 1, 2)
    assert len(bas) == sum(slice_dimension(1, 1, 2, d) for d in range(3))
    assert bas.odd_degrees() == [0, 1, 2]
    assert bas.monomials[:3] == (((2, 0), 0), ((1, 1), 0), ((0, 2), 0))
    assert bas.monomials[bas.blocks[2]] == (((0, 0), 0b11),)
    assert slice_dimension(1, 1, 2, 3) == 0


def test_to_monomial_basis_trivial():
    ps = ParamSet(trivial_params(EvenParams), trivial_params(OddParams))
    assert to_monomial_basis(((1,), 0), ps).terms == {((1,), 0): 1}
    assert to_monomial_basis(((0,), 1), ps).terms == {((0,), 1): 1}


def test_to_monomial_basis_binary_degree_one():
    ps = binary_paramset()
    th = ps.norms.theta_tilde
    poly = to_monomial_basis(((1, 0), 0), ps)
    assert abs(poly.coefficient((1, 0)) - th / 2) <= 1e-15
    assert abs(poly.coefficient((0, 1)) - th / 2) <= 1e-15
    odd = to_monomial_basis(((0, 0), 0b10), ps)
    kt = ps.norms.kappa_tilde
    assert abs(odd.coefficient((0, 0), 0b01) - kt / 2) <= 1e-15
    assert abs(odd.coefficient((0, 0), 0b10) + kt / 2) <= 1e-15


@pytest.mark.parametrize("D", range(4))
def test_to_monomial_basis_is_homogeneous(D):
    ps = random_paramset(2, 2, 4)
    for mono in basis(2, 2, D):
        assert to_monomial_basis(mono, ps).degrees() <= {D}


def test_transition_columns_match_products():
    ps = random_paramset(1, 2, 6)
    bas = basis(1, 2, 3)
    T = transition_columns(ps, bas)
    for k, mono in enumerate(bas):
        assert np.max(np.abs(T[:, k] - to_monomial_basis(mono, ps).to_vector(bas))) <= 1e-14


def test_transition_columns_via_super_product():
    # x~^a xi~^e as an actual product of linear forms
    ps = random_paramset(1, 1, 2)
    bas = basis(1, 1, 2)
    T = transition_columns(ps, bas)
    Cx, Cxi = substitution_matrices(ps)
    forms_x = [SuperPolynomial.linear(Cx[i], [0, 0]) for i in range(2)]
    forms_xi = [SuperPolynomial.linear([0, 0], Cxi[i]) for i in range(2)]
    for k, (at, et) in enumerate(bas):
        prod = SuperPolynomial.monomial((0, 0), 0)
        for i, a in enumerate(at):
            for _ in range(a):
                prod = prod * forms_x[i]
        for i in bits_of(et):
            prod = prod * forms_xi[i]
        assert np.max(np.abs(prod.to_vector(bas) - T[:, k])) <= 1e-14


def test_to_vector_rejects_foreign_monomials():
    with pytest.raises(DimensionError):
        SuperPolynomial.monomial((3, 0), 0).to_vector(basis(1, 1, 2))


def test_repr_mentions_terms():
    assert "xi0" in repr(SuperPolynomial.monomial((1, 0), 1))
    assert repr(SuperPolynomial()) == "SuperPolynomial(0)"


def test_too_many_odd_variables():
    with pytest.raises(DimensionError):
        basis(0, 31, 1)


@pytest.mark.parametrize("m,n,D", list(itertools.product(range(3), range(3), range(4))))
def test_basis_counts(m, n, D):
    bas = basis(m, n, D)
    assert len(set(bas.monomials)) == len(bas)
    for d, s in bas.blocks.items():
        assert s.stop - s.start == math.comb(D - d + m, m) * math.comb(n + 1, d)
