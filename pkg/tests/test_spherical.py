import itertools
import math

import numpy as np
import pytest

from superkraw import spherical as sp
from superkraw.numkern import enumerate_subsets, minor
from superkraw.params import OddParams, binary_params, random_admissible, trivial_params
from superkraw.superpoly import expand_odd_product, mask_of

BINARY = binary_params(0.5, OddParams)
RANDOM = [random_admissible(n, s, OddParams) for n, s in [(1, 0), (2, 1), (3, 2), (5, 3)]]


def test_build_g_binary():
    f = sp.build_g(BINARY)
    assert np.allclose(f.g, np.array([[1, -1], [1, 1]]) / math.sqrt(2), atol=1e-15)
    assert f.flipped == 1
    assert f.sqrt_q_tilde[1] < 0


def test_build_g_trivial():
    assert sp.build_g(trivial_params(OddParams)).g.tolist() == [[1.0]]


@pytest.mark.parametrize("odd", RANDOM)
def test_build_g_special_orthogonal(odd):
    f = sp.build_g(odd)
    assert f.orthogonality_residual() <= 1e-13
    assert f.det_residual() <= 1e-12


@pytest.mark.parametrize(
    "odd",
    [
        binary_params(2.0, OddParams),  # q = (2, -1)
        binary_params(0.5 + 0.1j, OddParams),
    ],
)
def test_build_g_domain(odd):
    with pytest.raises(sp.DomainError):
        sp.build_g(odd)


def test_sigma_examples():
    assert np.array_equal(sp.sigma((0, 1), 4), np.eye(4))
    s = sp.sigma((1,), 2)
    assert np.array_equal(s, [[0, -1], [1, 0]])
    assert s @ [1, 0] == pytest.approx([0, 1])


@pytest.mark.parametrize("N", range(1, 6))
def test_sigma_is_rotation_sending_leading_wedge_to_target(N):
    for d in range(N + 1):
        for I in enumerate_subsets(N, d):
            s = sp.sigma(I, N, d)
            assert np.allclose(s @ s.T, np.eye(N))
            assert round(np.linalg.det(s)) == 1
            # s.(xi_0 ... xi_{d-1}) = prod_j (sum_i s_ij xi_i)
            poly = expand_odd_product(s.T, range(d))
            assert poly.terms == {((), mask_of(I)): 1}


def test_phi_d_examples():
    g = sp.build_g(RANDOM[2]).g
    assert sp.phi_d(np.eye(4), 2) == 1
    assert sp.phi_d(g, 4) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("odd", RANDOM)
def test_phi_d_two_methods(odd):
    g = sp.build_g(odd).g
    for d in range(g.shape[0] + 1):
        for variant in ("plus", "minus"):
            a = sp.phi_d(g, d, variant)
            b = sp.phi_d(g, d, variant, method="expand")
            assert abs(a - b) <= 1e-12


def test_phi_d_warns_off_group():
    with pytest.warns(RuntimeWarning):
        assert sp.phi_d(2 * np.eye(2), 1) == 2


def test_phi_d_rejects_unknown_options():
    with pytest.raises(ValueError):
        sp.phi_d(np.eye(2), 1, variant="other")
    with pytest.raises(ValueError):
        sp.phi_d(np.eye(2), 1, method="other")


@pytest.mark.parametrize("odd", RANDOM)
def test_amplitudes_are_spherical_values(odd):
    g = sp.build_g(odd).g
    for d in range(g.shape[0] + 1):
        assert sp.plucker_residual(g, d) <= 1e-12


@pytest.mark.parametrize("odd", RANDOM)
def test_sigma_choice_does_not_matter(odd):
    g = sp.build_g(odd).g
    for d in range(g.shape[0] + 1):
        for seed in range(2):
            assert sp.sigma_independence_residual(g, d, seed) <= 1e-12


def test_random_stabilizer_is_in_subgroup():
    k = sp.random_stabilizer(5, 2, np.random.default_rng(1))
    assert np.allclose(k @ k.T, np.eye(5))
    assert np.linalg.det(k[:2, :2]) == pytest.approx(1)
    assert np.linalg.det(k[2:, 2:]) == pytest.approx(1)
    assert np.all(k[:2, 2:] == 0)


def test_occupation_binary():
    dist = sp.occupation_probs(BINARY, (0,))
    assert dist.probs == {(0,): pytest.approx(0.5), (1,): pytest.approx(0.5)}


def test_occupation_full_occupancy():
    odd = RANDOM[1]
    dist = sp.occupation_probs(odd, (0, 1, 2))
    assert list(dist.probs) == [(0, 1, 2)]
    assert dist.probs[(0, 1, 2)] == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("odd", RANDOM + [random_admissible(6, 9, OddParams)])
def test_occupation_sums_to_one(odd):
    N = odd.size
    frame = sp.build_g(odd)
    for d in range(N + 1):
        for J in enumerate_subsets(N, d):
            dist = sp.occupation_probs(odd, J, frame=frame)
            assert abs(dist.total() - 1) <= 1e-12
            assert min(dist.probs.values()) >= 0


def test_occupation_size_mismatch():
    with pytest.raises(ValueError):
        sp.occupation_probs(BINARY, (0,), d=2)


def test_sampler_point_mass():
    dist = sp.OccupationDistribution((0,), {(1,): 1.0})
    freq, draws = sp.sample_occupation(dist, 50)
    assert freq == {(1,): 1.0} and set(draws) == {(1,)}


def test_sampler_binary_concentration():
    N = 100_000
    freq, _ = sp.sample_occupation(sp.occupation_probs(BINARY, (0,), seed=7), N)
    for f in freq.values():
        assert abs(f - 0.5) <= 3 * math.sqrt(0.25 / N)


def test_sampler_deterministic():
    dist = sp.occupation_probs(RANDOM[2], (0, 2), seed=11)
    _, a = sp.sample_occupation(dist, 200)
    _, b = sp.sample_occupation(dist, 200)
    _, c = sp.sample_occupation(dist, 200, seed=12)
    assert a == b and a != c


def test_sampler_matches_probabilities():
    dist = sp.occupation_probs(RANDOM[2], (1, 3), seed=5)
    N = 40_000
    freq, _ = sp.sample_occupation(dist, N)
    for I, p in dist.probs.items():
        assert abs(freq[I] - p) <= 4 * math.sqrt(p * (1 - p) / N) + 1e-12


def test_krzonal_degree_zero():
    assert sp.krzonal_check(BINARY, 0, 0) == 0
    assert sp.krzonal_value(0, 0, BINARY) == pytest.approx(1)


def test_krzonal_binary_degree_one():
    for e, et in itertools.product((0b01, 0b10), repeat=2):
        assert sp.krzonal_check(BINARY, e, et) <= 1e-12


@pytest.mark.parametrize("odd", RANDOM)
def test_krzonal_sweep(odd):
    assert sp.krzonal_sweep(odd).value <= 1e-10


@pytest.mark.parametrize("odd", [BINARY] + RANDOM)
def test_krzonal_independent_of_sign_fix(odd):
    for k in range(odd.size):
        assert sp.krzonal_sweep(odd, flip_index=k).value <= 1e-10


def test_amplitude_matches_numpy_minor():
    g = sp.build_g(RANDOM[3]).g
    rows, cols = (0, 2, 5), (1, 3, 4)
    assert sp.amplitude(g, rows, cols) == pytest.approx(np.linalg.det(g[np.ix_(rows, cols)]))
    assert sp.amplitude(g, rows, cols) == pytest.approx(minor(g, rows, cols).real)
