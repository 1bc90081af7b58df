import math

import numpy as np
import pytest

from passivity_lab import counterexamples as ce, lindblad, linalg, states
from passivity_lab.errors import (
    ConcavityViolated,
    DimMismatch,
    InvalidGenerator,
    NegativeTime,
)
from passivity_lab.lindblad import RawLindbladGenerator
from passivity_lab.verifier import random_density


def ladder(d):
    return lindblad.build_generator(d, jumps=[np.sqrt(np.arange(1, d))])


def brute_superoperator(L):
    """Column-by-column image of the matrix units, an oracle for the Kronecker build."""
    d = L.dim
    S = np.zeros((d * d, d * d), complex)
    for k in range(d * d):
        E = np.zeros(d * d, complex)
        E[k] = 1
        S[:, k] = linalg.vec(lindblad.apply(L, linalg.unvec(E, d)))
    return S


class TestBuild:
    def test_ladder_profile(self):
        L = ladder(6)
        np.testing.assert_allclose(L.r_profile, [0, 1, 2, 3, 4, 5, 0])

    def test_convex_profile_rejected(self):
        with pytest.raises(ConcavityViolated) as info:
            lindblad.build_generator(4, jumps=[[1, 0, 1]])
        assert info.value.index == 2
        assert info.value.second_difference == pytest.approx(2.0)

    def test_two_rows_second_differences(self):
        jumps = [[1, 1], [0, 1]]
        r = np.array([0, 1, 2, 0], float)
        second = r[2:] - 2 * r[1:-1] + r[:-2]
        np.testing.assert_allclose(second, [0, -3])
        L = lindblad.build_generator(3, jumps=jumps)
        np.testing.assert_allclose(L.r_profile, r)

    def test_dims(self):
        with pytest.raises(DimMismatch):
            lindblad.build_generator(3, jumps=[[1, 1, 1]])
        with pytest.raises(DimMismatch):
            lindblad.build_generator(3, dephasing=[[1, 1]])
        with pytest.raises(DimMismatch):
            lindblad.build_generator(3, lamb_shift=[0, 1])

    def test_immutable(self):
        L = ladder(3)
        with pytest.raises(ValueError):
            L.jumps[0, 0] = 2
        assert L == ladder(3)
        assert L != ladder(4)

    def test_from_raw(self):
        G = ladder(5)
        assert lindblad.build_generator_from_raw(G.to_raw()) == lindblad.build_generator(
            5, lamb_shift=np.zeros(5), jumps=G.jumps
        )

    def test_from_raw_rejects_two_qubit(self):
        with pytest.raises(InvalidGenerator):
            lindblad.build_generator_from_raw(ce.two_qubit_generator())

    def test_raw_hamiltonian_must_be_hermitian(self):
        with pytest.raises(InvalidGenerator):
            RawLindbladGenerator(2, np.array([[0, 1], [0, 0]]), ())


class TestApply:
    def test_ground_state_is_dark(self):
        L = lindblad.build_generator(4, jumps=[[1, 1.2, 0.9]], lamb_shift=[0.3, -1, 2, 0])
        rho = np.zeros((4, 4))
        rho[0, 0] = 1
        np.testing.assert_allclose(lindblad.apply(L, rho), 0, atol=1e-15)

    def test_two_qubit_identity(self):
        out = lindblad.apply(ce.two_qubit_generator(), np.eye(4) / 4)
        np.testing.assert_allclose(out, np.diag([2, 1, -1, -2]) / 4, atol=1e-15)

    def test_traceless_and_hermitian(self, rng):
        L = lindblad.random_generator(4, rng)
        for seed in range(100):
            out = lindblad.apply(L, random_density(4, seed=seed))
            assert abs(np.trace(out)) < 1e-10
            assert linalg.hermiticity_error(out) < 1e-12

    def test_superoperator_matches_direct(self, rng):
        for d in (2, 3, 4):
            L = lindblad.random_generator(d, rng)
            np.testing.assert_allclose(lindblad.superoperator(L), brute_superoperator(L), atol=1e-13)
        G = ce.two_qubit_generator()
        np.testing.assert_allclose(lindblad.superoperator(G), brute_superoperator(G), atol=1e-13)

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            lindblad.apply(ladder(3), np.eye(2))


class TestIdentityImage:
    def test_ladder(self):
        X, passive = lindblad.identity_image(ladder(6))
        np.testing.assert_allclose(X, np.diag([1, 1, 1, 1, 1, -5]), atol=1e-14)
        assert passive

    def test_two_qubit(self):
        X, passive = lindblad.identity_image(ce.two_qubit_generator())
        np.testing.assert_allclose(X, np.diag([2, 1, -1, -2]), atol=1e-14)
        assert passive

    def test_no_jumps(self):
        L = lindblad.build_generator(3, dephasing=[[1, 2j, 0]], lamb_shift=[1, 2, 3])
        X, passive = lindblad.identity_image(L)
        np.testing.assert_allclose(X, 0, atol=1e-15)
        assert passive

    def test_agrees_with_concavity(self, rng):
        for k in range(200):
            d = int(rng.integers(2, 7))
            if k % 2:
                L = lindblad.random_generator(d, rng)
            else:
                b = rng.exponential(size=(int(rng.integers(1, 3)), d - 1))
                L = lindblad.build_generator(d, jumps=np.sqrt(b), check_concavity=False)
            concave = lindblad.concavity_violation(L.r_profile) is None
            _, passive = lindblad.identity_image(L.to_raw())
            assert passive == concave


class TestLambdas:
    def test_ladder(self):
        np.testing.assert_allclose(lindblad.lambdas(ladder(6)), [1, 2, 3, 4, 5], atol=1e-14)

    def test_two_qubit(self):
        np.testing.assert_allclose(lindblad.lambdas(ce.two_qubit_generator()), [2, 3, 2], atol=1e-14)

    def test_zero_jump(self):
        L = lindblad.build_generator(4, dephasing=[[1, 0, 0, 1]])
        np.testing.assert_allclose(lindblad.lambdas(L), 0)

    def test_telescoping(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 8))
            L = lindblad.random_generator(d, rng)
            lam = lindblad.lambdas(L)
            assert lam.min() >= -1e-12
            np.testing.assert_allclose(lam, L.r_profile[1:d], atol=1e-12)


class TestEvolve:
    def test_zero_time(self, rng):
        L = lindblad.random_generator(3, rng)
        rho = random_density(3, seed=1)
        np.testing.assert_allclose(lindblad.evolve(L, rho, 0.0), rho, atol=1e-15)
        np.testing.assert_array_equal(lindblad.channel_superoperator(L, 0.0), np.eye(9))

    @pytest.mark.parametrize("t", [0.1, 1.0, 4.0])
    def test_two_level_decay(self, t):
        L = lindblad.build_generator(2, jumps=[[1.0]])
        out = lindblad.evolve(L, np.diag([0.0, 1.0]), t)
        np.testing.assert_allclose(np.diag(out).real, [1 - math.exp(-t), math.exp(-t)], atol=1e-14)

    def test_two_qubit_mixed(self):
        out = lindblad.evolve(ce.two_qubit_generator(), np.eye(4) / 4, math.log(2))
        np.testing.assert_allclose(out, np.diag([9 / 16, 1 / 4, 1 / 8, 1 / 16]), atol=1e-14)

    def test_semigroup(self, rng):
        L = lindblad.random_generator(4, rng)
        rho = random_density(4, seed=2)
        a = lindblad.evolve(L, rho, 0.9)
        b = lindblad.evolve(L, lindblad.evolve(L, rho, 0.4), 0.5)
        np.testing.assert_allclose(a, b, atol=1e-8)

    def test_channel_consistency(self, rng):
        L = lindblad.random_generator(3, rng)
        S = lindblad.channel_superoperator(L, 0.8)
        for seed in range(20):
            rho = random_density(3, seed=seed)
            np.testing.assert_allclose(lindblad.apply_channel(S, rho), lindblad.evolve(L, rho, 0.8), atol=1e-10)

    def test_trace_row(self, rng):
        L = lindblad.random_generator(4, rng)
        S = lindblad.channel_superoperator(L, 1.3)
        tr = linalg.vec(np.eye(4))
        np.testing.assert_allclose(tr @ S, tr, atol=1e-10)

    def test_negative_time(self):
        with pytest.raises(NegativeTime):
            lindblad.evolve(ladder(2), np.eye(2) / 2, -0.1)
        with pytest.raises(NegativeTime):
            lindblad.channel_superoperator(ladder(2), -1)

    def test_diagonal_closure_and_positivity(self, rng):
        for _ in range(20):
            d = int(rng.integers(2, 6))
            L = lindblad.random_generator(d, rng)
            diag_in = np.diag(rng.dirichlet(np.ones(d))).astype(complex)
            rho = random_density(d, seed=int(rng.integers(1 << 30)))
            for t in (0.1, 1.0, 3.0):
                out = lindblad.evolve(L, diag_in, t)
                assert np.max(np.abs(out - np.diag(np.diag(out)))) < 1e-10
                assert states.spectrum_of(lindblad.evolve(L, rho, t)).min() >= -1e-9

    def test_passl_direction(self, rng):
        grid = np.round(np.arange(1, 31) * 0.1, 10)
        for _ in range(30):
            d = int(rng.integers(2, 6))
            L = lindblad.random_generator(d, rng)
            assert all(states.is_passive(lindblad.evolve(L, np.eye(d) / d, t)) for t in grid)
            assert lindblad.identity_image(L)[1]


class TestSampler:
    def test_concave_profiles(self, rng):
        for k in range(200):
            d = int(rng.integers(1, 9))
            r = lindblad.concave_profile(d, rng, integer_steps=bool(k % 3 == 0))
            assert r[0] == 0 and r[-1] == 0 and r.min() >= 0
            assert lindblad.concavity_violation(r) is None

    def test_random_generator_reproducible(self):
        a = lindblad.random_generator(5, np.random.default_rng(9))
        b = lindblad.random_generator(5, np.random.default_rng(9))
        assert a == b
