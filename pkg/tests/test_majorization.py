import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from passivity_lab import counterexamples as ce, majorization as mj, states
from passivity_lab.errors import DimMismatch, NotMajorizing, RangeError
from passivity_lab.majorization import Relation


def simplex(seed, d):
    return np.random.default_rng(seed).dirichlet(np.ones(d))


class TestCompare:
    def test_uniform_is_minimal(self):
        v = mj.compare([0.5, 0.5, 0], [1 / 3, 1 / 3, 1 / 3])
        assert v.relation is Relation.MAJORIZES
        np.testing.assert_allclose(v.gaps, [1 / 6, 1 / 3, 0], atol=1e-15)

    def test_equal(self):
        assert mj.compare([0.7, 0.2, 0.1], [0.1, 0.7, 0.2]).relation is Relation.EQUAL

    def test_attenuator_quarter(self):
        t = math.log(4)
        cf = ce.attenuator_closed_forms(t)
        assert cf.s3 == pytest.approx(0.96875, abs=1e-12)
        assert cf.s3_tilde == pytest.approx(1 - 3.625 / 128, abs=1e-12)
        assert cf.p1 == pytest.approx(0.697917, abs=1e-6)
        assert cf.p1_tilde == pytest.approx(0.548014, abs=1e-6)
        res = ce.attenuator_numeric(t)
        assert res.verdict.relation is Relation.INCOMPARABLE
        assert res.verdict.gaps[0] > 0 and res.verdict.gaps[2] < 0

    def test_dim_mismatch(self):
        with pytest.raises(DimMismatch):
            mj.compare([1.0, 0.0], [1.0, 0.0, 0.0])

    def test_tolerance(self):
        p, q = [0.5, 0.5], [0.5 + 1e-11, 0.5 - 1e-11]
        assert mj.compare(p, q).relation is Relation.EQUAL
        assert mj.compare(p, q, tol=1e-12).relation is Relation.MAJORIZED_BY

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 7))
    def test_antisymmetric(self, seed, d):
        p, q = simplex(seed, d), simplex(seed + 1, d)
        fwd, back = mj.compare(p, q), mj.compare(q, p)
        mirror = {
            Relation.MAJORIZES: Relation.MAJORIZED_BY,
            Relation.MAJORIZED_BY: Relation.MAJORIZES,
            Relation.EQUAL: Relation.EQUAL,
            Relation.INCOMPARABLE: Relation.INCOMPARABLE,
        }
        assert back.relation is mirror[fwd.relation]
        np.testing.assert_allclose(back.gaps, -np.array(fwd.gaps), atol=1e-15)
        assert abs(fwd.gaps[-1]) <= 1e-10

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 8))
    def test_everything_majorizes_uniform(self, seed, d):
        assert mj.compare(simplex(seed, d), np.full(d, 1 / d)).holds()

    def test_transitivity(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 8))
            p = rng.dirichlet(np.ones(d))
            q = mj.random_majorized(p, rng)
            r = mj.random_majorized(q, rng)
            assert mj.compare(p, q).holds() and mj.compare(q, r).holds()
            assert mj.compare(p, r).holds()


class TestWitness:
    def test_full_swap(self):
        chain = mj.t_transform_witness([1, 0], [0.5, 0.5])
        assert chain.steps == (((0, 1), 0.5),)

    def test_three_level(self):
        p, q = [0.5, 0.3, 0.2], [0.4, 0.35, 0.25]
        chain = mj.t_transform_witness(p, q)
        assert len(chain) <= 2
        np.testing.assert_allclose(mj.apply_t_transforms(p, chain), q, atol=1e-12)

    def test_identity_chain(self):
        assert len(mj.t_transform_witness([0.7, 0.2, 0.1], [0.7, 0.2, 0.1])) == 0

    def test_not_majorizing(self):
        with pytest.raises(NotMajorizing):
            mj.t_transform_witness([1 / 3] * 3, [1, 0, 0])

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 9), st.integers(1, 12))
    def test_round_trip(self, seed, d, n_steps):
        rng = np.random.default_rng(seed)
        p = rng.dirichlet(np.ones(d) * rng.uniform(0.2, 2))
        q = mj.random_majorized(p, rng, n_steps)
        chain = mj.t_transform_witness(p, q)
        assert len(chain) <= d - 1
        assert all(0 <= lam <= 1 for _, lam in chain)
        np.testing.assert_allclose(mj.apply_t_transforms(states.as_spectrum(p), chain), q, atol=1e-9)

    def test_round_trip_with_zeros(self):
        p = [0.6, 0.4, 0.0, 0.0]
        q = [0.3, 0.3, 0.2, 0.2]
        chain = mj.t_transform_witness(p, q)
        np.testing.assert_allclose(mj.apply_t_transforms(p, chain), q, atol=1e-12)


class TestApply:
    def test_empty_chain(self):
        np.testing.assert_array_equal(mj.apply_t_transforms([0.6, 0.4], mj.TTransformChain()), [0.6, 0.4])

    def test_single_step(self):
        chain = mj.TTransformChain((((0, 1), 0.5),))
        np.testing.assert_allclose(mj.apply_t_transforms([1, 0], chain), [0.5, 0.5])

    def test_output_sorted(self):
        chain = mj.TTransformChain((((0, 2), 0.0),))
        np.testing.assert_array_equal(mj.apply_t_transforms([0.5, 0.3, 0.2], chain), [0.5, 0.3, 0.2])

    def test_range(self):
        with pytest.raises(RangeError):
            mj.apply_t_transforms([0.5, 0.5], mj.TTransformChain((((0, 2), 0.5),)))
        with pytest.raises(RangeError):
            mj.apply_t_transforms([0.5, 0.5], mj.TTransformChain((((0, 1), 1.5),)))

    def test_each_step_is_doubly_stochastic(self, rng):
        for _ in range(50):
            d = int(rng.integers(2, 7))
            x = rng.dirichlet(np.ones(d))
            for _ in range(d):
                i, j = rng.choice(d, 2, replace=False)
                chain = mj.TTransformChain((((int(i), int(j)), float(rng.uniform())),))
                y = mj.apply_t_transforms(x, chain)
                assert mj.compare(x, y).holds()
                assert states.entropy_of_spectrum(y) >= states.entropy_of_spectrum(x) - 1e-12
                x = y
