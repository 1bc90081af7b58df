import math

import numpy as np
import pytest

from passivity_lab import counterexamples as ce, lindblad, states
from passivity_lab.counterexamples import BlochState, FiniteTempParams
from passivity_lab.errors import (
    ConcavityViolated,
    CutoffTooSmall,
    InvalidGenerator,
    InvalidState,
    NegativeTime,
)
from passivity_lab.majorization import Relation


class TestAttenuator:
    def test_closed_forms_at_zero(self):
        cf = ce.attenuator_closed_forms(0.0)
        assert cf == pytest.approx((0.5, 0.5, 1 / 6, 1 / 6))

    def test_closed_forms_cross_at_t0(self):
        cf = ce.attenuator_closed_forms(ce.T0_ATTENUATOR)
        assert abs(cf.s3 - cf.s3_tilde) < 1e-12
        assert ce.attenuator_crossing_time(numeric=False, xtol=1e-13) == pytest.approx(ce.T0_ATTENUATOR, abs=1e-12)

    def test_negative_time(self):
        with pytest.raises(NegativeTime):
            ce.attenuator_closed_forms(-1)

    def test_cutoff(self):
        with pytest.raises(CutoffTooSmall):
            ce.attenuator_inputs(4)

    def test_single_mode_generator(self):
        G = ce.attenuator_generator(5)
        np.testing.assert_allclose(G.jumps[0], np.sqrt(np.arange(1, 6)))
        np.testing.assert_allclose(np.diag(G.lindblad_operators()[0], k=1), np.diag(ce.ladder_operator(5), k=1))
        np.testing.assert_allclose(lindblad.lambdas(G), [1, 2, 3, 4, 5], atol=1e-14)

    def test_two_mode_is_lift(self):
        G = ce.two_mode_attenuator(5)
        a = ce.ladder_operator(5)
        np.testing.assert_array_equal(G.lindblad_ops[0], np.kron(a, np.eye(6)))
        np.testing.assert_array_equal(G.lindblad_ops[1], np.kron(np.eye(6), a))

    def test_two_mode_product_channel(self):
        # the two-mode channel factorizes into the single-mode one on product inputs
        t = 0.4
        G1 = ce.attenuator_generator(5)
        r1 = np.diag([0.5, 0.3, 0.2, 0, 0, 0]).astype(complex)
        r2 = np.diag([0.1, 0.1, 0.2, 0.2, 0.2, 0.2]).astype(complex)
        two = lindblad.evolve(ce.two_mode_attenuator(5), np.kron(r1, r2), t)
        one = np.kron(lindblad.evolve(G1, r1, t), lindblad.evolve(G1, r2, t))
        np.testing.assert_allclose(two, one, atol=1e-12)

    def test_inputs(self):
        rho, sigma = ce.attenuator_inputs(5)
        assert np.count_nonzero(np.diag(rho)) == 6 and np.count_nonzero(np.diag(sigma)) == 6
        # sigma is supported on |0, 0..5>
        np.testing.assert_allclose(np.diag(sigma)[:6].real, 1 / 6)

    @pytest.mark.parametrize("t", [0.25, 1.0])
    def test_numeric_matches_closed(self, t):
        res = ce.attenuator_numeric(t)
        assert res.max_deviation <= 1e-8

    def test_before_crossing(self):
        res = ce.attenuator_numeric(0.5)
        assert res.numeric.s3 > res.numeric.s3_tilde
        assert res.numeric.p1 > res.numeric.p1_tilde

    def test_after_crossing(self):
        res = ce.attenuator_numeric(1.5)
        assert res.verdict.relation is Relation.INCOMPARABLE
        assert res.numeric.s3 < res.numeric.s3_tilde

    def test_series_uniform_grid(self):
        rows = ce.attenuator_series(np.arange(6) * 0.2)
        for r in rows:
            for k in ("s3", "s3_tilde", "p1", "p1_tilde"):
                assert abs(r[k] - r[f"{k}_closed"]) <= 1e-8


class TestTwoQubit:
    def test_closed_forms_ln2(self):
        cf = ce.two_qubit_closed_forms(math.log(2))
        np.testing.assert_allclose(cf["rho0"], [9 / 16, 1 / 4, 1 / 8, 1 / 16], atol=1e-15)
        np.testing.assert_allclose(cf["rho1"], [2 / 3, 1 / 6, 1 / 6, 0], atol=1e-15)
        np.testing.assert_allclose(cf["rho2"], [7 / 12, 1 / 3, 0, 1 / 12], atol=1e-15)

    def test_closed_forms_zero(self):
        cf = ce.two_qubit_closed_forms(0.0, "degenerate")
        np.testing.assert_allclose(cf["rho1"], [1 / 3, 1 / 3, 1 / 3, 0])
        np.testing.assert_allclose(cf["rho2"], [1 / 3, 1 / 3, 0, 1 / 3])

    @pytest.mark.parametrize("t", [0.1, 0.25, 0.5, 1.0, 2.0, 3.0])
    def test_numeric_matches_closed(self, t):
        num = ce.two_qubit_populations(t)
        cf = ce.two_qubit_closed_forms(t)
        for k in cf:
            np.testing.assert_allclose(num[k], cf[k], atol=1e-9)

    def test_verdict_ln2(self):
        v = ce.two_qubit_verdict(math.log(2))
        assert v.relation is Relation.INCOMPARABLE
        assert v.gaps[0] == pytest.approx(2 / 3 - 7 / 12)
        assert v.gaps[1] == pytest.approx(5 / 6 - 11 / 12)

    @pytest.mark.parametrize("variant", ce.TWO_QUBIT_VARIANTS)
    def test_verdict_variants(self, variant):
        assert ce.two_qubit_verdict(0.1, variant).relation is Relation.INCOMPARABLE
        assert ce.two_qubit_verdict(0.0, variant).relation is Relation.EQUAL

    def test_variants_share_populations(self):
        for t in (0.3, 1.7):
            a = ce.two_qubit_closed_forms(t, "multijump")
            b = ce.two_qubit_closed_forms(t, "degenerate")
            for k in a:
                np.testing.assert_array_equal(a[k], b[k])

    def test_rho1_stays_passive(self):
        for t in (0.1, 0.25, 0.5, 1.0, 2.0, 3.0):
            out = ce.two_qubit_evolved(t)
            assert states.is_passive(out["rho0"]) and states.is_passive(out["rho1"])

    def test_rejected_by_structured_validation(self):
        with pytest.raises(InvalidGenerator):
            lindblad.build_generator_from_raw(ce.two_qubit_generator())

    def test_multijump_energy_order(self):
        # with E2 < E1 the basis |00>,|01>,|10>,|11> is energy-ordered and L2's
        # sqrt2 |01><11| jumps two levels
        H = ce.two_qubit_hamiltonian("multijump")
        assert list(H.energies) == sorted(H.energies)
        with pytest.raises(ValueError):
            ce.two_qubit_hamiltonian("multijump", E1=0.5, E2=1.0)

    def test_degenerate_profile_not_concave(self):
        # in the degenerate variant the single-jump reading of L2 alone already
        # fails the concavity test: r = (0, 1, 0, 2, 0)
        with pytest.raises(ConcavityViolated):
            lindblad.build_generator(4, jumps=[[1, 0, math.sqrt(2)]])


class TestFiniteTemperature:
    params = FiniteTempParams(gamma0=1.0, nbar=0.5)

    def test_params(self):
        p = self.params
        assert p.gamma == pytest.approx(2.0)
        assert p.z_inf == pytest.approx(-0.5)
        assert -math.tanh(p.beta * p.E0 / 2) == pytest.approx(p.z_inf)
        with pytest.raises(ValueError):
            FiniteTempParams(nbar=0)

    def test_bloch_ball(self):
        with pytest.raises(InvalidState):
            BlochState(1, 1, 0)

    def test_density_round_trip(self):
        b = BlochState(0.3, -0.2, 0.5)
        back = BlochState.from_density(b.density())
        np.testing.assert_allclose(back.as_array(), b.as_array(), atol=1e-15)
        assert b.purity == pytest.approx(np.trace(b.density() @ b.density()).real)

    def test_ground_state_convention(self):
        # z = -1 is the ground state |0>
        np.testing.assert_allclose(BlochState(0, 0, -1).density(), np.diag([1, 0]), atol=1e-15)

    def test_evolve_zero_time(self):
        b = BlochState(0.1, 0.2, 0.3)
        np.testing.assert_allclose(ce.bloch_evolve(self.params, b, 0.0).as_array(), b.as_array(), atol=1e-15)

    def test_asymptote(self):
        # populations relax at gamma, coherences at gamma / 2: at gamma t = 30 the
        # z component sits within e^-30 of z_inf, x and y only within e^-15
        b = ce.bloch_evolve(self.params, BlochState(0.6, 0.0, 0.8), 30 / self.params.gamma)
        assert abs(b.z - self.params.z_inf) < 1e-10
        assert math.hypot(b.x, b.y) < 0.6 * math.exp(-15) * (1 + 1e-12)

    def test_half_life_point(self):
        b0 = BlochState(math.sqrt(0.75), 0, -0.5)
        b = ce.bloch_evolve(self.params, b0, math.log(2) / self.params.gamma)
        assert b.x == pytest.approx(math.sqrt(0.75) / math.sqrt(2))
        assert b.z == pytest.approx(-0.5)

    @pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 3.0])
    def test_numeric_matches_closed(self, rng, t):
        G = ce.qubit_generator(self.params)
        for _ in range(10):
            b0 = ce.random_bloch(rng)
            num = BlochState.from_density(lindblad.evolve(G, b0.density(), t))
            np.testing.assert_allclose(num.as_array(), ce.bloch_evolve(self.params, b0, t).as_array(), atol=1e-9)
            assert ce.purity_closed_form(self.params, b0, t) == pytest.approx(
                ce.bloch_evolve(self.params, b0, t).purity, abs=1e-12
            )

    def test_optimal_state(self):
        b, purity = ce.optimal_coherent_state(self.params)
        assert b.x == pytest.approx(math.sqrt(0.75)) and b.y == 0 and b.z == pytest.approx(-0.5)
        np.testing.assert_allclose(np.abs(ce.coherent_state_vector(self.params)), [math.sqrt(0.75), 0.5])
        psi = ce.coherent_state_vector(self.params)
        np.testing.assert_allclose(states.pure_state(psi), b.density(), atol=1e-15)
        assert purity(0.0) == pytest.approx(1.0)
        for t in (0.2, 1.0, 5.0):
            assert purity(t) == pytest.approx((1.25 + 0.75 * math.exp(-2 * t)) / 2, abs=1e-14)

    def test_low_temperature_limit(self):
        b, _ = ce.optimal_coherent_state(FiniteTempParams(nbar=1e-9))
        np.testing.assert_allclose(b.as_array(), [0, 0, -1], atol=1e-4)

    def test_purity_dominance(self):
        rows = ce.finite_temp_series(self.params, [0.0, 0.1, 0.5, 1.0, 3.0], n_random=200, seed=1)
        for r in rows:
            assert r["purity_optimal"] >= r["purity_best_random"] - 1e-10
