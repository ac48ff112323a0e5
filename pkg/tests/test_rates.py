import dataclasses

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ipiag import (
    ProxSpec,
    RateInputs,
    SolverParams,
    ToySpec,
    TwoTermRecurrence,
    certificate_for,
    ipiag_certificate,
    lyapunov_value,
    make_toy,
    momentum_certificate,
    nesterov_certificate,
    one_term_condition,
    run,
    schedule_synchronous,
    schedule_uniform_single,
    verify_descent,
    verify_linear_bound,
    verify_one_term,
    verify_two_term,
)


UNIT = RateInputs(total_lipschitz=1.0, growth_constant=1.0, delay=0)


class TestInputs:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(total_lipschitz=0.0, growth_constant=1.0, delay=0),
            dict(total_lipschitz=1.0, growth_constant=-1.0, delay=0),
            dict(total_lipschitz=1.0, growth_constant=1.0, delay=-1),
            dict(total_lipschitz=1.0, growth_constant=1.0, delay=0, momentum_fraction=1.0),
        ],
    )
    def test_rejects_bad_fields(self, kwargs):
        with pytest.raises(ValueError):
            RateInputs(**kwargs)


class TestStepSizeThresholds:
    def test_double_inertia_threshold_unit_case(self):
        cert = ipiag_certificate(UNIT)
        # W = 1/4, threshold (5/4)^(1/3) - 1
        assert cert.alpha_max == pytest.approx(0.07721734501594178, rel=1e-12)
        assert cert.eta1 == 0.0
        assert cert.eta2_max == pytest.approx(0.0, abs=1e-15)
        assert cert.rho == pytest.approx(1.0 / (1.0 + cert.alpha), rel=1e-12)
        assert cert.rho < 1.0
        assert cert.admissible

    def test_tight_exponent_agrees_at_zero_delay(self):
        stated = ipiag_certificate(UNIT, tight=False)
        tight = ipiag_certificate(UNIT, tight=True)
        assert tight.alpha_max == stated.alpha_max

    def test_tight_exponent_is_larger_with_delay(self):
        inputs = RateInputs(total_lipschitz=3.0, growth_constant=1.0, delay=3)
        stated = ipiag_certificate(inputs, tight=False)
        tight = ipiag_certificate(inputs, tight=True)
        assert tight.alpha_max > stated.alpha_max

    def test_post_inertia_threshold_unit_case(self):
        cert = nesterov_certificate(UNIT)
        # W = 1/4, threshold sqrt(5/4) - 1
        assert cert.alpha_max == pytest.approx(0.11803398874989485, rel=1e-12)
        assert cert.alpha < cert.alpha_max  # strict by default
        assert cert.admissible

    def test_pre_inertia_threshold_unit_case(self):
        cert = momentum_certificate(UNIT)
        assert cert.alpha_max == pytest.approx(1.0, rel=1e-12)
        assert cert.rho == pytest.approx(0.5, rel=1e-12)
        assert cert.simplified_factor == pytest.approx(0.5, rel=1e-12)
        assert cert.eta2 == 0.0

    def test_double_inertia_rejects_large_momentum(self):
        with pytest.raises(ValueError):
            ipiag_certificate(
                RateInputs(total_lipschitz=1.0, growth_constant=1.0, delay=0, momentum_fraction=0.5)
            )

    def test_pre_inertia_accepts_large_momentum(self):
        inputs = RateInputs(total_lipschitz=1.0, growth_constant=1.0, delay=0, momentum_fraction=0.9)
        cert = momentum_certificate(inputs)
        assert cert.admissible
        assert cert.rho < 1.0


class TestAdmissibility:
    def test_oversized_step_is_flagged(self):
        cert = ipiag_certificate(UNIT, alpha=2.0 * ipiag_certificate(UNIT).alpha_max)
        assert not cert.admissible

    def test_oversized_post_inertia_is_flagged(self):
        base = ipiag_certificate(UNIT)
        cert = ipiag_certificate(UNIT, alpha=base.alpha_max / 2.0, eta2=0.9)
        assert not cert.admissible

    def test_threshold_step_is_inadmissible_for_post_inertia_variant(self):
        base = nesterov_certificate(UNIT)
        at_edge = nesterov_certificate(UNIT, alpha=base.alpha_max)
        assert not at_edge.admissible

    @given(
        l=st.floats(0.5, 50.0),
        beta=st.floats(0.1, 5.0),
        tau=st.integers(0, 6),
        c1=st.floats(0.0, 0.49),
    )
    def test_default_certificates_contract(self, l, beta, tau, c1):
        inputs = RateInputs(total_lipschitz=l, growth_constant=beta, delay=tau, momentum_fraction=c1)
        for variant in ("t1", "t1tight", "cor1", "cor2"):
            cert = certificate_for(variant, inputs)
            assert cert.admissible, variant
            assert cert.rho < 1.0
            assert cert.eta1 + cert.eta2 < cert.alpha * beta + 1e-15

    def test_dispatch_rejects_unknown_tag(self):
        with pytest.raises(ValueError):
            certificate_for("sgd", UNIT)


def test_json_document_fields():
    cert = certificate_for("cor1", RateInputs(2.0, 1.0, 1, 0.3))
    doc = cert.to_json_dict()
    assert doc["variant"] == "cor1"
    assert doc["L"] == 2.0 and doc["beta"] == 1.0
    assert doc["tau"] == 1 and doc["C1"] == 0.3
    assert set(doc) >= {"alpha0", "alpha", "eta1", "eta2_max", "eta2", "rho"}
    assert "simplified_factor" in doc
    plain = certificate_for("t1", UNIT).to_json_dict()
    assert "simplified_factor" not in plain


class TestRecurrenceAlgebra:
    def test_root_and_split_weights(self):
        rec = TwoTermRecurrence(A=0.3, B=0.4, b1=1.0, b2=0.2, c=0.01, k0=2)
        assert rec.root == pytest.approx(0.8, rel=1e-15)
        wa, wb = rec.split_weights()
        assert wa == pytest.approx(0.375, rel=1e-15)
        assert wb == pytest.approx(0.625, rel=1e-15)
        assert wa + wb == pytest.approx(1.0, rel=1e-15)

    def test_window_condition_values(self):
        rec = TwoTermRecurrence(A=0.3, B=0.4, b1=1.0, b2=0.2, c=0.01, k0=2)
        lhs, rhs, ok = rec.condition()
        assert lhs == pytest.approx(0.01 * (1 + 1.25 + 1.5625), rel=1e-14)
        assert rhs == pytest.approx(0.75, rel=1e-15)
        assert ok

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(A=0.0, B=0.0, b1=1.0, b2=0.0, c=0.0, k0=0),
            dict(A=0.6, B=0.4, b1=1.0, b2=0.0, c=0.0, k0=0),
            dict(A=-0.1, B=0.2, b1=1.0, b2=0.0, c=0.0, k0=0),
            dict(A=0.2, B=0.2, b1=0.0, b2=0.0, c=0.0, k0=0),
            dict(A=0.2, B=0.2, b1=1.0, b2=0.0, c=0.0, k0=-1),
        ],
    )
    def test_rejects_bad_coefficients(self, kwargs):
        with pytest.raises(ValueError):
            TwoTermRecurrence(**kwargs)

    def test_one_term_condition_values(self):
        lhs, rhs, ok = one_term_condition(a=0.5, b=0.8, c=0.1, k0=1)
        assert lhs == pytest.approx(0.3, rel=1e-15)
        assert rhs == 0.8
        assert ok

    def test_one_term_condition_rejects_bad_rate(self):
        with pytest.raises(ValueError):
            one_term_condition(a=1.0, b=1.0, c=0.0, k0=0)


class TestVerifiers:
    def test_one_term_accepts_a_clean_geometric_sequence(self):
        V = 0.9 ** np.arange(30)
        w = np.zeros(29)
        rep = verify_one_term(V, w, a=0.9, b=0.5, c=0.0, k0=0)
        assert rep.ok
        assert rep.condition_ok and rep.data_consistent and rep.bound_ok
        assert rep.bound_first_violation is None

    def test_one_term_flags_a_broken_recurrence(self):
        V = np.array([1.0, 2.0, 4.0])
        w = np.zeros(2)
        rep = verify_one_term(V, w, a=0.5, b=0.5, c=0.0, k0=0)
        assert not rep.data_consistent
        assert not rep.bound_ok
        assert rep.bound_first_violation == 1
        assert rep.data_max_violation > 1.0

    def test_two_term_accepts_saturated_data(self):
        rec = TwoTermRecurrence(A=0.4, B=0.2, b1=1.0, b2=0.1, c=0.005, k0=3)
        n = 40
        V = np.empty(n)
        w = np.full(n, 0.01)
        w[0] = 0.0
        V[0], V[1] = 2.0, 1.5
        for k in range(1, n - 1):
            lo = max(0, k - rec.k0)
            window = w[lo : k + 1].sum()
            V[k + 1] = (
                rec.A * V[k]
                + rec.B * V[k - 1]
                - rec.b1 * w[k]
                + rec.b2 * w[k - 1]
                + rec.c * window
            )
        rep = verify_two_term(V, w, rec)
        assert rep.ok
        assert rep.data_max_violation <= 1e-12

    def test_two_term_flags_inflated_data(self):
        rec = TwoTermRecurrence(A=0.4, B=0.2, b1=1.0, b2=0.0, c=0.0, k0=0)
        V = np.array([1.0, 1.0, 1.0, 1.0])
        w = np.zeros(3)
        rep = verify_two_term(V, w, rec)
        assert not rep.data_consistent
        assert not rep.bound_ok
        assert rep.bound_first_violation is not None

    def test_two_term_needs_enough_data(self):
        rec = TwoTermRecurrence(A=0.4, B=0.2, b1=1.0, b2=0.0, c=0.0, k0=0)
        with pytest.raises(ValueError):
            verify_two_term(np.array([1.0, 0.5]), np.array([0.0]), rec)

    def test_degenerate_second_coefficient_matches_one_term(self):
        rec = TwoTermRecurrence(A=0.7, B=0.0, b1=0.4, b2=0.0, c=0.01, k0=2)
        n = 25
        V = np.empty(n)
        w = np.full(n, 0.002)
        w[0] = 0.0
        V[0], V[1] = 1.0, 0.7
        for k in range(1, n - 1):
            lo = max(0, k - rec.k0)
            V[k + 1] = rec.A * V[k] - rec.b1 * w[k] + rec.c * w[lo : k + 1].sum()
        two = verify_two_term(V, w, rec)
        one = verify_one_term(V, w, a=rec.A, b=rec.b1, c=rec.c, k0=rec.k0)
        assert two.condition_ok == one.condition_ok
        assert two.data_consistent and one.data_consistent


def test_lyapunov_value_formula():
    psi = lyapunov_value(np.array([3.0]), np.array([4.0]), phi_star=1.0, alpha=0.5, eta1=0.2)
    assert psi[0] == pytest.approx(2.0 + 0.8 * 4.0, rel=1e-15)


class TestLinearBound:
    def _toy_trace(self, K=400):
        prob = make_toy(ToySpec(num_components=12))
        inputs = RateInputs(
            total_lipschitz=prob.total_lipschitz,
            growth_constant=prob.growth_constant,
            delay=2,
        )
        cert = ipiag_certificate(inputs)
        params = SolverParams(alpha=cert.alpha, eta1=cert.eta1, eta2=cert.eta2, max_iters=K)
        trace = run(prob, params, schedule_uniform_single(3, 2, K, seed=9), np.zeros(12))
        return trace, cert

    def test_certified_run_stays_under_the_envelope(self):
        trace, cert = self._toy_trace()
        rep = verify_linear_bound(trace, cert)
        assert rep.ok
        assert rep.psi_first_violation is None
        assert rep.phi_first_violation is None
        assert rep.dist_first_violation is None
        assert 0.0 < rep.psi_max_ratio <= 1.0 + 1e-8

    def test_understated_rate_is_caught(self):
        trace, cert = self._toy_trace()
        lying = dataclasses.replace(cert, rho=cert.rho * 0.2)
        rep = verify_linear_bound(trace, lying)
        assert not rep.ok
        assert rep.psi_first_violation is not None

    def test_needs_a_reference_point(self):
        prob = make_toy(ToySpec(num_components=6))
        bare = dataclasses.replace(prob, known_optimum=None)
        K = 20
        trace = run(
            bare,
            SolverParams(alpha=1e-3, max_iters=K),
            schedule_synchronous(2, K),
            np.zeros(6),
        )
        cert = ipiag_certificate(RateInputs(bare.total_lipschitz, 2.0, 0))
        with pytest.raises(ValueError):
            verify_linear_bound(trace, cert)


class TestDescent:
    def test_residuals_stay_nonnegative_at_the_optimum(self):
        prob = make_toy(ToySpec(num_components=12))
        K = 200
        tau = 2
        cert = ipiag_certificate(RateInputs(prob.total_lipschitz, prob.growth_constant, tau))
        params = SolverParams(alpha=cert.alpha, eta1=cert.eta1, eta2=cert.eta2, max_iters=K)
        trace = run(prob, params, schedule_uniform_single(3, tau, K, seed=11), np.zeros(12))
        x_star, _ = prob.known_optimum
        rep = verify_descent(prob, trace, tau, x_star)
        assert rep.ok
        assert rep.min_residual >= -rep.tolerance
        assert len(rep.residuals) == K

    def test_requires_stored_iterates(self):
        prob = make_toy(ToySpec(num_components=6))
        trace = run(
            prob,
            SolverParams(alpha=1e-3, max_iters=10),
            schedule_synchronous(2, 10),
            np.zeros(6),
            store_iterates=False,
        )
        with pytest.raises(ValueError):
            verify_descent(prob, trace, 0, np.zeros(6))
