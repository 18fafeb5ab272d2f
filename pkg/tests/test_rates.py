import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypolift.errors import InvalidParameter, NonUnimodalWarning
from hypolift.rates import (
    ALDConfig,
    RateInputs,
    ald_constants,
    ald_optimal_params,
    ald_rate_bound,
    ald_rate_bound_rederived,
    ald_sweep,
    ald_theorem_rate,
    langevin_remark_constants,
    minimize_over_T,
    theorem_rate,
)
from hypolift.spectral import decay_rate_upper_bound


def bound_oracle(P_q, d, eps, gamma, M, L):
    # written out independently of the module
    e2 = eps * eps
    return 2 * gamma / (61388 + (1 / P_q + e2 / (2 * d)) * (378 * gamma**2 + 6751 * M + 9891 * (1 / e2 + L)))


class TestTheoremRate:
    def test_zero_constants(self):
        lam, C = theorem_rate(RateInputs(1.0, 1.0, 0.0, 0.0, 1.0))
        assert lam == 2.0 and C == pytest.approx(np.e**2)

    def test_langevin_remark(self):
        C0T, C1T = langevin_remark_constants(T=1.0, P_x=1.0)
        assert (C0T, C1T) == (2.0, 2.0)
        lam, _ = theorem_rate(RateInputs(1.0, 1.0, C0T, C1T, 1.0))
        assert lam == pytest.approx(2 / 17)

    def test_conventions(self):
        inp = RateInputs(1.0, 1.0, 1.0, 1.0, 2.0)
        lam, C = theorem_rate(inp)
        lam2, C2 = theorem_rate(inp, convention="norm")
        assert lam == lam2 and C2 == pytest.approx(np.sqrt(C))
        with pytest.raises(InvalidParameter):
            theorem_rate(inp, convention="other")

    def test_validation(self):
        with pytest.raises(InvalidParameter):
            RateInputs(0.0, 1.0, 0.0, 0.0, 1.0)
        with pytest.raises(InvalidParameter):
            RateInputs(1.0, 1.0, -1.0, 0.0, 1.0)

    @settings(max_examples=100, deadline=None)
    @given(P_v=st.floats(0.01, 100), R=st.floats(0.01, 100), c0=st.floats(0, 50), c1=st.floats(0, 50), dc=st.floats(1e-3, 10))
    def test_monotone_in_constants(self, P_v, R, c0, c1, dc):
        lam = theorem_rate(RateInputs(P_v, R, c0, c1, 1.0))[0]
        assert theorem_rate(RateInputs(P_v, R, c0 + dc, c1, 1.0))[0] < lam
        assert theorem_rate(RateInputs(P_v, R, c0, c1 + dc, 1.0))[0] < lam

    @settings(max_examples=50, deadline=None)
    @given(P_v=st.floats(0.01, 100), dp=st.floats(1e-3, 10))
    def test_increasing_in_P_v_without_constants(self, P_v, dp):
        assert theorem_rate(RateInputs(P_v + dp, 1.0, 0, 0, 1.0))[0] > theorem_rate(RateInputs(P_v, 1.0, 0, 0, 1.0))[0]

    def test_upper_bound_consistency(self):
        lam, C = theorem_rate(RateInputs(1.0, 1.0, 2.0, 2.0, 1.0))
        assert decay_rate_upper_bound(C, 1.0) >= lam


class TestMinimizeOverT:
    def test_langevin_remark_objective(self):
        C0 = lambda T: T + 1.0
        C1 = lambda T: 1.0 + 1.0 / T
        T_star, lam = minimize_over_T(C0, C1, 1.0, 1.0)
        assert T_star == pytest.approx(1.0, rel=1e-6)
        assert lam == pytest.approx(2 / 17, rel=1e-10)

    def test_flat_objective_returns_midpoint(self):
        T_star, lam = minimize_over_T(lambda T: 1.0, lambda T: 2.0, 1.0, 1.0, T_range=(1.0, 3.0))
        assert T_star == 2.0
        assert lam == pytest.approx(2 / 10)

    def test_multimodal_warns(self):
        obj = lambda T: 2 + np.cos(4 * np.log(T))
        with pytest.warns(NonUnimodalWarning):
            minimize_over_T(obj, lambda T: 0.0, 1.0, 1.0)

    def test_ald_with_pinned_window(self):
        cfg = ALDConfig(P_q=1, d=1, eps=1, gamma=1, M=0, L=1)
        T = cfg.window()
        c = ald_constants(cfg)
        T_star, lam = minimize_over_T(lambda _: np.sqrt(c.C0T_sq), lambda _: np.sqrt(c.C1T_sq), 1.0, 1.0, T_range=(T, T * (1 + 1e-9)))
        assert lam == pytest.approx(ald_theorem_rate(cfg), rel=1e-12)
        assert lam >= ald_rate_bound_rederived(cfg)


class TestALDConstants:
    def test_unit_example(self):
        c = ald_constants(ALDConfig(P_q=1, d=1, eps=1, gamma=1, M=0, L=1, T=np.pi))
        c0 = 2 * np.pi**2 + 43
        c1 = 290 + 991 / np.pi**2
        assert c.P_x == 1.0
        assert c.c0 == pytest.approx(c0, rel=1e-14) and c.c0 == pytest.approx(62.739, abs=1e-3)
        assert c.c1 == pytest.approx(c1, rel=1e-14) and c.c1 == pytest.approx(390.41, abs=1e-2)
        assert c.C0T_sq == pytest.approx(2 * c0)
        assert c.C1T_sq == pytest.approx(314 * (c1 + 2 * c0))
        assert c.C1T_sq == pytest.approx(161985, rel=1e-3)
        assert c.c0 <= 63 and c.c1 <= 391

    def test_second_example(self):
        c = ald_constants(ALDConfig(P_q=2, d=3, eps=2, gamma=1, M=1, L=1, T=np.pi))
        P_x = 1.5
        T2 = np.pi**2
        c0 = 2 * T2 + 43 / P_x
        c1 = 290 + 991 / T2 / P_x + 43 * max(1 / P_x, T2 / np.pi**2) * 1
        assert c.P_x == P_x
        np.testing.assert_allclose([c.c0, c.c1, c.C0T_sq, c.C1T_sq], [c0, c1, 2 * c0, 314 * (c1 + (0.25 + 1) * c0)], rtol=1e-14)

    def test_large_window_limit(self):
        c = ald_constants(ALDConfig(P_q=1, eps=1, M=0, T=1e6))
        assert c.c1 == pytest.approx(290, abs=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(P_q=st.floats(1e-3, 1e3), d=st.integers(1, 1000), eps=st.floats(1e-2, 1e2), M=st.floats(0, 1e3))
    def test_printed_bounds(self, P_q, d, eps, M):
        c = ald_constants(ALDConfig(P_q=P_q, d=d, eps=eps, M=M))
        assert c.c0 <= 63 / c.P_x
        assert c.c1 <= 391 + 43 * M / c.P_x

    def test_default_window(self):
        assert ALDConfig(P_q=4.0, eps=0.1).window() == pytest.approx(np.pi / 2)
        assert ALDConfig(P_q=4.0, eps=1.0).window() == pytest.approx(np.pi / np.sqrt(2))

    def test_validation(self):
        with pytest.raises(InvalidParameter):
            ALDConfig(M=-1)
        with pytest.raises(InvalidParameter):
            ALDConfig(eps=0)


class TestALDBound:
    def test_optimal_point(self):
        cfg = ALDConfig(P_q=1, d=1, eps=3 ** -0.25, gamma=np.sqrt(2), M=0, L=1)
        expected = 2 * np.sqrt(2) / (61388 + (1 + 1 / (2 * np.sqrt(3))) * (756 + 9891 * (np.sqrt(3) + 1)))
        assert ald_rate_bound(cfg) == pytest.approx(expected, rel=1e-12)
        assert ald_rate_bound(cfg) == pytest.approx(2.9e-5, rel=0.01)

    @settings(max_examples=100, deadline=None)
    @given(P_q=st.floats(0.01, 100), d=st.integers(1, 100), eps=st.floats(0.01, 100), g=st.floats(0.01, 100), M=st.floats(0, 100), L=st.floats(0.01, 100))
    def test_matches_oracle(self, P_q, d, eps, g, M, L):
        assert ald_rate_bound(ALDConfig(P_q, d, eps, g, M, L)) == pytest.approx(bound_oracle(P_q, d, eps, g, M, L), rel=1e-12)

    def test_vanishes_with_friction(self):
        assert ald_rate_bound(ALDConfig(gamma=1e-12)) < 1e-15

    @settings(max_examples=100, deadline=None)
    @given(P_q=st.floats(0.1, 10), d=st.integers(1, 100), eps=st.floats(0.05, 20), g=st.floats(0.05, 20), M=st.floats(0, 10), L=st.floats(0.1, 10))
    def test_rederived_bound_is_below_theorem_rate(self, P_q, d, eps, g, M, L):
        cfg = ALDConfig(P_q, d, eps, g, M, L)
        assert ald_theorem_rate(cfg) >= ald_rate_bound_rederived(cfg)

    def test_integer_constant_bound_can_exceed_theorem_rate(self):
        # the integer constants carry 1/2 instead of 3/2 in front of C_1T^2
        cfg = ALDConfig(P_q=1, d=1, eps=1, gamma=1, M=0, L=1)
        assert ald_rate_bound(cfg) > ald_theorem_rate(cfg)
        assert ald_rate_bound_rederived(cfg) < ald_theorem_rate(cfg)

    def test_rederived_constants(self):
        # 3/2 * 314 * (391, 43, 63) and 3 * 126
        assert (1 + 1.5 * 314 * 391, 1.5 * 314 * 43, 1.5 * 314 * 63, 3 * 126) == (184162, 20253, 29673, 378)
        assert round(1 + 0.5 * 314 * 391) == 61388

    def test_scaling_shape(self):
        gs = np.geomspace(1e-3, 1e3, 25)
        ratios = []
        for g in gs:
            for e in gs:
                shape = min(1 / g, 1 / (g * e * e), g * e * e, g / (e * e))
                ratios.append(ald_rate_bound(ALDConfig(eps=e, gamma=g)) / shape)
        ratios = np.array(ratios)
        assert ratios.max() / ratios.min() < 1e3


class TestALDOptimum:
    def test_unit_example(self):
        opt = ald_optimal_params(1, 1, 0, 1)
        assert opt.gamma == pytest.approx(np.sqrt(2))
        assert opt.eps_sq == pytest.approx(1 / np.sqrt(3))
        assert opt.lambda_closed == pytest.approx(1 / (66334 * np.sqrt(2)), rel=1e-12)
        assert opt.lambda_closed == pytest.approx(1.0660e-5, rel=1e-3)

    def test_dimension_independent(self):
        o1, o100 = ald_optimal_params(1, 1, 0, 1), ald_optimal_params(1, 100, 0, 1)
        assert (o1.gamma, o1.lambda_closed) == (o100.gamma, o100.lambda_closed)
        assert o100.eps_sq == pytest.approx(10 / np.sqrt(3))

    def test_small_M_L_limit(self):
        assert ald_optimal_params(1, 1, 0, 1e-14).lambda_closed == pytest.approx(1 / 66334, rel=1e-6)

    @pytest.mark.parametrize("c", [2.0, 10.0])
    def test_sqrt_P_q_scaling(self, c):
        P_q = 0.7
        lam = lambda p: ald_optimal_params(p, 3, 0, p).lambda_closed
        assert lam(c * c * P_q) / lam(P_q) == pytest.approx(c, rel=1e-10)

    def test_bound_dominates_closed_form_on_grid(self):
        for P_q in (0.1, 1, 10):
            for M in (0.1, 1, 10):
                for L in (0.1, 1, 10):
                    for d in (1, 3, 100):
                        opt = ald_optimal_params(P_q, d, M, L)
                        assert ald_rate_bound(opt.config(P_q, d, M, L)) >= opt.lambda_closed


class TestSweep:
    def test_rows(self):
        rows = ald_sweep(ALDConfig(), "eps", [0.5, 1.0, 2.0])
        assert [r[0] for r in rows] == ["eps"] * 3
        for _, v, lam, T, C in rows:
            assert lam == pytest.approx(ald_rate_bound(ALDConfig(eps=v)))
            assert C == pytest.approx(np.exp(T * lam))
