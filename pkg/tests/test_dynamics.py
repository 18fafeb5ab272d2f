import numpy as np
import pytest
from scipy import integrate, linalg, stats

from hypolift.dynamics import (
    Ensemble,
    SchemeSpec,
    TrajectoryStreams,
    exact_ou_step,
    hamiltonian_flow,
    lipschitz_envelope,
    ou_transition,
    quadratic_flip_time,
    run_ensemble,
    simulate_rhmc,
    simulate_zigzag,
    step_ald,
    step_baoab,
    step_gle_splitting,
    trajectory_generator,
    van_loan,
)
from hypolift.dynamics.ou import noise_factor
from hypolift.errors import EnvelopeViolation, InvalidParameter, NonPSD
from hypolift.model import (
    GLE,
    RHMC,
    AdaptiveLangevin,
    GaussianTarget,
    GeneralPotential,
    KineticLangevin,
    Overdamped,
    ZigZag,
    build_drift_system,
)

SQ2, SQ3 = np.sqrt(2.0), np.sqrt(3.0)
GLE_OPT = GLE(2 * SQ2, 3 * SQ3)
UNIT = GaussianTarget(1.0)


class ZeroNoise:
    def standard_normal(self, shape):
        return np.zeros(shape)


class TestStreams:
    def test_same_seed_same_draws(self):
        a = trajectory_generator(7, 3).standard_normal(5)
        b = trajectory_generator(7, 3).standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_grouping_does_not_matter(self):
        together = TrajectoryStreams([trajectory_generator(1, i) for i in range(4)])
        x = np.concatenate([together.standard_normal((4, 3)) for _ in range(3000)], axis=1)
        alone = TrajectoryStreams([trajectory_generator(1, 2)])
        y = np.concatenate([alone.standard_normal((1, 3)) for _ in range(3000)], axis=1)
        np.testing.assert_array_equal(x[2], y[0])

    def test_streams_uncorrelated(self):
        n = 20_000
        rows = np.stack([trajectory_generator(0, i).standard_normal(n) for i in range(50)])
        c = np.corrcoef(rows)
        off = c[~np.eye(50, dtype=bool)]
        assert np.abs(off).max() < 4 / np.sqrt(n) + 1e-3


class TestExactOU:
    def quadrature_Q(self, A, W, h, n=10_001):
        s = np.linspace(0, h, n)
        vals = np.array([linalg.expm(si * A) @ W @ linalg.expm(si * A).T for si in s])
        return integrate.simpson(vals, x=s, axis=0)

    @pytest.mark.parametrize("kind", [Overdamped(), KineticLangevin(0.7), GLE_OPT, GLE(1.0, 0.3)])
    def test_van_loan_matches_quadrature(self, kind):
        sys = build_drift_system(kind, GaussianTarget(1.7))
        F, Q = van_loan(sys.A, sys.diffusion, 0.4)
        np.testing.assert_allclose(F, linalg.expm(0.4 * sys.A), atol=1e-14)
        np.testing.assert_allclose(Q, self.quadrature_Q(sys.A, sys.diffusion, 0.4), atol=1e-10)

    def test_long_step_reaches_stationary_covariance(self):
        sys = build_drift_system(GLE_OPT, UNIT)
        _, Q, _ = ou_transition(sys.A, sys.diffusion, 60.0)
        np.testing.assert_allclose(Q, np.eye(3), atol=1e-10)

    def test_one_step_covariance(self):
        sys = build_drift_system(GLE_OPT, UNIT)
        rng = np.random.default_rng(3)
        y = exact_ou_step(sys, 0.1, np.zeros((100_000, 3)), rng)
        _, Q, _ = ou_transition(sys.A, sys.diffusion, 0.1)
        emp = np.cov(y.T)
        # standard error of a sample covariance entry
        se = np.sqrt((Q * Q + np.outer(np.diag(Q), np.diag(Q))) / len(y))
        assert np.all(np.abs(emp - Q) <= 3 * se + 1e-15)
        assert np.all(np.abs(y.mean(0)) <= 4 * np.sqrt(np.diag(Q) / len(y)))

    def test_noise_factor(self):
        Q = np.diag([1.0, 0.0])
        L = noise_factor(Q)
        np.testing.assert_allclose(L @ L.T, Q, atol=1e-12)
        np.testing.assert_array_equal(noise_factor(np.zeros((2, 2))), 0)
        with pytest.raises(NonPSD):
            noise_factor(np.diag([1.0, -1.0]))


class TestSplitting:
    def test_baoab_local_error_order(self):
        sys = build_drift_system(KineticLangevin(2.0), UNIT)
        errs = []
        for h in (1e-2, 1e-3):
            x, v = step_baoab(UNIT, 2.0, h, (np.array([1.0]), np.array([0.5])), ZeroNoise())
            F, _, _ = ou_transition(sys.A, sys.diffusion, h)
            errs.append(np.abs(np.r_[x, v] - F @ [1.0, 0.5]).max())
        assert errs[0] < 1e-5
        assert errs[0] / errs[1] > 100

    def test_baoab_without_friction_conserves_energy(self):
        x, v = np.array([1.0]), np.array([0.0])
        H0 = 0.5 * (x**2 + v**2)
        for _ in range(1000):
            x, v = step_baoab(UNIT, 0.0, 0.01, (x, v), ZeroNoise())
        assert abs(0.5 * (x**2 + v**2) - H0)[0] < 1e-4

    def test_gle_splitting_local_error_order(self):
        sys = build_drift_system(GLE_OPT, UNIT)
        errs = []
        for h in (1e-2, 1e-3):
            state = (np.array([1.0]), np.array([0.5]), np.array([0.2]))
            y = step_gle_splitting(UNIT, GLE_OPT.coupling, GLE_OPT.gamma, h, state, ZeroNoise())
            F, _, _ = ou_transition(sys.A, sys.diffusion, h)
            errs.append(np.abs(np.concatenate(y) - F @ [1.0, 0.5, 0.2]).max())
        assert errs[0] / errs[1] > 500

    def test_gle_splitting_free_energy_conservation(self):
        x, v, z = np.array([1.0]), np.array([0.0]), np.array([0.0])
        for _ in range(1000):
            x, v, z = step_gle_splitting(UNIT, 0.0, 0.0, 0.01, (x, v, z), ZeroNoise())
        assert abs(0.5 * (x**2 + v**2) - 0.5)[0] < 1e-4

    def test_ald_large_mass_matches_baoab(self):
        g1 = np.random.default_rng(5)
        g2 = np.random.default_rng(5)
        q = np.array([[0.3, -0.2]])
        v = np.array([[0.1, 0.4]])
        qa, va, za = q.copy(), v.copy(), np.zeros(1)
        qb, vb = q.copy(), v.copy()
        for _ in range(100):
            qa, va, za = step_ald(UNIT, 1e6, 1.0, 0.01, (qa, va, za), g1)
            qb, vb = step_baoab(UNIT, 1.0, 0.01, (qb, vb), g2)
        np.testing.assert_allclose(qa, qb, rtol=1e-4, atol=1e-8)
        np.testing.assert_allclose(va, vb, rtol=1e-4, atol=1e-8)

    def test_ald_stationary_moments(self):
        ens = run_ensemble(AdaptiveLangevin(1.0, 1.0), SchemeSpec("ald", 0.005), UNIT, 10_000, [0.0, 10.0], 11)
        q, v, z = ens.states[:, -1].T
        for sample in (q, v, z):
            assert np.mean(sample**2) == pytest.approx(1.0, rel=0.03)
        kinetic = v**2 - 1
        assert abs(kinetic.mean()) < 4 * kinetic.std() / np.sqrt(len(v))

    def test_gle_splitting_stationary(self):
        ens = run_ensemble(GLE_OPT, "gle_splitting", UNIT, 10_000, [0.0, 10.0], 12)
        np.testing.assert_allclose(np.mean(ens.states[:, -1] ** 2, axis=0), 1.0, rtol=0.04)

    def test_baoab_stationary(self):
        ens = run_ensemble(KineticLangevin(2.0), "baoab", UNIT, 10_000, [0.0, 10.0], 13)
        np.testing.assert_allclose(np.mean(ens.states[:, -1] ** 2, axis=0), 1.0, rtol=0.04)


class TestRHMC:
    def test_flow_conserves_energy(self):
        t = GaussianTarget((1.0, 4.0), 2)
        x, v = np.array([1.0, -0.5]), np.array([0.3, 2.0])
        H = lambda x, v: t.value(x) + 0.5 * v @ v
        for tau in (0.1, 1.7, 25.0):
            assert H(*hamiltonian_flow(t, x, v, tau)) == pytest.approx(H(x, v), rel=1e-13)

    def test_leapfrog_close_to_exact(self):
        gen = GeneralPotential(lambda x: x, d=1)
        x, v = np.array([1.0]), np.array([0.0])
        xe, ve = hamiltonian_flow(UNIT, x, v, 2.0)
        xl, vl = hamiltonian_flow(gen, x, v, 2.0, h=1e-3)
        np.testing.assert_allclose([xl, vl], [xe, ve], atol=1e-5)

    def test_refresh_count_is_poisson(self):
        gamma, t_end, n = 1.5, 4.0, 10_000
        counts = np.array(
            [simulate_rhmc(UNIT, gamma, t_end, (np.zeros(1), np.zeros(1)), trajectory_generator(0, i)).n_refresh for i in range(n)]
        )
        se = np.sqrt(gamma * t_end / n)
        assert abs(counts.mean() - gamma * t_end) < 3 * se

    def test_high_refresh_variance(self):
        ens = run_ensemble(RHMC(20.0), None, GaussianTarget(2.0), 4000, [0.0, 5.0], 3)
        x = ens.states[:, -1, 0]
        assert x.var() == pytest.approx(0.5, rel=4 * np.sqrt(2 / 4000))


class TestZigZag:
    def test_flat_potential_moves_straight(self):
        flat = GeneralPotential(lambda x: np.zeros_like(x), d=2)
        tr = simulate_zigzag(flat, 0.0, 5.0, (np.zeros(2), np.array([1.0, -1.0])), np.random.default_rng(0),
                             envelope=lipschitz_envelope(flat, 0.0))
        assert tr.n_events == 0
        np.testing.assert_allclose(tr.states[-1], [5.0, -5.0, 1.0, -1.0])

    def test_flip_time_inversion(self):
        # first event time from x0 with v=+1, m=2: rate (2 (x0 + s))_+
        x0, m = -0.7, 2.0
        rng = np.random.default_rng(1)
        samples = np.array([quadratic_flip_time(m * x0, m, e) for e in rng.exponential(size=10_000)])

        def cdf(s):
            lam = integrate.quad(lambda r: max(m * (x0 + r), 0.0), 0, s, points=[-x0])[0]
            return 1 - np.exp(-lam)

        assert stats.kstest(samples, np.vectorize(cdf)).pvalue > 0.01

    def test_velocity_validation(self):
        with pytest.raises(InvalidParameter):
            simulate_zigzag(UNIT, 1.0, 1.0, (np.zeros(1), np.array([0.5])), np.random.default_rng(0))

    def test_bad_envelope_is_detected(self):
        pot = GeneralPotential(lambda x: 5 * x, d=1)
        with pytest.raises(EnvelopeViolation):
            for i in range(50):
                simulate_zigzag(pot, 0.0, 20.0, (np.array([1.0]), np.array([1.0])), trajectory_generator(0, i),
                                envelope=lipschitz_envelope(pot, 0.01))

    def test_thinning_matches_exact_inversion(self):
        pot = GeneralPotential(lambda x: 2.0 * x, d=1)
        env = lipschitz_envelope(pot, 2.0)
        n, times = 4000, np.array([0.0, 8.0])
        init = np.random.default_rng(9)
        xs = []
        for i in range(n):
            x0 = init.standard_normal(1) / SQ2
            tr = simulate_zigzag(pot, 0.5, 8.0, (x0, np.array([1.0])), trajectory_generator(2, i), times=times, envelope=env)
            xs.append(tr.states[-1, 0])
        assert np.var(xs) == pytest.approx(0.5, rel=4 * np.sqrt(2 / n))

    def test_stationary_variance(self):
        ens = run_ensemble(ZigZag(1.0), None, UNIT, 10_000, [0.0, 10.0], 4)
        assert np.var(ens.states[:, -1, 0]) == pytest.approx(1.0, rel=0.03)


class TestEnsemble:
    @pytest.mark.parametrize(
        "kind, scheme",
        [
            (Overdamped(), "exact_ou"),
            (KineticLangevin(1.0), "euler_maruyama"),
            (KineticLangevin(1.0), "baoab"),
            (GLE_OPT, "exact_ou"),
            (GLE_OPT, "gle_splitting"),
            (AdaptiveLangevin(1.0, 1.0), "ald"),
            (RHMC(1.0), "rhmc"),
            (ZigZag(1.0), "zigzag"),
        ],
    )
    def test_bit_identical_across_workers(self, kind, scheme):
        target = GaussianTarget(1.5, 2)
        times = np.linspace(0, 1, 6)
        a = run_ensemble(kind, scheme, target, 37, times, 99, threads=1, chunk_size=37)
        b = run_ensemble(kind, scheme, target, 37, times, 99, threads=4, chunk_size=5)
        c = run_ensemble(kind, scheme, target, 37, times, 98, threads=1)
        np.testing.assert_array_equal(a.states, b.states)
        assert not np.array_equal(a.states, c.states)
        assert a.states.shape == (37, 6, kind.state_dim(2))

    def test_save_load_round_trip(self, tmp_path):
        ens = run_ensemble(GLE_OPT, None, UNIT, 10, np.linspace(0, 1, 5), 1)
        bin_path, json_path = ens.save(tmp_path / "run")
        assert bin_path.stat().st_size == 10 * 5 * 3 * 8
        header = __import__("json").loads(json_path.read_text())
        assert set(header) == {"kind", "scheme", "h", "n_traj", "times", "seed"}
        back = Ensemble.load(tmp_path / "run")
        np.testing.assert_array_equal(back.states, ens.states)
        assert back.kind == ens.kind
        ens.to_csv(tmp_path / "run.csv")
        assert len((tmp_path / "run.csv").read_text().splitlines()) == 51

    def test_scheme_validation(self):
        with pytest.raises(InvalidParameter):
            run_ensemble(ZigZag(1.0), "exact_ou", UNIT, 2, [0, 1], 0)
        with pytest.raises(InvalidParameter):
            run_ensemble(KineticLangevin(1.0), "exact_ou", GeneralPotential(lambda x: x), 2, [0, 1], 0, initial=np.zeros((2, 2)))
        with pytest.raises(InvalidParameter):
            SchemeSpec("baoab", h=0.0)
        with pytest.raises(InvalidParameter):
            run_ensemble(KineticLangevin(1.0), "baoab", UNIT, 2, [0.5, 1], 0)

    def test_explicit_initial_states(self):
        init = np.tile([1.0, 0.0], (5, 1))
        ens = run_ensemble(KineticLangevin(1.0), "baoab", UNIT, 5, [0, 0.5], 0, initial=init)
        np.testing.assert_array_equal(ens.states[:, 0], init)

    def test_exact_vs_splitting_gle(self):
        n, times = 20_000, [0.0, 2.0]
        init = np.tile([1.0, 0.0, 0.0], (n, 1))
        ex = run_ensemble(GLE_OPT, "exact_ou", UNIT, n, times, 1, initial=init).states[:, -1]
        sp = run_ensemble(GLE_OPT, SchemeSpec("gle_splitting", 0.01), UNIT, n, times, 2, initial=init).states[:, -1]
        se = np.sqrt((ex.var(0) + sp.var(0)) / n)
        assert np.all(np.abs(ex.mean(0) - sp.mean(0)) < 4 * se + 1e-3)
        np.testing.assert_allclose(ex.var(0), sp.var(0), rtol=0.05)
