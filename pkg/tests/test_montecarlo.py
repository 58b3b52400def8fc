import numpy as np
import pytest
from scipy import stats

from oracles import exact_ensemble_ps
from tripletbeats.hamiltonian import FieldSpec, configuration_hamiltonian, total_hamiltonian
from tripletbeats.montecarlo import (
    AA, AB, BB,
    HopTrajectory,
    MonteCarloParams,
    ensemble_beats,
    rng_stream,
    sample_trajectory,
    trajectory_ps_trace,
)
from tripletbeats.propagation import propagator, static_ps_trace
from tripletbeats.hamiltonian import singlet_state


class TestParams:
    @pytest.mark.parametrize("kw", [
        dict(tau_hop=0), dict(tau_hop=-1), dict(tau_hop=np.nan), dict(tau_hop=1, n_traj=0),
        dict(tau_hop=1, dt=0), dict(tau_hop=1, t_max=0.001, dt=0.01), dict(tau_hop=1, master_seed=-1),
    ])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            MonteCarloParams(**kw)

    def test_negative_tau_message(self):
        with pytest.raises(ValueError, match="tau_hop must be positive"):
            MonteCarloParams(tau_hop=-0.1)

    def test_grid(self):
        mc = MonteCarloParams(0.15, t_max=5.0, dt=0.01)
        t = mc.time_grid()
        assert t.size == 501 and t[0] == 0 and t[-1] == pytest.approx(5.0)
        assert mc.dwell_mean == pytest.approx(0.075)


class TestSampling:
    def test_stream_reproducible(self):
        a = rng_stream(7, 3).random(5)
        b = rng_stream(7, 3).random(5)
        c = rng_stream(7, 4).random(5)
        assert np.array_equal(a, b) and not np.array_equal(a, c)

    def test_alternation_and_coverage(self):
        mc = MonteCarloParams(0.15, t_max=3.0)
        for i in range(50):
            tr = sample_trajectory(rng_stream(1, i), mc)
            assert tr.duration >= mc.t_max
            assert tr.boundaries[-2] < mc.t_max
            assert np.all(tr.configs[1::2] == AB)
            assert np.all(np.isin(tr.configs[0::2], (AA, BB)))
            assert np.all(tr.dwells > 0)

    def test_dwell_distribution(self):
        mc = MonteCarloParams(0.2, t_max=50.0)
        d = np.concatenate([sample_trajectory(rng_stream(2, i), mc).dwells[:-1] for i in range(200)])
        assert d.mean() == pytest.approx(0.1, rel=0.03)
        assert stats.kstest(d, "expon", args=(0, 0.1)).pvalue > 1e-3

    def test_same_type_choice_is_fair(self):
        mc = MonteCarloParams(0.2, t_max=50.0)
        c = np.concatenate([sample_trajectory(rng_stream(3, i), mc).configs[0::2] for i in range(200)])
        frac = np.mean(c == BB)
        assert abs(frac - 0.5) < 5 * np.sqrt(0.25 / c.size)
        # consecutive same-type segments are independent
        firsts = [sample_trajectory(rng_stream(4, i), mc).configs[[0, 2]] for i in range(2000)]
        same = np.mean([a == b for a, b in firsts])
        assert abs(same - 0.5) < 5 * np.sqrt(0.25 / 2000)

    def test_from_segments(self):
        tr = HopTrajectory.from_segments([("AA", 0.1), ("AB", 0.2), ("BB", 0.3)])
        assert tr.duration == pytest.approx(0.6)
        assert list(tr.configs) == [AA, AB, BB]
        with pytest.raises(ValueError):
            HopTrajectory.from_segments([("AA", 0.0)])


class TestTrajectory:
    def test_single_segment_matches_static(self, rubrene):
        t = np.linspace(0, 2, 201)
        tr = HopTrajectory.from_segments([("AB", 5.0)])
        f = FieldSpec.along("y", 0.3)
        ps = trajectory_ps_trace(tr, rubrene, f, t)
        assert np.allclose(ps, static_ps_trace(total_hamiltonian("AB", rubrene, f), t), atol=1e-12)

    def test_piecewise_against_product_of_propagators(self, rubrene):
        segs = [("AA", 0.13), ("AB", 0.41), ("BB", 0.07), ("AB", 1.5)]
        tr = HopTrajectory.from_segments(segs)
        t = np.array([0.0, 0.1, 0.13, 0.3, 0.6, 1.0, 2.0])
        s = singlet_state()
        expected = []
        for ti in t:
            u = np.eye(9, dtype=complex)
            start = 0.0
            for c, d in segs:
                step = min(d, max(0.0, ti - start))
                u = propagator(configuration_hamiltonian(c, rubrene), step).matrix @ u
                start += d
            expected.append(abs(np.vdot(s, u @ s)) ** 2)
        assert np.allclose(trajectory_ps_trace(tr, rubrene, FieldSpec(), t), expected, atol=1e-12)

    def test_grid_beyond_coverage(self, rubrene):
        tr = HopTrajectory.from_segments([("AA", 0.5)])
        with pytest.raises(ValueError):
            trajectory_ps_trace(tr, rubrene, FieldSpec(), np.linspace(0, 1, 11))

    def test_engine_matches_reference(self, rubrene):
        mc = MonteCarloParams(0.15, n_traj=40, t_max=2.0, dt=0.01, master_seed=9)
        f = FieldSpec.along("x", 0.3)
        trace = ensemble_beats(rubrene, f, mc)
        ref = np.mean([trajectory_ps_trace(sample_trajectory(rng_stream(9, i), mc), rubrene, f, mc.time_grid())
                       for i in range(40)], axis=0)
        assert np.max(np.abs(trace.ps_mean - ref)) < 1e-12


class TestEnsemble:
    def test_determinism_across_workers(self, rubrene):
        mc = MonteCarloParams(0.15, n_traj=1200, t_max=1.0, dt=0.01, master_seed=11)
        f = FieldSpec.along("y", 0.3)
        a = ensemble_beats(rubrene, f, mc, workers=1)
        b = ensemble_beats(rubrene, f, mc, workers=4)
        c = ensemble_beats(rubrene, f, mc, workers=1)
        assert np.array_equal(a.ps_mean, b.ps_mean) and np.array_equal(a.ps_stderr, b.ps_stderr)
        assert np.array_equal(a.ps_mean, c.ps_mean)

    def test_seed_changes_result(self, rubrene):
        mc = MonteCarloParams(0.15, n_traj=200, t_max=0.5)
        a = ensemble_beats(rubrene, FieldSpec(), mc)
        b = ensemble_beats(rubrene, FieldSpec(), MonteCarloParams(0.15, n_traj=200, t_max=0.5, master_seed=1))
        assert not np.array_equal(a.ps_mean, b.ps_mean)

    def test_merge_equals_direct_statistics(self, rubrene):
        mc = MonteCarloParams(0.15, n_traj=300, t_max=0.5, master_seed=5)
        tr = ensemble_beats(rubrene, FieldSpec(), mc, chunk_size=64)
        grid = mc.time_grid()
        ps = np.array([trajectory_ps_trace(sample_trajectory(rng_stream(5, i), mc), rubrene, FieldSpec(), grid)
                       for i in range(300)])
        assert np.allclose(tr.ps_mean[1:], ps.mean(axis=0)[1:], atol=1e-12)
        assert np.allclose(tr.ps_stderr[1:], ps.std(axis=0, ddof=1)[1:] / np.sqrt(300), atol=1e-12)
        assert tr.block_means.shape == (5, grid.size)

    @pytest.mark.parametrize("direction,b", [("y", 0.3), ("x", 1.0), ("z", 0.0)])
    def test_against_exact_ensemble(self, rubrene, direction, b):
        f = FieldSpec.along(direction, b) if b else FieldSpec()
        mc = MonteCarloParams(0.15, n_traj=3000, t_max=2.0, dt=0.02, master_seed=21)
        tr = ensemble_beats(rubrene, f, mc)
        exact = exact_ensemble_ps(rubrene, f, 0.15, mc.time_grid())
        z = np.abs(tr.ps_mean[1:] - exact[1:]) / tr.ps_stderr[1:]
        assert np.max(z) < 5.0
        assert exact[0] == pytest.approx(1.0, abs=1e-12)

    def test_window(self, rubrene):
        tr = ensemble_beats(rubrene, FieldSpec(), MonteCarloParams(0.15, n_traj=50, t_max=1.0))
        w = tr.window(0.2, 0.5)
        assert w.t[0] == pytest.approx(0.2) and w.t[-1] == pytest.approx(0.5)
        assert w.block_means.shape[1] == w.t.size
