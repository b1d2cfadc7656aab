"""Exact window enumeration and the window-constrained swap sampler."""

import itertools
import math

import numpy as np
import pytest

import latgas as lg

RHO = 0.23
XI_CURVE = 7.0 * RHO * RHO


def slice_configs(n, pot, window):
    """Direct scan oracle: all configurations inside the window."""
    psi = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            d = abs(i - j)
            if pot.periodic:
                d = min(d, n - d)
            psi[i, j] = lg.eval_psi(pot, d / n)
    out = []
    for bits in itertools.product([0, 1], repeat=n):
        b = np.array(bits, dtype=float)
        E = float(b @ psi @ b) / n ** 2
        N = b.mean()
        if (window.xi - window.delta < E < window.xi + window.delta
                and window.rho - window.delta < N < window.rho + window.delta):
            out.append(bits)
    return out


class TestEnumerate:
    def test_everything_window(self, pot_a2):
        count, S = lg.enumerate_entropy(10, pot_a2, lg.EnsembleWindow(0.0, 0.5, 1e9))
        assert count == 1024
        assert S == 0.0

    def test_empty_configuration_window(self, pot_a2):
        count, S = lg.enumerate_entropy(10, pot_a2, lg.EnsembleWindow(0.0, 0.0, 1e-6))
        assert count == 1
        assert S == pytest.approx(-math.log(2.0), rel=1e-12)

    def test_zero_count_marker(self, pot_a2):
        count, S = lg.enumerate_entropy(8, pot_a2, lg.EnsembleWindow(50.0, 0.5, 1e-6))
        assert count == 0
        assert S == -math.inf

    def test_against_direct_scan(self, pot_a2):
        window = lg.EnsembleWindow(xi=XI_CURVE, rho=0.3, delta=0.08)
        count, _ = lg.enumerate_entropy(10, pot_a2, window)
        assert count == len(slice_configs(10, pot_a2, window))

    @pytest.mark.parametrize("n,expected", [(12, 40), (16, 308), (20, 4520)])
    def test_reference_window_counts(self, pot_a2, n, expected):
        window = lg.EnsembleWindow(xi=0.4375, rho=0.25, delta=0.05)
        count, S = lg.enumerate_entropy(n, pot_a2, window)
        assert count == expected
        assert S == pytest.approx(math.log(expected / 2.0 ** n) / n, rel=1e-12)

    def test_gap_shrinks_with_n(self, pot_a2):
        window = lg.EnsembleWindow(xi=0.4375, rho=0.25, delta=0.05)
        target = -lg.hbin(0.25)
        gaps = [abs(lg.enumerate_entropy(n, pot_a2, window)[1] - target)
                for n in (12, 16, 20)]
        assert gaps[0] > gaps[1] > gaps[2]

    def test_slice_translation_closure(self, pot_a2):
        window = lg.EnsembleWindow(xi=0.3125, rho=0.25, delta=0.05)
        members = {tuple(c) for c in slice_configs(8, pot_a2, window)}
        for c in members:
            for s in range(8):
                assert tuple(np.roll(c, s)) in members

    def test_repeated_runs_identical(self, pot_a2):
        window = lg.EnsembleWindow(xi=XI_CURVE, rho=0.3, delta=0.08)
        assert lg.enumerate_entropy(14, pot_a2, window) == \
            lg.enumerate_entropy(14, pot_a2, window)

    def test_cap_refusal_mentions_cost(self, pot_a2):
        with pytest.raises(ValueError, match="2\\^25"):
            lg.enumerate_entropy(25, pot_a2, lg.EnsembleWindow(0.0, 0.5, 1.0))

    def test_record_format(self):
        rec = lg.enumeration_record(12, 40, -0.385740559384)
        assert rec == "12,40,4096,-0.385740559384"

    def test_window_validation(self):
        with pytest.raises(ValueError):
            lg.EnsembleWindow(0.1, 0.2, 0.0)


class TestMcmc:
    def test_constant_interaction_uniform(self):
        pot = lg.Potential.constant(3.0)
        window = lg.EnsembleWindow(xi=1.0, rho=RHO, delta=1e6)
        stats = lg.mcmc_sample(128, pot, window, steps=100000, chains=2, rng_seed=7)
        assert stats.acceptance_rate == 1.0
        k = stats.particles
        assert stats.mean_profile.values.mean() == pytest.approx(k / 128, abs=1e-12)
        assert float(np.max(np.abs(stats.mean_profile.values - k / 128))) < 0.05

    def test_particle_number_fixed(self, pot_a2):
        window = lg.EnsembleWindow(xi=XI_CURVE, rho=RHO, delta=0.05)
        stats = lg.mcmc_sample(64, pot_a2, window, steps=4000, chains=1, rng_seed=3)
        assert stats.particles == round(RHO * 64)
        assert stats.mean_profile.values.mean() == pytest.approx(stats.particles / 64,
                                                                 abs=1e-12)
        assert stats.accepted_moves <= stats.proposals == 4000

    def test_energy_stays_in_window(self, pot_a2):
        window = lg.EnsembleWindow(xi=XI_CURVE, rho=RHO, delta=0.03)
        stats = lg.mcmc_sample(64, pot_a2, window, steps=6000, chains=1, rng_seed=5)
        mean_e, min_e, max_e = stats.energy_trace_summary
        assert window.xi - window.delta < min_e <= mean_e <= max_e < window.xi + window.delta

    def test_below_window_mean_profile_unimodal(self, pot_a2, solve_below):
        window = lg.EnsembleWindow(xi=XI_CURVE - 0.02, rho=RHO, delta=0.01)
        stats = lg.mcmc_sample(256, pot_a2, window, steps=100000, chains=1,
                               rng_seed=31, init=solve_below.profile)
        coarse = lg.make_profile(lg.block_average(stats.mean_profile.values, 16))
        assert lg.classify_branch(coarse, noise_floor=0.01) == "unimodal"

    def test_above_window_mean_profile_multimodal(self, pot_a2, solve_above):
        window = lg.EnsembleWindow(xi=XI_CURVE + 0.02, rho=RHO, delta=0.01)
        stats = lg.mcmc_sample(256, pot_a2, window, steps=60000, chains=1,
                               rng_seed=13, init=solve_above.profile)
        coarse = lg.make_profile(lg.block_average(stats.mean_profile.values, 32))
        assert lg.classify_branch(coarse, noise_floor=0.05).startswith("multimodal")

    def test_uniform_law_on_tiny_slice(self, pot_a2):
        # n = 8, pair distance >= 2: 20 configurations, uniform stationary law
        window = lg.EnsembleWindow(xi=0.3125, rho=0.25, delta=0.05)
        members = {int(sum(b << i for i, b in enumerate(c)))
                   for c in slice_configs(8, pot_a2, window)}
        assert len(members) == 20
        stats = lg.mcmc_sample(8, pot_a2, window, steps=120000, chains=1,
                               rng_seed=99, track_states=True, track_every=25)
        counts = stats.state_counts
        assert set(counts) <= members
        total = sum(counts.values())
        p = 1.0 / len(members)
        se = math.sqrt(p * (1 - p) / total)
        for key in members:
            freq = counts.get(key, 0) / total
            assert abs(freq - p) <= 3.0 * se

    def test_stuck_chain_warning(self, pot_a2):
        # window admits only the evenly spread configuration: every swap rejected
        bits = np.zeros(16)
        bits[[0, 4, 8, 12]] = 1
        cfg = lg.make_config(1, 16, bits)
        e0 = lg.energy_density(cfg, pot_a2)
        window = lg.EnsembleWindow(xi=e0, rho=0.25, delta=1e-9)
        init = lg.profile(cfg, 16)
        stats = lg.mcmc_sample(16, pot_a2, window, steps=400, chains=1,
                               rng_seed=1, init=init)
        assert stats.stuck_warning
        assert stats.accepted_moves == 0

    def test_unreachable_window_raises(self, pot_a2):
        # 0.23 * 100 is an exact particle count, so only the anneal can fail
        window = lg.EnsembleWindow(xi=100.0, rho=RHO, delta=1e-6)
        with pytest.raises(RuntimeError):
            lg.mcmc_sample(100, pot_a2, window, steps=100, chains=1, rng_seed=2)

    def test_density_window_guard(self, pot_a2):
        with pytest.raises(ValueError):
            lg.mcmc_sample(16, pot_a2, lg.EnsembleWindow(0.4, 0.26, 0.001),
                           steps=10, chains=1, rng_seed=4)

    def test_determinism(self, pot_a2):
        window = lg.EnsembleWindow(xi=XI_CURVE, rho=RHO, delta=0.05)
        a = lg.mcmc_sample(32, pot_a2, window, steps=3000, chains=2, rng_seed=11)
        b = lg.mcmc_sample(32, pot_a2, window, steps=3000, chains=2, rng_seed=11)
        np.testing.assert_array_equal(a.mean_profile.values, b.mean_profile.values)
        assert a.accepted_moves == b.accepted_moves


class TestCompareProfile:
    def _stats_with_profile(self, values):
        prof = lg.make_profile(values)
        return lg.McmcStats(n=prof.m, chains=1, steps=0, accepted_moves=0,
                            mean_profile=prof, energy_trace_summary=(0, 0, 0),
                            seed=0, particles=0, proposals=0, acceptance_rate=0.0,
                            stuck_warning=False)

    def test_identical_is_zero(self, solve_below):
        stats = self._stats_with_profile(solve_below.profile.values)
        assert lg.compare_profile(stats, solve_below.profile) == 0.0

    def test_shifted_copy_is_zero(self, solve_below):
        stats = self._stats_with_profile(np.roll(solve_below.profile.values, 77))
        assert lg.compare_profile(stats, solve_below.profile) == pytest.approx(0.0,
                                                                               abs=1e-12)

    def test_block_averages_to_common_grid(self, solve_below):
        fine = np.repeat(solve_below.profile.values, 2)
        stats = self._stats_with_profile(fine)
        assert lg.compare_profile(stats, solve_below.profile) == pytest.approx(0.0,
                                                                               abs=1e-12)

    def test_incompatible_grids(self, solve_below):
        stats = self._stats_with_profile(np.full(96, 0.2))
        with pytest.raises(ValueError):
            lg.compare_profile(stats, solve_below.profile)

    def test_stats_dict(self, pot_a2):
        window = lg.EnsembleWindow(xi=XI_CURVE, rho=RHO, delta=0.05)
        stats = lg.mcmc_sample(32, pot_a2, window, steps=500, chains=1, rng_seed=11)
        d = lg.stats_to_dict(stats)
        assert d["rng_name"] == "philox"
        assert d["seed"] == 11
        assert len(d["mean_profile"]["values"]) == 32
