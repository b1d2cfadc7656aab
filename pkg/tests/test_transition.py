"""Feasibility windows, kink constants, spectral radius, and the curve scan."""

import math

import numpy as np
import pytest

import latgas as lg
from latgas.potential import KernelMatrix

RHO = 0.23


@pytest.fixture(scope="module")
def scan_023(pot_a2):
    return lg.scan_transition(pot_a2, RHO, [0.005, 0.01, 0.02], m=256)


class TestFeasibilityProbe:
    def test_reference_window(self, pot_a2):
        probe = lg.feasibility_probe(pot_a2, 0.25)
        assert probe.xi1 == pytest.approx(1.0 / 3.0, rel=1e-12)
        assert probe.xi2 == pytest.approx(0.4375, rel=1e-12)
        assert probe.xi3 == pytest.approx(0.548202260396, abs=1e-9)
        assert probe.interior
        assert probe.max_grid_error < 2e-3

    def test_small_plateau_fails_ordering(self):
        pot = lg.Potential.power_plateau(0.5, 0.1)
        probe = lg.feasibility_probe(pot, 0.25)
        assert probe.xi1 > probe.xi2
        assert not probe.interior

    def test_vanishing_density(self, pot_a2):
        probe = lg.feasibility_probe(pot_a2, 1e-3)
        assert max(probe.as_tuple()) < 1e-4

    def test_requires_power_plateau(self):
        with pytest.raises(ValueError):
            lg.feasibility_probe(lg.Potential.constant(3.0), 0.2)
        with pytest.raises(ValueError):
            lg.feasibility_probe(lg.Potential.power_plateau(0.5, 10.0), 0.4)


class TestConvexityGapConstant:
    def test_half_density_limit(self):
        # at rho = 1/2 the ratio is minimized in the t -> 0 limit: hbin''/2 = 2
        assert lg.convexity_gap_constant(0.5) == pytest.approx(2.0, abs=1e-6)

    def test_reference_density(self):
        c = lg.convexity_gap_constant(RHO)
        assert c == pytest.approx(2.2376133443, abs=1e-6)

    def test_dense_grid_oracle(self):
        # independent coarse scan of the same ratio
        rho = RHO
        ts = np.linspace(-rho + 1e-9, 1.0 - rho, 400001)
        ts = ts[np.abs(ts) > 1e-6]
        vals = (lg.hbin(rho + ts) - lg.hbin_prime(rho) * ts - lg.hbin(rho)) / ts ** 2
        expected = min(float(vals.min()), float(lg.hbin_second(rho)) / 2.0)
        assert lg.convexity_gap_constant(rho) == pytest.approx(expected, abs=1e-7)

    @pytest.mark.parametrize("rho", [0.1, 0.23, 0.4, 0.5, 0.77, 0.9])
    def test_positive(self, rho):
        assert lg.convexity_gap_constant(rho, grid_points=20001) > 0.0

    def test_domain(self):
        with pytest.raises(ValueError):
            lg.convexity_gap_constant(0.0)


class TestSpectralRadius:
    def test_nonnegative_periodic_kernel_gives_lambda(self, kernel256):
        assert lg.spectral_radius(kernel256) == pytest.approx(7.0, abs=1e-9)

    def test_reference_grid(self, pot_a2):
        K = lg.cell_kernel(pot_a2, 512)
        assert lg.spectral_radius(K) == pytest.approx(7.0, abs=1e-4)

    def test_dense_eigensolve_oracle(self, pot_a2):
        K = lg.cell_kernel(pot_a2, 128)
        dense = float(np.max(np.abs(np.linalg.eigvalsh(K.entries / 128))))
        assert lg.spectral_radius(K) == pytest.approx(dense, rel=1e-9)

    def test_identity_kernel(self):
        m = 64
        entries = m * np.eye(m)
        entries.flags.writeable = False
        K = KernelMatrix(m=m, entries=entries, periodic=False)
        assert lg.spectral_radius(K) == pytest.approx(1.0, rel=1e-10)

    def test_scaling_homogeneity(self, pot_a2):
        K = lg.cell_kernel(pot_a2, 128)
        doubled = 2.0 * K.entries
        doubled.flags.writeable = False
        K2 = KernelMatrix(m=128, entries=doubled, periodic=True)
        assert lg.spectral_radius(K2) == pytest.approx(2.0 * lg.spectral_radius(K),
                                                       rel=1e-9)


class TestScanTransition:
    def test_curve_entropy(self, scan_023):
        assert scan_023.S_curve == pytest.approx(-lg.hbin(RHO), abs=1e-8)

    def test_all_points_converged(self, scan_023):
        assert all(p.converged for p in scan_023.points)

    def test_xi_values_bracket_curve(self, scan_023):
        xis = scan_023.xi_values
        assert all(b > a for a, b in zip(xis, xis[1:]))
        assert xis[0] < scan_023.lam * RHO ** 2 < xis[-1]

    def test_entropy_bounded_by_curve_value(self, scan_023):
        assert all(S <= -lg.hbin(RHO) + 1e-6 for S in scan_023.S_values)

    def test_kink_inequality(self, scan_023):
        bound = scan_023.kink_lower_bound
        assert scan_023.kink_ok
        xi0 = scan_023.lam * RHO ** 2
        for p in scan_023.points:
            if p.xi_target == xi0:
                continue
            drop = p.S + lg.hbin(RHO)
            assert drop <= -bound * abs(p.xi_actual - xi0) + 1e-4

    def test_one_sided_slopes_exceed_bound(self, scan_023):
        assert abs(scan_023.left_slope) >= scan_023.kink_lower_bound
        assert abs(scan_023.right_slope) >= scan_023.kink_lower_bound

    def test_hypothesis_tag(self, scan_023):
        # r = 1/2 sits exactly on the boundary of the proof's r < 1/2 regime
        assert not scan_023.within_hypotheses

    def test_branches_flip_across_curve(self, scan_023):
        mid = len(scan_023.points) // 2
        assert scan_023.points[mid].branch == "constant"
        assert all(p.branch == "unimodal" for p in scan_023.points[:mid])
        assert all(p.branch.startswith("multimodal") for p in scan_023.points[mid + 1:])

    def test_constant_interaction_refused(self):
        with pytest.raises(ValueError):
            lg.scan_transition(lg.Potential.constant(3.0), RHO, [0.01])

    def test_empty_deltas_refused(self, pot_a2):
        with pytest.raises(ValueError):
            lg.scan_transition(pot_a2, RHO, [])

    def test_infeasible_delta_marks_failure(self, pot_a2):
        scan = lg.scan_transition(pot_a2, RHO, [0.5], m=64)
        assert any(not p.converged for p in scan.points)
        assert any(math.isnan(p.S) for p in scan.points)

    def test_within_hypotheses_for_small_r(self):
        pot = lg.Potential.power_plateau(0.3, 10.0)
        scan = lg.scan_transition(pot, RHO, [0.01], m=64)
        assert scan.within_hypotheses

    def test_csv_and_summary(self, scan_023):
        csv = lg.scan_to_csv(scan_023)
        lines = csv.strip().splitlines()
        assert lines[0] == "xi,S,branch,beta,mu,converged"
        assert len(lines) == 1 + len(scan_023.points)
        summary = lg.scan_summary_dict(scan_023)
        assert summary["kink_ok"] is True
        assert summary["c"] == pytest.approx(2.2376133443, abs=1e-6)
        assert summary["sigma"] == pytest.approx(7.0, abs=1e-6)
