"""Entropy, energy and density functionals on discretized profiles."""

import math

import numpy as np
import pytest

import latgas as lg

LOG2 = math.log(2.0)


class TestHbin:
    def test_symmetric_minimum(self):
        assert lg.hbin(0.5) == 0.0

    def test_limit_convention(self):
        assert lg.hbin(0.0) == pytest.approx(LOG2, rel=1e-15)
        assert lg.hbin(1.0) == pytest.approx(LOG2, rel=1e-15)

    def test_quarter_value(self):
        # direct evaluation, cross-checked by the t <-> 1-t symmetry
        assert lg.hbin(0.25) == pytest.approx(0.130812035941137, abs=1e-12)
        assert lg.hbin(0.25) == lg.hbin(0.75)

    def test_outside_is_inf(self):
        assert lg.hbin(-0.1) == math.inf
        assert lg.hbin(1.1) == math.inf

    def test_nonnegative_sampled(self, rng):
        t = rng.uniform(0.0, 1.0, 500)
        assert np.all(lg.hbin(t) >= 0.0)


class TestEntropy:
    def test_half_profile_zero(self):
        assert lg.entropy_H(lg.constant_profile(32, 0.5)) == 0.0

    def test_constant_profile(self):
        for m in (8, 64, 256):
            f = lg.constant_profile(m, 0.23)
            assert lg.entropy_H(f) == pytest.approx(lg.hbin(0.23), rel=1e-14)

    def test_indicator_profile(self):
        f = lg.make_profile(np.array([1.0] * 8 + [0.0] * 8))
        assert lg.entropy_H(f) == pytest.approx(LOG2, rel=1e-14)

    def test_zero_only_at_half(self, rng):
        v = rng.uniform(0.05, 0.95, 64)
        v[3] = 0.4
        assert lg.entropy_H(lg.make_profile(v)) > 0.0


class TestXiAndDensity:
    def test_constant_profile_energy(self, kernel256):
        f = lg.constant_profile(256, 0.23)
        assert lg.xi(f, kernel256) == pytest.approx(7.0 * 0.23 ** 2, abs=1e-9)

    def test_zero_profile(self, kernel256):
        f = lg.make_profile(np.zeros(256))
        assert lg.xi(f, kernel256) == 0.0

    def test_block_indicator_closed_form(self, pot_a2):
        # single block of length 1/4: closed form 2 rho^(2-r)/((1-r)(2-r)) = 1/3
        K = lg.cell_kernel(pot_a2, 1024)
        f = lg.indicator_profile(1024, [(0.0, 0.25)])
        assert lg.xi(f, K) == pytest.approx(1.0 / 3.0, abs=1e-3)

    def test_size_mismatch(self, kernel256):
        with pytest.raises(ValueError):
            lg.xi(lg.constant_profile(64, 0.2), kernel256)

    def test_density_examples(self):
        assert lg.density_N(lg.constant_profile(16, 0.37)) == pytest.approx(0.37)
        assert lg.density_N(lg.indicator_profile(8, [(0.0, 0.25)])) == pytest.approx(0.25)
        assert lg.density_N(lg.make_profile([0.1, 0.3, 0.5, 0.7])) == pytest.approx(0.4)


class TestApplyKernel:
    def test_constant_profile_field(self, kernel256):
        f = lg.constant_profile(256, 0.23)
        np.testing.assert_allclose(lg.apply_kernel(kernel256, f), 7.0 * 0.23,
                                   rtol=0, atol=1e-9)

    def test_unit_cell(self, kernel256):
        v = np.zeros(256)
        v[17] = 1.0
        f = lg.make_profile(v)
        np.testing.assert_allclose(lg.apply_kernel(kernel256, f),
                                   kernel256.entries[17] / 256, rtol=1e-12)

    def test_commutes_with_shift(self, kernel256, rng):
        v = rng.uniform(0.0, 1.0, 256)
        out = lg.apply_kernel(kernel256, lg.make_profile(v))
        out_shifted = lg.apply_kernel(kernel256, lg.make_profile(np.roll(v, 37)))
        np.testing.assert_allclose(out_shifted, np.roll(out, 37), rtol=1e-10, atol=1e-12)


class TestGradients:
    def test_flat_entropy_gradient(self, kernel256):
        f = lg.constant_profile(256, 0.5)
        grad_h, _ = lg.gradients(f, kernel256)
        np.testing.assert_allclose(grad_h, 0.0, atol=1e-14)

    def test_constant_energy_gradient(self, kernel256):
        f = lg.constant_profile(256, 0.23)
        _, grad_xi = lg.gradients(f, kernel256)
        np.testing.assert_allclose(grad_xi, 2.0 * 7.0 * 0.23 / 256, rtol=0, atol=1e-11)

    def test_finite_difference_agreement(self, pot_a2, rng):
        K = lg.cell_kernel(pot_a2, 64)
        h = 1e-6
        for _ in range(5):
            v = rng.uniform(0.1, 0.9, 64)
            grad_h, grad_xi = lg.gradients(lg.make_profile(v), K)
            for idx in rng.integers(0, 64, size=4):
                vp, vm = v.copy(), v.copy()
                vp[idx] += h
                vm[idx] -= h
                fd_h = (lg.entropy_H(lg.make_profile(vp)) - lg.entropy_H(lg.make_profile(vm))) / (2 * h)
                fd_xi = (lg.xi(lg.make_profile(vp), K) - lg.xi(lg.make_profile(vm), K)) / (2 * h)
                assert abs(grad_h[idx] - fd_h) / abs(grad_h[idx] + 1e-30) < 1e-5 or \
                    abs(grad_h[idx] - fd_h) < 1e-10
                assert abs(grad_xi[idx] - fd_xi) / abs(grad_xi[idx]) < 1e-5

    def test_boundary_flag(self, kernel256):
        v = np.full(256, 0.5)
        v[0] = 0.0
        with pytest.raises(ValueError):
            lg.gradients(lg.make_profile(v), kernel256)


class TestQuadraticFormProperties:
    def test_polarization(self, kernel256, rng):
        for _ in range(10):
            f = rng.uniform(0.0, 0.5, 256)
            g = rng.uniform(0.0, 0.5, 256)
            lhs = (lg.xi(lg.make_profile(f + g), kernel256)
                   - lg.xi(lg.make_profile(f), kernel256)
                   - lg.xi(lg.make_profile(g), kernel256))
            rhs = 2.0 * float(f @ (kernel256.entries @ g)) / 256 ** 2
            assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)

    def test_nonnegative(self, kernel256, rng):
        for _ in range(20):
            f = rng.uniform(0.0, 1.0, 256)
            assert lg.xi(lg.make_profile(f), kernel256) >= 0.0


class TestProfilePlumbing:
    def test_validation(self):
        with pytest.raises(ValueError):
            lg.make_profile([0.5])
        with pytest.raises(ValueError):
            lg.make_profile([0.5, 1.2])

    def test_csv_roundtrip(self, rng):
        f = lg.make_profile(rng.uniform(0.0, 1.0, 32))
        back = lg.profile_from_csv(lg.profile_to_csv(f))
        np.testing.assert_allclose(back.values, f.values, rtol=1e-11)

    def test_block_average(self):
        v = np.array([1.0, 0.0, 1.0, 0.0])
        np.testing.assert_allclose(lg.block_average(v, 2), [0.5, 0.5])
        np.testing.assert_allclose(lg.block_average(v, 8), np.repeat(v, 2))
        with pytest.raises(ValueError):
            lg.block_average(v, 3)
