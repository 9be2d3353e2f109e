import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hfbkit.grid import make_grid, to_spectrum, vector_norm
from hfbkit.potential import (
    PotentialSpec,
    bump,
    bump_integral,
    convolve_density,
    loglog_slope,
    lp_norm,
    sample_VN,
    sample_vM,
    scaling_exponent,
    split_main_tail,
)


class TestProfile:
    def test_hypotheses_on_profile(self):
        r = np.linspace(0, 3, 301)
        v = bump(r, 2.0, 1.5)
        assert np.all(v >= 0)
        assert np.all(np.diff(v) <= 0)
        assert np.all(v[r >= 2.0] == 0)

    @pytest.mark.parametrize("d", [1, 2])
    def test_integral_against_cartesian_quadrature(self, d):
        f = lambda *xs: bump(np.sqrt(sum(x * x for x in xs)), 1.3, 2.0)
        if d == 1:
            ref, _ = integrate.quad(lambda x: f(x), -1.3, 1.3)
        elif d == 2:
            ref, _ = integrate.dblquad(lambda y, x: f(x, y), -1.3, 1.3, -1.3, 1.3, epsabs=1e-10)
        assert bump_integral(1.3, 2.0, d) == pytest.approx(ref, rel=1e-7)

    def test_integral_three_dimensions(self):
        # smooth compact profile: the lattice Riemann sum converges spectrally
        x = (np.arange(64) - 32) * (3.0 / 64)
        X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
        total = np.sum(bump(np.sqrt(X**2 + Y**2 + Z**2), 1.3, 2.0)) * (3.0 / 64) ** 3
        assert bump_integral(1.3, 2.0, 3) == pytest.approx(total, rel=1e-6)

    def test_default_normalization(self):
        for d in (1, 2, 3):
            assert PotentialSpec(d=d).mass == pytest.approx(1.0, rel=1e-12)

    @pytest.mark.parametrize("kw", [{"beta": 0.0}, {"beta": 1.0}, {"N": 0.5}, {"eps": 0.0}, {"r0": -1.0}])
    def test_invalid_spec(self, kw):
        with pytest.raises(ValueError):
            PotentialSpec(**kw)


class TestSampling:
    @pytest.mark.parametrize("N", [8, 32, 128])
    def test_mass_independent_of_N(self, N):
        g = make_grid(1, 256, 10.0)
        V = sample_VN(PotentialSpec(N=N, r0=2.0), g)
        assert g.weight * V.sum() == pytest.approx(1.0, rel=1e-2)

    def test_N_one_is_profile(self):
        g = make_grid(1, 64, 10.0)
        spec = PotentialSpec(N=1, r0=2.0)
        r = np.minimum(g.x, g.L - g.x)
        np.testing.assert_allclose(sample_VN(spec, g), spec.profile(r))

    def test_even_and_nonnegative(self):
        g = make_grid(2, 16, 6.0)
        V = sample_VN(PotentialSpec(N=4, r0=2.0, d=2), g)
        assert np.all(V >= 0)
        np.testing.assert_allclose(V, V[np.ix_(-np.arange(16) % 16, -np.arange(16) % 16)])

    def test_self_overlap_rejected(self):
        g = make_grid(1, 32, 2.0)
        with pytest.raises(ValueError):
            sample_VN(PotentialSpec(N=1, r0=1.5), g)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            sample_VN(PotentialSpec(d=2), make_grid(1, 16, 10.0))

    def test_vM(self):
        g = make_grid(1, 32, 10.0)
        spec = PotentialSpec(N=16, r0=2.0)
        np.testing.assert_allclose(sample_vM(spec, g) * 16, sample_VN(spec, g))

    @pytest.mark.parametrize("p", [1.5, 2.0, 6 / 5])
    def test_scaling_law_slope(self, p):
        g = make_grid(1, 4096, 10.0)
        ns = np.array([8, 16, 32, 64, 128])
        vals = [lp_norm(sample_vM(PotentialSpec(N=N, r0=2.0), g), g, p) for N in ns]
        assert loglog_slope(ns, vals) == pytest.approx(scaling_exponent(1, 0.5, p), abs=0.05)

    def test_scaling_exponent_arithmetic(self):
        assert scaling_exponent(3, 0.5, 1.5) == pytest.approx(1.5 - 1 - 1.0)
        assert scaling_exponent(1, 0.5, math.inf) == pytest.approx(-0.5)


class TestSplit:
    def test_sum_and_support(self):
        g = make_grid(1, 256, 10.0)
        spec = PotentialSpec(N=64, r0=2.0, eps=0.5)
        sp = split_main_tail(spec, g)
        vm = sample_vM(spec, g)
        assert math.sqrt(g.weight * np.sum((sp.main + sp.tail - vm) ** 2)) <= 1e-10
        spec_main = to_spectrum(sp.main, g)
        k = vector_norm(g.field_freqs())
        assert np.max(np.abs(spec_main[k > 0.2 * spec.M])) <= 1e-12 * np.max(np.abs(spec_main))

    def test_huge_eps_gives_no_tail(self):
        g = make_grid(1, 64, 10.0)
        sp = split_main_tail(PotentialSpec(N=16, r0=2.0, eps=5.0), g)
        assert sp.tail_sup <= 1e-14

    def test_straddling_cutoff_rejected(self):
        g = make_grid(1, 16, 10.0)
        # roll-off band [0.1 M, 0.2 M] = [4.2, 8.4] straddles the Nyquist frequency 5.03
        with pytest.raises(ValueError):
            split_main_tail(PotentialSpec(N=42.0**(1 / 0.6), beta=0.5, eps=0.1, r0=2.0), g)

    def test_tail_decreasing_in_N(self):
        g = make_grid(1, 512, 10.0)
        tails = [split_main_tail(PotentialSpec(N=N, r0=2.0, eps=0.1), g).tail_sup for N in (8, 16, 32, 64, 128)]
        assert all(b < a for a, b in zip(tails, tails[1:]))


class TestConvolution:
    def test_direct_sum(self, rng):
        g = make_grid(1, 24, 5.0)
        V = rng.standard_normal(24)
        rho = rng.standard_normal(24)
        direct = np.array([g.weight * sum(V[(i - j) % 24] * rho[j] for j in range(24)) for i in range(24)])
        np.testing.assert_allclose(convolve_density(V, rho, g), direct, atol=1e-12)

    def test_constant_density(self):
        g = make_grid(1, 64, 10.0)
        V = sample_VN(PotentialSpec(N=16, r0=2.0), g)
        out = convolve_density(V, np.full(64, 0.3), g)
        np.testing.assert_allclose(out, 0.3 * g.weight * V.sum(), atol=1e-13)

    def test_delta_like(self, rng):
        g = make_grid(2, 6, 3.0)
        V = np.zeros((6, 6))
        V[0, 0] = 1 / g.weight
        rho = rng.standard_normal((6, 6))
        np.testing.assert_allclose(convolve_density(V, rho, g), rho, atol=1e-12)

    def test_real_output(self, rng):
        g = make_grid(1, 16, 4.0)
        out = convolve_density(np.cos(g.x), rng.standard_normal(16), g)
        assert np.isrealobj(out)

    def test_grid_mismatch(self, grid1):
        with pytest.raises(ValueError):
            convolve_density(np.ones(8), np.ones(16), grid1)

    @given(st.integers(0, 2**31))
    @settings(max_examples=15, deadline=None)
    def test_commutes_with_shifts(self, seed):
        r = np.random.default_rng(seed)
        g = make_grid(1, 12, 3.0)
        V, rho = r.standard_normal(12), r.standard_normal(12)
        s = int(r.integers(12))
        np.testing.assert_allclose(convolve_density(V, np.roll(rho, s), g),
                                   np.roll(convolve_density(V, rho, g), s), atol=1e-12)
