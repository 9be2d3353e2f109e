import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hfbkit.evolution import Interaction, StateHFB, Trajectory, evolve, assemble_state, random_field, random_pair_kernel
from hfbkit.grid import Grid, apply_multiplier, bessel, make_grid
from hfbkit.norms import (
    ADMISSIBLE,
    INF,
    LPStack,
    MIN_FRAMES,
    NormSpec,
    bernstein_ratio,
    bruteforce_rotated_norm,
    conserved_monitors,
    derivative_norm,
    double_square_rotated,
    dual_exponent,
    evaluate_layout,
    family_norms,
    is_admissible,
    layout_norm,
    lp_project,
    lp_reconstruct,
    mixed_norm,
    morawetz,
    quarter_time_derivative,
    seminorm_constant,
    sobolev_angle_constant,
    sobolev_seminorm_time,
    square_function,
    window_slice,
)


def kernel(rng, g):
    return rng.standard_normal(g.kernel_shape) + 1j * rng.standard_normal(g.kernel_shape)


def static_trajectory(g, lam_p, nframes, frame_dt=0.1):
    z = np.zeros(g.field_shape, dtype=complex)
    traj = Trajectory(g, frame_dt, 1)
    gam = np.zeros(g.kernel_shape, dtype=complex)
    for i in range(nframes):
        traj.append(StateHFB(i * frame_dt, z, lam_p, gam))
    return traj


class TestLayouts:
    def test_constant_kernel_closed_form(self):
        g = make_grid(1, 8, 3.0)
        c = 0.7
        series = np.full((5,) + g.kernel_shape, c)
        for p, q in [(2.0, 4.0), (INF, 2.0), (4.0, INF)]:
            got = layout_norm(series, g, [("t", p), ("x", q), ("y", 2.0)], frame_dt=0.2)
            tpart = 1.0 if math.isinf(p) else (5 * 0.2) ** (1 / p)
            xpart = 1.0 if math.isinf(q) else 3.0 ** (1 / q)
            assert got == pytest.approx(c * math.sqrt(3.0) * xpart * tpart, rel=1e-12)

    def test_hand_example(self):
        g = Grid(1, 2, 2.0)
        a = np.ones((2, 2))
        assert evaluate_layout(a, g, [("x", 2.0), ("y", 2.0)]) == pytest.approx(2.0)
        assert evaluate_layout(a, g, [("x", INF), ("y", 2.0)]) == pytest.approx(math.sqrt(2.0))

    @pytest.mark.parametrize("n", [7, 8])
    @pytest.mark.parametrize("q", [2.0, 3.0, INF])
    def test_difference_kernel_rotated(self, n, q):
        g = make_grid(1, n, 4.0)
        gv = np.cos(g.x) + 0.3
        a = gv[(np.arange(n)[:, None] - np.arange(n)[None, :]) % n]
        got = layout_norm(a, g, [("x-y", q), ("x+y", 2.0)])
        gq = np.max(np.abs(gv)) if math.isinf(q) else (g.weight * np.sum(np.abs(gv) ** q)) ** (1 / q)
        assert got == pytest.approx(math.sqrt(g.L) * gq, rel=1e-12)

    @given(st.integers(0, 2**31), st.sampled_from([4, 5, 6, 7]), st.sampled_from(["x-y", "x+y"]),
           st.sampled_from([1.0, 2.0, 3.5, INF]))
    @settings(max_examples=30, deadline=None)
    def test_rotated_matches_enumeration(self, seed, n, outer, q):
        g = make_grid(1, n, 2.0)
        a = kernel(np.random.default_rng(seed), g)
        partner = "x+y" if outer == "x-y" else "x-y"
        got = layout_norm(a, g, [(outer, q), (partner, 2.0)])
        assert got == pytest.approx(bruteforce_rotated_norm(a, g, q, outer), rel=1e-12)

    def test_rotated_in_two_dimensions(self, rng):
        g = make_grid(2, 4, 2.0)
        a = kernel(rng, g)
        got = layout_norm(a, g, [("x-y", 3.0), ("x+y", 2.0)])
        assert got == pytest.approx(bruteforce_rotated_norm(a, g, 3.0, "x-y"), rel=1e-12)

    @given(st.integers(0, 2**31), st.floats(1.0, 8.0), st.floats(1.0, 8.0))
    @settings(max_examples=30, deadline=None)
    def test_holder_and_minkowski(self, seed, p, q):
        g = make_grid(1, 6, 3.0)
        a = kernel(np.random.default_rng(seed), g)
        lo, hi = min(p, q), max(p, q)
        n_lo = layout_norm(a, g, [("x", lo), ("y", 2.0)])
        n_hi = layout_norm(a, g, [("x", hi), ("y", 2.0)])
        # Hölder on a finite measure space of volume L
        assert n_lo <= g.L ** (1 / lo - 1 / hi) * n_hi * (1 + 1e-12)
        # Minkowski: swapping an outer L^q (q >= 2) inside an L^2 can only increase the norm
        swapped = layout_norm(a, g, [("y", 2.0), ("x", hi)]) if hi >= 2 else None
        if swapped is not None:
            assert n_hi <= swapped * (1 + 1e-12)

    def test_l2_l2_is_frobenius(self, rng):
        g = make_grid(1, 8, 2.0)
        a = kernel(rng, g)
        for layout in ([("x", 2.0), ("y", 2.0)], [("x-y", 2.0), ("x+y", 2.0)]):
            assert layout_norm(a, g, layout) == pytest.approx(g.weight * np.linalg.norm(a), rel=1e-12)

    def test_layout_errors(self, rng):
        g = make_grid(1, 8, 2.0)
        a = kernel(rng, g)
        with pytest.raises(ValueError):
            layout_norm(a, g, [("x", 2.0), ("x", 2.0)])
        with pytest.raises(ValueError):
            layout_norm(a[None], g, [("t", 2.0), ("x", 2.0), ("y", 2.0)])
        with pytest.raises(ValueError):
            layout_norm(np.ones(8), g, [("x-y", 2.0), ("x+y", 2.0)])


class TestSpecs:
    def test_admissible_tables(self):
        for d, fam in ADMISSIBLE.items():
            assert all(is_admissible(p, q, d) for p, q in fam)
        assert not is_admissible(4.0, 4.0, 1)

    def test_dual_exponent(self):
        assert dual_exponent(4.0) == pytest.approx(4 / 3)
        assert dual_exponent(INF) == 1.0 and dual_exponent(1.0) == INF

    def test_spec_layouts(self):
        s = NormSpec(4.0, INF, "x-y")
        assert s.layout() == [("t", 4.0), ("x-y", INF), ("x+y", 2.0)]
        assert NormSpec(4.0, 3.0, collapsing=True).layout() == [("x", 3.0), ("t", 4.0), ("y", 2.0)]
        with pytest.raises(ValueError):
            NormSpec(0.5, 2.0)
        with pytest.raises(ValueError):
            NormSpec(2.0, 2.0, "z")

    def test_mixed_norm_on_field_and_kernel(self, rng):
        g = make_grid(1, 8, 2.0)
        f = random_field(g, rng)
        assert mixed_norm(f, NormSpec(2.0, 2.0), g) == pytest.approx(
            math.sqrt(g.weight * np.sum(np.abs(f) ** 2)))
        with pytest.raises(ValueError):
            mixed_norm(f, NormSpec(2.0, 2.0, "x-y"), g)

    def test_window_slice(self):
        t = np.arange(11) * 0.1
        assert window_slice(t, (0.2, 0.5)) == slice(2, 6)
        assert window_slice(t, None) == slice(None)
        with pytest.raises(ValueError):
            window_slice(t, (0.5, 2.0))


class TestFamilies:
    def test_plane_wave_closed_form(self):
        g = make_grid(1, 8, 2 * np.pi)
        a, b = 1.0, 2.0
        nt, fdt = 6, 0.05
        t = np.arange(nt) * fdt
        x = g.x
        lam = np.exp(1j * (a * x[None, :, None] + b * x[None, None, :] - (a * a + b * b) * t[:, None, None]))
        res = family_norms(lam, g, fdt, ADMISSIBLE[1])
        expect = {}
        for p, q in ADMISSIBLE[1]:
            tp = 1.0 if math.isinf(p) else (nt * fdt) ** (1 / p)
            xq = 1.0 if math.isinf(q) else g.L ** (1 / q)
            expect[(p, q)] = tp * xq * math.sqrt(g.L)
        assert res.label == "sup"
        for (p, q, ax), v in res.members.items():
            assert v == pytest.approx(expect[(p, q)], rel=1e-12)
        assert res.value == pytest.approx(max(expect.values()), rel=1e-12)

    def test_dual_is_sampled_inf(self, rng):
        g = make_grid(1, 8, 2.0)
        vals = kernel(rng, g)[None].repeat(4, axis=0)
        res = family_norms(vals, g, 0.1, ADMISSIBLE[1], dual_range=(3.0, 8.0))
        assert res.label == "sampled-inf"
        assert {k[:2] for k in res.members} == {(4.0, INF), (6.0, 6.0), (8.0, 4.0)}
        assert res.value == min(res.members.values())

    def test_family_errors(self, rng):
        g = make_grid(1, 8, 2.0)
        vals = kernel(rng, g)[None]
        with pytest.raises(ValueError, match="empty"):
            family_norms(vals, g, 0.1, ())
        with pytest.raises(ValueError, match="admissible"):
            family_norms(vals, g, 0.1, [(4.0, 4.0)])
        with pytest.raises(ValueError):
            family_norms(vals, g, 0.1, ADMISSIBLE[1], dual_range=(2.0, 8.0))
        with pytest.raises(ValueError):
            family_norms(vals, g, 0.1, ADMISSIBLE[1], dual_range=(9.0, 10.0))


class TestTimeDerivative:
    def test_constant_series(self):
        series = np.full((32, 5), 2.5 + 1j)
        td = quarter_time_derivative(series, 0.1)
        assert np.max(np.abs(td.extended)) <= 1e-3

    def test_eigenfunction(self):
        nt, dt = 64, 0.05
        omega = 2 * np.pi * 5 / (nt * dt)
        t = np.arange(nt) * dt
        series = np.exp(1j * omega * t)[:, None] * np.ones(3)
        td = quarter_time_derivative(series, dt, taper=0.0, pad=1)
        np.testing.assert_allclose(td.values, omega**0.25 * series, atol=1e-12)

    def test_too_few_frames(self):
        with pytest.raises(ValueError, match=str(MIN_FRAMES)):
            quarter_time_derivative(np.ones((MIN_FRAMES - 1, 2)), 0.1)
        with pytest.raises(ValueError):
            sobolev_seminorm_time(np.ones((4, 2)), 0.1)

    @pytest.mark.parametrize("k", [0.1, 0.25, 0.4])
    def test_seminorm_constant_quadrature(self, k):
        # C(k) = ∫ |e^{iτ} - 1|^2 / |τ|^{1+2k} dτ over the real line
        near, _ = integrate.quad(lambda s: 4 * (1 - math.cos(s)) * s ** (-1 - 2 * k), 0, 1)
        tail_osc, _ = integrate.quad(lambda s: s ** (-1 - 2 * k), 1, np.inf, weight="cos", wvar=1.0)
        tail = 4 / (2 * k) - 4 * tail_osc
        assert seminorm_constant(k) == pytest.approx(near + tail, rel=1e-7)

    def test_seminorm_constant_range(self):
        with pytest.raises(ValueError):
            seminorm_constant(0.5)

    def test_spectral_and_difference_paths_agree(self):
        nt, dt = 256, 0.01
        t = np.arange(nt) * dt
        series = np.stack([np.sin(2 * np.pi * t), np.cos(3 * t) * t], axis=1)
        td = quarter_time_derivative(series, dt)
        a = derivative_norm(td, 1.0)
        b = sobolev_seminorm_time(series, dt, 0.25, 1.0)
        assert a == pytest.approx(b, rel=1e-2)


class TestLittlewoodPaley:
    @pytest.fixture
    def g(self):
        # unit frequency spacing: lattice frequencies are the integers -8..7
        return make_grid(1, 16, 2 * np.pi)

    def test_partition_of_unity(self, g):
        st = LPStack(g)
        total = sum(st.symbol(k)(g.freq[None]) for k in st.bands)
        np.testing.assert_allclose(total, 1.0, atol=1e-14)

    @pytest.mark.parametrize("binding", ["x", "y", "x-y", "x+y"])
    def test_reconstruction(self, g, rng, binding):
        a = kernel(rng, g)
        np.testing.assert_allclose(lp_reconstruct(a, LPStack(g, binding)), a, atol=1e-12)

    def test_single_band_square_function(self, g):
        f = np.exp(4j * g.x)
        np.testing.assert_allclose(square_function(f, LPStack(g)), 1.0, atol=1e-12)

    def test_commutes_with_multipliers(self, g, rng):
        f = random_field(g, rng, band=8)
        st = LPStack(g)
        m = bessel(0.7)
        for k in st.bands:
            np.testing.assert_allclose(lp_project(apply_multiplier(m, f, g), st, k),
                                       apply_multiplier(m, lp_project(f, st, k), g), atol=1e-12)

    def test_double_square_function_l2(self, g, rng):
        a = kernel(rng, g)
        sq = double_square_rotated(a, LPStack(g, "x-y"), LPStack(g, "x+y"))
        assert np.linalg.norm(sq) <= np.linalg.norm(a) * (1 + 1e-12)

    def test_bernstein_closed_form(self, g):
        f = np.exp(4j * g.x)
        st = LPStack(g)
        assert bernstein_ratio(f, st, 2, 0.6) == pytest.approx(17**0.3 / 2**1.2, rel=1e-12)
        assert math.isnan(bernstein_ratio(f, st, 0, 0.6))

    def test_k_max_checks(self, g):
        assert LPStack(g).k_max == 3
        assert LPStack(g, "x-y").k_max == 4
        with pytest.raises(ValueError):
            LPStack(g, k_max=2)
        with pytest.raises(ValueError):
            LPStack(g, k_max=5)
        with pytest.raises(ValueError):
            LPStack(g).symbol(4)

    def test_sobolev_angle_bound(self):
        g = make_grid(1, 12, 5.0)
        alpha = 0.6
        C = sobolev_angle_constant(g, alpha)
        r = np.random.default_rng(11)
        for _ in range(20):
            a = kernel(r, g)
            lhs = layout_norm(a, g, [("x-y", INF), ("x+y", 2.0)])
            rhs = C * layout_norm(apply_multiplier(bessel(alpha, "x"), a, g, kind="kernel"), g,
                                  [("x", 2.0), ("y", 2.0)])
            assert lhs <= rhs * (1 + 1e-12)


class TestMonitors:
    def test_morawetz_static(self):
        g = make_grid(1, 8, 2.0)
        traj = static_trajectory(g, np.zeros(g.kernel_shape, dtype=complex), 5)
        for s in traj.frames:
            s.phi = np.full(g.field_shape, 0.5, dtype=complex)
        # ρ = 1/4 everywhere over 5 frames of width 0.1
        assert morawetz(traj) == pytest.approx(math.sqrt(0.5 * 2.0 / 16), rel=1e-12)

    def test_conserved_monitors(self):
        g = make_grid(1, 16, 10.0)
        rng = np.random.default_rng(0)
        state = assemble_state(g, random_field(g, rng), random_pair_kernel(g, 0.5, rng), 8.0)
        inter = Interaction.zero(g, 8.0)
        traj = evolve(state, inter, 1e-3, 40, stride=10)
        m = conserved_monitors(traj, inter)
        assert np.max(np.abs(m["trace"] - 1.0)) <= 1e-12
        assert np.all(np.diff(m["morawetz_partial"]) >= 0)
        assert m["morawetz_partial"][-1] == pytest.approx(morawetz(traj), rel=1e-12)
