import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hfbkit.grid import Grid, make_grid
from hfbkit.kernels import (
    MatrixState,
    adjoint,
    anticommutator,
    block,
    classify_symmetry,
    commutator,
    compose,
    diagonal,
    difference_kernel,
    hermiticity_residual,
    multiplication_kernel,
    operator_norm,
    rotate,
    skew,
    symmetrize,
    symmetry_residual,
    tensor,
    trace,
    unblock,
    unrotate,
)


def unit_grid(n):
    # h = 1 lattice for hand-computed examples
    return Grid(1, n, float(n))


class TestAlgebra:
    def test_compose_hand_example(self):
        g = unit_grid(2)
        u = np.array([[1.0, 2.0], [3.0, 4.0]])
        v = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_array_equal(compose(u, v, g), [[2.0, 1.0], [4.0, 3.0]])

    def test_compose_weight(self):
        g = make_grid(1, 4, 2.0)
        ones = np.ones((4, 4))
        np.testing.assert_allclose(compose(ones, ones, g), 2.0 * ones)

    def test_compose_shape_mismatch(self, grid1):
        with pytest.raises(ValueError):
            compose(np.eye(16), np.eye(15), grid1)
        with pytest.raises(ValueError):
            compose(np.eye(5), np.eye(5), grid1)

    def test_symm_skew(self, rng):
        a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        assert classify_symmetry(symmetrize(a)) == "symmetric"
        s = skew(a)
        np.testing.assert_allclose(s, -adjoint(s))

    def test_commutators(self, grid1, rng):
        a = rng.standard_normal(grid1.kernel_shape)
        b = rng.standard_normal(grid1.kernel_shape)
        np.testing.assert_allclose(commutator(a, b, grid1) + anticommutator(b, a, grid1),
                                   2 * compose(a, b, grid1))

    def test_multiplication_kernel(self, grid1, rng):
        w = rng.standard_normal(16)
        f = rng.standard_normal(16)
        applied = grid1.weight * multiplication_kernel(w, grid1) @ f
        np.testing.assert_allclose(applied, w * f)

    def test_difference_kernel_enumeration(self):
        g = make_grid(2, 4, 1.0)
        v = np.arange(16.0).reshape(4, 4)
        V = difference_kernel(v, g)
        for i in range(16):
            xi = np.unravel_index(i, (4, 4))
            for j in range(16):
                yj = np.unravel_index(j, (4, 4))
                assert V[i, j] == v[(xi[0] - yj[0]) % 4, (xi[1] - yj[1]) % 4]

    def test_trace_diagonal_tensor(self, grid1, rng):
        f = rng.standard_normal(16)
        gk = tensor(np.conj(f), f)
        assert trace(gk, grid1) == pytest.approx(grid1.weight * np.sum(f * f))
        np.testing.assert_allclose(diagonal(gk, grid1), f * f)

    def test_operator_norm_of_delta(self, grid1):
        assert operator_norm(grid1.delta(), grid1) == pytest.approx(1.0)


class TestClassification:
    def test_kinds(self):
        assert classify_symmetry(np.array([[1.0, 2.0], [2.0, 3.0]])) == "both"
        assert classify_symmetry(np.array([[1, 2j], [2j, 1]])) == "symmetric"
        assert classify_symmetry(np.array([[1, 2j], [-2j, 1]])) == "hermitian"
        assert classify_symmetry(np.array([[1, 2], [3, 4]])) == "none"

    def test_tolerance_is_relative(self):
        a = np.array([[1e6, 1e6], [1e6 + 1e-5, 1e6]])
        assert classify_symmetry(a) == "both"
        assert symmetry_residual(a) == pytest.approx(1e-5, rel=1e-3)
        assert hermiticity_residual(a) == pytest.approx(1e-5, rel=1e-3)


class TestRotation:
    def test_enumeration(self):
        g = make_grid(1, 5, 1.0)
        a = np.arange(25.0).reshape(5, 5)
        b = rotate(a, g)
        for x in range(5):
            for y in range(5):
                assert b[(x - y) % 5, (x + y) % 5] == a[x, y]

    @given(st.sampled_from([5, 7, 9]), st.integers(1, 2), st.integers(0, 2**31))
    @settings(max_examples=20, deadline=None)
    def test_round_trip(self, n, d, seed):
        if d == 2 and n > 5:
            n = 5
        g = make_grid(d, n, 1.0)
        a = np.random.default_rng(seed).standard_normal((2,) + g.kernel_shape)
        np.testing.assert_array_equal(unrotate(rotate(a, g), g), a)
        np.testing.assert_array_equal(rotate(unrotate(a, g), g), a)

    def test_even_rejected(self):
        g = make_grid(1, 4, 1.0)
        with pytest.raises(ValueError):
            rotate(np.eye(4), g)


class TestBlocks:
    def test_round_trip(self, rng):
        gam = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        lam = rng.standard_normal((3, 3))
        m = block(gam, lam)
        g2, l2 = unblock(m)
        np.testing.assert_array_equal(g2, gam)
        np.testing.assert_array_equal(l2, lam)
        np.testing.assert_array_equal(m[:3, 3:], -np.conj(lam))

    def test_matrix_state_kernels(self, rng):
        ks = [rng.standard_normal((4, 4)) for _ in range(4)]
        ms = MatrixState.from_kernels(0.0, *ks)
        for a, b in zip(ms.kernels(), ks):
            np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(MatrixState.s3(2), [-1, -1, 1, 1])
