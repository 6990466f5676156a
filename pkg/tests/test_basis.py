"""Nodal basis: LGL nodes/weights, differentiation matrices, interpolation."""
import numpy as np
import pytest

from swsolver.basis import (BasisSet, diff_matrix, lagrange_interp_matrix,
                            lgl_nodes, make_basis)


class TestLglNodes:
    def test_order_one_endpoints(self):
        x, w = lgl_nodes(1)
        np.testing.assert_allclose(x, [-1.0, 1.0])
        np.testing.assert_allclose(w, [1.0, 1.0])

    def test_order_two_closed_form(self):
        x, w = lgl_nodes(2)
        np.testing.assert_allclose(x, [-1.0, 0.0, 1.0], atol=1e-15)
        np.testing.assert_allclose(w, [1 / 3, 4 / 3, 1 / 3], atol=1e-15)

    def test_order_four_known_roots(self):
        # roots of (1 - x^2) P4'(x): 0, +-sqrt(3/7), endpoints
        x, _ = lgl_nodes(4)
        expected = [-1.0, -np.sqrt(3 / 7), 0.0, np.sqrt(3 / 7), 1.0]
        np.testing.assert_allclose(x, expected, atol=1e-14)

    def test_rejects_order_zero(self):
        with pytest.raises(ValueError):
            lgl_nodes(0)

    @pytest.mark.parametrize("N", [1, 2, 3, 4, 5, 6, 7, 8])
    def test_invariants(self, N):
        x, w = lgl_nodes(N)
        assert x[0] == -1.0 and x[-1] == 1.0
        assert np.all(np.diff(x) > 0)
        assert np.all(w > 0)
        np.testing.assert_allclose(w.sum(), 2.0, atol=1e-14)
        # symmetry
        np.testing.assert_allclose(x, -x[::-1], atol=1e-15)

    @pytest.mark.parametrize("N", [2, 3, 4, 5, 6])
    def test_quadrature_exact_to_degree_2N_minus_1(self, N):
        x, w = lgl_nodes(N)
        d = 2 * N - 1
        # exact integral of x^d over [-1,1] is 0 for odd d, 2/(d+1) for even
        exact = 0.0 if d % 2 else 2.0 / (d + 1)
        np.testing.assert_allclose(np.sum(w * x**d), exact, atol=1e-13)
        # degree 2N (even) is generally not integrated exactly
        err = abs(np.sum(w * x ** (2 * N)) - 2.0 / (2 * N + 1))
        assert err > 1e-6

    def test_newton_oracle_order_four(self):
        # independent check: refine each computed interior node by bisection
        # on f(x) = (1 - x^2) P4'(x)
        from numpy.polynomial import legendre as npleg
        c = np.zeros(5)
        c[-1] = 1.0
        dc = npleg.legder(c)
        f = lambda t: (1 - t * t) * npleg.legval(t, dc)
        x, _ = lgl_nodes(4)
        for xi in x[1:-1]:
            lo, hi = xi - 1e-3, xi + 1e-3
            assert f(lo) * f(hi) < 0 or abs(f(xi)) < 1e-12
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if f(lo) * f(mid) <= 0:
                    hi = mid
                else:
                    lo = mid
            assert abs(0.5 * (lo + hi) - xi) < 1e-12


class TestDiffMatrix:
    def test_linear_element(self):
        D = diff_matrix(np.array([-1.0, 1.0]))
        np.testing.assert_allclose(D, [[-0.5, 0.5], [-0.5, 0.5]], atol=1e-15)

    @pytest.mark.parametrize("N", [1, 2, 3, 4, 6, 8])
    def test_row_sums_zero(self, N):
        x, _ = lgl_nodes(N)
        D = diff_matrix(x)
        np.testing.assert_allclose(D.sum(axis=1), 0.0, atol=1e-12)

    @pytest.mark.parametrize("N", [1, 2, 3, 4, 6, 8])
    def test_derivative_of_x_is_one(self, N):
        x, _ = lgl_nodes(N)
        D = diff_matrix(x)
        np.testing.assert_allclose(D @ x, 1.0, atol=1e-12)

    @pytest.mark.parametrize("N", [3, 4, 5, 6])
    def test_cubic_exact(self, N):
        x, _ = lgl_nodes(N)
        D = diff_matrix(x)
        np.testing.assert_allclose(D @ x**3, 3 * x**2, atol=1e-11)

    @pytest.mark.parametrize("N", [2, 3, 4, 5])
    def test_polynomial_exactness_up_to_N(self, N):
        x, _ = lgl_nodes(N)
        D = diff_matrix(x)
        rng = np.random.default_rng(7)
        coeffs = rng.standard_normal(N + 1)
        p = np.polyval(coeffs, x)
        dp = np.polyval(np.polyder(coeffs), x)
        np.testing.assert_allclose(D @ p, dp, atol=1e-10)

    def test_duplicate_nodes_rejected(self):
        with pytest.raises(ValueError):
            diff_matrix(np.array([-1.0, 0.0, 0.0, 1.0]))


class TestMakeBasis:
    def test_fields(self):
        b = make_basis(4)
        assert isinstance(b, BasisSet)
        assert b.order == 4 and b.n_nodes == 5
        assert b.nodes.shape == (5,) and b.diff_matrix.shape == (5, 5)


class TestInterpolation:
    def test_reproduces_nodal_values(self):
        x, _ = lgl_nodes(4)
        P = lagrange_interp_matrix(x, x)
        np.testing.assert_allclose(P, np.eye(5), atol=1e-12)

    def test_polynomial_reproduction(self):
        x, _ = lgl_nodes(4)
        t = np.linspace(-1, 1, 17)
        P = lagrange_interp_matrix(x, t)
        np.testing.assert_allclose(P @ x**4, t**4, atol=1e-12)
