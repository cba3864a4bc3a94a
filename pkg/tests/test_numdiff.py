# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import pytest

from srocmeta.model.likelihood import NotPositiveDefiniteError
from srocmeta.model.numdiff import DifferentiationError, hessian, jacobian

FREE_LOWER = np.full(2, -np.inf)
FREE_UPPER = np.full(2, np.inf)


class TestJacobian:
    def test_scalar_gradient(self):
        def f(x):
            return np.sin(x[0]) + x[0] * x[1] ** 2

        x = np.array([0.3, 1.2])
        g = jacobian(f, x, FREE_LOWER, FREE_UPPER)
        assert g.shape == (2,)
        assert g[0] == pytest.approx(np.cos(0.3) + 1.44, rel=1e-7)
        assert g[1] == pytest.approx(2 * 0.3 * 1.2, rel=1e-7)

    def test_vector_function(self):
        def f(x):
            return np.array([x[0] * x[1], x[0] + 3 * x[1], np.exp(x[1])])

        x = np.array([2.0, 0.5])
        J = jacobian(f, x, FREE_LOWER, FREE_UPPER)
        expected = np.array([[0.5, 2.0], [1.0, 3.0], [0.0, np.exp(0.5)]])
        assert J.shape == (3, 2)
        assert np.allclose(J, expected, rtol=1e-7, atol=1e-9)

    def test_one_sided_at_bound(self):
        def f(x):
            assert x[0] >= 0.0
            return x[0] ** 2 + x[1]

        g = jacobian(f, np.array([0.0, 1.0]), np.array([0.0, -np.inf]), FREE_UPPER)
        assert g[0] == pytest.approx(0.0, abs=1e-4)
        assert g[1] == pytest.approx(1.0)

    def test_halves_step_on_nan(self):
        def f(x):
            return np.sqrt(x[0]) + x[1]

        g = jacobian(f, np.array([1e-6, 0.0]), FREE_LOWER, FREE_UPPER)
        assert np.isfinite(g[0]) and g[0] > 0

    def test_halves_step_when_objective_raises(self):
        def f(x):
            if x[0] > 1.0 + 2e-6:
                raise NotPositiveDefiniteError("not positive definite")
            return x[0] ** 2 + x[1]

        g = jacobian(f, np.array([1.0, 0.0]), FREE_LOWER, FREE_UPPER)
        assert g[0] == pytest.approx(2.0, rel=1e-6)
        assert g[1] == pytest.approx(1.0, rel=1e-6)

    def test_raising_everywhere_but_the_point(self):
        x0 = np.array([1.0, 0.0])

        def f(x):
            if not np.array_equal(x, x0):
                raise np.linalg.LinAlgError("singular")
            return 0.0

        with pytest.raises(DifferentiationError, match="halvings"):
            jacobian(f, x0, FREE_LOWER, FREE_UPPER)

    def test_non_finite_start(self):
        with pytest.raises(DifferentiationError):
            jacobian(lambda x: np.log(x[0] - 1), np.array([0.5, 0.0]), FREE_LOWER, FREE_UPPER)


class TestHessian:
    def test_quadratic(self):
        A = np.array([[3.0, 1.0], [1.0, 2.0]])

        def f(x):
            return 0.5 * x @ A @ x

        H = hessian(f, np.array([0.4, -0.7]), FREE_LOWER, FREE_UPPER)
        assert np.allclose(H, A, rtol=1e-5)
        assert np.array_equal(H, H.T)

    def test_stencil_moves_off_bound(self):
        A = np.array([[2.0, 0.5], [0.5, 1.0]])

        def f(x):
            assert x[0] >= 0.0
            return 0.5 * x @ A @ x

        H = hessian(f, np.array([0.0, 1.0]), np.array([0.0, -np.inf]), FREE_UPPER)
        assert np.allclose(H, A, rtol=1e-5)

    def test_halves_steps_when_objective_raises(self):
        A = np.array([[3.0, 1.0], [1.0, 2.0]])

        def f(x):
            if x[0] > 1.0 + 3e-5:
                raise np.linalg.LinAlgError("not positive definite")
            return 0.5 * x @ A @ x

        H = hessian(f, np.array([1.0, 0.5]), FREE_LOWER, FREE_UPPER)
        assert np.allclose(H, A, rtol=1e-4)
