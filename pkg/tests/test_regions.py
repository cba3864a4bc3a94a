# SPDX-FileCopyrightText: 2026 Greg Brandt <brandt.greg@gmail.com>
#
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import pytest
from scipy.special import expit, logit

from srocmeta.fit.estimate import boundary_flags
from srocmeta.fit.result import FitResult
from srocmeta.model.likelihood import Criterion, Method, Theta
from srocmeta.sroc.regions import (
    Ellipse,
    best_threshold,
    summary_point,
    youden_index,
    youden_optimal,
)

# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

THETA = Theta(2.0, 1.0, -2.0, 1.5, 0.1, 0.1, 0.6)


def fit_result(theta: Theta = THETA, registry=(-1.0, 0.0, 0.5, 1.0, 2.0)) -> FitResult:
    a = np.array(
        [
            [0.020, 0.004, -0.006, 0.001],
            [0.004, 0.030, 0.001, -0.008],
            [-0.006, 0.001, 0.015, 0.002],
            [0.001, -0.008, 0.002, 0.025],
        ]
    )
    cov = np.eye(7) * 0.01
    cov[:4, :4] = a
    return FitResult(
        theta=theta,
        cov=cov,
        objective=-50.0,
        converged=True,
        boundary_flags=boundary_flags(theta, 1e-4),
        method=Method.PSEUDO,
        criterion=Criterion.REML,
        registry=tuple(registry),
        n_studies=20,
    )


# ---------------------------------------------------------------------------
# Summary point and regions
# ---------------------------------------------------------------------------


class TestSummaryPoint:
    def test_threshold_zero(self):
        result = fit_result()
        point = summary_point(0.0, result)
        assert point.sse == pytest.approx(expit(2.0))
        assert point.ssp == pytest.approx(expit(1.0))
        assert np.allclose(point.cov, result.beta_cov[:2, :2])

    def test_propagated_covariance(self):
        result = fit_result()
        point = summary_point(0.5, result)
        a = np.array([[1.0, 0.0, 0.5, 0.0], [0.0, 1.0, 0.0, 0.5]])
        assert np.allclose(point.cov, a @ result.beta_cov @ a.T)
        assert point.sse == pytest.approx(expit(2.0 - 1.0))

    def test_prediction_without_heterogeneity(self):
        theta = Theta(2.0, 1.0, -2.0, 1.5, 0.0, 0.0, 0.6)
        point = summary_point(0.5, fit_result(theta))
        assert np.allclose(point.prediction.cov, point.confidence.cov)

    def test_prediction_is_wider(self):
        point = summary_point(0.5, fit_result())
        assert np.all(
            np.linalg.eigvalsh(point.prediction.cov - point.confidence.cov) >= -1e-12
        )

    def test_level_defaults_to_fit(self):
        assert summary_point(0.0, fit_result()).confidence.level == 0.95
        assert summary_point(0.0, fit_result(), level=0.8).prediction.level == 0.8


class TestEllipse:
    def test_coverage_of_gaussian_draws(self):
        point = summary_point(0.5, fit_result())
        rng = np.random.default_rng(3)
        draws = rng.multivariate_normal(
            point.confidence.center, point.confidence.cov, size=100_000
        )
        rate = point.confidence.contains(draws).mean()
        assert rate == pytest.approx(0.95, abs=0.01)

    def test_boundary_lies_on_ellipse(self):
        ellipse = Ellipse(np.array([1.0, 0.5]), np.array([[0.2, 0.05], [0.05, 0.1]]), 0.95)
        outline = ellipse.boundary(50)
        assert outline.shape == (50, 2)
        assert np.all((outline > 0) & (outline < 1))
        z = np.column_stack([logit(outline[:, 1]), logit(1.0 - outline[:, 0])])
        d = z - ellipse.center
        dist = np.einsum("ni,ni->n", d, np.linalg.solve(ellipse.cov, d.T).T)
        assert np.allclose(dist, ellipse.radius_sq, rtol=1e-6)

    def test_radius(self):
        assert Ellipse(np.zeros(2), np.eye(2), 0.95).radius_sq == pytest.approx(5.991465, abs=1e-6)


# ---------------------------------------------------------------------------
# Youden-optimal threshold
# ---------------------------------------------------------------------------


class TestYouden:
    def test_single_candidate(self):
        point = best_threshold(THETA.beta, [0.7])
        assert point.threshold == 0.7
        assert point.sse == pytest.approx(expit(2.0 - 1.4))
        assert point.index == pytest.approx(float(youden_index(0.7, THETA.beta)))

    def test_flat_index_picks_smallest(self):
        chance = np.array([-0.7, 0.7, -1.3, 1.3])
        assert best_threshold(chance, [0.5, -1.0, 2.0]).threshold == -1.0

    def test_grid_nearest_to_continuous_maximum(self):
        dense = np.linspace(-1.0, 2.0, 300_001)
        x_star = dense[np.argmax(youden_index(dense, THETA.beta))]
        candidates = np.arange(-1.0, 2.0 + 1e-9, 0.25)
        nearest = candidates[np.argmin(np.abs(candidates - x_star))]
        assert best_threshold(THETA.beta, candidates).threshold == pytest.approx(nearest)

    def test_refine(self):
        dense = np.linspace(-1.0, 2.0, 300_001)
        x_star = dense[np.argmax(youden_index(dense, THETA.beta))]
        point = best_threshold(THETA.beta, [-1.0, 0.5, 2.0], refine=True)
        assert point.threshold == pytest.approx(x_star, abs=1e-3)

    def test_empty_candidates(self):
        with pytest.raises(ValueError):
            best_threshold(THETA.beta, [])

    def test_uses_registry(self):
        point = youden_optimal(fit_result(registry=(-1.0, 0.0, 2.0)))
        assert point.threshold == 0.0
        assert "x* = 0" in point.to_text()
