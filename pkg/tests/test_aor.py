"""Quantile thresholding and the iteratively reweighted rejection loop."""

import numpy as np
import pytest

import pnl
from pnl import aor as aor_module
from pnl.aor import AorConfig, estimate_pose_aor, quantile_threshold
from pnl.errors import TooFewInliers

from conftest import scene_correspondences


class TestAorConfig:
    def test_defaults(self):
        config = AorConfig()
        assert config.quantile_schedule == (0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3)
        assert config.floor_quantile == 0.25
        assert config.min_inliers == 9

    def test_rejects_out_of_range_quantiles(self):
        with pytest.raises(ValueError):
            AorConfig(quantile_schedule=(0.9, 1.2))

    def test_rejects_min_inliers_below_solver_minimum(self):
        with pytest.raises(ValueError):
            AorConfig(min_inliers=8)


class TestQuantileThreshold:
    def test_schedule_over_iterations(self):
        config = AorConfig()
        residuals = np.arange(1.0, 11.0)
        expected_quantiles = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.25, 0.25, 0.25]
        for iteration, q in enumerate(expected_quantiles, start=1):
            value = quantile_threshold(residuals, iteration, config)
            assert value == np.sort(residuals)[int(np.ceil(q * 10)) - 1]

    def test_first_iteration_uses_point_nine(self):
        residuals = np.arange(1.0, 101.0)
        assert quantile_threshold(residuals, 1, AorConfig()) == 90.0

    def test_late_iterations_stay_at_the_floor(self):
        residuals = np.arange(1.0, 101.0)
        for iteration in (8, 9, 20, 50):
            assert quantile_threshold(residuals, iteration, AorConfig()) == 25.0

    def test_nearest_rank_median(self):
        residuals = np.arange(1.0, 11.0)
        config = AorConfig(quantile_schedule=(0.5,))
        assert quantile_threshold(residuals, 1, config) == 5.0

    def test_float_rank_artifacts(self):
        # 0.9 * 500 evaluates above 450 in floats; the rank must still be 450
        residuals = np.arange(1.0, 501.0)
        assert quantile_threshold(residuals, 1, AorConfig()) == 450.0

    def test_unsorted_input(self, rng):
        residuals = rng.permutation(np.arange(1.0, 11.0))
        config = AorConfig(quantile_schedule=(0.5,))
        assert quantile_threshold(residuals, 1, config) == 5.0

    def test_empty_residuals_rejected(self):
        with pytest.raises(ValueError):
            quantile_threshold([], 1, AorConfig())


class TestEstimatePoseAor:
    def test_clean_data_stays_close_to_plain_estimator(self):
        # the quantile schedule trims clean data too (down to the floor
        # quantile), so the result tracks but does not equal the plain fit
        gaps_theta, gaps_tau = [], []
        for seed in range(3):
            correspondences, truth, _ = scene_correspondences(
                seed, 500, sigma_p=2.0
            )
            plain = pnl.estimate_camera_pose(correspondences)
            robust = estimate_pose_aor(correspondences)
            gap = pnl.pose_errors(robust.pose, plain.pose)
            gaps_theta.append(gap.delta_theta_deg)
            gaps_tau.append(gap.delta_tau_m)
            assert robust.inlier_mask.sum() >= 125
        assert np.median(gaps_theta) < 1.0
        assert np.median(gaps_tau) < 1.5

    def test_rejects_injected_outliers(self):
        for seed in range(3):
            correspondences, truth, mask = scene_correspondences(
                seed, 500, sigma_p=2.0, outlier_fraction=0.10
            )
            result = estimate_pose_aor(correspondences)
            rejected = ~result.inlier_mask
            recall = rejected[mask].sum() / mask.sum()
            assert recall >= 0.9
            errors = pnl.pose_errors(result.pose, truth)
            assert errors.delta_tau_m < 2.0

    def test_score_history_strictly_decreases_until_stop(self):
        correspondences, _, _ = scene_correspondences(
            7, 200, sigma_p=2.0, outlier_fraction=0.15
        )
        result = estimate_pose_aor(correspondences)
        history = result.score_history
        assert len(history) == result.iterations
        assert np.all(np.diff(history[:-1]) < 0)
        assert result.final_error == history[-2]

    def test_weights_are_binary_and_masks_sized(self):
        correspondences, _, _ = scene_correspondences(
            3, 120, sigma_p=2.0, outlier_fraction=0.2
        )
        result = estimate_pose_aor(correspondences)
        assert result.inlier_mask.dtype == bool
        assert result.inlier_mask.shape == (120,)
        assert result.inlier_mask.sum() >= AorConfig().min_inliers

    def test_iteration_count_stays_bounded(self):
        counts = []
        for fraction in (0.10, 0.25):
            for seed in range(100):
                correspondences, _, _ = scene_correspondences(
                    seed, 500, sigma_p=2.0, outlier_fraction=fraction
                )
                result = estimate_pose_aor(correspondences)
                counts.append(result.iterations)
        assert np.mean(np.asarray(counts) <= 20) >= 0.95

    def test_prenormalization_deferred_to_final_solve(self, monkeypatch):
        calls = {"normalize": 0, "weiszfeld": 0, "solves": 0}
        original_normalize = aor_module.dlt.prenorm._normalize_units
        original_weiszfeld = aor_module.dlt.prenorm._weiszfeld
        original_solve = aor_module.dlt.solve_homogeneous_lsq

        def counting_normalize(*args, **kwargs):
            calls["normalize"] += 1
            return original_normalize(*args, **kwargs)

        def counting_weiszfeld(*args, **kwargs):
            calls["weiszfeld"] += 1
            return original_weiszfeld(*args, **kwargs)

        def counting_solve(*args, **kwargs):
            calls["solves"] += 1
            return original_solve(*args, **kwargs)

        monkeypatch.setattr(aor_module.dlt.prenorm, "_normalize_units",
                            counting_normalize)
        monkeypatch.setattr(aor_module.dlt.prenorm, "_weiszfeld",
                            counting_weiszfeld)
        monkeypatch.setattr(aor_module.dlt, "solve_homogeneous_lsq",
                            counting_solve)

        correspondences, _, _ = scene_correspondences(
            11, 200, sigma_p=2.0, outlier_fraction=0.1
        )
        result = estimate_pose_aor(correspondences)
        assert result.iterations > 2
        # conditioning runs exactly once, for the final inlier-only solve
        assert calls["normalize"] == 1
        assert calls["weiszfeld"] == 1
        assert calls["solves"] == result.iterations + 1

    def test_too_few_inliers_on_small_noisy_sets(self):
        correspondences, _, _ = scene_correspondences(2, 12, sigma_p=2.0)
        with pytest.raises(TooFewInliers):
            estimate_pose_aor(correspondences)

    def test_breakdown_beyond_half_outliers(self):
        # far past the documented break-down region: either the active set
        # collapses or the pose is useless
        outcomes = []
        for seed in range(3):
            correspondences, truth, _ = scene_correspondences(
                seed, 120, sigma_p=2.0, outlier_fraction=0.6
            )
            try:
                result = estimate_pose_aor(correspondences)
            except pnl.errors.PnlError:
                outcomes.append(True)
                continue
            errors = pnl.pose_errors(result.pose, truth)
            outcomes.append(errors.delta_tau_m > 1.0)
        assert any(outcomes)

    def test_initial_weights_must_reach_minimum(self):
        correspondences, _, _ = scene_correspondences(1, 20, sigma_p=1.0)
        zeroed = [
            pnl.Correspondence(c.line3d, c.line2d, weight=0)
            for c in correspondences[:15]
        ] + list(correspondences[15:])
        with pytest.raises(TooFewInliers):
            estimate_pose_aor(zeroed)
