import numpy as np
import pytest

from handover_sim.evaluation import (GAP_USER, UserGazeModel, gap_suite,
                                     gaze_suite, grasp_suite, motion_suite,
                                     selection_suite, timing_suite, evaluate)
from handover_sim.pipeline import PipelineConfig
from handover_sim.scene import catalog_by_key


class TestUserGazeModel:
    def test_heatmap_centers_near_box(self):
        cfg = PipelineConfig()
        user = UserGazeModel(noise_deg=0.1, spread_frac=0.2)
        rng = np.random.default_rng(0)
        box = (250, 180, 350, 280)
        centers = []
        for _ in range(40):
            hm = user.heatmap_for_box(box, cfg, rng)
            centers.append(hm.center)
        centers = np.asarray(centers)
        assert abs(centers[:, 0].mean() - 300) < 15
        assert abs(centers[:, 1].mean() - 230) < 15

    def test_spread_scales_with_box(self):
        cfg = PipelineConfig()
        user = UserGazeModel(noise_deg=0.05, spread_frac=1.0)
        small = (310, 230, 330, 250)
        large = (220, 140, 420, 340)
        for box, lo, hi in ((small, 2, 12), (large, 30, 110)):
            rng = np.random.default_rng(1)
            xs = [user.heatmap_for_box(box, cfg, rng).center[0]
                  for _ in range(60)]
            assert lo < np.std(xs) < hi


class TestSelectionSuite:
    def test_small_run_structure(self):
        rep = selection_suite(trials=20, seed=0)
        assert rep.trials == 20
        assert set(rep.accuracy) == {"gaze", "language", "both"}
        for v in rep.accuracy.values():
            assert 0.0 <= v <= 1.0

    def test_fused_beats_language_small_run(self):
        rep = selection_suite(trials=60, seed=1)
        assert rep.accuracy["both"] >= rep.accuracy["language"]

    def test_restricted_arms(self):
        rep = selection_suite(trials=10, seed=0, arms=("both",))
        assert set(rep.accuracy) == {"both"}

    def test_to_dict_keys(self):
        rep = selection_suite(trials=10, seed=0)
        d = rep.to_dict()
        assert d["suite"] == "selection"
        assert "dominance_over_gaze" in d


class TestGapSuite:
    def test_obvious_gap_perfect(self):
        from handover_sim.evaluation import _pair_accuracy
        from handover_sim.selection import DetectorNoise
        cat = catalog_by_key()
        quiet = PipelineConfig(detector=DetectorNoise(
            miss_rate=0.0, confidence_jitter=0.0, false_positive_rate=0.0))
        rng = np.random.default_rng(0)
        acc = _pair_accuracy(cat["fish_can"], 0.15, 0.0, 30, quiet, GAP_USER,
                             rng)
        assert acc >= 0.95

    def test_report_structure(self):
        rep = gap_suite(trials=20, seed=0,
                        scan_gaps=np.array([0.01, 0.03, 0.05]))
        d = rep.to_dict()
        assert set(d["stated_success"]) == {"small", "medium", "large"}
        assert set(d["min_gap_m"]) == {"small", "medium", "large"}


class TestGazeSuite:
    def test_zero_noise_perfect_sr(self):
        rep = gaze_suite(sessions=300, seed=0, noise_deg=0.0, spread_frac=0.0)
        assert rep.success_rate == 1.0
        assert rep.mse_px == 0.0

    def test_noisy_band(self):
        # stated generator at 1.5 degrees with subregion wander lands in
        # the qualitative band of the reference success rate
        rep = gaze_suite(sessions=300, seed=0, noise_deg=1.5)
        assert 0.75 <= rep.success_rate <= 1.0

    def test_report_fields(self):
        rep = gaze_suite(sessions=30, seed=0, noise_deg=1.5)
        d = rep.to_dict()
        assert d["sessions"] == 30
        assert 0 <= d["success_rate"] <= 1


class TestGraspSuite:
    def test_small_run(self):
        rep = grasp_suite(scenes=3, per_scene=2, seed=0)
        assert rep.preference_trials > 0
        assert rep.avoidance_trials == 6
        assert 0.0 <= rep.preference_rate <= 1.0
        assert 0.0 <= rep.avoidance_rate <= 1.0
        d = rep.to_dict()
        assert "stability_grid" in d
        text = rep.render_text()
        assert "preference region" in text


class TestMotionSuite:
    def test_small_run(self):
        rep = motion_suite(targets=6, seed=0)
        assert rep.targets == 6
        assert rep.converged >= 5
        assert rep.within_limits
        assert rep.max_energy_step_increase <= 50 * RMP_DT_SQ


RMP_DT_SQ = 0.01 ** 2


class TestTimingSuite:
    def test_single_run(self):
        rep = timing_suite(runs=1, seed=0)
        assert rep.runs == 1
        assert set(rep.stage_means) == {"render", "gaze", "parse",
                                        "selection", "grasp", "motion"}
        assert rep.dominant_stage in rep.stage_means


class TestDispatch:
    def test_known_suites(self):
        rep = evaluate("motion", seed=0, targets=3)
        assert rep.targets == 3

    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            evaluate("nope")
