import json

import numpy as np

from masktrainer.dataset import (
    build_dataset,
    load_dataset,
    load_scenario,
    save_dataset,
    scenario_dirs,
)


class TestScenarioDirs:
    def test_manifest_order(self, workspace):
        dirs = scenario_dirs(workspace["train_scen"])
        assert len(dirs) == 24
        with open(workspace["train_scen"] / "manifest.json") as f:
            manifest = json.load(f)
        assert [d.name for d in dirs] == [e["name"] for e in manifest["scenarios"]]
        for d in dirs:
            assert (d / "mixture.wav").exists()
            assert (d / "tdoa.json").exists()


class TestLoadScenario:
    def test_tensor_shapes(self, workspace):
        scenario = load_scenario(scenario_dirs(workspace["train_scen"])[0])
        num_frames = scenario.features.shape[0]
        assert scenario.features.shape == (num_frames, 514)
        assert scenario.mask.shape == (num_frames, 257)
        assert scenario.power.shape == (num_frames, 257)
        # 4 s at 16 kHz with 512/256 framing.
        assert num_frames == (4 * 16000 - 512) // 256 + 1

    def test_mask_and_power_ranges(self, workspace):
        scenario = load_scenario(scenario_dirs(workspace["train_scen"])[0])
        assert scenario.mask.min() >= 0.0 and scenario.mask.max() <= 1.0
        assert scenario.power.min() >= 0.0
        assert np.isfinite(scenario.features).all()


class TestDatasetRoundTrip:
    def test_build_statistics(self, workspace):
        dirs = scenario_dirs(workspace["train_scen"])[:3]
        scenarios, mean, std = build_dataset(dirs)
        assert len(scenarios) == 3
        assert mean.shape == (514,) and std.shape == (514,)
        assert (std > 0).all()
        stacked = np.concatenate([s.features for s in scenarios])
        normalized = (stacked - mean) / std
        np.testing.assert_allclose(normalized.mean(axis=0), 0.0, atol=1e-9)

    def test_save_load_round_trip(self, workspace, tmp_path):
        dirs = scenario_dirs(workspace["train_scen"])[:2]
        scenarios, mean, std = build_dataset(dirs)
        path = tmp_path / "mini.npz"
        save_dataset(path, scenarios, mean, std)
        loaded, mean2, std2 = load_dataset(path)
        np.testing.assert_array_equal(mean2, mean)
        np.testing.assert_array_equal(std2, std)
        assert [s.name for s in loaded] == [s.name for s in scenarios]
        for a, b in zip(loaded, scenarios):
            # Storage is float32; loading must reproduce it exactly.
            np.testing.assert_array_equal(a.features, b.features.astype(np.float32))
            np.testing.assert_array_equal(a.mask, b.mask.astype(np.float32))
            np.testing.assert_array_equal(a.power, b.power.astype(np.float32))

    def test_built_dataset_file_matches_direct_build(self, workspace):
        loaded, mean, std = load_dataset(workspace["dataset"])
        assert len(loaded) == 24
        direct, mean2, _ = build_dataset(scenario_dirs(workspace["train_scen"]))
        np.testing.assert_array_equal(mean, mean2)
        np.testing.assert_array_equal(
            loaded[0].features, direct[0].features.astype(np.float32)
        )
