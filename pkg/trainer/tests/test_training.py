import numpy as np
import torch

from masktrainer.dataset import ScenarioTensors
from masktrainer.model import training_loss, weighted_mask_loss
from masktrainer.train import _to_batches, train


def synthetic_scenario(rng, num_frames, input_dim=10, output_dim=5, name=""):
    return ScenarioTensors(
        features=rng.standard_normal((num_frames, input_dim)),
        mask=rng.uniform(0.0, 1.0, size=(num_frames, output_dim)),
        power=rng.uniform(0.0, 2.0, size=(num_frames, output_dim)),
        name=name,
    )


class TestBatching:
    def test_groups_by_length(self):
        rng = np.random.default_rng(0)
        scenarios = [
            synthetic_scenario(rng, 8),
            synthetic_scenario(rng, 6),
            synthetic_scenario(rng, 8),
        ]
        mean = np.zeros(10)
        std = np.ones(10)
        batches = _to_batches(scenarios, mean, std, "cpu")
        shapes = sorted(b[0].shape for b in batches)
        assert shapes == [(1, 6, 10), (2, 8, 10)]

    def test_normalization_applied(self):
        rng = np.random.default_rng(1)
        scenario = synthetic_scenario(rng, 4)
        mean = scenario.features.mean(axis=0)
        std = scenario.features.std(axis=0)
        (feats, _, _), = _to_batches([scenario], mean, std, "cpu")
        np.testing.assert_allclose(feats.numpy().mean(axis=(0, 1)), 0.0, atol=1e-5)


class TestLosses:
    def test_mean_and_sum_variants_agree_up_to_count(self):
        rng = np.random.default_rng(2)
        target = torch.tensor(rng.uniform(0, 1, size=(3, 7)))
        estimate = torch.tensor(rng.uniform(0, 1, size=(3, 7)))
        power = torch.tensor(rng.uniform(0, 2, size=(3, 7)))
        total = weighted_mask_loss(target, estimate, power)
        mean = training_loss(target, estimate, power)
        assert torch.allclose(total, mean * target.numel())

    def test_perfect_estimate_is_zero(self):
        target = torch.rand(4, 5)
        power = torch.rand(4, 5)
        assert float(weighted_mask_loss(target, target, power)) == 0.0


class TestTrain:
    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(3)
        scenarios = [synthetic_scenario(rng, 12), synthetic_scenario(rng, 12)]
        mean = np.zeros(10)
        std = np.ones(10)
        kwargs = dict(hidden_dim=8, num_layers=1, epochs=3, seed=7)
        first = train(scenarios, mean, std, **kwargs)
        second = train(scenarios, mean, std, **kwargs)
        assert first.losses == second.losses
        for a, b in zip(first.model.parameters(), second.model.parameters()):
            assert torch.equal(a, b)

    def test_loss_decreases_on_toy_data(self):
        rng = np.random.default_rng(4)
        scenarios = [synthetic_scenario(rng, 20)]
        result = train(scenarios, np.zeros(10), np.ones(10),
                       hidden_dim=8, num_layers=1, epochs=25, seed=0)
        assert result.losses[-1] < result.losses[0]
        assert result.loss_drop > 1.0
