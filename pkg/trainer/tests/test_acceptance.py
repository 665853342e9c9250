"""Acceptance gate for the trainer: one pass/fail line per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdict lines.
The inference engine (speechbeam) is imported for verification only; the
trainer itself exchanges nothing with it but files.
"""

from types import SimpleNamespace

import numpy as np
import torch

from masktrainer.dataset import load_dataset
from masktrainer.model import MaskEstimator, weighted_mask_loss
from masktrainer.train import train
from masktrainer.weights_export import read_exported


def verdict(ok, name, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _load_checkpoint_model(path):
    payload = torch.load(path, weights_only=False)
    model = MaskEstimator(payload["input_dim"], payload["hidden_dim"],
                          payload["num_layers"], payload["output_dim"])
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model


def test_single_scenario_overfit(workspace):
    """Training on one scenario must drop the loss at least 10x within
    200 epochs."""
    scenarios, mean, std = load_dataset(workspace["dataset"])
    result = train(scenarios[:1], mean, std, hidden_dim=64, num_layers=2,
                   epochs=120, learning_rate=2e-3, seed=0)
    drop = result.losses[0] / min(result.losses)
    verdict(
        drop >= 10.0,
        "single-scenario overfit",
        f"loss drop {drop:.1f}x over {len(result.losses)} epochs (need >= 10x within 200)",
    )


def test_engine_parity(workspace, trained):
    """Exported weights fed to the engine must reproduce the trainer's
    features (<= 1e-6), masks (<= 1e-5), and loss value (<= 1e-4 relative)."""
    from speechbeam.audio_io import read_wav
    from speechbeam.geometry import TdoaTrajectory
    from speechbeam.pipeline import enhance
    from speechbeam.postfilter import make_features, weighted_mse_loss
    from speechbeam.stft import StftConfig
    from speechbeam.weights_io import load_weights

    from masktrainer.dataset import load_scenario, scenario_dirs

    scenario_dir = scenario_dirs(workspace["train_scen"])[0]
    scenario = load_scenario(scenario_dir)
    model = _load_checkpoint_model(trained["checkpoint"])
    _, exported = read_exported(trained["weights"])
    mean = exported["norm.mean"].astype(np.float64)
    std = exported["norm.std"].astype(np.float64)

    # Engine side: run the full pipeline on the scenario files.
    mixture, rate = read_wav(scenario_dir / "mixture.wav")
    trajectory = TdoaTrajectory.from_json(scenario_dir / "tdoa.json")
    weights = load_weights(trained["weights"])
    config = StftConfig()
    _, inter = enhance(mixture, trajectory, config, mask_source="gru",
                       weights=weights)

    # Feature parity: trainer normalization vs engine make_features.
    trainer_features = (scenario.features - mean) / std
    engine_features = make_features(inter["beamformed"], inter["total_power"],
                                    weights)
    feature_dev = float(np.abs(trainer_features - engine_features).max())

    # Mask parity: torch forward vs engine GRU inference.
    with torch.no_grad():
        trainer_mask = model(
            torch.tensor(trainer_features[None], dtype=torch.float32)
        )[0].numpy().astype(np.float64)
    mask_dev = float(np.abs(trainer_mask - inter["mask"]).max())

    # Loss parity: same arrays through both loss definitions.
    trainer_loss = float(weighted_mask_loss(
        torch.tensor(scenario.mask), torch.tensor(trainer_mask),
        torch.tensor(scenario.power),
    ))
    engine_loss = weighted_mse_loss(scenario.mask, trainer_mask, scenario.power)
    loss_dev = abs(trainer_loss - engine_loss) / abs(engine_loss)

    verdict(
        feature_dev <= 1e-6 and mask_dev <= 1e-5 and loss_dev <= 1e-4,
        "trainer/engine parity",
        f"feature dev {feature_dev:.2e} (<= 1e-6), mask dev {mask_dev:.2e} "
        f"(<= 1e-5), loss rel dev {loss_dev:.2e} (<= 1e-4)",
    )


def test_heldout_efficacy(workspace, trained):
    """A trained model must improve mean SI-SDR and mean STOI over at least
    50 held-out scenarios."""
    from speechbeam.audio_io import read_wav
    from speechbeam.geometry import TdoaTrajectory
    from speechbeam.metrics import evaluate_scenario
    from speechbeam.pipeline import enhance
    from speechbeam.stft import StftConfig
    from speechbeam.weights_io import load_weights

    from masktrainer.dataset import scenario_dirs

    weights = load_weights(trained["weights"])
    config = StftConfig()
    dirs = scenario_dirs(workspace["eval_scen"])
    assert len(dirs) >= 50
    rows = []
    for directory in dirs:
        mixture, rate = read_wav(directory / "mixture.wav")
        target, _ = read_wav(directory / "target.wav")
        trajectory = TdoaTrajectory.from_json(directory / "tdoa.json")
        enhanced, _ = enhance(mixture, trajectory, config, mask_source="gru",
                              weights=weights)
        output = SimpleNamespace(mixture=mixture, target_images=target,
                                 tdoa_truth=trajectory)
        rows.append(evaluate_scenario(output, enhanced, rate,
                                      name=directory.name))

    si_sdr_deltas = np.array([r.si_sdr_delta for r in rows])
    stoi_deltas = np.array([r.stoi_delta for r in rows])
    verdict(
        si_sdr_deltas.mean() > 0.0 and stoi_deltas.mean() > 0.0,
        "held-out efficacy",
        f"{len(rows)} scenarios: mean dSI-SDR {si_sdr_deltas.mean():+.2f} dB "
        f"({(si_sdr_deltas > 0).mean():.0%} improved), "
        f"mean dSTOI {stoi_deltas.mean():+.4f} "
        f"({(stoi_deltas > 0).mean():.0%} improved); both means must be > 0",
    )
