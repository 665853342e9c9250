import subprocess
import sys

import pytest

from masktrainer.cli import main as trainer_main


def run_engine(args):
    """Invoke the enhancement engine's CLI (the data-side interface)."""
    subprocess.run([sys.executable, "-m", "speechbeam.cli", *args], check=True,
                   capture_output=True, text=True)


@pytest.fixture(scope="session")
def workspace(tmp_path_factory):
    """Corpus + rendered training and held-out scenario sets + built dataset."""
    root = tmp_path_factory.mktemp("trainer_ws")
    subprocess.run(
        [sys.executable, "-m", "speechbeam.synth", "--out", str(root / "corpus"),
         "--speech", "6", "--noise", "4", "--duration", "4", "--seed", "5"],
        check=True, capture_output=True,
    )
    speech = str(root / "corpus" / "speech")
    noise = str(root / "corpus" / "noise")
    run_engine(["simulate", "--speech-dir", speech, "--noise-dir", noise,
                "--count", "24", "--seed", "21", "--duration", "4.0",
                "--out", str(root / "train_scen")])
    run_engine(["simulate", "--speech-dir", speech, "--noise-dir", noise,
                "--count", "50", "--seed", "97", "--duration", "4.0",
                "--out", str(root / "eval_scen")])
    dataset = root / "train.npz"
    assert trainer_main(["build-dataset", "--scenarios", str(root / "train_scen"),
                         "--out", str(dataset)]) == 0
    return {
        "root": root,
        "train_scen": root / "train_scen",
        "eval_scen": root / "eval_scen",
        "dataset": dataset,
    }


@pytest.fixture(scope="session")
def trained(workspace):
    """A trained checkpoint and its exported weights file."""
    root = workspace["root"]
    checkpoint = root / "model.pt"
    exported = root / "model.gpf"
    assert trainer_main(["train", "--dataset", str(workspace["dataset"]),
                         "--hidden", "128", "--epochs", "30", "--lr", "2e-3",
                         "--seed", "0", "--out", str(checkpoint)]) == 0
    assert trainer_main(["export", "--checkpoint", str(checkpoint),
                         "--out", str(exported)]) == 0
    return {"checkpoint": checkpoint, "weights": exported}
