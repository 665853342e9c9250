"""Command-line surface: build-dataset, train, export."""

import sys

import click
import numpy as np
import torch

from .dataset import build_dataset, load_dataset, save_dataset, scenario_dirs
from .model import MaskEstimator
from .train import train
from .weights_export import export_weights


@click.group()
def cli():
    """Train the ratio-mask postfilter and export engine-ready weights."""


@cli.command("build-dataset")
@click.option("--scenarios", "scenario_root", required=True,
              type=click.Path(exists=True),
              help="Directory with manifest.json and rendered scenario folders.")
@click.option("--out", "out_path", required=True, type=click.Path())
def build_dataset_cmd(scenario_root, out_path):
    """Extract features/targets from rendered scenarios into one .npz file."""
    dirs = scenario_dirs(scenario_root)
    scenarios, mean, std = build_dataset(dirs)
    save_dataset(out_path, scenarios, mean, std)
    frames = sum(s.features.shape[0] for s in scenarios)
    click.echo(f"wrote {len(scenarios)} scenarios ({frames} frames) to {out_path}")


@cli.command("train")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--hidden", type=int, default=512, show_default=True)
@click.option("--layers", type=int, default=2, show_default=True)
@click.option("--epochs", type=int, default=50, show_default=True)
@click.option("--lr", type=float, default=2e-3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Checkpoint (.pt) with model state and normalization stats.")
def train_cmd(dataset_path, hidden, layers, epochs, lr, seed, out_path):
    """Train the mask estimator on a built dataset."""
    scenarios, mean, std = load_dataset(dataset_path)
    result = train(scenarios, mean, std, hidden_dim=hidden, num_layers=layers,
                   epochs=epochs, learning_rate=lr, seed=seed, log_every=10)
    torch.save(
        {
            "state_dict": result.model.state_dict(),
            "input_dim": result.model.gru.input_size,
            "hidden_dim": hidden,
            "num_layers": layers,
            "output_dim": result.model.head.out_features,
            "norm_mean": np.asarray(mean),
            "norm_std": np.asarray(std),
            "losses": result.losses,
        },
        out_path,
    )
    click.echo(
        f"final loss {result.losses[-1]:.6e} "
        f"({result.loss_drop:.1f}x drop over {epochs} epochs); wrote {out_path}"
    )


@cli.command("export")
@click.option("--checkpoint", "checkpoint_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
def export_cmd(checkpoint_path, out_path):
    """Export a checkpoint to the engine's binary weights format."""
    payload = torch.load(checkpoint_path, weights_only=False)
    model = MaskEstimator(payload["input_dim"], payload["hidden_dim"],
                          payload["num_layers"], payload["output_dim"])
    model.load_state_dict(payload["state_dict"])
    export_weights(model, payload["norm_mean"], payload["norm_std"], out_path)
    click.echo(f"wrote {out_path}")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return 0 if exc.exit_code == 0 else 2
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.ClickException as exc:
        exc.show()
        return 1
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
