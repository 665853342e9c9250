"""Command-line surface: simulate, enhance, stream-bench, calibrate, evaluate.

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 internal
error. Option precedence: explicit flags > --config JSON file > defaults.
"""

import json
import logging
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import pipeline
from .audio_io import read_wav, write_wav
from .errors import SpeechbeamError, InvalidInputError
from .geometry import (
    ArrayGeometry,
    CalibrationMap,
    PixelTrack,
    TdoaTrajectory,
    fit_calibration,
    track_to_trajectory,
)
from .metrics import EvalReport, evaluate_scenario
from .postfilter import ideal_ratio_mask
from .simulate import ScenarioOutput, generate_batch, read_manifest, render_scenario, write_manifest
from .stft import StftConfig, stft
from .weights_io import load_weights

log = logging.getLogger("speechbeam")


def _load_config_file(path):
    if not path:
        return {}
    with open(path) as f:
        return json.load(f)


def _resolve(flag_value, config, key, default=None):
    if flag_value is not None:
        return flag_value
    return config.get(key, default)


def _stft_config(config):
    return StftConfig(
        frame_size=int(config.get("frame_size", 512)),
        hop_size=int(config.get("hop_size", config.get("frame_size", 512) // 2)),
        sample_rate=int(config.get("sample_rate", 16000)),
    )


def _geometry(path, config):
    path = _resolve(path, config, "geometry")
    return ArrayGeometry.from_json(path) if path else ArrayGeometry.default()


def _list_wavs(directory):
    return sorted(str(p) for p in Path(directory).glob("*.wav"))


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="JSON config file supplying defaults for other options.")
@click.option("--seed", type=int, default=None, help="Global random seed.")
@click.option("--threads", type=int, default=None, help="Worker thread hint (advisory).")
@click.option("--verbose", is_flag=True, help="Verbose logging.")
@click.pass_context
def cli(ctx, config_path, seed, threads, verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    ctx.obj = {
        "config": _load_config_file(config_path),
        "seed": seed,
        "threads": threads,
    }
    log.debug("resolved config: %s", ctx.obj)


@cli.command()
@click.option("--speech-dir", required=True, type=click.Path(), help="Directory of mono 16 kHz speech WAVs.")
@click.option("--noise-dir", required=True, type=click.Path(), help="Directory of mono 16 kHz noise WAVs.")
@click.option("--count", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=None, help="Batch seed (overrides global --seed).")
@click.option("--duration", type=float, default=10.0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
def simulate(ctx, speech_dir, noise_dir, count, seed, duration, out_dir):
    """Generate random scenarios and render mixture/target/noise WAVs."""
    config = ctx.obj["config"]
    seed = seed if seed is not None else (ctx.obj["seed"] or 0)
    speech_files = _list_wavs(speech_dir)
    noise_files = _list_wavs(noise_dir)
    if not speech_files:
        raise InvalidInputError(f"no WAV files in speech directory {speech_dir}")
    if not noise_files:
        raise InvalidInputError(f"no WAV files in noise directory {noise_dir}")
    stft_config = _stft_config(config)
    geometry = _geometry(None, config)
    specs = generate_batch(speech_files, noise_files, count, seed, duration_s=duration)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for spec in specs:
        scen_dir = out_dir / spec.name
        scen_dir.mkdir(exist_ok=True)
        output = render_scenario(spec, geometry=geometry, stft_config=stft_config)
        write_wav(scen_dir / "mixture.wav", output.mixture, stft_config.sample_rate)
        write_wav(scen_dir / "target.wav", output.target_images, stft_config.sample_rate)
        write_wav(scen_dir / "noise.wav", output.noise_images, stft_config.sample_rate)
        output.pixel_track.to_json(scen_dir / "track.json")
        output.tdoa_truth.to_json(scen_dir / "tdoa.json")
    write_manifest(specs, out_dir / "manifest.json")
    click.echo(f"wrote {count} scenarios to {out_dir}")


def _load_trajectory(tdoa_path, track_path, calibration_path, num_frames, stft_config):
    if tdoa_path:
        traj = TdoaTrajectory.from_json(tdoa_path)
        if traj.num_frames < num_frames:
            # Hold the last TDoA vector for any remaining frames.
            pad = np.tile(traj.tdoas[-1], (num_frames - traj.num_frames, 1))
            traj = TdoaTrajectory(np.vstack([traj.tdoas, pad]), traj.tau_max)
        return traj
    if track_path:
        if not calibration_path:
            raise InvalidInputError("--track requires --calibration")
        cal = CalibrationMap.from_json(calibration_path)
        track = PixelTrack.from_json(track_path, cal.image_width, cal.image_height)
        return track_to_trajectory(track, cal, num_frames, stft_config)
    raise InvalidInputError("need --tdoa or --track to steer the beamformer")


def _enhance_inputs(ctx, geometry_path, mixture_path, tdoa, track, calibration,
                    mask, weights_path, target_path, noise_path):
    config = ctx.obj["config"]
    stft_config = _stft_config(config)
    geometry = _geometry(geometry_path, config)
    mixture, rate = read_wav(mixture_path)
    if mixture.ndim == 1:
        mixture = mixture[None, :]
    if rate != stft_config.sample_rate:
        raise InvalidInputError(
            f"{mixture_path}: sample rate {rate} != configured {stft_config.sample_rate}"
        )
    if mixture.shape[0] != geometry.num_mics:
        raise InvalidInputError(
            f"{mixture_path}: {mixture.shape[0]} channels but geometry has "
            f"{geometry.num_mics} microphones"
        )
    num_frames = stft_config.num_frames(mixture.shape[1])
    trajectory = _load_trajectory(tdoa, track, calibration, num_frames, stft_config)
    weights = load_weights(_resolve(weights_path, config, "weights")) if (
        mask == "gru") else None
    target_images = noise_images = None
    if mask == "oracle":
        if not target_path or not noise_path:
            raise InvalidInputError("oracle mask needs --target and --noise component WAVs")
        target_images, _ = read_wav(target_path)
        noise_images, _ = read_wav(noise_path)
    return stft_config, mixture, trajectory, weights, target_images, noise_images


_enhance_options = [
    click.option("--geometry", "geometry_path", type=click.Path(exists=True), default=None),
    click.option("--mixture", "mixture_path", required=True, type=click.Path(exists=True)),
    click.option("--tdoa", type=click.Path(exists=True), default=None,
                 help="Per-frame TDoA JSON."),
    click.option("--track", type=click.Path(exists=True), default=None,
                 help="Pixel track JSON (requires --calibration)."),
    click.option("--calibration", type=click.Path(exists=True), default=None),
    click.option("--mask", type=click.Choice(pipeline.MASK_SOURCES), default="none",
                 show_default=True),
    click.option("--weights", "weights_path", type=click.Path(exists=True), default=None),
    click.option("--target", "target_path", type=click.Path(exists=True), default=None,
                 help="Clean target component WAV (oracle mode)."),
    click.option("--noise", "noise_path", type=click.Path(exists=True), default=None,
                 help="Noise component WAV (oracle mode)."),
    click.option("--normalize", type=click.Choice(["peak", "none"]), default="peak",
                 show_default=True),
    click.option("--out", "out_path", required=True, type=click.Path()),
]


def _with_options(options):
    def wrap(f):
        for option in reversed(options):
            f = option(f)
        return f
    return wrap


@cli.command()
@_with_options(_enhance_options)
@click.option("--dump-dir", type=click.Path(), default=None,
              help="Directory for intermediate mask/spectrogram dumps.")
@click.pass_context
def enhance(ctx, geometry_path, mixture_path, tdoa, track, calibration, mask,
            weights_path, target_path, noise_path, normalize, out_path, dump_dir):
    """Whole-signal enhancement of a multichannel mixture WAV."""
    stft_config, mixture, trajectory, weights, target_images, noise_images = \
        _enhance_inputs(ctx, geometry_path, mixture_path, tdoa, track, calibration,
                        mask, weights_path, target_path, noise_path)
    enhanced, intermediates = pipeline.enhance(
        mixture, trajectory, stft_config, mask_source=mask, weights=weights,
        target_images=target_images, noise_images=noise_images, normalize=normalize,
    )
    write_wav(out_path, enhanced, stft_config.sample_rate)
    if dump_dir:
        dump_dir = Path(dump_dir)
        dump_dir.mkdir(parents=True, exist_ok=True)
        np.save(dump_dir / "beamformed.npy", intermediates["beamformed"])
        np.save(dump_dir / "total_power.npy", intermediates["total_power"])
        if intermediates["mask"] is not None:
            np.save(dump_dir / "mask.npy", intermediates["mask"])
    click.echo(f"wrote {out_path}")


@cli.command("stream-bench")
@_with_options(_enhance_options)
@click.option("--report", "report_path", type=click.Path(), default=None,
              help="Write the latency report JSON here.")
@click.pass_context
def stream_bench(ctx, geometry_path, mixture_path, tdoa, track, calibration, mask,
                 weights_path, target_path, noise_path, normalize, out_path,
                 report_path):
    """Hop-by-hop enhancement with per-hop compute timing."""
    stft_config, mixture, trajectory, weights, target_images, noise_images = \
        _enhance_inputs(ctx, geometry_path, mixture_path, tdoa, track, calibration,
                        mask, weights_path, target_path, noise_path)
    oracle_masks = None
    if mask == "oracle":
        oracle_masks = ideal_ratio_mask(
            np.stack([stft(ch, stft_config) for ch in target_images]),
            np.stack([stft(ch, stft_config) for ch in noise_images]),
        )
    enhanced, report = pipeline.stream_enhance(
        mixture, trajectory, stft_config, mask_source=mask, weights=weights,
        oracle_masks=oracle_masks, normalize=normalize,
    )
    write_wav(out_path, enhanced, stft_config.sample_rate)
    payload = report.to_dict()
    click.echo(json.dumps(payload, indent=2))
    if report_path:
        with open(report_path, "w") as f:
            json.dump(payload, f, indent=2, sort_keys=True)


@cli.command()
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True),
              help="JSON list of {u, v, tdoas: [..M..]} calibration pairs.")
@click.option("--degree", type=int, default=4, show_default=True,
              help="Polynomial degree; 4 keeps the map within 0.1 sample over the image.")
@click.option("--image-width", type=int, default=640, show_default=True)
@click.option("--image-height", type=int, default=480, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def calibrate(pairs_path, degree, image_width, image_height, out_path):
    """Fit the pixel-to-TDoA polynomial map from calibration pairs."""
    with open(pairs_path) as f:
        pairs = json.load(f)
    pixels = [(p["u"], p["v"]) for p in pairs]
    tdoas = [p["tdoas"] for p in pairs]
    cal, rms = fit_calibration(pixels, tdoas, degree,
                               image_width=image_width, image_height=image_height)
    cal.to_json(out_path)
    for m, value in enumerate(rms):
        click.echo(f"mic {m}: residual RMS {value:.3e} samples")
    click.echo(f"wrote {out_path}")


@cli.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True))
@click.option("--scenario-dir", type=click.Path(), default=None,
              help="Directory holding the rendered scenarios (default: manifest's directory).")
@click.option("--enhanced-dir", required=True, type=click.Path(exists=True),
              help="Directory of enhanced WAVs named <scenario>.wav.")
@click.option("--csv", "csv_path", required=True, type=click.Path())
@click.option("--summary", "summary_path", required=True, type=click.Path())
@click.pass_context
def evaluate(ctx, manifest_path, scenario_dir, enhanced_dir, csv_path, summary_path):
    """Score enhanced outputs against the manifest's clean references."""
    config = ctx.obj["config"]
    stft_config = _stft_config(config)
    scenario_dir = Path(scenario_dir or Path(manifest_path).parent)
    enhanced_dir = Path(enhanced_dir)
    specs = read_manifest(manifest_path)
    missing = [s.name for s in specs if not (enhanced_dir / f"{s.name}.wav").exists()]
    if missing:
        raise InvalidInputError(f"missing enhanced files for: {', '.join(missing)}")
    report = EvalReport()
    for spec in specs:
        scen_dir = scenario_dir / spec.name
        mixture, _ = read_wav(scen_dir / "mixture.wav")
        target, _ = read_wav(scen_dir / "target.wav")
        noise, _ = read_wav(scen_dir / "noise.wav")
        enhanced, _ = read_wav(enhanced_dir / f"{spec.name}.wav")
        output = ScenarioOutput(
            mixture=mixture, target_images=target, noise_images=noise,
            pixel_track=None, tdoa_truth=None, metadata={},
        )
        # Enhanced signals are aligned to the array origin; score them against
        # the reference mic by undoing its ground-truth arrival offset.
        tdoa_path = scen_dir / "tdoa.json"
        align = 0.0
        if tdoa_path.exists():
            align = float(TdoaTrajectory.from_json(tdoa_path).tdoas[0][0])
        interference = "speech" if all(
            s.label == "speech" for s in spec.interferers) else "mixed"
        report.rows.append(
            evaluate_scenario(output, enhanced, stft_config.sample_rate,
                              name=spec.name, interference=interference,
                              align_tdoa=align)
        )
    report.write_csv(csv_path)
    report.write_summary(summary_path)
    click.echo(json.dumps(report.summary(), indent=2, sort_keys=True))


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.Exit as exc:
        return 0 if exc.exit_code == 0 else 1
    except (click.UsageError, click.ClickException) as exc:
        exc.show()
        return 1
    except (SpeechbeamError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
