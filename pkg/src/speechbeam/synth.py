"""Small synthetic corpus generator.

Real corpora are user-supplied directories of 16 kHz mono WAVs; these
generators provide speech-like and noise signals for tests, demos and
desk-scale training, so nothing needs downloading.
"""

import numpy as np
from scipy.signal import lfilter

from .audio_io import write_wav


def synthetic_speech(duration_s, seed, rate=16000):
    """Speech-like signal: pitched glottal source through slowly changing
    formant resonators, with syllabic amplitude modulation and pauses."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * rate))
    t = np.arange(n) / rate

    # Pitch contour: slow random walk around a per-speaker base, 90-230 Hz.
    base_f0 = rng.uniform(100.0, 200.0)
    drift = lfilter([1.0], [1.0, -0.999], rng.standard_normal(n)) * 0.6
    f0 = np.clip(base_f0 * (1.0 + 0.1 * np.sin(2 * np.pi * 2.3 * t)) + drift, 90.0, 230.0)
    phase = np.cumsum(2 * np.pi * f0 / rate)
    source = ((phase / (2 * np.pi)) % 1.0) - 0.5  # sawtooth-ish glottal pulse train
    source += 0.03 * rng.standard_normal(n)  # aspiration noise

    # Formant filtering, re-drawn every ~180 ms like phoneme changes.
    out = np.empty(n)
    seg = int(0.18 * rate)
    for start in range(0, n, seg):
        stop = min(start + seg, n)
        chunk = source[start:stop]
        for cf, bw in zip(rng.uniform([300, 900, 1900], [800, 1800, 3000]),
                          (80.0, 120.0, 180.0)):
            r = np.exp(-np.pi * bw / rate)
            theta = 2 * np.pi * cf / rate
            chunk = lfilter([1.0], [1.0, -2 * r * np.cos(theta), r * r], chunk)
        out[start:stop] = chunk

    # Syllabic envelope (~4 Hz) with occasional pauses.
    envelope = 0.55 + 0.45 * np.sin(2 * np.pi * rng.uniform(3.0, 5.0) * t
                                    + rng.uniform(0, 2 * np.pi))
    pause = np.ones(n)
    for _ in range(max(1, int(duration_s / 2.5))):
        p0 = int(rng.uniform(0, max(1, n - rate // 4)))
        pause[p0:p0 + rate // 5] = 0.05
    out = out * envelope * pause
    return out / (np.abs(out).max() + 1e-12) * 0.5


def synthetic_noise(duration_s, seed, rate=16000, kind="pink"):
    """Non-speech noise: 'white', 'pink', or amplitude-modulated 'machinery'."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * rate))
    white = rng.standard_normal(n)
    if kind == "white":
        out = white
    elif kind == "pink":
        # Paul Kellet's economy pink filter.
        out = lfilter([0.049922035, -0.095993537, 0.050612699, -0.004408786],
                      [1.0, -2.494956002, 2.017265875, -0.522189400], white)
    elif kind == "machinery":
        hum = np.sin(2 * np.pi * rng.uniform(80, 160) * np.arange(n) / rate)
        am = 0.6 + 0.4 * np.sin(2 * np.pi * rng.uniform(1.0, 8.0) * np.arange(n) / rate)
        out = (0.6 * hum + 0.4 * white) * am
    else:
        raise ValueError(f"unknown noise kind {kind!r}")
    return out / (np.abs(out).max() + 1e-12) * 0.5


def write_corpus(directory, num_speech=4, num_noise=4, duration_s=10.0, seed=0,
                 rate=16000):
    """Write a tiny speech/ and noise/ WAV corpus; returns the two directories."""
    from pathlib import Path

    directory = Path(directory)
    speech_dir = directory / "speech"
    noise_dir = directory / "noise"
    speech_dir.mkdir(parents=True, exist_ok=True)
    noise_dir.mkdir(parents=True, exist_ok=True)
    kinds = ("pink", "white", "machinery")
    for i in range(num_speech):
        write_wav(speech_dir / f"speech_{i:02d}.wav",
                  synthetic_speech(duration_s, seed * 1000 + i, rate), rate)
    for i in range(num_noise):
        write_wav(noise_dir / f"noise_{i:02d}.wav",
                  synthetic_noise(duration_s, seed * 2000 + i, rate, kinds[i % len(kinds)]),
                  rate)
    return speech_dir, noise_dir


def main():
    import argparse

    parser = argparse.ArgumentParser(
        description="Write a synthetic speech/noise WAV corpus."
    )
    parser.add_argument("--out", required=True, help="corpus root directory")
    parser.add_argument("--speech", type=int, default=10, help="speech file count")
    parser.add_argument("--noise", type=int, default=4, help="noise file count")
    parser.add_argument("--duration", type=float, default=10.0, help="seconds per file")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    speech_dir, noise_dir = write_corpus(
        args.out, num_speech=args.speech, num_noise=args.noise,
        duration_s=args.duration, seed=args.seed,
    )
    print(f"wrote {args.speech} speech files to {speech_dir}")
    print(f"wrote {args.noise} noise files to {noise_dir}")


if __name__ == "__main__":
    main()
