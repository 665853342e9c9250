"""Signal-side math mirroring the inference engine's analysis contract.

The trainer talks to the enhancement engine only through files (scenario
directories in, a weights binary out), so the feature pipeline is restated
here from the interface contract: sine-window STFT, steered multichannel sum,
total-power reference, log-power features with epsilon 1e-10, ideal ratio
mask targets. Everything runs in float64 numpy; no gradients flow through it.
"""

import numpy as np

FRAME_SIZE = 512
HOP_SIZE = 256
SAMPLE_RATE = 16000
LOG_EPSILON = 1e-10


def sine_window(n=FRAME_SIZE):
    return np.sin(np.pi * (np.arange(n) + 0.5) / n)


def stft(signal, frame_size=FRAME_SIZE, hop_size=HOP_SIZE):
    """(n,) -> (L, K) complex spectrogram with the analysis sine window."""
    signal = np.asarray(signal, dtype=np.float64)
    if signal.size < frame_size:
        signal = np.pad(signal, (0, frame_size - signal.size))
    num_frames = (signal.size - frame_size) // hop_size + 1
    window = sine_window(frame_size)
    idx = hop_size * np.arange(num_frames)[:, None] + np.arange(frame_size)[None, :]
    return np.fft.rfft(signal[idx] * window, axis=1)


def multichannel_stft(wave):
    return np.stack([stft(ch) for ch in wave])


def steered_sum(specs, tdoas, n_fft=FRAME_SIZE):
    """Per-frame phase-aligned channel sum: (M, L, K), (L, M) -> (L, K)."""
    num_mics, num_frames, num_bins = specs.shape
    k = np.arange(num_bins)
    out = np.zeros((num_frames, num_bins), dtype=np.complex128)
    for l in range(num_frames):
        steer = np.exp(2j * np.pi * np.outer(tdoas[l], k) / n_fft)
        out[l] = (specs[:, l, :] * steer).sum(axis=0)
    return out


def total_power(specs):
    """Phase-blind per-cell power reference: sum over mics of |X|^2."""
    return (np.abs(specs) ** 2).sum(axis=0)


def raw_features(beamformed, power, epsilon=LOG_EPSILON):
    """Unnormalized (L, 2K) log-power features."""
    return np.concatenate(
        [np.log(np.abs(beamformed) ** 2 + epsilon), np.log(power + epsilon)],
        axis=1,
    )


def ideal_ratio_mask(target_specs, noise_specs):
    """Per-cell speech-power fraction, mic-summed; silent cells get 0."""
    speech = (np.abs(target_specs) ** 2).sum(axis=0)
    total = speech + (np.abs(noise_specs) ** 2).sum(axis=0)
    return np.where(total > 0, speech / np.where(total > 0, total, 1.0), 0.0)
