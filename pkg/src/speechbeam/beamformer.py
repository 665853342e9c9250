"""Frequency-domain delay-and-sum beamforming with time-varying TDoAs, and
the phase-blind total-power reference.

The beamformed frame is Y[l,k] = sum_m X_m[l,k] * exp(j*2*pi*k*tau_m[l]/N):
a plain sum over microphones, no 1/M normalization. The total-power reference
|Yhat|^2 = sum_m |X_m|^2 discards phase, so it is free of constructive or
destructive interference and serves as the permutation-free level reference
for the postfilter.
"""

import numpy as np

from . import kernels
from .errors import InvalidInputError
from .stft import StftStream


def _check_stack(specs):
    specs = np.asarray(specs)
    if specs.ndim != 3:
        raise InvalidInputError(f"expected (M, L, K) spectrogram stack, got shape {specs.shape}")
    return specs


def delay_and_sum(specs, trajectory, config):
    """Steered sum of M spectrograms (M, L, K) -> (L, K)."""
    specs = _check_stack(specs).astype(np.complex128)
    num_mics, num_frames, num_bins = specs.shape
    if config.num_bins != num_bins:
        raise InvalidInputError(f"bin count {num_bins} does not match config {config.num_bins}")
    tdoas = trajectory.tdoas
    if tdoas.shape[1] != num_mics or tdoas.shape[0] < num_frames:
        raise InvalidInputError(
            f"trajectory shape {tdoas.shape} does not cover (L={num_frames}, M={num_mics})"
        )
    out = np.empty((num_frames, num_bins), dtype=np.complex128)
    for l in range(num_frames):
        out[l] = kernels.das_frame(specs[:, l, :], tdoas[l], config.frame_size)
    return out


def total_power_reference(specs):
    """Phase-blind per-cell power sum of M spectrograms (M, L, K) -> (L, K) real."""
    specs = _check_stack(specs)
    return (np.abs(specs) ** 2).sum(axis=0)


class BeamformStream:
    """Streaming composition: per-channel STFT push, then per-frame steering.

    Equivalent to the whole-signal path when the per-push TDoA vectors match a
    zero-order-held trajectory.
    """

    def __init__(self, config, num_mics):
        self.config = config
        self.num_mics = num_mics
        self._streams = [StftStream(config) for _ in range(num_mics)]

    def push(self, hop_samples, tdoas):
        """Push (M, hop) samples with the current M-vector of TDoAs.

        Returns (beamformed frame, total-power frame) or None until the first
        full analysis frame has accumulated.
        """
        hop_samples = np.asarray(hop_samples, dtype=np.float64)
        if hop_samples.shape != (self.num_mics, self.config.hop_size):
            raise InvalidInputError(
                f"expected ({self.num_mics}, {self.config.hop_size}) samples, "
                f"got shape {hop_samples.shape}"
            )
        tdoas = np.asarray(tdoas, dtype=np.float64)
        if tdoas.shape != (self.num_mics,):
            raise InvalidInputError(f"expected {self.num_mics} TDoAs, got shape {tdoas.shape}")
        frames = [s.push(hop_samples[m]) for m, s in enumerate(self._streams)]
        if frames[0] is None:
            return None
        stack = np.stack(frames)
        beamformed = kernels.das_frame(stack, tdoas, self.config.frame_size)
        total_power = (np.abs(stack) ** 2).sum(axis=0)
        return beamformed, total_power
