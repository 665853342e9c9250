"""Objective evaluation: scale-invariant SDR and short-time intelligibility.

si_sdr projects the estimate onto the reference before computing the error
ratio, so it is exactly invariant to positive scaling of the estimate; values
are capped at +-60 dB to keep aggregates finite.

stoi follows the standard short-time objective intelligibility recipe:
resample to 10 kHz, drop frames more than 40 dB below the loudest, 256-sample
frames with 50% overlap zero-padded to a 512-point FFT, 15 one-third-octave
bands from 150 Hz, 384 ms (30-frame) segments, per-segment normalization with
clipping at -15 dB, and the mean of band/segment envelope correlations.
"""

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import resample_poly

from .errors import InsufficientSignalError, InvalidInputError

SI_SDR_CAP_DB = 60.0

_STOI_RATE = 10000
_STOI_FRAME = 256
_STOI_HOP = 128
_STOI_NFFT = 512
_STOI_NUM_BANDS = 15
_STOI_MIN_FREQ = 150.0
_STOI_SEG_FRAMES = 30
_STOI_BETA_DB = -15.0
_STOI_DYN_RANGE_DB = 40.0
_EPS = np.finfo(np.float64).eps


def si_sdr(estimate, reference):
    """Scale-invariant signal-to-distortion ratio in dB, capped at +-60."""
    estimate = np.asarray(estimate, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if estimate.shape != reference.shape or estimate.ndim != 1:
        raise InvalidInputError("estimate and reference must be equal-length 1-D signals")
    ref_energy = float(reference @ reference)
    if ref_energy == 0:
        raise InvalidInputError("reference signal is all zero")
    alpha = float(estimate @ reference) / ref_energy
    target = alpha * reference
    err = target - estimate
    target_power = float(target @ target)
    err_power = float(err @ err)
    if target_power == 0:
        return -SI_SDR_CAP_DB
    if err_power == 0:
        return SI_SDR_CAP_DB
    value = 10.0 * math.log10(target_power / err_power)
    return float(np.clip(value, -SI_SDR_CAP_DB, SI_SDR_CAP_DB))


def _third_octave_bands(nfft, rate, num_bands, min_freq):
    freqs = np.arange(nfft // 2 + 1) * rate / nfft
    centers = min_freq * 2.0 ** (np.arange(num_bands) / 3.0)
    matrix = np.zeros((num_bands, freqs.size))
    for i, cf in enumerate(centers):
        lo = cf / 2.0 ** (1.0 / 6.0)
        hi = cf * 2.0 ** (1.0 / 6.0)
        matrix[i, (freqs >= lo) & (freqs < hi)] = 1.0
    return matrix


def _frame_signal(x, frame, hop):
    num = (x.size - frame) // hop + 1
    if num < 1:
        return np.zeros((0, frame))
    idx = hop * np.arange(num)[:, None] + np.arange(frame)[None, :]
    return x[idx]


def _remove_silent_frames(x, y, frame, hop, dyn_range_db):
    window = np.hanning(frame + 2)[1:-1]
    x_frames = _frame_signal(x, frame, hop) * window
    y_frames = _frame_signal(y, frame, hop) * window
    energies = 20.0 * np.log10(np.linalg.norm(x_frames, axis=1) + _EPS)
    keep = energies > energies.max(initial=-np.inf) - dyn_range_db
    x_frames, y_frames = x_frames[keep], y_frames[keep]
    # Overlap-add the retained frames back into contiguous signals.
    n_out = x_frames.shape[0] * hop + frame - hop if x_frames.shape[0] else 0
    x_out = np.zeros(n_out)
    y_out = np.zeros(n_out)
    for i in range(x_frames.shape[0]):
        x_out[i * hop:i * hop + frame] += x_frames[i]
        y_out[i * hop:i * hop + frame] += y_frames[i]
    return x_out, y_out


def stoi(estimate, reference, rate):
    """Short-time objective intelligibility of estimate against clean reference."""
    estimate = np.asarray(estimate, dtype=np.float64)
    reference = np.asarray(reference, dtype=np.float64)
    if estimate.shape != reference.shape or estimate.ndim != 1:
        raise InvalidInputError("estimate and reference must be equal-length 1-D signals")
    if rate != _STOI_RATE:
        up, down = _STOI_RATE, rate
        g = math.gcd(up, down)
        reference = resample_poly(reference, up // g, down // g)
        estimate = resample_poly(estimate, up // g, down // g)
    reference, estimate = _remove_silent_frames(
        reference, estimate, _STOI_FRAME, _STOI_HOP, _STOI_DYN_RANGE_DB
    )
    window = np.hanning(_STOI_FRAME + 2)[1:-1]
    ref_frames = _frame_signal(reference, _STOI_FRAME, _STOI_HOP) * window
    est_frames = _frame_signal(estimate, _STOI_FRAME, _STOI_HOP) * window
    if ref_frames.shape[0] < _STOI_SEG_FRAMES:
        raise InsufficientSignalError(
            f"need >= {_STOI_SEG_FRAMES} active frames after silence removal, "
            f"got {ref_frames.shape[0]}"
        )
    obm = _third_octave_bands(_STOI_NFFT, _STOI_RATE, _STOI_NUM_BANDS, _STOI_MIN_FREQ)
    ref_spec = np.abs(np.fft.rfft(ref_frames, n=_STOI_NFFT, axis=1)) ** 2
    est_spec = np.abs(np.fft.rfft(est_frames, n=_STOI_NFFT, axis=1)) ** 2
    ref_bands = np.sqrt(ref_spec @ obm.T)  # (frames, bands)
    est_bands = np.sqrt(est_spec @ obm.T)

    clip_factor = 10.0 ** (-_STOI_BETA_DB / 20.0)
    correlations = []
    for m in range(_STOI_SEG_FRAMES, ref_bands.shape[0] + 1):
        ref_seg = ref_bands[m - _STOI_SEG_FRAMES:m].T  # (bands, 30)
        est_seg = est_bands[m - _STOI_SEG_FRAMES:m].T
        alpha = np.linalg.norm(ref_seg, axis=1, keepdims=True) / (
            np.linalg.norm(est_seg, axis=1, keepdims=True) + _EPS
        )
        est_prime = np.minimum(est_seg * alpha, ref_seg * (1.0 + clip_factor))
        ref_c = ref_seg - ref_seg.mean(axis=1, keepdims=True)
        est_c = est_prime - est_prime.mean(axis=1, keepdims=True)
        denom = np.linalg.norm(ref_c, axis=1) * np.linalg.norm(est_c, axis=1) + _EPS
        correlations.append((ref_c * est_c).sum(axis=1) / denom)
    return float(np.mean(correlations))


@dataclass
class EvalRow:
    name: str
    si_sdr_input: float
    si_sdr_output: float
    stoi_input: float
    stoi_output: float
    interference: str = "speech"  # "speech" (speech-only) | "mixed"

    @property
    def si_sdr_delta(self):
        return self.si_sdr_output - self.si_sdr_input

    @property
    def stoi_delta(self):
        return self.stoi_output - self.stoi_input


@dataclass
class EvalReport:
    rows: list = field(default_factory=list)

    def summary(self):
        def agg(rows):
            if not rows:
                return None
            return {
                "count": len(rows),
                "si_sdr_input_mean": float(np.mean([r.si_sdr_input for r in rows])),
                "si_sdr_output_mean": float(np.mean([r.si_sdr_output for r in rows])),
                "si_sdr_delta_mean": float(np.mean([r.si_sdr_delta for r in rows])),
                "stoi_input_mean": float(np.mean([r.stoi_input for r in rows])),
                "stoi_output_mean": float(np.mean([r.stoi_output for r in rows])),
                "stoi_delta_mean": float(np.mean([r.stoi_delta for r in rows])),
            }

        return {
            "all": agg(self.rows),
            "speech_interference": agg([r for r in self.rows if r.interference == "speech"]),
            "mixed_interference": agg([r for r in self.rows if r.interference == "mixed"]),
        }

    def write_csv(self, path):
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(
                ["name", "interference", "si_sdr_input", "si_sdr_output",
                 "si_sdr_delta", "stoi_input", "stoi_output", "stoi_delta"]
            )
            for r in self.rows:
                writer.writerow(
                    [r.name, r.interference, f"{r.si_sdr_input:.6f}",
                     f"{r.si_sdr_output:.6f}", f"{r.si_sdr_delta:.6f}",
                     f"{r.stoi_input:.6f}", f"{r.stoi_output:.6f}", f"{r.stoi_delta:.6f}"]
                )

    def write_summary(self, path):
        with open(path, "w") as f:
            json.dump(self.summary(), f, indent=2, sort_keys=True)


def fractional_shift(signal, delay_samples):
    """Shift a signal by a (possibly negative, fractional) number of samples
    using a linear phase ramp; circular wrap-around stays within the edge
    trim used by the evaluation."""
    signal = np.asarray(signal, dtype=np.float64)
    k = np.arange(signal.size // 2 + 1)
    phase = np.exp(-2j * np.pi * k * delay_samples / signal.size)
    return np.fft.irfft(np.fft.rfft(signal) * phase, signal.size)


def evaluate_scenario(output, enhanced, rate, reference_channel=0, edge_trim=None,
                      name="scenario", interference="speech", align_tdoa=None):
    """Input-vs-enhanced metrics for one scenario.

    Reference = clean target image at the reference channel; input metrics use
    the mixture at that channel. The enhanced signal is trimmed or padded to
    the mixture length, and `edge_trim` samples (default: one STFT frame,
    512) are dropped from both ends before scoring to exclude analysis ramps.

    The beamformed pipeline output is time-aligned to the array origin, not
    to any microphone, so it sits a constant fraction of a millisecond off
    the reference channel. `align_tdoa` (default: the reference channel's
    ground-truth TDoA at the first frame) delays the enhanced signal by that
    many samples so the metrics score enhancement, not array geometry.
    """
    mixture = output.mixture[reference_channel]
    reference = output.target_images[reference_channel]
    enhanced = np.asarray(enhanced, dtype=np.float64)
    if align_tdoa is None:
        align_tdoa = float(output.tdoa_truth.tdoas[0][reference_channel])
    if align_tdoa:
        enhanced = fractional_shift(enhanced, align_tdoa)
    if enhanced.size < mixture.size:
        enhanced = np.pad(enhanced, (0, mixture.size - enhanced.size))
    enhanced = enhanced[:mixture.size]
    trim = 512 if edge_trim is None else edge_trim
    s = slice(trim, mixture.size - trim if trim else None)
    return EvalRow(
        name=name,
        si_sdr_input=si_sdr(mixture[s], reference[s]),
        si_sdr_output=si_sdr(enhanced[s], reference[s]),
        stoi_input=stoi(mixture[s], reference[s], rate),
        stoi_output=stoi(enhanced[s], reference[s], rate),
        interference=interference,
    )
