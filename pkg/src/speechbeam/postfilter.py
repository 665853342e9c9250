"""Mask-based postfilter: oracle ratio mask, GRU mask estimation, and gain
application to the beamformed spectrogram.

The estimator input per frame is the concatenation of log(|Y|^2 + eps) and
log(|Yhat|^2 + eps) (beamformed power and total power), normalized per
feature with statistics stored in the weights file. The network is strictly
causal: two unidirectional GRU layers, then linear + sigmoid per bin.
"""

import numpy as np

from . import kernels
from .errors import InvalidInputError, InvalidWeightsError


def ideal_ratio_mask(speech_specs, noise_specs):
    """Oracle ratio mask from per-mic speech and noise spectrograms (M, L, K).

    Per cell: speech power / (speech power + noise power), summed over mics.
    Cells with zero total power get mask 0 (attenuate silence).
    """
    speech_specs = np.asarray(speech_specs)
    noise_specs = np.asarray(noise_specs)
    if speech_specs.shape != noise_specs.shape or speech_specs.ndim != 3:
        raise InvalidInputError(
            f"speech/noise stacks must share (M, L, K) shape, got "
            f"{speech_specs.shape} vs {noise_specs.shape}"
        )
    speech_power = (np.abs(speech_specs) ** 2).sum(axis=0)
    total = speech_power + (np.abs(noise_specs) ** 2).sum(axis=0)
    with np.errstate(invalid="ignore"):
        mask = np.where(total > 0, speech_power / np.where(total > 0, total, 1.0), 0.0)
    return mask


def make_features(beamformed, total_power, weights):
    """Per-frame normalized log-power features, shape (L, 2K)."""
    beamformed = np.asarray(beamformed)
    total_power = np.asarray(total_power)
    if beamformed.shape != total_power.shape or beamformed.ndim != 2:
        raise InvalidInputError("beamformed and total-power spectrograms must share (L, K) shape")
    if 2 * beamformed.shape[1] != weights.input_dim:
        raise InvalidInputError(
            f"{beamformed.shape[1]} bins do not match weights input_dim {weights.input_dim}"
        )
    raw = np.concatenate(
        [
            np.log(np.abs(beamformed) ** 2 + weights.epsilon),
            np.log(total_power + weights.epsilon),
        ],
        axis=1,
    )
    return (raw - weights.norm_mean.astype(np.float64)) / weights.norm_std.astype(np.float64)


class GruStream:
    """Single-frame stepping of the mask estimator; owns the hidden state."""

    def __init__(self, weights):
        self.weights = weights
        self._w_ih = [w.astype(np.float64) for w in weights.weight_ih]
        self._w_hh = [w.astype(np.float64) for w in weights.weight_hh]
        self._b_ih = [b.astype(np.float64) for b in weights.bias_ih]
        self._b_hh = [b.astype(np.float64) for b in weights.bias_hh]
        self._head_w = weights.head_weight.astype(np.float64)
        self._head_b = weights.head_bias.astype(np.float64)
        self._hidden = [np.zeros(weights.hidden_dim) for _ in range(weights.num_layers)]

    def step(self, feature):
        """One recurrence step: feature frame (input_dim,) -> mask frame (output_dim,)."""
        feature = np.asarray(feature, dtype=np.float64)
        if feature.shape != (self.weights.input_dim,):
            raise InvalidWeightsError(
                f"feature dim {feature.shape} does not match input_dim {self.weights.input_dim}"
            )
        x = feature
        for layer in range(self.weights.num_layers):
            self._hidden[layer] = kernels.gru_step(
                x,
                self._hidden[layer],
                self._w_ih[layer],
                self._w_hh[layer],
                self._b_ih[layer],
                self._b_hh[layer],
            )
            x = self._hidden[layer]
        logits = self._head_w @ x + self._head_b
        return 1.0 / (1.0 + np.exp(-logits))

    def reset(self):
        for h in self._hidden:
            h[:] = 0.0


def gru_infer(features, weights):
    """Whole-sequence mask estimation, (L, input_dim) -> (L, output_dim).

    Implemented as a loop over GruStream.step, so batch and streaming paths
    are bit-identical by construction.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != weights.input_dim:
        raise InvalidWeightsError(
            f"features must be (L, {weights.input_dim}), got {features.shape}"
        )
    stream = GruStream(weights)
    return np.stack([stream.step(f) for f in features]) if len(features) else \
        np.zeros((0, weights.output_dim))


def mask_to_gain(mask):
    """Per-cell gain = sqrt(mask); mask must lie in [0, 1]."""
    mask = np.asarray(mask)
    if mask.size and (mask.min() < 0 or mask.max() > 1):
        raise InvalidInputError("mask values must lie in [0, 1]")
    return np.sqrt(mask)


def apply_gain(beamformed, gain):
    """Elementwise attenuation of the beamformed spectrogram: Z = G * Y."""
    beamformed = np.asarray(beamformed)
    gain = np.asarray(gain)
    if beamformed.shape != gain.shape:
        raise InvalidInputError(
            f"shape mismatch: spectrogram {beamformed.shape} vs gain {gain.shape}"
        )
    return beamformed * gain


def weighted_mse_loss(target_mask, estimated_mask, beamformed_power):
    """Training criterion: sum over cells of ((C - Chat) * |Y|^2)^2."""
    target_mask = np.asarray(target_mask, dtype=np.float64)
    estimated_mask = np.asarray(estimated_mask, dtype=np.float64)
    beamformed_power = np.asarray(beamformed_power, dtype=np.float64)
    if not (target_mask.shape == estimated_mask.shape == beamformed_power.shape):
        raise InvalidInputError("loss inputs must share one (L, K) shape")
    return float(np.sum(((target_mask - estimated_mask) * beamformed_power) ** 2))
