"""Short-time Fourier analysis/synthesis with a power-complementary sine window.

Conventions (fixed so spectrogram magnitudes are comparable everywhere):
  - forward FFT unscaled, inverse scaled by 1/N (numpy default for irfft)
  - bins 0..N/2 stored, DC at index 0, Nyquist at index N/2
  - frame l covers samples [l*hop, l*hop + N); 50% overlap only
  - double precision throughout
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, InvalidInputError


@dataclass(frozen=True)
class StftConfig:
    frame_size: int = 512
    hop_size: int = 256
    sample_rate: int = 16000

    def __post_init__(self):
        if self.frame_size < 2 or self.frame_size % 2 != 0:
            raise InvalidConfigError(f"frame_size must be even and >= 2, got {self.frame_size}")
        if self.hop_size != self.frame_size // 2:
            raise InvalidConfigError(
                f"hop_size must be frame_size/2 for the sine window, got {self.hop_size}"
            )
        if self.sample_rate <= 0:
            raise InvalidConfigError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def num_bins(self):
        return self.frame_size // 2 + 1

    def num_frames(self, num_samples):
        """Frame count for a signal of the given length (>= 1, short inputs are padded)."""
        if num_samples <= self.frame_size:
            return 1
        return (num_samples - self.frame_size) // self.hop_size + 1

    def frame_center_time(self, frame_index):
        """Center time of frame l in seconds."""
        return (frame_index * self.hop_size + self.frame_size / 2) / self.sample_rate


def sine_window(frame_size):
    """Sine (root-Hann) analysis/synthesis window.

    w[n] = sin(pi*(n+0.5)/N); hop-shifted squares sum to one, which gives
    perfect overlap-add reconstruction at 50% overlap.
    """
    if frame_size < 2 or frame_size % 2 != 0:
        raise InvalidConfigError(f"window length must be even and >= 2, got {frame_size}")
    n = np.arange(frame_size)
    return np.sin(np.pi * (n + 0.5) / frame_size)


def stft(signal, config):
    """Forward STFT of a mono signal, shape (L, N/2+1) complex128.

    Signals shorter than one frame are zero-padded to a single frame; trailing
    samples that do not fill a final frame are dropped.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise InvalidInputError("stft expects a non-empty 1-D signal")
    n_fft = config.frame_size
    hop = config.hop_size
    if x.size < n_fft:
        x = np.pad(x, (0, n_fft - x.size))
    num_frames = (x.size - n_fft) // hop + 1
    window = sine_window(n_fft)
    idx = hop * np.arange(num_frames)[:, None] + np.arange(n_fft)[None, :]
    return np.fft.rfft(x[idx] * window, axis=1)


def istft(spec, config, length=None):
    """Inverse STFT by windowed overlap-add; returns float64 mono signal.

    If `length` is given the output is truncated or zero-padded to it.
    """
    spec = np.asarray(spec)
    if spec.ndim != 2 or spec.shape[1] != config.num_bins:
        raise InvalidInputError(
            f"expected (L, {config.num_bins}) spectrogram, got shape {spec.shape}"
        )
    n_fft = config.frame_size
    hop = config.hop_size
    num_frames = spec.shape[0]
    window = sine_window(n_fft)
    frames = np.fft.irfft(spec, n=n_fft, axis=1) * window
    out = np.zeros((num_frames - 1) * hop + n_fft)
    for l in range(num_frames):
        out[l * hop:l * hop + n_fft] += frames[l]
    if length is not None:
        if length <= out.size:
            out = out[:length]
        else:
            out = np.pad(out, (0, length - out.size))
    return out


class StftStream:
    """Hop-by-hop analysis; emits frames identical to whole-signal stft()."""

    def __init__(self, config):
        self.config = config
        self._window = sine_window(config.frame_size)
        self._buffer = np.zeros(config.frame_size)
        self._filled = 0

    def push(self, hop_samples):
        """Push hop_size new samples; returns one spectral frame or None."""
        hop_samples = np.asarray(hop_samples, dtype=np.float64)
        hop = self.config.hop_size
        if hop_samples.shape != (hop,):
            raise InvalidInputError(f"expected {hop} samples, got shape {hop_samples.shape}")
        self._buffer[:-hop] = self._buffer[hop:]
        self._buffer[-hop:] = hop_samples
        self._filled = min(self._filled + hop, self.config.frame_size)
        if self._filled < self.config.frame_size:
            return None
        return np.fft.rfft(self._buffer * self._window)


class IstftStream:
    """Hop-by-hop synthesis; concatenated outputs equal whole-signal istft()."""

    def __init__(self, config):
        self.config = config
        self._window = sine_window(config.frame_size)
        self._overlap = np.zeros(config.frame_size)

    def push(self, frame):
        """Push one spectral frame; returns the hop_size samples now final."""
        frame = np.asarray(frame)
        if frame.shape != (self.config.num_bins,):
            raise InvalidInputError(
                f"expected {self.config.num_bins} bins, got shape {frame.shape}"
            )
        hop = self.config.hop_size
        self._overlap += np.fft.irfft(frame, n=self.config.frame_size) * self._window
        out = self._overlap[:hop].copy()
        self._overlap[:-hop] = self._overlap[hop:]
        self._overlap[-hop:] = 0.0
        return out

    def flush(self):
        """Remaining tail after the last frame (hop_size samples)."""
        out = self._overlap[:self.config.hop_size].copy()
        self._overlap[:] = 0.0
        return out
