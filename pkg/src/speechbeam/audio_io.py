"""WAV read/write at the package boundary.

Internal processing is float64; files are 32-bit float by default, 16-bit PCM
on request. Multichannel arrays are (channels, samples) in memory and
interleaved in the file, as usual for WAV.
"""

import numpy as np
from scipy.io import wavfile

from .errors import InvalidInputError


def read_wav(path):
    """Read a WAV file -> (samples, rate). Mono: (n,); multichannel: (M, n)."""
    rate, data = wavfile.read(path)
    if data.dtype == np.int16:
        out = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        out = data.astype(np.float64) / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        out = data.astype(np.float64)
    else:
        raise InvalidInputError(f"unsupported WAV sample format {data.dtype} in {path}")
    if out.ndim == 2:
        out = out.T
    return out, rate


def write_wav(path, samples, rate, pcm16=False):
    """Write mono (n,) or multichannel (M, n) float samples."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 2:
        samples = samples.T
    elif samples.ndim != 1:
        raise InvalidInputError(f"expected (n,) or (M, n) samples, got shape {samples.shape}")
    if pcm16:
        data = np.clip(np.round(samples * 32767.0), -32768, 32767).astype(np.int16)
    else:
        data = samples.astype(np.float32)
    wavfile.write(path, rate, data)
