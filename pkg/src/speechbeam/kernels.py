"""Hot per-frame kernels, numba-jitted with a pure-numpy fallback.

Set SPEECHBEAM_NO_NUMBA=1 to force the numpy path (useful for debugging and
for the benchmark in speechbeam.bench). The selected backend is fixed at
import time and reported by `backend_name()`.
"""

import os

import numpy as np

_DISABLE = os.environ.get("SPEECHBEAM_NO_NUMBA", "").lower() in ("1", "true", "yes")


def _gru_step(x, h, w_ih, w_hh, b_ih, b_hh):
    # Gate layout along axis 0: reset | update | candidate.
    hidden = h.shape[0]
    gi = w_ih @ x + b_ih
    gh = w_hh @ h + b_hh
    r = 1.0 / (1.0 + np.exp(-(gi[:hidden] + gh[:hidden])))
    z = 1.0 / (1.0 + np.exp(-(gi[hidden:2 * hidden] + gh[hidden:2 * hidden])))
    n = np.tanh(gi[2 * hidden:] + r * gh[2 * hidden:])
    return (1.0 - z) * n + z * h


def _das_frame(frames, tau, n_fft):
    # frames: (M, K) complex spectra of one STFT frame; tau: (M,) samples.
    n_mics, n_bins = frames.shape
    out = np.zeros(n_bins, dtype=np.complex128)
    for m in range(n_mics):
        phase = 2.0 * np.pi * tau[m] / n_fft
        for k in range(n_bins):
            out[k] += frames[m, k] * complex(np.cos(phase * k), np.sin(phase * k))
    return out


def _das_frame_np(frames, tau, n_fft):
    k = np.arange(frames.shape[1])
    steer = np.exp(2j * np.pi * np.outer(tau, k) / n_fft)
    return (frames * steer).sum(axis=0)


if not _DISABLE:
    try:
        from numba import njit

        gru_step = njit(cache=True)(_gru_step)
        das_frame = njit(cache=True)(_das_frame)
        _BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a hard dependency
        gru_step = _gru_step
        das_frame = _das_frame_np
        _BACKEND = "numpy"
else:
    gru_step = _gru_step
    das_frame = _das_frame_np
    _BACKEND = "numpy"


def backend_name():
    return _BACKEND
