"""Microphone-array geometry, direction-to-TDoA conversion, and the
pixel-to-TDoA calibration map.

Coordinate frame: x right, y up, z forward (camera boresight). Azimuth is
measured in the x-z plane from +z toward +x, elevation from that plane toward
+y. TDoAs are referenced to the array origin (centroid of the microphones)
and expressed in fractional samples; a microphone closer to the source has a
negative TDoA (sound arrives there earlier).
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateCalibrationError,
    InsufficientCalibrationDataError,
    InvalidConfigError,
    InvalidInputError,
)

SPEED_OF_SOUND = 343.0

# Eyeglass-scale 8-mic reference layout: 4 across the front bar, 2 per side
# arm running back along the temples. Recentered on construction.
DEFAULT_MIC_POSITIONS = [
    [-0.062, 0.0, 0.0],
    [-0.030, 0.0, 0.0],
    [0.030, 0.0, 0.0],
    [0.062, 0.0, 0.0],
    [-0.070, 0.0, -0.040],
    [-0.070, 0.0, -0.100],
    [0.070, 0.0, -0.040],
    [0.070, 0.0, -0.100],
]


@dataclass(frozen=True)
class ArrayGeometry:
    """Microphone positions in meters, recentered so the centroid is the origin."""

    mic_positions: np.ndarray
    speed_of_sound: float = SPEED_OF_SOUND

    def __post_init__(self):
        pos = np.asarray(self.mic_positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 2:
            raise InvalidConfigError(f"mic_positions must be (M>=2, 3), got {pos.shape}")
        if not np.all(np.isfinite(pos)):
            raise InvalidConfigError("mic_positions must be finite")
        if self.speed_of_sound <= 0:
            raise InvalidConfigError("speed_of_sound must be positive")
        pos = pos - pos.mean(axis=0)
        pos.setflags(write=False)
        object.__setattr__(self, "mic_positions", pos)

    @property
    def num_mics(self):
        return self.mic_positions.shape[0]

    def tau_max(self, sample_rate):
        """Largest possible origin-referenced TDoA magnitude, in samples."""
        r_max = np.linalg.norm(self.mic_positions, axis=1).max()
        return sample_rate * r_max / self.speed_of_sound

    @classmethod
    def default(cls):
        return cls(np.array(DEFAULT_MIC_POSITIONS))

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            data = json.load(f)
        return cls(
            np.array(data["mic_positions"], dtype=np.float64),
            float(data.get("speed_of_sound", SPEED_OF_SOUND)),
        )

    def to_json(self, path):
        with open(path, "w") as f:
            json.dump(
                {
                    "mic_positions": self.mic_positions.tolist(),
                    "speed_of_sound": self.speed_of_sound,
                },
                f,
                indent=2,
            )


def direction_from_angles(azimuth_deg, elevation_deg=0.0):
    """Unit DoA vector for azimuth/elevation in degrees."""
    az = math.radians(azimuth_deg)
    el = math.radians(elevation_deg)
    return np.array([math.sin(az) * math.cos(el), math.sin(el), math.cos(az) * math.cos(el)])


def tdoa_from_direction(geometry, doa, sample_rate):
    """Far-field TDoAs (fractional samples) for a plane wave from unit vector doa.

    tau_m = -(rate/c) * <p_m, doa>: positive projection toward the source means
    earlier arrival, hence negative delay relative to the origin.
    """
    doa = np.asarray(doa, dtype=np.float64)
    if doa.shape != (3,) or abs(np.linalg.norm(doa) - 1.0) > 1e-6:
        raise InvalidInputError("doa must be a unit 3-vector")
    return -(sample_rate / geometry.speed_of_sound) * (geometry.mic_positions @ doa)


@dataclass(frozen=True)
class PinholeCamera:
    """Pinhole camera on the array boresight (+z), square pixels, no distortion."""

    image_width: int = 640
    image_height: int = 480
    horizontal_fov_deg: float = 80.0

    @property
    def focal_px(self):
        return (self.image_width / 2) / math.tan(math.radians(self.horizontal_fov_deg) / 2)

    def project(self, position):
        """Project a 3-D point (array frame, z > 0) to pixel (u, v)."""
        x, y, z = np.asarray(position, dtype=np.float64)
        if z <= 0:
            raise InvalidInputError("point is behind the camera")
        u = self.image_width / 2 + self.focal_px * x / z
        v = self.image_height / 2 - self.focal_px * y / z
        if not (0 <= u <= self.image_width and 0 <= v <= self.image_height):
            raise InvalidInputError(f"point projects outside the image: ({u:.1f}, {v:.1f})")
        return u, v

    def pixel_to_direction(self, u, v):
        """Unit DoA vector looking through pixel (u, v)."""
        d = np.array(
            [
                (u - self.image_width / 2) / self.focal_px,
                -(v - self.image_height / 2) / self.focal_px,
                1.0,
            ]
        )
        return d / np.linalg.norm(d)


@dataclass(frozen=True)
class PixelTrack:
    """Timestamped pixel positions of the tracked target (default 4 Hz)."""

    samples: tuple  # of (time_s, u, v)
    image_width: int = 640
    image_height: int = 480
    rate: float = 4.0

    def __post_init__(self):
        samples = tuple((float(t), float(u), float(v)) for t, u, v in self.samples)
        if not samples:
            raise InvalidInputError("pixel track must not be empty")
        times = [t for t, _, _ in samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidInputError("track timestamps must be strictly increasing")
        for _, u, v in samples:
            if not (0 <= u <= self.image_width and 0 <= v <= self.image_height):
                raise InvalidInputError(f"track pixel ({u}, {v}) outside image bounds")
        object.__setattr__(self, "samples", samples)

    @classmethod
    def from_json(cls, path, image_width=640, image_height=480):
        with open(path) as f:
            data = json.load(f)
        return cls(
            tuple((d["t"], d["u"], d["v"]) for d in data),
            image_width=image_width,
            image_height=image_height,
        )

    def to_json(self, path):
        with open(path, "w") as f:
            json.dump([{"t": t, "u": u, "v": v} for t, u, v in self.samples], f, indent=2)


def _monomial_exponents(degree):
    """(u_pow, v_pow) pairs ordered by total degree, then u-power descending."""
    exps = []
    for total in range(degree + 1):
        for a in range(total, -1, -1):
            exps.append((a, total - a))
    return exps


def _design_matrix(u, v, degree):
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return np.stack([u**a * v**b for a, b in _monomial_exponents(degree)], axis=-1)


@dataclass(frozen=True)
class CalibrationMap:
    """Per-mic bivariate polynomial mapping pixel (u, v) to TDoA in samples."""

    degree: int
    coefficients: np.ndarray  # (M, num_terms)
    image_width: int
    image_height: int
    tau_max: float

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=np.float64)
        n_terms = (self.degree + 1) * (self.degree + 2) // 2
        if coeffs.ndim != 2 or coeffs.shape[1] != n_terms:
            raise InvalidConfigError(
                f"expected {n_terms} coefficients per mic for degree {self.degree}, "
                f"got shape {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def num_mics(self):
        return self.coefficients.shape[0]

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            data = json.load(f)
        return cls(
            degree=int(data["degree"]),
            coefficients=np.array(data["coefficients"], dtype=np.float64),
            image_width=int(data["image_width"]),
            image_height=int(data["image_height"]),
            tau_max=float(data["tau_max"]),
        )

    def to_json(self, path):
        with open(path, "w") as f:
            json.dump(
                {
                    "degree": self.degree,
                    "coefficients": self.coefficients.tolist(),
                    "image_width": self.image_width,
                    "image_height": self.image_height,
                    "tau_max": self.tau_max,
                },
                f,
                indent=2,
            )


def fit_calibration(pixels, tdoas, degree, image_width=640, image_height=480, tau_max=None):
    """Least-squares polynomial fit of pixel -> TDoA, one fit per microphone.

    Returns (CalibrationMap, per-mic residual RMS in samples).
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    tdoas = np.asarray(tdoas, dtype=np.float64)
    if pixels.ndim != 2 or pixels.shape[1] != 2:
        raise InvalidInputError(f"pixels must be (P, 2), got {pixels.shape}")
    if tdoas.ndim != 2 or tdoas.shape[0] != pixels.shape[0]:
        raise InvalidInputError("tdoas must have one row of M values per pixel pair")
    n_terms = (degree + 1) * (degree + 2) // 2
    if pixels.shape[0] < n_terms:
        raise InsufficientCalibrationDataError(
            f"need at least {n_terms} pairs for degree {degree}, got {pixels.shape[0]}"
        )
    if np.any(pixels[:, 0] < 0) or np.any(pixels[:, 0] > image_width) or \
            np.any(pixels[:, 1] < 0) or np.any(pixels[:, 1] > image_height):
        raise InvalidInputError("calibration pixels outside image bounds")
    design = _design_matrix(pixels[:, 0], pixels[:, 1], degree)
    # Column scaling: raw pixel monomials span many orders of magnitude, which
    # otherwise wrecks the rank test at higher degrees.
    col_scale = np.linalg.norm(design, axis=0)
    if np.any(col_scale == 0):
        raise DegenerateCalibrationError("degenerate calibration points (zero monomial column)")
    coeffs, _, rank, _ = np.linalg.lstsq(design / col_scale, tdoas, rcond=None)
    coeffs /= col_scale[:, None]
    if rank < n_terms:
        raise DegenerateCalibrationError(
            f"design matrix rank {rank} < {n_terms}; spread the calibration points"
        )
    residuals = design @ coeffs - tdoas
    rms = np.sqrt(np.mean(residuals**2, axis=0))
    if tau_max is None:
        tau_max = float(np.abs(tdoas).max())
    cal = CalibrationMap(
        degree=degree,
        coefficients=coeffs.T,
        image_width=image_width,
        image_height=image_height,
        tau_max=tau_max,
    )
    return cal, rms


def map_pixel_to_tdoa(cal, u, v):
    """Evaluate the calibration polynomials at (u, v); clamped to +-tau_max."""
    if not (0 <= u <= cal.image_width and 0 <= v <= cal.image_height):
        raise InvalidInputError(f"pixel ({u}, {v}) outside image bounds")
    basis = _design_matrix(u, v, cal.degree)
    tau = cal.coefficients @ basis
    return np.clip(tau, -cal.tau_max, cal.tau_max)


@dataclass(frozen=True)
class TdoaTrajectory:
    """Per-STFT-frame TDoA vectors, shape (L, M), in fractional samples."""

    tdoas: np.ndarray
    tau_max: float

    def __post_init__(self):
        tdoas = np.asarray(self.tdoas, dtype=np.float64)
        if tdoas.ndim != 2:
            raise InvalidInputError(f"tdoas must be (L, M), got shape {tdoas.shape}")
        if np.abs(tdoas).max(initial=0.0) > self.tau_max + 1e-9:
            raise InvalidInputError("trajectory exceeds tau_max")
        tdoas.setflags(write=False)
        object.__setattr__(self, "tdoas", tdoas)

    @property
    def num_frames(self):
        return self.tdoas.shape[0]

    @classmethod
    def constant(cls, tau, num_frames, tau_max=None):
        tau = np.asarray(tau, dtype=np.float64)
        if tau_max is None:
            tau_max = float(np.abs(tau).max())
        return cls(np.tile(tau, (num_frames, 1)), tau_max)

    @classmethod
    def from_json(cls, path):
        with open(path) as f:
            data = json.load(f)
        return cls(np.array(data["tdoas"], dtype=np.float64), float(data["tau_max"]))

    def to_json(self, path):
        with open(path, "w") as f:
            json.dump({"tau_max": self.tau_max, "tdoas": self.tdoas.tolist()}, f)


def track_to_trajectory(track, cal, num_frames, config):
    """Zero-order-hold conversion of a pixel track to per-frame TDoAs.

    Each STFT frame takes the TDoAs of the most recent track sample at or
    before its center time; frames before the first sample use the first.
    """
    times = np.array([t for t, _, _ in track.samples])
    taus = np.stack([map_pixel_to_tdoa(cal, u, v) for _, u, v in track.samples])
    centers = np.array([config.frame_center_time(l) for l in range(num_frames)])
    idx = np.searchsorted(times, centers, side="right") - 1
    idx = np.clip(idx, 0, len(times) - 1)
    return TdoaTrajectory(taus[idx], cal.tau_max)
