"""Streaming multichannel speech enhancement: time-varying delay-and-sum
beamforming steered by pixel-track TDoAs, with a GRU mask postfilter."""

from .stft import StftConfig, sine_window, stft, istft, StftStream, IstftStream
from .geometry import (
    ArrayGeometry,
    CalibrationMap,
    PinholeCamera,
    PixelTrack,
    TdoaTrajectory,
    direction_from_angles,
    fit_calibration,
    map_pixel_to_tdoa,
    tdoa_from_direction,
    track_to_trajectory,
)
from .beamformer import BeamformStream, delay_and_sum, total_power_reference
from .postfilter import (
    GruStream,
    apply_gain,
    gru_infer,
    ideal_ratio_mask,
    make_features,
    mask_to_gain,
    weighted_mse_loss,
)
from .weights_io import GruPostfilterWeights, load_weights, save_weights
from .simulate import (
    ScenarioOutput,
    ScenarioSpec,
    SourceSpec,
    generate_batch,
    mix_at_snr,
    propagate,
    render_scenario,
)
from .metrics import EvalReport, EvalRow, evaluate_scenario, si_sdr, stoi
from .pipeline import LatencyReport, StreamingEnhancer, enhance, stream_enhance

__version__ = "0.1.0"
