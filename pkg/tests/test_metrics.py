import math

import numpy as np
import pytest
from scipy.signal import resample_poly

from speechbeam.errors import InsufficientSignalError, InvalidInputError
from speechbeam.metrics import EvalReport, EvalRow, si_sdr, stoi
from speechbeam.synth import synthetic_noise, synthetic_speech


def reference_si_sdr(est, ref):
    """Projection-based SI-SDR as published in open speech-enhancement code."""
    label_power = np.sum(ref**2.0) + 1e-8
    scale = np.sum(est * ref) / label_power
    est_true = scale * ref
    est_res = est - est_true
    true_power = np.sum(est_true**2.0) + 1e-8
    res_power = np.sum(est_res**2.0) + 1e-8
    return 10 * np.log10(true_power) - 10 * np.log10(res_power)


def reference_stoi(est, ref, rate):
    """Loop-based short-time intelligibility oracle, written directly from the
    published recipe: 10 kHz, 40 dB silent-frame removal, 256/128 framing with
    a 512 FFT, 15 one-third-octave bands from 150 Hz, 30-frame segments,
    -15 dB clipping, mean of band-wise envelope correlations."""
    if rate != 10000:
        g = math.gcd(10000, rate)
        ref = resample_poly(ref, 10000 // g, rate // g)
        est = resample_poly(est, 10000 // g, rate // g)

    frame, hop, nfft = 256, 128, 512
    window = np.hanning(frame + 2)[1:-1]
    eps = np.finfo(np.float64).eps

    def frames_of(x):
        return [x[i:i + frame] * window for i in range(0, x.size - frame + 1, hop)]

    ref_frames = frames_of(ref)
    est_frames = frames_of(est)
    levels = [20 * np.log10(np.linalg.norm(f) + eps) for f in ref_frames]
    threshold = max(levels) - 40.0
    kept = [i for i, lvl in enumerate(levels) if lvl > threshold]
    ref_sig = np.zeros(len(kept) * hop + frame - hop)
    est_sig = np.zeros_like(ref_sig)
    for j, i in enumerate(kept):
        ref_sig[j * hop:j * hop + frame] += ref_frames[i]
        est_sig[j * hop:j * hop + frame] += est_frames[i]

    centers = [150.0 * 2.0 ** (b / 3.0) for b in range(15)]
    freqs = np.arange(nfft // 2 + 1) * 10000 / nfft
    band_bins = [
        [k for k, f in enumerate(freqs)
         if cf / 2 ** (1 / 6) <= f < cf * 2 ** (1 / 6)]
        for cf in centers
    ]

    def envelopes(x):
        rows = []
        for f in frames_of(x):
            spec = np.abs(np.fft.fft(f, nfft)[: nfft // 2 + 1]) ** 2
            rows.append([math.sqrt(sum(spec[k] for k in bins)) for bins in band_bins])
        return np.array(rows)

    ref_env = envelopes(ref_sig)
    est_env = envelopes(est_sig)
    seg, clip = 30, 10.0 ** (15.0 / 20.0)
    values = []
    for m in range(seg, ref_env.shape[0] + 1):
        for b in range(15):
            r = ref_env[m - seg:m, b]
            e = est_env[m - seg:m, b]
            alpha = np.linalg.norm(r) / (np.linalg.norm(e) + eps)
            e = np.minimum(e * alpha, r * (1.0 + clip))
            r = r - r.mean()
            e = e - e.mean()
            values.append(
                float(r @ e / (np.linalg.norm(r) * np.linalg.norm(e) + eps))
            )
    return float(np.mean(values))


@pytest.fixture(scope="module")
def fixture_pairs():
    """Twelve (estimate, reference) pairs spanning clean to heavily degraded."""
    pairs = []
    for i in range(6):
        ref = synthetic_speech(2.5, seed=100 + i)
        noise = synthetic_noise(2.5, seed=200 + i, kind=("pink", "white", "machinery")[i % 3])
        noise = noise[: ref.size]
        for snr_db in (0.0, 8.0):
            scale = np.sqrt(
                np.mean(ref**2) / (np.mean(noise**2) * 10 ** (snr_db / 10))
            )
            pairs.append((ref + scale * noise, ref))
    return pairs


class TestSiSdr:
    def test_matches_published_formula(self, fixture_pairs):
        for est, ref in fixture_pairs:
            assert si_sdr(est, ref) == pytest.approx(reference_si_sdr(est, ref), abs=0.01)

    def test_scale_invariance_exact(self, fixture_pairs):
        est, ref = fixture_pairs[0]
        base = si_sdr(est, ref)
        for factor in (0.25, 2.0, 1024.0):
            assert si_sdr(factor * est, ref) == base

    def test_scale_invariance_general(self, fixture_pairs):
        est, ref = fixture_pairs[1]
        base = si_sdr(est, ref)
        for factor in (0.317, 3.9, 77.7):
            assert si_sdr(factor * est, ref) == pytest.approx(base, abs=1e-9)

    def test_perfect_estimate_caps_high(self):
        ref = synthetic_speech(1.0, seed=1)
        assert si_sdr(ref.copy(), ref) == 60.0

    def test_orthogonal_estimate_caps_low(self):
        assert si_sdr(np.array([0.0, 1.0]), np.array([1.0, 0.0])) == -60.0

    def test_known_value(self):
        # target = ref, error = orthogonal unit vector: ratio = 4 -> ~6.02 dB.
        ref = np.array([2.0, 0.0])
        est = np.array([2.0, 1.0])
        assert si_sdr(est, ref) == pytest.approx(10 * math.log10(4.0), abs=1e-12)

    def test_zero_reference_rejected(self):
        with pytest.raises(InvalidInputError):
            si_sdr(np.ones(10), np.zeros(10))

    def test_shape_mismatch(self):
        with pytest.raises(InvalidInputError):
            si_sdr(np.ones(10), np.ones(11))


class TestStoi:
    def test_matches_independent_recipe(self, fixture_pairs):
        for est, ref in fixture_pairs:
            assert stoi(est, ref, 16000) == pytest.approx(
                reference_stoi(est, ref, 16000), abs=0.02
            )

    def test_native_rate_matches_too(self):
        ref = resample_poly(synthetic_speech(2.0, seed=3), 5, 8)
        est = ref + 0.1 * np.random.default_rng(4).standard_normal(ref.size)
        assert stoi(est, ref, 10000) == pytest.approx(
            reference_stoi(est, ref, 10000), abs=0.02
        )

    def test_clean_near_one(self):
        ref = synthetic_speech(2.0, seed=5)
        assert stoi(ref.copy(), ref, 16000) > 0.99

    def test_monotonic_in_snr(self):
        ref = synthetic_speech(2.5, seed=6)
        noise = synthetic_noise(2.5, seed=7, kind="pink")[: ref.size]
        scores = []
        for snr_db in (-5.0, 5.0, 15.0):
            scale = np.sqrt(
                np.mean(ref**2) / (np.mean(noise**2) * 10 ** (snr_db / 10))
            )
            scores.append(stoi(ref + scale * noise, ref, 16000))
        assert scores[0] < scores[1] < scores[2]

    def test_too_short_rejected(self):
        with pytest.raises(InsufficientSignalError):
            stoi(np.ones(1000), np.ones(1000), 16000)


class TestEvalReport:
    def make_rows(self):
        return [
            EvalRow("a", 1.0, 4.0, 0.7, 0.8, interference="speech"),
            EvalRow("b", 2.0, 3.0, 0.6, 0.9, interference="mixed"),
        ]

    def test_deltas(self):
        row = self.make_rows()[0]
        assert row.si_sdr_delta == 3.0
        assert row.stoi_delta == pytest.approx(0.1)

    def test_summary_split(self):
        report = EvalReport(self.make_rows())
        summary = report.summary()
        assert summary["all"]["count"] == 2
        assert summary["speech_interference"]["count"] == 1
        assert summary["mixed_interference"]["si_sdr_delta_mean"] == 1.0
        assert EvalReport([]).summary()["all"] is None

    def test_csv_and_json(self, tmp_path):
        report = EvalReport(self.make_rows())
        report.write_csv(tmp_path / "rows.csv")
        report.write_summary(tmp_path / "summary.json")
        lines = (tmp_path / "rows.csv").read_text().splitlines()
        assert len(lines) == 3 and lines[1].startswith("a,speech,")
        import json

        data = json.loads((tmp_path / "summary.json").read_text())
        assert data["all"]["si_sdr_delta_mean"] == 2.0
