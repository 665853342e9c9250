import json
import subprocess
import sys
import textwrap

import numpy as np

from speechbeam import kernels


def make_gru_inputs(seed, input_dim=32, hidden_dim=16):
    rng = np.random.default_rng(seed)
    return (
        rng.standard_normal(input_dim),
        rng.standard_normal(hidden_dim),
        rng.standard_normal((3 * hidden_dim, input_dim)),
        rng.standard_normal((3 * hidden_dim, hidden_dim)),
        rng.standard_normal(3 * hidden_dim),
        rng.standard_normal(3 * hidden_dim),
    )


def make_das_inputs(seed, num_mics=8, num_bins=257):
    rng = np.random.default_rng(seed)
    frames = rng.standard_normal((num_mics, num_bins)) \
        + 1j * rng.standard_normal((num_mics, num_bins))
    tau = rng.uniform(-3, 3, num_mics)
    return frames, tau


class TestBackendEquivalence:
    def test_backend_name_valid(self):
        assert kernels.backend_name() in ("numba", "numpy")

    def test_gru_step_matches_numpy_reference(self):
        for seed in range(5):
            args = make_gru_inputs(seed)
            fast = kernels.gru_step(*args)
            reference = kernels._gru_step(*args)
            np.testing.assert_allclose(fast, reference, rtol=1e-12, atol=1e-14)

    def test_das_frame_matches_numpy_reference(self):
        for seed in range(5):
            frames, tau = make_das_inputs(seed)
            fast = kernels.das_frame(frames, tau, 512)
            reference = kernels._das_frame_np(frames, tau, 512)
            np.testing.assert_allclose(fast, reference, rtol=1e-10, atol=1e-12)

    def test_gru_step_state_bounds(self):
        # tanh/sigmoid mixing keeps the state inside (-1, 1) from a zero state.
        x, h, w_ih, w_hh, b_ih, b_hh = make_gru_inputs(9)
        out = kernels.gru_step(x, np.zeros_like(h), w_ih, w_hh, b_ih, b_hh)
        assert np.all(np.abs(out) < 1.0)


class TestEnvironmentFlag:
    def test_flag_forces_numpy_backend(self, tmp_path):
        script = textwrap.dedent(
            """
            import json, sys
            import numpy as np
            from speechbeam import kernels

            rng = np.random.default_rng(3)
            frames = rng.standard_normal((4, 257)) + 1j * rng.standard_normal((4, 257))
            tau = rng.uniform(-3, 3, 4)
            out = kernels.das_frame(frames, tau, 512)
            np.save(sys.argv[1], out)
            print(json.dumps({"backend": kernels.backend_name()}))
            """
        )
        out_path = tmp_path / "das.npy"
        result = subprocess.run(
            [sys.executable, "-c", script, str(out_path)],
            capture_output=True, text=True, check=True,
            env={"SPEECHBEAM_NO_NUMBA": "1", "PATH": "/usr/bin:/bin"},
        )
        assert json.loads(result.stdout)["backend"] == "numpy"
        rng = np.random.default_rng(3)
        frames = rng.standard_normal((4, 257)) + 1j * rng.standard_normal((4, 257))
        tau = rng.uniform(-3, 3, 4)
        np.testing.assert_allclose(
            np.load(out_path), kernels.das_frame(frames, tau, 512),
            rtol=1e-10, atol=1e-12,
        )
