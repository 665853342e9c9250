import numpy as np
import pytest

from speechbeam.geometry import ArrayGeometry
from speechbeam.simulate import ScenarioSpec, SourceSpec, render_scenario
from speechbeam.stft import StftConfig
from speechbeam.synth import synthetic_noise, synthetic_speech


@pytest.fixture(scope="session")
def config():
    return StftConfig()


@pytest.fixture(scope="session")
def geometry():
    return ArrayGeometry.default()


@pytest.fixture(scope="session")
def speech_signal():
    return synthetic_speech(4.0, seed=11)


@pytest.fixture(scope="session")
def noise_signal():
    return synthetic_noise(4.0, seed=12, kind="pink")


def make_scenario_spec(seed, duration_s=4.0, num_interferers=2, snr_db=5.0):
    rng = np.random.default_rng(seed)
    target = SourceSpec(
        signal=synthetic_speech(duration_s, seed=seed * 7 + 1),
        azimuth_deg=float(rng.uniform(-40, 40)),
        elevation_deg=float(rng.uniform(-10, 10)),
        distance_m=float(rng.uniform(1.0, 3.0)),
        role="target",
        label="speech",
    )
    interferers = []
    for i in range(num_interferers):
        if i % 2 == 0:
            sig = synthetic_noise(duration_s, seed=seed * 13 + i, kind="pink")
            label = "noise"
        else:
            sig = synthetic_speech(duration_s, seed=seed * 17 + i + 100)
            label = "speech"
        interferers.append(
            SourceSpec(
                signal=sig,
                azimuth_deg=float(rng.uniform(-180, 180)),
                elevation_deg=float(rng.uniform(-10, 10)),
                distance_m=float(rng.uniform(1.0, 3.0)),
                gain_db=float(rng.uniform(-5, 5)),
                label=label,
            )
        )
    return ScenarioSpec(
        target=target,
        interferers=tuple(interferers),
        snr_db=snr_db,
        duration_s=duration_s,
        seed=seed,
        name=f"fixture_{seed}",
    )


@pytest.fixture(scope="session", name="make_scenario_spec")
def make_scenario_spec_fixture():
    return make_scenario_spec


@pytest.fixture(scope="session")
def scenario(geometry, config):
    return render_scenario(make_scenario_spec(3), geometry=geometry, stft_config=config)
