import math

import pytest


@pytest.fixture(scope="session")
def clean_measurements(disk_mesh, smooth_sigma):
    """Noise-free smoothened-model data of `smooth_sigma` for three patterns."""
    from aettools.forward.patterns import fourier_patterns
    from aettools.models.electrodes import ScemModel
    from aettools.models.noise import NoiseSpec
    from aettools.reconstruction.measurements import simulate_measurements

    measurements, _ = simulate_measurements(
        disk_mesh,
        smooth_sigma,
        ScemModel(peak=1.0),
        fourier_patterns([1, 2, 3], 8),
        NoiseSpec(snr_db=math.inf),
    )
    return measurements


@pytest.fixture
def lm_config():
    from aettools.models.lm import LmConfig

    return LmConfig(
        alpha0=1.0,
        decay=2.0,
        beta=0.1,
        known_width=0.2,
        step_tol=1e-8,
        max_iter=4,
        eta_b_target=1e-12,
        phase1_max_iter=2,
        phase2_max_iter=2,
        submesh_distance=0.3,
    )
