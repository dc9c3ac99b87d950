import numpy as np
import pytest

from ofdmradar import Path, RadarConfig, Scene, symmetrize_param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def small_config(M=8, N=8, noise_power_db=-20.0):
    return RadarConfig.from_ofdm(M=M, N=N, delta_f=5e3, T_cp=1e-4, f_c=2e9,
                                 noise_power_db=noise_power_db)


def random_consistent_param(rng, M, N):
    """Random Toeplitz parameter satisfying the Hermitian-consistency tie."""
    U = rng.normal(size=(2 * M - 1, 2 * N - 1)) + 1j * rng.normal(size=(2 * M - 1, 2 * N - 1))
    return symmetrize_param(U)


def two_path_scene(rng, M, N, min_sep=1.5, amp=1.0):
    """Two unit-power paths separated by at least min_sep resolution cells."""
    while True:
        phis = rng.uniform(0, 1, 2)
        psis = rng.uniform(0, 1, 2)
        dphi = min(abs(phis[0] - phis[1]) % 1, 1 - abs(phis[0] - phis[1]) % 1)
        dpsi = min(abs(psis[0] - psis[1]) % 1, 1 - abs(psis[0] - psis[1]) % 1)
        if dphi >= min_sep / M or dpsi >= min_sep / N:
            break
    paths = tuple(Path(alpha=amp * np.exp(2j * np.pi * rng.uniform()),
                       phi=float(phis[k]), psi=float(psis[k])) for k in range(2))
    return Scene(targets=paths)
