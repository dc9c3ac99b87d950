"""Radar scene model and per-subcarrier measurement synthesis.

The data domain is the M x N grid of OFDM blocks (index m, Doppler axis) by
subcarriers (index n, delay axis).  A propagation path with complex amplitude
``alpha``, normalized Doppler ``phi`` and normalized delay ``psi`` contributes
``alpha * exp(i*(2*pi*m*phi - 2*pi*n*psi))`` to the clean signal ``z_m(n)``.
Matrices are vectorized column-major, so vector index ``n*M + m`` holds entry
(m, n); all steering/atom layouts follow that convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

C_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class RadarConfig:
    """OFDM and radar physical parameters.

    M, N          number of blocks / subcarriers (both >= 2)
    delta_f       subcarrier spacing in Hz, must equal 1/T
    T, T_cp       symbol and cyclic-prefix durations in seconds
    T_bar         block duration, must equal T + T_cp
    f_c           carrier frequency in Hz
    noise_power_db  per-sample noise power in dB (sigma^2 = 10^(dB/10))
    """

    M: int
    N: int
    delta_f: float
    T: float
    T_cp: float
    T_bar: float
    f_c: float
    noise_power_db: float

    def __post_init__(self):
        if self.M < 2 or self.N < 2:
            raise ConfigError(f"need M >= 2 and N >= 2, got M={self.M}, N={self.N}")
        if abs(self.delta_f * self.T - 1.0) > 1e-12:
            raise ConfigError(f"delta_f must equal 1/T: delta_f={self.delta_f}, T={self.T}")
        if abs(self.T_bar - (self.T + self.T_cp)) > 1e-12 * abs(self.T_bar):
            raise ConfigError(f"T_bar must equal T + T_cp: T_bar={self.T_bar}")

    @classmethod
    def from_ofdm(cls, M, N, delta_f, T_cp, f_c, noise_power_db):
        """Build a config from the free parameters (T and T_bar derived)."""
        T = 1.0 / delta_f
        return cls(M=M, N=N, delta_f=delta_f, T=T, T_cp=T_cp, T_bar=T + T_cp,
                   f_c=f_c, noise_power_db=noise_power_db)

    @property
    def sigma2(self) -> float:
        return 10.0 ** (self.noise_power_db / 10.0)

    @property
    def sigma(self) -> float:
        return 10.0 ** (self.noise_power_db / 20.0)


@dataclass(frozen=True)
class Path:
    """One scatterer: complex amplitude and normalized (Doppler, delay) pair."""

    alpha: complex
    phi: float
    psi: float

    def __post_init__(self):
        if not (0.0 <= self.phi < 1.0):
            raise ConfigError(f"phi must be in [0, 1), got {self.phi}")
        if not (0.0 <= self.psi < 1.0):
            raise ConfigError(f"psi must be in [0, 1), got {self.psi}")


@dataclass(frozen=True)
class Scene:
    """Targets plus clutter (the direct path is modelled as a clutter entry)."""

    targets: tuple[Path, ...]
    clutter: tuple[Path, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "clutter", tuple(self.clutter))
        if len(self.targets) + len(self.clutter) < 1:
            raise ConfigError("scene must contain at least one path")

    @property
    def paths(self) -> tuple[Path, ...]:
        return self.targets + self.clutter

    @property
    def K(self) -> int:
        return len(self.targets) + len(self.clutter)


@dataclass(frozen=True)
class Constellation:
    """PSK constellation with a Gray bit labeling.

    ``points[i]`` is the unit-magnitude symbol whose bit label is
    ``labels[i]``; adjacent points differ in exactly one bit.
    """

    name: str
    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=int))
        if not np.allclose(np.abs(pts), 1.0, atol=1e-12):
            raise ConfigError(f"{self.name}: constellation points must have unit magnitude")

    @property
    def bits_per_symbol(self) -> int:
        return self.labels.shape[1]

    def indices_of(self, symbols: np.ndarray) -> np.ndarray:
        """Map symbols back to constellation indices (exact match expected)."""
        d = np.abs(symbols[..., None] - self.points)
        idx = np.argmin(d, axis=-1)
        if not np.allclose(np.take(self.points, idx), symbols, atol=1e-9):
            raise ConfigError("symbols do not belong to the constellation")
        return idx

    def indices_from_bits(self, bits: np.ndarray) -> np.ndarray:
        """Inverse of the bit labeling: bit rows -> point indices."""
        nbits = self.bits_per_symbol
        weights = 1 << np.arange(nbits - 1, -1, -1)
        table = np.empty(1 << nbits, dtype=int)
        table[self.labels @ weights] = np.arange(len(self.points))
        return table[bits @ weights]


def bpsk() -> Constellation:
    return Constellation("BPSK", np.array([1.0 + 0j, -1.0 + 0j]),
                         np.array([[0], [1]]))


def qpsk() -> Constellation:
    # Gray order around the circle: 00, 01, 11, 10.
    angles = np.pi / 4 + np.pi / 2 * np.arange(4)
    return Constellation("QPSK", np.exp(1j * angles),
                         np.array([[0, 0], [0, 1], [1, 1], [1, 0]]))


CONSTELLATIONS = {"BPSK": bpsk, "QPSK": qpsk}


@dataclass(frozen=True)
class Measurement:
    """Demodulated-symbol matrix and vectorized received data.

    ``r_bar = s_tilde * z_bar + e_bar + v_bar`` holds to machine precision for
    simulated data, with ``s_tilde = vec(S_hat)`` applied elementwise.  The
    ground-truth error and noise vectors are present only when simulated.
    """

    S_hat: np.ndarray
    r_bar: np.ndarray
    sigma2: float
    e_bar_true: np.ndarray | None = None
    v_bar_true: np.ndarray | None = None

    def __post_init__(self):
        if np.any(self.S_hat == 0):
            raise ConfigError("S_hat must be entrywise nonzero")
        M, N = self.S_hat.shape
        if self.r_bar.shape != (M * N,):
            raise ConfigError(f"r_bar must have length M*N={M * N}")

    @property
    def M(self) -> int:
        return self.S_hat.shape[0]

    @property
    def N(self) -> int:
        return self.S_hat.shape[1]

    @property
    def s_tilde(self) -> np.ndarray:
        """Diagonal of the symbol matrix lift, as a length-MN vector."""
        return self.S_hat.flatten(order="F")


def steering_b(phi: float, M: int) -> np.ndarray:
    """Doppler steering vector, element m = exp(i*2*pi*m*phi)."""
    if not (0.0 <= phi < 1.0):
        raise ConfigError(f"phi must be in [0, 1), got {phi}")
    return np.exp(2j * np.pi * phi * np.arange(M))


def steering_g(psi: float, N: int) -> np.ndarray:
    """Delay steering vector, element n = exp(i*2*pi*n*psi)."""
    if not (0.0 <= psi < 1.0):
        raise ConfigError(f"psi must be in [0, 1), got {psi}")
    return np.exp(2j * np.pi * psi * np.arange(N))


def atom(phi: float, psi: float, M: int, N: int) -> np.ndarray:
    """2-D sinusoid atom conj(g(psi)) kron b(phi); entry n*M+m = e^{i(2pi m phi - 2pi n psi)}."""
    return np.kron(np.conj(steering_g(psi, N)), steering_b(phi, M))


def synthesize_clean(scene: Scene, config: RadarConfig) -> np.ndarray:
    """Clean vectorized signal: sum of paths' atoms scaled by their amplitudes."""
    M, N = config.M, config.N
    paths = scene.paths
    alphas = np.array([p.alpha for p in paths])
    B = np.stack([steering_b(p.phi, M) for p in paths], axis=1)
    G = np.stack([steering_g(p.psi, N) for p in paths], axis=1)
    Z = (B * alphas) @ G.conj().T
    return Z.flatten(order="F")


def generate_symbols(config: RadarConfig, constellation: Constellation,
                     seed) -> np.ndarray:
    """Draw an M x N matrix of i.i.d. uniform constellation symbols."""
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(constellation.points), size=(config.M, config.N))
    return constellation.points[idx]


def inject_demod_errors(S: np.ndarray, ber: float, constellation: Constellation,
                        seed) -> tuple[np.ndarray, np.ndarray]:
    """Flip each Gray-mapped bit independently with probability ``ber``.

    Returns the corrupted symbol matrix and the boolean mask of symbols that
    changed.
    """
    if not (0.0 <= ber <= 0.5):
        raise ConfigError(f"ber must be in [0, 0.5], got {ber}")
    rng = np.random.default_rng(seed)
    idx = constellation.indices_of(S)
    bits = constellation.labels[idx]
    flips = rng.random(bits.shape) < ber
    new_idx = constellation.indices_from_bits(np.bitwise_xor(bits, flips.astype(int)))
    S_hat = constellation.points[new_idx]
    return S_hat, new_idx != idx


def measure(scene: Scene, S: np.ndarray, S_hat: np.ndarray, config: RadarConfig,
            seed) -> Measurement:
    """Simulate one noisy measurement of the scene.

    The received samples are ``r = s * z + v`` with the *true* symbols; the
    stored demodulation-error vector is ``(s - s_hat) * z``, nonzero exactly
    where symbol decisions were wrong (and the signal is nonzero).
    """
    if S.shape != S_hat.shape:
        raise ConfigError("S and S_hat must have the same shape")
    if np.any(S_hat == 0):
        raise ConfigError("S_hat must be entrywise nonzero")
    rng = np.random.default_rng(seed)
    M, N = config.M, config.N
    z_bar = synthesize_clean(scene, config)
    sig = np.sqrt(config.sigma2 / 2.0)
    v_bar = rng.normal(0.0, 1.0, M * N) * sig + 1j * rng.normal(0.0, 1.0, M * N) * sig
    s_bar = S.flatten(order="F")
    s_hat_bar = S_hat.flatten(order="F")
    r_bar = s_bar * z_bar + v_bar
    e_bar = (s_bar - s_hat_bar) * z_bar
    return Measurement(S_hat=S_hat, r_bar=r_bar, sigma2=config.sigma2,
                       e_bar_true=e_bar, v_bar_true=v_bar)


def simulate(scene: Scene, config: RadarConfig, constellation: Constellation,
             ber: float, seed) -> Measurement:
    """Symbols, demodulation errors, and noise from one seeded generator."""
    rng = np.random.default_rng(seed)
    S = generate_symbols(config, constellation, rng)
    S_hat, _ = inject_demod_errors(S, ber, constellation, rng)
    return measure(scene, S, S_hat, config, rng)


def physical_to_normalized(range_m: float, velocity_mps: float,
                           config: RadarConfig) -> tuple[float, float]:
    """Map (range, radial velocity) to the normalized (phi, psi) pair.

    Negative velocities wrap to phi > 0.5; delays must stay inside one
    unambiguous interval (psi < 1).
    """
    if range_m < 0:
        raise ConfigError(f"range must be nonnegative, got {range_m}")
    psi = config.delta_f * range_m / C_LIGHT
    if psi >= 1.0:
        raise ConfigError(f"range {range_m} m exceeds the unambiguous delay interval")
    phi = (velocity_mps * config.f_c / C_LIGHT * config.T_bar) % 1.0
    if phi >= 1.0:  # tiny negative inputs can round the wrap up to exactly 1.0
        phi = 0.0
    return phi, psi


def normalized_to_physical(phi: float, psi: float,
                           config: RadarConfig) -> tuple[float, float]:
    """Inverse of :func:`physical_to_normalized`; phi > 0.5 means negative Doppler."""
    if not (0.0 <= phi < 1.0 and 0.0 <= psi < 1.0):
        raise ConfigError(f"(phi, psi) must be in [0, 1), got ({phi}, {psi})")
    range_m = psi * C_LIGHT / config.delta_f
    doppler = phi if phi <= 0.5 else phi - 1.0
    velocity = doppler / config.T_bar * C_LIGHT / config.f_c
    return range_m, velocity
