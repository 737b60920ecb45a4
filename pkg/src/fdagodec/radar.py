"""FDA-MIMO array geometry, steering vectors and noiseless target snapshots.

Element indices are 0-based. Stacked MN vectors use receive-major Kronecker
ordering: entry ``n * M + m`` belongs to receive element ``n`` and transmit
element ``m``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "RadarConfig",
    "Target",
    "transmit_time_steering",
    "angle_steering",
    "range_steering",
    "transmit_steering",
    "receive_steering",
    "joint_steering",
    "steering_matrix",
    "target_snapshot_matrix",
    "exact_phase_check",
]


@dataclass(frozen=True)
class RadarConfig:
    """Colocated FDA-MIMO radar; default parameters of the reference scenario."""

    M: int = 6
    N: int = 6
    f0: float = 10e9
    delta_f: float = 301250.0
    d_t: float = 0.015
    d_r: float = 0.015
    pulses: int = 100
    energy: float = 1.0
    c: float = 3e8
    pri: float = 1e-3  # pulse repetition interval, s

    def __post_init__(self):
        if self.M < 2 or self.N < 2:
            raise ValueError("M and N must be >= 2")
        if self.pulses < 1:
            raise ValueError("pulses must be >= 1")
        if self.f0 <= 0 or self.delta_f < 0:
            raise ValueError("need f0 > 0 and delta_f >= 0")
        if self.d_t <= 0 or self.d_r <= 0 or self.energy <= 0 or self.c <= 0:
            raise ValueError("spacings, energy and c must be positive")
        if self.pri <= 0:
            raise ValueError("pri must be positive")

    @property
    def MN(self) -> int:
        return self.M * self.N

    @property
    def wavelength(self) -> float:
        return self.c / self.f0

    @property
    def ambiguity_period(self) -> float:
        """Range over which the transmit phase repeats, ``c / (2 delta_f)``."""
        if self.delta_f == 0:
            return np.inf
        return self.c / (2 * self.delta_f)


@dataclass(frozen=True)
class Target:
    """Point target. ``theta`` in rad, ``range`` in m, ``velocity`` radial m/s.

    ``power_db`` is the per-element, per-snapshot SNR against unit noise.
    """

    theta: float
    range: float
    velocity: float = 0.0
    power_db: float = 10.0

    def __post_init__(self):
        if not abs(self.theta) < np.pi / 2:
            raise ValueError(f"|theta| must be < pi/2, got {self.theta}")
        if self.range < 0:
            raise ValueError(f"range must be >= 0, got {self.range}")

    def doppler(self, cfg: RadarConfig) -> float:
        return 2 * self.velocity / cfg.wavelength


def _check_angle(theta: float, strict: bool = True) -> None:
    if strict and not abs(theta) < np.pi / 2:
        raise ValueError(f"|theta| must be < pi/2, got {theta}")


def transmit_time_steering(cfg: RadarConfig, t: float) -> np.ndarray:
    if not np.isfinite(t):
        raise ValueError("t must be finite")
    return np.exp(2j * np.pi * np.arange(cfg.M) * cfg.delta_f * t)


def angle_steering(cfg: RadarConfig, theta: float) -> np.ndarray:
    """Transmit angle-only steering (phased-array factor)."""
    f = cfg.d_t * cfg.f0 * np.sin(theta) / cfg.c
    return np.exp(2j * np.pi * np.arange(cfg.M) * f)


def range_steering(cfg: RadarConfig, rng_m: float) -> np.ndarray:
    f = 2 * cfg.delta_f * rng_m / cfg.c
    return np.exp(-2j * np.pi * np.arange(cfg.M) * f)


def transmit_steering(cfg: RadarConfig, theta: float, range: float) -> np.ndarray:
    """Range-angle transmit steering, the Hadamard product of the range and
    angle vectors."""
    _check_angle(theta)
    f = cfg.d_t * cfg.f0 * np.sin(theta) / cfg.c - 2 * cfg.delta_f * range / cfg.c
    return np.exp(2j * np.pi * np.arange(cfg.M) * f)


def receive_steering(cfg: RadarConfig, theta: float, strict: bool = True) -> np.ndarray:
    """Receive steering; ``strict=False`` admits the endfire limit."""
    _check_angle(theta, strict)
    f = cfg.d_r * cfg.f0 * np.sin(theta) / cfg.c
    return np.exp(2j * np.pi * np.arange(cfg.N) * f)


def joint_steering(cfg: RadarConfig, theta: float, range: float) -> np.ndarray:
    return np.kron(receive_steering(cfg, theta), transmit_steering(cfg, theta, range))


def steering_matrix(cfg: RadarConfig, targets: Sequence[Target]) -> np.ndarray:
    """MN x K matrix whose columns are the joint steering vectors."""
    return np.stack([joint_steering(cfg, tg.theta, tg.range) for tg in targets], axis=1)


def target_snapshot_matrix(cfg: RadarConfig, targets: Sequence[Target], rng=None, *, xi=None):
    """Noiseless target echoes, MN x pulses.

    Column ``t`` is ``sum_q rho_q(t) a_R(theta_q) kron a(r_q, theta_q)`` with
    ``rho_q(t) = sqrt(E/M) xi_q(t) exp(j 2 pi f_d t T_pri)``. Unless ``xi``
    (K x pulses) is supplied, ``xi_q(t)`` is drawn i.i.d. complex Gaussian
    per pulse with power set by ``power_db``.
    """
    K = len(targets)
    if not 1 <= K <= min(cfg.MN, cfg.pulses):
        raise ValueError(f"need 1 <= targets <= {min(cfg.MN, cfg.pulses)}, got {K}")
    T = cfg.pulses
    if xi is None:
        rng = np.random.default_rng() if rng is None else rng
        power = np.array([10 ** (tg.power_db / 10) for tg in targets]) * cfg.M / cfg.energy
        g = (rng.standard_normal((K, T)) + 1j * rng.standard_normal((K, T))) / np.sqrt(2)
        xi = np.sqrt(power)[:, None] * g
    else:
        xi = np.asarray(xi, dtype=np.complex128)
        if xi.shape != (K, T):
            raise ValueError(f"xi must have shape {(K, T)}, got {xi.shape}")
    pulse_times = np.arange(T) * cfg.pri
    doppler = np.exp(2j * np.pi * np.outer([tg.doppler(cfg) for tg in targets], pulse_times))
    D = np.sqrt(cfg.energy / cfg.M) * xi * doppler
    return steering_matrix(cfg, targets) @ D


def exact_phase_check(cfg: RadarConfig, target: Target, m: int, n: int, t: float,
                      *, cross_term: bool = False) -> tuple[complex, complex]:
    """Unit phasors of transmit element ``m`` seen at receive element ``n``.

    ``approx`` is the far-field phase used throughout the model. ``exact``
    adds back the two terms the approximation drops: the Doppler shift of the
    array offset, ``f_d (m d_T + n d_R) sin(theta) / c``, and the quadratic
    frequency-offset term ``m^2 delta_f d_T sin(theta) / c``. With
    ``cross_term=True`` the bilinear ``m n delta_f d_R sin(theta) / c`` term
    is retained as well, giving the complete delay phase.
    """
    if not (0 <= m < cfg.M and 0 <= n < cfg.N):
        raise ValueError(f"element ({m}, {n}) outside {cfg.M} x {cfg.N} array")
    fd = target.doppler(cfg)
    s = np.sin(target.theta)
    r = target.range
    c = cfg.c
    approx = (
        (cfg.f0 + fd) * (t - 2 * r / c)
        + m * cfg.delta_f * t
        - m * cfg.delta_f * 2 * r / c
        + m * cfg.d_t * cfg.f0 * s / c
        + n * cfg.d_r * cfg.f0 * s / c
    )
    extra = fd * (m * cfg.d_t + n * cfg.d_r) * s / c + m * m * cfg.delta_f * cfg.d_t * s / c
    if cross_term:
        extra += m * n * cfg.delta_f * cfg.d_r * s / c
    # reduce cycles before exponentiating; the carrier term alone is ~1e10 cycles
    approx_cycles = np.mod(approx, 1.0)
    exact_cycles = np.mod(approx_cycles + extra, 1.0)
    return np.exp(2j * np.pi * exact_cycles), np.exp(2j * np.pi * approx_cycles)
