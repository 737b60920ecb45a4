"""Jamming and noise generators, scene assembly and observation masks."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .radar import RadarConfig, Target, receive_steering, target_snapshot_matrix

__all__ = [
    "BarrageJammer",
    "GmmBurstParams",
    "SamplingMask",
    "Scene",
    "SceneData",
    "complex_normal",
    "barrage_matrix",
    "burst_matrix",
    "noise_matrix",
    "assemble_scene",
    "make_masks",
    "validate_mask_lemma1",
    "apply_mask",
]


def complex_normal(rng, shape, variance: float = 1.0) -> np.ndarray:
    """Circular complex Gaussian samples with ``E|z|^2 = variance``."""
    scale = np.sqrt(variance / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@dataclass(frozen=True)
class BarrageJammer:
    theta_j: float  # rad
    inr_db: float = 30.0

    def __post_init__(self):
        if not abs(self.theta_j) < np.pi / 2:
            raise ValueError(f"|theta_j| must be < pi/2, got {self.theta_j}")


@dataclass(frozen=True)
class GmmBurstParams:
    """Two-term complex Gaussian mixture; component 2 is the impulsive one."""

    c1: float = 0.9
    c2: float = 0.1
    sigma1_sq: float = 1.0
    sigma2_sq: float = 100.0

    def __post_init__(self):
        if not (0 <= self.c1 <= 1 and 0 <= self.c2 <= 1):
            raise ValueError("mixture weights must lie in [0, 1]")
        if abs(self.c1 + self.c2 - 1) > 1e-12:
            raise ValueError(f"c1 + c2 must equal 1, got {self.c1 + self.c2}")
        if not 0 < self.sigma1_sq <= self.sigma2_sq:
            raise ValueError("need 0 < sigma1_sq <= sigma2_sq")

    @property
    def variance(self) -> float:
        return self.c1 * self.sigma1_sq + self.c2 * self.sigma2_sq


@dataclass(frozen=True)
class SamplingMask:
    xi1: np.ndarray
    xi2: np.ndarray

    def __post_init__(self):
        if self.xi1.shape != self.xi2.shape:
            raise ValueError("xi1 and xi2 must have the same shape")
        if np.any(self.xi1 & self.xi2):
            raise ValueError("xi1 and xi2 must be disjoint")

    @property
    def xi(self) -> np.ndarray:
        return self.xi1 | self.xi2


@dataclass(frozen=True)
class Scene:
    cfg: RadarConfig = field(default_factory=RadarConfig)
    targets: tuple[Target, ...] = ()
    jammers: tuple[BarrageJammer, ...] = ()
    burst: GmmBurstParams | None = None
    noise_power: float = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))
        object.__setattr__(self, "jammers", tuple(self.jammers))
        if self.noise_power < 0:
            raise ValueError("noise_power must be >= 0")


class SceneData(NamedTuple):
    Y: np.ndarray
    X_s: np.ndarray
    X_i: np.ndarray
    X_e: np.ndarray
    X_n: np.ndarray


def barrage_matrix(cfg: RadarConfig, jammers: Sequence[BarrageJammer], rng) -> np.ndarray:
    """Column ``t`` is ``sum_j gamma_j(t) a_R(theta_j) kron n_j(t)``; the
    envelope and the transmit-domain vector are redrawn every snapshot."""
    T = cfg.pulses
    X = np.zeros((cfg.MN, T), dtype=np.complex128)
    for jam in jammers:
        gamma = complex_normal(rng, T, 10 ** (jam.inr_db / 10))
        n_j = complex_normal(rng, (cfg.M, T))
        a_r = receive_steering(cfg, jam.theta_j)
        X += (a_r[:, None, None] * n_j[None, :, :]).reshape(cfg.MN, T) * gamma
    return X


def burst_matrix(cfg: RadarConfig, p: GmmBurstParams, rng) -> tuple[np.ndarray, np.ndarray]:
    """Entrywise GMM draws and the boolean labels of the impulsive entries."""
    shape = (cfg.MN, cfg.pulses)
    impulsive = rng.random(shape) < p.c2
    var = np.where(impulsive, p.sigma2_sq, p.sigma1_sq)
    return complex_normal(rng, shape) * np.sqrt(var), impulsive


def noise_matrix(cfg: RadarConfig, sigma_n_sq: float, rng) -> np.ndarray:
    if sigma_n_sq <= 0:
        raise ValueError("sigma_n_sq must be positive")
    return complex_normal(rng, (cfg.MN, cfg.pulses), sigma_n_sq)


def assemble_scene(scene: Scene) -> SceneData:
    """Draw every component of ``Y = X_s + X_i + X_e + X_n``.

    The impulsive GMM draws form the sparse ``X_e``; the GMM background draws
    are added to the white noise in ``X_n``. Each component uses its own
    child stream of ``scene.seed`` so toggling one leaves the others intact.
    """
    cfg = scene.cfg
    shape = (cfg.MN, cfg.pulses)
    rs, ri, re, rn = (np.random.default_rng(s) for s in np.random.SeedSequence(scene.seed).spawn(4))
    zeros = lambda: np.zeros(shape, dtype=np.complex128)  # noqa: E731

    X_s = target_snapshot_matrix(cfg, scene.targets, rs) if scene.targets else zeros()
    X_i = barrage_matrix(cfg, scene.jammers, ri)
    X_n = noise_matrix(cfg, scene.noise_power, rn) if scene.noise_power > 0 else zeros()
    X_e = zeros()
    if scene.burst is not None:
        draws, impulsive = burst_matrix(cfg, scene.burst, re)
        X_e[impulsive] = draws[impulsive]
        X_n[~impulsive] += draws[~impulsive]
    Y = X_s + X_i + X_e + X_n
    return SceneData(Y, X_s, X_i, X_e, X_n)


def make_masks(cfg: RadarConfig, mode: str = "full-split", rng=None) -> SamplingMask:
    """Disjoint observation sets covering the whole MN x pulses grid.

    ``full-split`` assigns each entry to either set with probability 1/2;
    ``column-split`` alternates whole snapshots (even columns to the first).
    """
    shape = (cfg.MN, cfg.pulses)
    if mode == "full-split":
        rng = np.random.default_rng() if rng is None else rng
        xi1 = rng.random(shape) < 0.5
    elif mode == "column-split":
        xi1 = np.zeros(shape, dtype=bool)
        xi1[:, 0::2] = True
    else:
        raise ValueError(f"unknown mask mode {mode!r}")
    return SamplingMask(xi1, ~xi1)


def validate_mask_lemma1(mask: SamplingMask, r: int) -> tuple[bool, bool]:
    """Whether every column of each set has exactly 0 or ``r + 1`` entries."""

    def ok(xi):
        counts = np.count_nonzero(xi, axis=0)
        return bool(np.all((counts == 0) | (counts == r + 1)))

    return ok(mask.xi1), ok(mask.xi2)


def apply_mask(A, xi) -> np.ndarray:
    A = np.asarray(A)
    xi = np.asarray(xi, dtype=bool)
    if A.shape != xi.shape:
        raise ValueError(f"mask shape {xi.shape} does not match matrix shape {A.shape}")
    return np.where(xi, A, 0)
