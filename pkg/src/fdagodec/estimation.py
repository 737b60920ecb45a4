"""Joint range-angle extraction from a recovered target matrix.

Spectrum grids are indexed ``[row, col]`` with the transmit spatial
frequency along rows and the receive spatial frequency along columns.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .linalg import as_matrix, fft2, svd_truncated
from .radar import RadarConfig, Target

__all__ = [
    "Estimate",
    "EstimateSet",
    "TrialMetrics",
    "extract_target_vectors",
    "spectrum_2d",
    "power_spectrum",
    "find_peaks",
    "peak_to_params",
    "range_angle_cell",
    "estimate_targets",
    "evaluate_trial",
]


@dataclass(frozen=True)
class Estimate:
    range_m: float
    theta: float
    peak_magnitude: float
    bins: tuple[int, int] = (0, 0)


@dataclass
class EstimateSet:
    estimates: list[Estimate]
    nfft: int
    ambiguity_period_m: float


@dataclass
class TrialMetrics:
    rmse_range_m: float
    rmse_theta_deg: float
    rmse_theta_rad: float
    success: bool
    matched: int = 0
    unmatched: int = 0
    errors: list[tuple[float, float]] = field(default_factory=list)  # (|dr| m, |dtheta| rad)


def _wrap(x):
    """Fold normalized frequency into [-1/2, 1/2)."""
    return np.mod(np.asarray(x) + 0.5, 1.0) - 0.5


def extract_target_vectors(L_s, r_s: int) -> list[tuple[int, np.ndarray]]:
    """Dominant left singular vectors scaled by their singular values."""
    L_s = as_matrix(L_s, "L_s")
    if not np.any(L_s):
        return []
    f = svd_truncated(L_s, min(r_s, min(L_s.shape)))
    return [(j, f.U[:, j] * f.s[j]) for j in range(f.s.size)]


def _grid(vector, cfg: RadarConfig) -> np.ndarray:
    v = np.asarray(vector, dtype=np.complex128).ravel()
    if v.size != cfg.MN:
        raise ValueError(f"vector length {v.size} != MN = {cfg.MN}")
    # receive-major stacking: entry n*M + m -> (m, n)
    return v.reshape(cfg.N, cfg.M).T


def spectrum_2d(vector, cfg: RadarConfig, nfft: int = 512, window=None) -> np.ndarray:
    """Zero-padded 2D DFT of the M x N arrangement of an MN vector.

    ``window`` optionally tapers the grid first: either an ``(M, N)`` array
    or a pair of 1D tapers ``(transmit, receive)``.
    """
    if nfft < max(cfg.M, cfg.N):
        raise ValueError(f"nfft must be >= {max(cfg.M, cfg.N)}")
    Z = _grid(vector, cfg)
    if window is not None:
        if isinstance(window, tuple):
            window = np.outer(window[0], window[1])
        Z = Z * window
    return fft2(Z, nfft, nfft)


def power_spectrum(L_s, cfg: RadarConfig, r_s: int, nfft: int = 512, window=None) -> np.ndarray:
    """Summed power of the per-vector spectra.

    Invariant to rotations inside the extracted subspace, so targets show up
    together even when the singular vectors mix them.
    """
    P = np.zeros((nfft, nfft))
    for _, v in extract_target_vectors(L_s, r_s):
        P += np.abs(spectrum_2d(v, cfg, nfft, window)) ** 2
    return P


def find_peaks(P, floor_db: float = -20.0, count: int | None = None) -> list[tuple[int, int]]:
    """Local maxima of a periodic 2D power grid, strongest first.

    A bin is a peak if it is >= all 8 neighbours and > at least one of
    them. Only peaks within ``floor_db`` of the global maximum are kept.
    """
    P = np.asarray(P, dtype=float)
    if P.max() <= 0:
        return []
    ge = np.ones(P.shape, dtype=bool)
    gt = np.zeros(P.shape, dtype=bool)
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            if dr == dc == 0:
                continue
            nb = np.roll(P, (dr, dc), axis=(0, 1))
            ge &= P >= nb
            gt |= P > nb
    mask = ge & gt & (P >= P.max() * 10 ** (floor_db / 10))
    rows, cols = np.nonzero(mask)
    order = np.argsort(-P[rows, cols], kind="stable")
    peaks = [(int(rows[i]), int(cols[i])) for i in order]
    return peaks if count is None else peaks[:count]


def peak_to_params(peak_bins, cfg: RadarConfig, nfft: int, coarse_range_hint: float | None = None):
    """Map a spectrum bin (fractional bins allowed) to ``(range_m, theta_rad)``.

    Without a hint the range is folded into one ambiguity period; with a hint
    it is moved to the ambiguity multiple nearest the hint.
    """
    row, col = peak_bins
    f_r = float(_wrap(col / nfft))
    f_t = float(_wrap(row / nfft))
    s = f_r * cfg.c / (cfg.d_r * cfg.f0)
    if abs(s) > 1:
        raise ValueError(f"receive frequency {f_r} maps to no valid angle")
    theta = float(np.arcsin(s))
    if cfg.delta_f == 0:
        return 0.0, theta
    period = cfg.ambiguity_period
    rng_m = (cfg.d_t * cfg.f0 * np.sin(theta) / cfg.c - f_t) * period
    rng_m = float(np.mod(rng_m, period))
    if coarse_range_hint is not None:
        rng_m += period * round((coarse_range_hint - rng_m) / period)
    return rng_m, theta


def range_angle_cell(range_m: float, theta: float, cfg: RadarConfig, nfft: int) -> tuple[int, int]:
    """Grid cell of a (range, angle) pair on the range-angle axes.

    Range cells are ``ambiguity_period / nfft`` wide (folded); angle cells
    are receive-frequency bins.
    """
    f_r = cfg.d_r * cfg.f0 * np.sin(theta) / cfg.c
    range_cell = int(np.round(np.mod(range_m / cfg.ambiguity_period, 1.0) * nfft)) % nfft
    return range_cell, int(np.round(np.mod(f_r, 1.0) * nfft)) % nfft


def _refine(P, peak):
    # separable three-point parabolic interpolation in each axis
    n_r, n_c = P.shape
    r, c = peak
    out = []
    for axis_vals, center in (
        ((P[(r - 1) % n_r, c], P[r, c], P[(r + 1) % n_r, c]), r),
        ((P[r, (c - 1) % n_c], P[r, c], P[r, (c + 1) % n_c]), c),
    ):
        a, b, d = np.log(np.maximum(axis_vals, 1e-300))
        den = a - 2 * b + d
        out.append(center + (0.5 * (a - d) / den if den < 0 else 0.0))
    return tuple(out)


def estimate_targets(L_s, cfg: RadarConfig, n_targets: int, nfft: int = 512,
                     range_hints: Sequence[float] | None = None,
                     refine: bool = False) -> EstimateSet:
    """Range-angle estimates from the ``n_targets`` strongest spectral peaks.

    With ``range_hints`` each estimate is unwrapped to the ambiguity multiple
    that brings it closest to one of the hints.
    """
    P = power_spectrum(L_s, cfg, n_targets, nfft)
    peaks = find_peaks(P, floor_db=-np.inf, count=n_targets)
    out = []
    for p in peaks:
        loc = _refine(P, p) if refine else p
        rng_m, theta = peak_to_params(loc, cfg, nfft)
        out.append(Estimate(rng_m, theta, float(np.sqrt(P[p])), p))
    if range_hints is not None and out:
        out = _unwrap_with_hints(out, cfg, list(range_hints))
    return EstimateSet(out, nfft, cfg.ambiguity_period)


def _unwrap_with_hints(ests: list[Estimate], cfg: RadarConfig, hints: list[float]) -> list[Estimate]:
    # each estimate takes the unwrapping that lands closest to any hint
    period = cfg.ambiguity_period
    out = []
    for e in ests:
        cands = [e.range_m + period * round((h - e.range_m) / period) for h in hints]
        r = min(zip(cands, hints), key=lambda ch: abs(ch[0] - ch[1]))[0]
        out.append(Estimate(r, e.theta, e.peak_magnitude, e.bins))
    return out


def evaluate_trial(estimates: EstimateSet, truth: Sequence[Target], angle_thresh: float = 1e-2,
                   range_thresh: float = 10.0, angle_unit: str = "deg") -> TrialMetrics:
    """Greedy nearest-pair matching, RMSE over matched pairs, and success.

    Pair distance is the larger of the threshold-normalized range and angle
    deviations. A trial succeeds iff every truth is matched and every
    matched deviation is strictly below its threshold.
    """
    ests = list(estimates.estimates)
    if not ests or not truth:
        raise ValueError("need at least one estimate and one truth")
    if angle_unit not in ("deg", "rad"):
        raise ValueError(f"angle_unit must be 'deg' or 'rad', got {angle_unit!r}")
    to_unit = np.rad2deg if angle_unit == "deg" else (lambda x: x)

    pairs = []
    for i, e in enumerate(ests):
        for j, t in enumerate(truth):
            dr = abs(e.range_m - t.range)
            dth = abs(e.theta - t.theta)
            pairs.append((max(dr / range_thresh, to_unit(dth) / angle_thresh), i, j, dr, dth))
    pairs.sort(key=lambda p: (p[0], p[1], p[2]))
    used_e, used_t, errors = set(), set(), []
    for _, i, j, dr, dth in pairs:
        if i in used_e or j in used_t:
            continue
        used_e.add(i)
        used_t.add(j)
        errors.append((dr, dth))

    dr = np.array([e[0] for e in errors])
    dth = np.array([e[1] for e in errors])
    unmatched = len(truth) - len(errors)
    success = unmatched == 0 and bool(
        np.all(dr < range_thresh) and np.all(to_unit(dth) < angle_thresh)
    )
    return TrialMetrics(
        rmse_range_m=float(np.sqrt(np.mean(dr ** 2))),
        rmse_theta_deg=float(np.rad2deg(np.sqrt(np.mean(dth ** 2)))),
        rmse_theta_rad=float(np.sqrt(np.mean(dth ** 2))),
        success=success,
        matched=len(errors),
        unmatched=unmatched,
        errors=errors,
    )
