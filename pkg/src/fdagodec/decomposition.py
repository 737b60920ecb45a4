"""GoDec ("low-rank + sparse") and two-step GoDec ("low-rank + low-rank +
sparse") by alternating minimization with bilateral random projections.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .interference import SamplingMask, apply_mask
from .linalg import as_matrix, brp_rank_approx, hard_threshold

__all__ = [
    "SolverParams",
    "DecompositionResult",
    "default_cardinality",
    "objective",
    "godec_baseline",
    "two_step_godec",
]


def default_cardinality(shape, c2: float = 0.1) -> int:
    """Sparse budget tied to the expected impulsive occupancy."""
    return math.ceil(c2 * shape[0] * shape[1])


@dataclass(frozen=True)
class SolverParams:
    r_s: int = 2
    r_i: int = 1
    k: int | None = None  # None -> default_cardinality of the data
    q: int = 1
    max_iters: int = 100
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.r_s < 1 or self.r_i < 1:
            raise ValueError("ranks must be >= 1")
        if self.k is not None and self.k < 0:
            raise ValueError("k must be >= 0")
        if self.q < 0:
            raise ValueError("q must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")

    def cardinality(self, shape) -> int:
        k = default_cardinality(shape) if self.k is None else self.k
        if k > shape[0] * shape[1]:
            raise ValueError(f"k = {k} exceeds the {shape[0] * shape[1]} entries")
        return k


@dataclass
class DecompositionResult:
    L_s: np.ndarray
    L_i: np.ndarray
    S_e: np.ndarray
    objective_trace: list[float]
    iterations: int
    converged: bool
    fallbacks: int = 0
    diagnostics: dict = field(default_factory=dict)


def objective(Y_masked, L_s, L_i, S_e, xi=None) -> float:
    """Squared Frobenius decomposition error on the observed set."""
    Y_masked = np.asarray(Y_masked)
    for name, X in (("L_s", L_s), ("L_i", L_i), ("S_e", S_e)):
        if np.shape(X) != Y_masked.shape:
            raise ValueError(f"{name} shape {np.shape(X)} does not match {Y_masked.shape}")
    if xi is None:
        R = Y_masked - L_s - L_i - S_e
    else:
        R = Y_masked - apply_mask(L_s, xi) - apply_mask(L_i, xi) - S_e
    return float(np.vdot(R, R).real)


def _relative_change(prev: float, cur: float) -> float:
    if prev == 0:
        return 0.0 if cur == 0 else np.inf
    return abs(prev - cur) / prev


def godec_baseline(Y, r: int, k: int, params: SolverParams | None = None):
    """Plain GoDec: alternate ``L <- BRP(Y - S)`` and ``S <- P_k(Y - L)``.

    Returns ``(L, S, trace)`` where ``trace[0]`` is the objective at
    ``L = S = 0``.
    """
    params = SolverParams() if params is None else params
    Y = as_matrix(Y, "Y")
    if not 1 <= r <= min(Y.shape):
        raise ValueError(f"rank {r} out of range for shape {Y.shape}")
    if not 0 <= k <= Y.size:
        raise ValueError(f"cardinality {k} out of range")
    rng = np.random.default_rng(params.seed)

    L = np.zeros_like(Y)
    S = np.zeros_like(Y)
    zero = np.zeros_like(Y)
    trace = [objective(Y, L, zero, S)]
    if trace[0] == 0:
        return L, S, [0.0, 0.0]
    proj = None
    for _ in range(params.max_iters):
        L, info = brp_rank_approx(Y - S, r, params.q, rng, init=proj, full_output=True)
        proj = info["projection"]
        S = hard_threshold(Y - L, k)
        trace.append(objective(Y, L, zero, S))
        if _relative_change(trace[-2], trace[-1]) < params.tol:
            break
    return L, S, trace


def two_step_godec(Y_masked, mask: SamplingMask | None, params: SolverParams) -> DecompositionResult:
    """Separate target (rank ``r_s``), barrage (rank ``r_i``) and burst
    (``k``-sparse) components.

    Each sweep updates, in order, the interference part by BRP on
    ``Y - A(L_s) - S_e``, the sparse part by hard thresholding
    ``Y - A(L_s) - A(L_i)``, and the target part by power-scheme BRP on
    ``Y - A(L_i) - S_e``. ``A`` restricts to the observed set; a ``None`` mask
    means everything is observed. Right projections are warm-started from
    the previous sweep.

    ``objective_trace[0]`` is the objective of the all-zero start; entry
    ``t`` is the value after sweep ``t``. Stops once the relative change
    drops below ``params.tol``.
    """
    Y = as_matrix(Y_masked, "Y_masked")
    if mask is None:
        xi = None
    else:
        xi = mask.xi
        if xi.shape != Y.shape:
            raise ValueError(f"mask shape {xi.shape} does not match {Y.shape}")
        Y = apply_mask(Y, xi)
    if max(params.r_s, params.r_i) > min(Y.shape):
        raise ValueError(f"ranks exceed min dimension of {Y.shape}")
    k = params.cardinality(Y.shape)
    A = (lambda X: X) if xi is None else (lambda X: apply_mask(X, xi))
    rng = np.random.default_rng(params.seed)

    L_s = np.zeros_like(Y)
    L_i = np.zeros_like(Y)
    S_e = np.zeros_like(Y)
    trace = [objective(Y, L_s, L_i, S_e)]
    proj_i = proj_s = None
    fallbacks = 0
    converged = False
    t = 0
    if trace[0] == 0:
        return DecompositionResult(L_s, L_i, S_e, [0.0, 0.0], 1, True)

    for t in range(1, params.max_iters + 1):
        L_i, info = brp_rank_approx(Y - A(L_s) - S_e, params.r_i, params.q, rng,
                                    init=proj_i, full_output=True)
        proj_i = info["projection"]
        fallbacks += info["fallback"]

        S_e = hard_threshold(Y - A(L_s) - A(L_i), k)

        L_s, info = brp_rank_approx(Y - A(L_i) - S_e, params.r_s, params.q, rng,
                                    init=proj_s, full_output=True)
        proj_s = info["projection"]
        fallbacks += info["fallback"]

        trace.append(objective(Y, A(L_s), A(L_i), S_e))
        if _relative_change(trace[-2], trace[-1]) < params.tol:
            converged = True
            break

    return DecompositionResult(L_s, L_i, S_e, trace, t, converged, fallbacks)
