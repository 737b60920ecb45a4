"""Dense complex-matrix numerics: QR, truncated SVD, bilateral random
projections, cardinality hard thresholding and the zero-padded 2D DFT.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SvdFactors",
    "as_matrix",
    "qr_decompose",
    "svd_truncated",
    "brp_rank_approx",
    "hard_threshold",
    "fft2",
    "numerical_rank",
]

# inner r x r matrix of BRP is treated as singular below this relative level
_SINGULAR_RCOND = 1e-12


def as_matrix(A, name: str = "A") -> np.ndarray:
    """Validate ``A`` as a finite 2D array and return it as complex128."""
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A.astype(np.complex128, copy=False)


@dataclass(frozen=True)
class SvdFactors:
    """Leading singular triplets with ``A ~= U @ diag(s) @ V.conj().T``."""

    U: np.ndarray
    s: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.s) @ self.V.conj().T


def qr_decompose(A) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR of a tall (or square) matrix."""
    A = as_matrix(A)
    if A.shape[0] < A.shape[1]:
        raise ValueError(f"qr_decompose needs rows >= cols, got shape {A.shape}")
    return np.linalg.qr(A, mode="reduced")


def svd_truncated(A, r: int) -> SvdFactors:
    """Leading ``r`` singular triplets of ``A`` (best rank-r Frobenius fit)."""
    A = as_matrix(A)
    if not 1 <= r <= min(A.shape):
        raise ValueError(f"rank {r} out of range for shape {A.shape}")
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    return SvdFactors(U[:, :r], s[:r], Vh[:r].conj().T)


def numerical_rank(A, rtol: float = 1e-8) -> int:
    """Number of singular values above ``rtol * sigma_1``."""
    s = np.linalg.svd(np.asarray(A), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def _matrix_root(B: np.ndarray, p: int) -> np.ndarray:
    # p-th root through the singular values of the small bracketed matrix
    if p == 1:
        return B
    U, s, Vh = np.linalg.svd(B)
    return (U * s ** (1.0 / p)) @ Vh


def brp_rank_approx(A, r: int, q: int = 0, rng=None, *, init=None, full_output=False):
    """Rank-``r`` approximation of ``A`` by bilateral random projections.

    With the power scheme the projections are formed on
    ``At = (A A^H)^q A`` and the result is reassembled as::

        Q2 [R2 (A2^H At A1)^-1 R1^H]^(1/(2q+1)) Q1^H

    where ``At A1 = Q2 R2`` and ``A1 = At^H A2 = Q1 R1``. For ``q = 0`` this is
    ``At A1 (A2^H At A1)^-1 (At^H A2)^H``.

    Parameters
    ----------
    A : (m, n) array
    r : int
        Target rank, ``1 <= r <= min(m, n)``.
    q : int
        Power-scheme exponent.
    rng : numpy.random.Generator, optional
        Source of the initial right projection (i.i.d. standard complex
        normal entries). Ignored when ``init`` is given.
    init : (n, r) array, optional
        Initial right projection, e.g. the one returned by a previous call;
        warm-starting turns repeated calls into a subspace iteration.
    full_output : bool
        If true return ``(L, info)`` with ``info`` holding ``fallback``
        (singular inner matrix, SVD result used instead) and ``projection``
        (updated right projection, suitable as the next ``init``).
    """
    A = as_matrix(A)
    m, n = A.shape
    if not 1 <= r <= min(m, n):
        raise ValueError(f"rank {r} out of range for shape {A.shape}")
    if q < 0:
        raise ValueError(f"power exponent must be >= 0, got {q}")

    if init is None:
        rng = np.random.default_rng() if rng is None else rng
        A1 = (rng.standard_normal((n, r)) + 1j * rng.standard_normal((n, r))) / np.sqrt(2)
    else:
        A1 = np.asarray(init, dtype=np.complex128)
        if A1.shape != (n, r):
            raise ValueError(f"init must have shape {(n, r)}, got {A1.shape}")

    At = A
    for _ in range(q):
        At = A @ (A.conj().T @ At)

    A2 = At @ A1
    A1 = At.conj().T @ A2
    Y1 = At @ A1
    inner = A2.conj().T @ Y1

    s_inner = np.linalg.svd(inner, compute_uv=False)
    fallback = not (s_inner[0] > 0 and s_inner[-1] > _SINGULAR_RCOND * s_inner[0])
    if fallback:
        L = svd_truncated(A, r).reconstruct()
    else:
        Q2, R2 = np.linalg.qr(Y1)
        Q1, R1 = np.linalg.qr(A1)
        core = R2 @ np.linalg.solve(inner, R1.conj().T)
        L = Q2 @ _matrix_root(core, 2 * q + 1) @ Q1.conj().T

    if full_output:
        # column scaling keeps warm-started projections well conditioned
        norms = np.linalg.norm(A1, axis=0)
        norms[norms == 0] = 1.0
        return L, {"fallback": fallback, "projection": A1 / norms}
    return L


def hard_threshold(A, k: int) -> np.ndarray:
    """Keep the ``k`` entries of largest modulus, zero the rest.

    Ties are broken by row-major position so the support is deterministic.
    """
    A = as_matrix(A)
    if not 0 <= k <= A.size:
        raise ValueError(f"cardinality {k} out of range for {A.size} entries")
    out = np.zeros_like(A)
    if k == 0:
        return out
    flat = A.ravel()
    keep = np.argsort(-np.abs(flat), kind="stable")[:k]
    out.ravel()[keep] = flat[keep]
    return out


def fft2(Z, nfft_rows: int, nfft_cols: int) -> np.ndarray:
    """Unnormalized forward 2D DFT of ``Z`` zero-padded to the given grid.

    Bin ``(p, s)`` holds ``sum_{m,n} Z[m, n] exp(-j 2 pi (m p / R + n s / C))``.
    """
    Z = as_matrix(Z, "Z")
    if nfft_rows < Z.shape[0] or nfft_cols < Z.shape[1]:
        raise ValueError(
            f"FFT grid {(nfft_rows, nfft_cols)} smaller than input {Z.shape}"
        )
    return np.fft.fft2(Z, s=(nfft_rows, nfft_cols))
