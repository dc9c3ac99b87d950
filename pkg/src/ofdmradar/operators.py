"""Structured operators for the atomic-norm semidefinite program.

A two-level Toeplitz parameter is a complex (2M-1) x (2N-1) array ``U`` whose
entry ``U[k + M - 1, l + N - 1]`` (written u_l(k)) fills every position of the
lifted MN x MN matrix with block offset l and within-block offset k.  The lift
is Hermitian exactly when u_{-l}(-k) == conj(u_l(k)).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, NumericError


def block_toeplitz(U: np.ndarray, M: int, N: int) -> np.ndarray:
    """Two-level Toeplitz lift of ``U``.

    Block (j1, j2) of the result (each M x M) is the Toeplitz matrix of column
    u_{j1-j2}, whose (a, b) entry is u_{j1-j2}(a-b).
    """
    if U.shape != (2 * M - 1, 2 * N - 1):
        raise ConfigError(f"U must be {(2 * M - 1, 2 * N - 1)}, got {U.shape}")
    dm = np.arange(M)[:, None] - np.arange(M)[None, :]
    dn = np.arange(N)[:, None] - np.arange(N)[None, :]
    # 4-D gather ordered (n1, m1, n2, m2) so that reshape gives index n*M + m.
    T4 = U[dm[None, :, None, :] + (M - 1), dn[:, None, :, None] + (N - 1)]
    return T4.reshape(M * N, M * N)


def adjoint_normalized(P: np.ndarray, M: int, N: int) -> np.ndarray:
    """Average ``P`` over each (block offset, within-block offset) index set.

    Left inverse of :func:`block_toeplitz`: offsets (l, k) average the
    (N-|l|)(M-|k|) entries of ``P`` lying on block diagonal l and inner
    diagonal k.
    """
    if P.shape != (M * N, M * N):
        raise ConfigError(f"P must be {(M * N, M * N)}, got {P.shape}")
    # (n1, n2, m1, m2) layout: trace over block offsets first, then inner ones.
    P4 = P.reshape(N, M, N, M).transpose(0, 2, 1, 3)
    U = np.empty((2 * M - 1, 2 * N - 1), dtype=complex)
    for l in range(-(N - 1), N):
        block_sum = np.trace(P4, offset=-l, axis1=0, axis2=1)
        for k in range(-(M - 1), M):
            count = (N - abs(l)) * (M - abs(k))
            U[k + M - 1, l + N - 1] = np.trace(block_sum, offset=-k) / count
    return U


def symmetrize_param(U: np.ndarray) -> np.ndarray:
    """Project onto Hermitian-consistent parameters: u_l(k) <- (u_l(k) + conj(u_{-l}(-k)))/2."""
    return 0.5 * (U + np.conj(U[::-1, ::-1]))


def psd_project(A: np.ndarray) -> np.ndarray:
    """Frobenius-nearest positive semidefinite matrix (negative eigenvalues clamped).

    The input is symmetrized first; eigendecomposition failures surface as
    :class:`NumericError`.
    """
    H = 0.5 * (A + A.conj().T)
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed on {H.shape} matrix: {exc}") from exc
    w = np.maximum(w, 0.0)
    X = (V * w) @ V.conj().T
    return 0.5 * (X + X.conj().T)


def soft_threshold(v: np.ndarray, mu: float) -> np.ndarray:
    """Complex soft threshold: shrink magnitudes by ``mu``, keeping phases.

    Entries with |v_i| <= mu map to zero; otherwise to (|v_i| - mu) * v_i/|v_i|.
    """
    if mu < 0:
        raise ConfigError(f"threshold must be nonnegative, got {mu}")
    v = np.asarray(v)
    mag = np.abs(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > mu, (mag - mu) / np.where(mag > 0, mag, 1.0), 0.0)
    return v * scale
