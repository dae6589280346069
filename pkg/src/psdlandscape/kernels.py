"""Dense linear-algebra primitives used throughout the package.

Factorizations are delegated to LAPACK via numpy; this module adds the
deterministic conventions the rest of the code relies on (singular-vector
sign canonicalization, symmetric-input guards, descending eigenvalue order).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InputContractError, NumericalFailure

__all__ = [
    "SvdResult",
    "EigResult",
    "thin_svd",
    "sym_eig",
    "truncated_frob_norm",
    "procrustes_align",
    "check_matrix",
]


class SvdResult(NamedTuple):
    """Thin SVD ``A = U @ diag(sigma) @ V.T`` with canonicalized signs."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray


class EigResult(NamedTuple):
    """Symmetric eigendecomposition with non-increasing eigenvalues."""

    U: np.ndarray
    lam: np.ndarray


def check_matrix(A: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate a dense real matrix: 2-d, nonempty, all entries finite."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise InputContractError(f"{name} must be a nonempty 2-d array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InputContractError(f"{name} contains non-finite entries")
    return A


def thin_svd(A: np.ndarray, k: int | None = None) -> SvdResult:
    """Thin singular value decomposition with deterministic signs.

    Each left singular vector is flipped so that its largest-magnitude
    entry (first such index on ties) is positive; the matching right
    vector is flipped with it, leaving the reconstruction unchanged.

    Parameters
    ----------
    A : ndarray of shape (p1, p2)
        Matrix to factorize; must be finite.
    k : int, optional
        Number of leading singular triplets to keep. Defaults to
        ``min(p1, p2)``.

    Returns
    -------
    SvdResult
        ``U`` (p1, k), ``sigma`` (k,) non-increasing, ``V`` (p2, k).
    """
    A = check_matrix(A, "svd input")
    kmax = min(A.shape)
    if k is None:
        k = kmax
    if not 1 <= k <= kmax:
        raise InputContractError(f"k={k} out of range [1, {kmax}]")
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge for shape {A.shape}") from exc
    V = Vt.T
    for j in range(U.shape[1]):
        i = int(np.argmax(np.abs(U[:, j])))
        if U[i, j] < 0:
            U[:, j] = -U[:, j]
            V[:, j] = -V[:, j]
    return SvdResult(U[:, :k].copy(), s[:k].copy(), V[:, :k].copy())


def sym_eig(S: np.ndarray, asym_tol: float = 1e-10) -> EigResult:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    The input is checked against ``asym_tol`` (relative Frobenius) and
    symmetrized as ``(S + S.T) / 2`` before factorization, which guards
    against asymmetry accumulated in Gram-type products.
    """
    S = check_matrix(S, "eig input")
    if S.shape[0] != S.shape[1]:
        raise InputContractError(f"eig input must be square, got {S.shape}")
    nrm = np.linalg.norm(S)
    if np.linalg.norm(S - S.T) > asym_tol * max(nrm, 1e-300):
        raise InputContractError(
            "matrix is asymmetric beyond tolerance: "
            f"||S - S.T||_F = {np.linalg.norm(S - S.T):.3e}, ||S||_F = {nrm:.3e}"
        )
    try:
        lam, U = np.linalg.eigh((S + S.T) / 2.0)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed for shape {S.shape}") from exc
    return EigResult(U[:, ::-1].copy(), lam[::-1].copy())


def truncated_frob_norm(A: np.ndarray, r: int) -> float:
    """Frobenius norm of the best rank-``r`` approximation of ``A``.

    Equals ``sqrt(sum_{i<=r} sigma_i(A)^2)``, the largest inner product of
    ``A`` with a unit-Frobenius matrix of rank at most ``r``.
    """
    A = check_matrix(A, "input")
    if not 1 <= r <= min(A.shape):
        raise InputContractError(f"r={r} out of range [1, {min(A.shape)}]")
    s = np.linalg.svd(A, compute_uv=False)
    return float(np.sqrt(np.sum(s[:r] ** 2)))


def procrustes_align(Y1: np.ndarray, Y2: np.ndarray) -> tuple[np.ndarray, float]:
    """Best orthogonal alignment of ``Y2`` onto ``Y1``.

    Returns ``(Q, residual)`` where ``Q`` minimizes ``||Y2 @ Q - Y1||_F``
    over orthogonal matrices and ``residual`` is the attained value. When
    ``Y1.T @ Y2`` is singular the minimizer is not unique; the one induced
    by the canonicalized SVD is returned deterministically.
    """
    Y1 = check_matrix(Y1, "Y1")
    Y2 = check_matrix(Y2, "Y2")
    if Y1.shape != Y2.shape:
        raise InputContractError(f"shape mismatch: {Y1.shape} vs {Y2.shape}")
    QU, _, QV = thin_svd(Y1.T @ Y2)
    Q = QV @ QU.T
    residual = float(np.linalg.norm(Y2 @ Q - Y1))
    return Q, residual
