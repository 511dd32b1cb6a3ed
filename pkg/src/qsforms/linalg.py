"""Dense complex linear-algebra kernel.

Everything here is a thin, contract-checked layer over LAPACK through numpy
and scipy.  All tolerances are relative to spectral norms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ContractError, RangeError

# exp(709) is the largest power of e representable in double precision
EXP_OVERFLOW_GUARD = 700.0


def as_cmatrix(M, name="matrix") -> np.ndarray:
    """Return ``M`` as a finite 2-D complex128 array."""
    A = np.asarray(M, dtype=np.complex128)
    if A.ndim != 2:
        raise ContractError(f"{name} must be 2-D, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ContractError(f"{name} has non-finite entries")
    return A


def norm2(M) -> float:
    """Spectral norm; 0 for empty matrices."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    if M.ndim == 1:
        return float(np.linalg.norm(M))
    return float(np.linalg.norm(M, 2))


def norm_est(M, iters: int = 40) -> float:
    """Cheap spectral-norm estimate (power iteration), for tolerance scaling only.

    Exact SVD below 100 columns.  Never use it where a certified constant is
    needed.
    """
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    if min(M.shape) <= 100:
        return norm2(M)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(M.shape[1]) + 1j * rng.standard_normal(M.shape[1])
    MH = M.conj().T
    est = 0.0
    for _ in range(iters):
        y = M @ x
        est = np.linalg.norm(y) / np.linalg.norm(x)
        x = MH @ y
        nx = np.linalg.norm(x)
        if nx == 0:
            break
        x /= nx
    return float(max(est, np.abs(M).max()))


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return (M + M.conj().T) / 2


def skew_part(M: np.ndarray) -> np.ndarray:
    """The Hermitian matrix ``(M - M^H) / 2i`` (the "imaginary part")."""
    return (M - M.conj().T) / 2j


def _check_square(M, name="matrix"):
    if M.shape[0] != M.shape[1]:
        raise ContractError(f"{name} must be square, got shape {M.shape}")


def _check_hermitian(M, rtol=1e-12, name="matrix"):
    _check_square(M, name)
    if M.size and np.linalg.norm(M - M.conj().T) > rtol * max(norm_est(M), np.finfo(float).tiny):
        raise ContractError(f"{name} is not Hermitian")


@dataclass(frozen=True)
class EighResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian_eig(M) -> EighResult:
    """Spectral decomposition of a Hermitian matrix, eigenvalues ascending."""
    M = as_cmatrix(M)
    _check_hermitian(M)
    if M.shape[0] == 0:
        return EighResult(np.zeros(0), np.zeros((0, 0), dtype=np.complex128))
    w, U = np.linalg.eigh(hermitian_part(M))
    return EighResult(w, U)


def _is_hermitian(M, rtol=1e-13) -> bool:
    return np.linalg.norm(M - M.conj().T) <= rtol * max(np.linalg.norm(M), np.finfo(float).tiny)


def matrix_exp(M, t: float = 1.0) -> np.ndarray:
    """``exp(t M)``.

    Hermitian input goes through ``eigh`` (exact up to eigen-solver
    accuracy, and stable for stiff negative spectra); everything else uses
    scipy's scaling-and-squaring Pade ``expm``.  The overflow guard is on the
    logarithmic norm ``t * lambda_max(Re M)``, which bounds ``log ||exp(tM)||``.
    """
    M = as_cmatrix(M)
    _check_square(M)
    n = M.shape[0]
    if n == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    tM = t * M
    lognorm = np.linalg.eigvalsh(hermitian_part(tM))[-1]
    if lognorm > EXP_OVERFLOW_GUARD:
        raise RangeError(f"exp overflow: log-norm of tM is {lognorm:.3g}")
    if _is_hermitian(tM):
        w, U = np.linalg.eigh(hermitian_part(tM))
        return (U * np.exp(w)) @ U.conj().T
    return scipy.linalg.expm(tM)


def nullspace_split(G, rel_tol: float = 1e-12, psd_tol: float = 1e-12):
    """Split a PSD matrix into its numerically nonzero eigenpairs.

    Returns ``(kept_basis, kept_eigenvalues)`` for eigenvalues strictly above
    ``rel_tol * lambda_max``; the basis columns are orthonormal.  An empty
    basis (all eigenvalues below the cut) is a legal outcome.
    """
    if not 0 < rel_tol < 1:
        raise ContractError("rel_tol must lie in (0, 1)")
    res = hermitian_eig(G)
    w, U = res.eigenvalues, res.eigenvectors
    m = U.shape[0]
    if m == 0 or w[-1] <= 0:
        return np.zeros((m, 0), dtype=np.complex128), np.zeros(0)
    if w[0] < -psd_tol * max(abs(w[0]), abs(w[-1])):
        raise ContractError(f"matrix is not PSD: smallest eigenvalue {w[0]:.3g}")
    keep = w > rel_tol * w[-1]
    return U[:, keep], w[keep]


def column_space(M, rel_tol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis of the numerical column space (relative SVD cut)."""
    M = np.asarray(M, dtype=np.complex128)
    d = M.shape[0]
    if M.size == 0:
        return np.zeros((d, 0), dtype=np.complex128)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0:
        return np.zeros((d, 0), dtype=np.complex128)
    return U[:, s > rel_tol * s[0]]


def principal_angles(A, B) -> np.ndarray:
    """Principal angles (radians, descending) between the column spans."""
    if A.shape[1] == 0 or B.shape[1] == 0:
        return np.zeros(0)
    QA = scipy.linalg.orth(as_cmatrix(A))
    QB = scipy.linalg.orth(as_cmatrix(B))
    if QA.shape[1] < QB.shape[1]:
        QA, QB = QB, QA
    C = QA.conj().T @ QB
    cos = np.clip(np.linalg.svd(C, compute_uv=False), 0.0, 1.0)  # descending
    # sines of the residual are accurate where the cosines are not
    sin = np.clip(np.linalg.svd(QB - QA @ C, compute_uv=False)[::-1], 0.0, 1.0)
    theta = np.where(cos**2 >= 0.5, np.arcsin(sin), np.arccos(cos))
    return theta[::-1]


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))
