"""Dense numerical kernels used by the criticality measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

RCOND_FLOOR = 1e-13
ZERO_EIG_RTOL = 1e-9
SYMMETRY_TOL = 1e-10


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a matrix is singular or too ill-conditioned to invert."""

    def __init__(self, message: str, rcond: float):
        super().__init__(f"{message} (reciprocal condition estimate {rcond:.3g})")
        self.rcond = rcond


class DisconnectedGraphError(ValueError):
    pass


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray  # ascending
    vectors: np.ndarray  # orthonormal columns


def invert(m: np.ndarray) -> np.ndarray:
    """Inverse of a square matrix, refusing near-singular input.

    The 1-norm reciprocal condition number is checked against
    ``RCOND_FLOOR``; a failure carries the estimate in ``.rcond``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    try:
        # LAPACK works in Fortran order: inverting the transpose hands back
        # a C-ordered inverse without copies
        inv = scipy.linalg.inv(m.T).T
    except np.linalg.LinAlgError:
        raise SingularMatrixError("matrix is singular", 0.0) from None
    norm = np.abs(m).sum(axis=0).max()
    inv_norm = np.abs(inv).sum(axis=0).max()
    rcond = 1.0 / (norm * inv_norm) if norm > 0 and np.isfinite(inv_norm) else 0.0
    if not rcond >= RCOND_FLOOR:
        raise SingularMatrixError("matrix is numerically singular", rcond)
    return inv


def _check_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, np.abs(m).max(initial=0.0))
    if np.abs(m - m.T).max(initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric")
    return m


def sym_eigen(m: np.ndarray) -> EigenResult:
    m = _check_symmetric(m)
    values, vectors = np.linalg.eigh(m)
    return EigenResult(values, vectors)


def algebraic_connectivity(lap: np.ndarray) -> float:
    """Second-smallest Laplacian eigenvalue (0 for a single node)."""
    lap = _check_symmetric(lap)
    if lap.shape[0] < 2:
        return 0.0
    return float(np.linalg.eigvalsh(lap)[1])


def laplacian_pseudoinverse(lap: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudoinverse of the Laplacian of a connected graph.

    Eigenvalues with ``|lambda| < ZERO_EIG_RTOL * max|lambda|`` are treated
    as zero; more than one of them means the graph is disconnected, which is
    reported rather than silently handled.
    """
    eig = sym_eigen(lap)
    lam = eig.values
    cutoff = ZERO_EIG_RTOL * np.abs(lam).max(initial=0.0)
    zero = np.abs(lam) <= cutoff
    if zero.sum() > 1:
        raise DisconnectedGraphError(f"Laplacian has {zero.sum()} zero eigenvalues; graph is disconnected")
    inv_lam = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, lam))
    v = eig.vectors
    return (v * inv_lam) @ v.T


def expm_diag(a: np.ndarray) -> np.ndarray:
    """Diagonal of ``expm(A)`` for symmetric ``A``: ``sum_k exp(l_k) v_k**2``."""
    eig = sym_eigen(a)
    return (eig.vectors**2) @ np.exp(eig.values)


def dominant_eigenvalue(a: np.ndarray) -> float:
    a = _check_symmetric(a)
    return float(np.linalg.eigvalsh(a)[-1])
