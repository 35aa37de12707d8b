"""Dense complex linear algebra for 2x2 and 4x4 operators.

Thin, contract-checked wrappers over numpy.linalg: the matrices are tiny, so
explicit tolerances and failure modes matter more than speed.  All tolerances
are relative to the largest entry of the input, since entries span several
orders of magnitude in rad/ns.

Basis convention, fixed globally: |up> = (1, 0), qubit 1 is the left
Kronecker factor, product basis ordered |uu>, |ud>, |du>, |dd>.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, HermiticityError, NumericalFailure

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)
ID4 = np.eye(4, dtype=complex)

HERM_TOL = 1e-10        # relative Hermiticity precondition
EIG_RESIDUAL_TOL = 1e-9  # relative per-pair residual for the general solver


def _as_square(m, name: str = "operator") -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] not in (2, 4):
        raise DimensionError(f"{name} must be 2x2 or 4x4, got shape {a.shape}")
    return a


def hermiticity_error(m) -> float:
    """Max-norm deviation from self-adjointness, max |M - M^dag|."""
    a = _as_square(m)
    return float(np.max(np.abs(a - a.conj().T)))


def _require_hermitian(m: np.ndarray, where: str) -> None:
    scale = float(np.max(np.abs(m)))
    err = float(np.max(np.abs(m - m.conj().T)))
    if err > HERM_TOL * scale:
        raise HermiticityError(f"{where}: input is not Hermitian", err)


def kron(a, b) -> np.ndarray:
    """Kronecker product of two single-qubit operators, qubit 1 on the left."""
    a = _as_square(a, "kron left factor")
    b = _as_square(b, "kron right factor")
    if a.shape[0] != 2 or b.shape[0] != 2:
        raise DimensionError(
            f"kron expects two 2x2 factors, got {a.shape} and {b.shape}"
        )
    return np.kron(a, b)


def herm_eig(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian operator.

    Returns ``(eigenvalues, eigenvectors)`` with real eigenvalues sorted in
    descending order; column k of the eigenvector matrix belongs to
    eigenvalue k, so ``m = V diag(w) V^dag``.
    """
    a = _as_square(m, "herm_eig input")
    _require_hermitian(a, "herm_eig")
    w, v = np.linalg.eigh(a)
    return np.ascontiguousarray(w[::-1]), np.ascontiguousarray(v[:, ::-1])


def expm_hermitian(h, s: float) -> np.ndarray:
    """exp(-i*s*h) for Hermitian h, via eigendecomposition.

    Unitary by construction (phases applied to an orthonormal eigenbasis).
    """
    a = _as_square(h, "expm_hermitian input")
    _require_hermitian(a, "expm_hermitian")
    w, v = np.linalg.eigh(a)
    return (v * np.exp(-1j * s * w)) @ v.conj().T


def general_eigvals(m) -> np.ndarray:
    """Eigenvalues of a general (non-Hermitian) 4x4 matrix, unsorted.

    Each eigenpair is verified against the residual contract
    ``max |M v - lambda v| < 1e-9 * max|entry|``; realness and sign
    post-processing is left to the caller.
    """
    a = _as_square(m, "general_eigvals input")
    if a.shape[0] != 4:
        raise DimensionError(f"general_eigvals expects a 4x4 matrix, got {a.shape}")
    try:
        w, v = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue iteration did not converge: {exc}") from exc
    residual = np.max(np.abs(a @ v - v * w), axis=0)
    worst = float(residual.max())
    scale = float(np.max(np.abs(a)))
    if worst > EIG_RESIDUAL_TOL * scale:
        raise NumericalFailure(
            f"eigenpair residual {worst:.3e} exceeds {EIG_RESIDUAL_TOL:.0e} * {scale:.3e}"
        )
    return w
