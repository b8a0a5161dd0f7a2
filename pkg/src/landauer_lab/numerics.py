"""Dense complex linear-algebra kernels.

Everything here is a pure function of NumPy arrays.  Matrices are dense
complex ``ndarray``s; Hermiticity / unitarity are structural contracts
checked at entry with the tolerances below rather than encoded in types.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import InvalidInputError

# Constructor-level structural checks.
STRUCTURE_TOL = 1e-10
# Derived-identity checks (reconstruction residuals, exp(log U) round trips).
IDENTITY_TOL = 1e-8


def frobenius(a: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(a))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """(A + A†)/2."""
    return (a + a.conj().T) / 2


def require_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(a.imag)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def require_hermitian(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate ‖A − A†‖_F ≤ tol·max(1, ‖A‖_F) and return A as complex."""
    a = require_square(a, name)
    defect = frobenius(a - a.conj().T)
    if defect > STRUCTURE_TOL * max(1.0, frobenius(a)):
        raise InvalidInputError(
            f"{name} is not Hermitian (defect {defect:.3e})"
        )
    return a


def require_unitary(u: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate ‖U†U − 1‖_F ≤ tol·√d and return U as complex."""
    u = require_square(u, name)
    d = u.shape[0]
    defect = frobenius(u.conj().T @ u - np.eye(d))
    if defect > STRUCTURE_TOL * np.sqrt(d):
        raise InvalidInputError(
            f"{name} is not unitary (defect {defect:.3e})"
        )
    return u


def hermitian_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and
    eigenvectors as columns of a unitary matrix, so that A = V Λ V†.
    """
    a = require_hermitian(a)
    w, v = np.linalg.eigh(a)
    return w, v


def matrix_log_unitary(u: np.ndarray) -> np.ndarray:
    """Principal logarithm of a unitary matrix.

    Uses a complex Schur decomposition (robust for degenerate eigenvalues,
    unlike a generic eigensolver).  Eigenphases are taken in (−π, π], the
    value +π being kept at +π.  The result L is anti-Hermitian and
    satisfies exp(L) = U to well below ``IDENTITY_TOL``.
    """
    u = require_unitary(u)
    t, z = scipy.linalg.schur(u, output="complex")
    # U is normal, so T is diagonal up to roundoff.
    phases = np.angle(np.diag(t))
    log_u = (z * (1j * phases)) @ z.conj().T
    # Exact anti-Hermitian symmetrization; correction is O(machine eps).
    return (log_u - log_u.conj().T) / 2


def tensor_product(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the first factor slowest-varying."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(
    m: np.ndarray, d_s: int, d_r: int, keep: str
) -> np.ndarray:
    """Trace out one tensor factor of an operator on a d_s·d_r space.

    ``keep`` selects the factor that survives: ``"system"`` (first, slowest
    index) or ``"reservoir"`` (second).  Tensor ordering must match
    :func:`tensor_product`.
    """
    m = require_square(m)
    if m.shape[0] != d_s * d_r:
        raise InvalidInputError(
            f"operator dimension {m.shape[0]} != d_s*d_r = {d_s * d_r}"
        )
    blocks = m.reshape(d_s, d_r, d_s, d_r)
    if keep == "system":
        return np.einsum("arbr->ab", blocks)
    if keep == "reservoir":
        return np.einsum("sasb->ab", blocks)
    raise InvalidInputError(f"keep must be 'system' or 'reservoir', got {keep!r}")


def trace_norm(a: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    a = require_hermitian(a)
    return float(np.sum(np.abs(np.linalg.eigvalsh(a))))
