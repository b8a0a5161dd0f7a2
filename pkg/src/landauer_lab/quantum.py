"""Density-matrix validation and information-theoretic functionals.

All entropic quantities are in nats (natural logarithm throughout), so
they combine dimensionlessly with β·⟨Q⟩.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import DomainError, InvalidInputError

# Eigenvalues of a density matrix may dip this far below zero from
# roundoff; anything worse is a bug in the caller, not noise.
NEGATIVITY_TOL = 1e-10
TRACE_TOL = 1e-10
# Support threshold for relative entropy: σ-eigenvalues below this count
# as zero, and ρ-weight above SUPPORT_WEIGHT_TOL on them is an error.
SUPPORT_EIG_TOL = 1e-12
SUPPORT_WEIGHT_TOL = 1e-10


def require_density(rho: np.ndarray, name: str = "state") -> np.ndarray:
    """Validate and repair a density matrix.

    Hermitian within tolerance, unit trace within ``TRACE_TOL``, and
    eigenvalues ≥ −``NEGATIVITY_TOL``.  Tiny negative eigenvalues are
    clamped to zero and the state renormalized; larger negativity raises.
    """
    rho = numerics.require_hermitian(rho, name)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidInputError(f"{name} has trace {tr!r}, expected 1")
    w, v = np.linalg.eigh(rho)
    if w.min() < -NEGATIVITY_TOL:
        raise InvalidInputError(
            f"{name} has eigenvalue {w.min():.3e} below -{NEGATIVITY_TOL}"
        )
    if w.min() < 0:
        w = np.clip(w, 0.0, None)
        rho = (v * (w / w.sum())) @ v.conj().T
        rho = numerics.hermitian_part(rho)
    return rho


@dataclass(frozen=True)
class GibbsState:
    """Thermal state e^{−βH}/Z with its defining data."""

    matrix: np.ndarray
    hamiltonian: np.ndarray
    beta: float
    log_partition: float

    @property
    def partition_function(self) -> float:
        return float(np.exp(self.log_partition))


def gibbs_state(hamiltonian: np.ndarray, beta: float) -> GibbsState:
    """Thermal state of ``hamiltonian`` at inverse temperature ``beta``.

    Computed in the eigenbasis with exponents shifted by the ground-state
    energy, so arbitrarily large β never overflows.  β = 0 gives 1/d.
    """
    h = numerics.require_hermitian(hamiltonian, "hamiltonian")
    if not np.isfinite(beta) or beta < 0:
        raise InvalidInputError(f"beta must be finite and >= 0, got {beta}")
    energies, basis = np.linalg.eigh(h)
    shifted = -beta * (energies - energies[0])
    weights = np.exp(shifted)
    norm = weights.sum()
    rho = (basis * (weights / norm)) @ basis.conj().T
    log_z = float(np.log(norm) - beta * energies[0])
    return GibbsState(
        matrix=numerics.hermitian_part(rho),
        hamiltonian=h,
        beta=float(beta),
        log_partition=log_z,
    )


def _spectrum(rho: np.ndarray) -> np.ndarray:
    w = np.linalg.eigvalsh(rho)
    return np.clip(w, 0.0, None)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """−Σ λ ln λ over the spectrum, with 0·ln 0 = 0.  Nats."""
    w = _spectrum(rho)
    w = w[w > 0]
    return float(-np.sum(w * np.log(w)))


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Quantum relative entropy D(ρ‖σ) = tr[ρ ln ρ] − tr[ρ ln σ] in nats.

    Raises :class:`DomainError` when ρ has weight outside the support of
    σ (σ-eigenvalue below 1e−12 carrying ρ-weight above 1e−10).
    """
    rho = np.asarray(rho, dtype=complex)
    s_vals, s_vecs = np.linalg.eigh(np.asarray(sigma, dtype=complex))
    weights = np.einsum("ij,jk,ki->i", s_vecs.conj().T, rho, s_vecs).real
    inside = s_vals >= SUPPORT_EIG_TOL
    if np.any(weights[~inside] > SUPPORT_WEIGHT_TOL):
        raise DomainError(
            "support of the first state is not contained in the second"
        )
    r_vals = _spectrum(rho)
    r_vals = r_vals[r_vals > 0]
    tr_rho_log_rho = float(np.sum(r_vals * np.log(r_vals)))
    tr_rho_log_sigma = float(np.sum(weights[inside] * np.log(s_vals[inside])))
    return tr_rho_log_rho - tr_rho_log_sigma


def mutual_information(rho_joint: np.ndarray, d_s: int, d_r: int) -> float:
    """I(s:r) = S(ρ_s) + S(ρ_r) − S(ρ_sr) in nats."""
    rho_joint = np.asarray(rho_joint, dtype=complex)
    if rho_joint.shape[0] != d_s * d_r:
        raise InvalidInputError(
            f"joint dimension {rho_joint.shape[0]} != d_s*d_r = {d_s * d_r}"
        )
    rho_s = numerics.partial_trace(rho_joint, d_s, d_r, keep="system")
    rho_r = numerics.partial_trace(rho_joint, d_s, d_r, keep="reservoir")
    return (
        von_neumann_entropy(rho_s)
        + von_neumann_entropy(rho_r)
        - von_neumann_entropy(rho_joint)
    )


def purity(rho: np.ndarray) -> float:
    """tr[ρ²]; equals ‖ρ‖_F² for Hermitian ρ."""
    rho = np.asarray(rho, dtype=complex)
    return float(np.sum(np.abs(rho) ** 2))
