"""Deterministic, splittable randomness and Haar-measure sampling.

Reproducibility contract: every Monte Carlo trial owns a
:class:`RandomStream` identified by ``(master_seed, stream_index)``; the
draw sequence of a stream is identical on every platform and for any
worker count.  Functions accept either a stream (a fresh generator is
derived) or an already-running ``numpy.random.Generator`` when several
draws must share one sequence inside a trial.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import InvalidInputError

# stream_index values at or above this are reserved for one-off setup
# draws (fixed reference states etc.); trial ordinals stay below it.
SETUP_STREAM_BASE = 2**62


@dataclass(frozen=True)
class RandomStream:
    """Keyed, value-like handle on an independent pseudo-random sequence."""

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.stream_index,)
        )
        return np.random.default_rng(seq)


def _rng(stream: "RandomStream | np.random.Generator") -> np.random.Generator:
    if isinstance(stream, RandomStream):
        return stream.generator()
    return stream


def ginibre(d: int, stream, cols: int | None = None) -> np.ndarray:
    """d × cols matrix of i.i.d. standard complex Gaussian entries."""
    if d < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {d}")
    rng = _rng(stream)
    shape = (d, d if cols is None else cols)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def haar_unitary(d: int, stream) -> np.ndarray:
    """Haar-distributed d × d unitary.

    QR of a Ginibre matrix with the diagonal phases of R divided out;
    without that phase correction the QR factor is unitary but not
    Haar-distributed.
    """
    g = ginibre(d, stream)
    q, r = np.linalg.qr(g)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def haar_hamiltonian(d: int, stream) -> np.ndarray:
    """Hermitian matrix i·log(U) for a Haar-random U.

    Eigenvalues are the negated eigenphases of U, so the spectrum lives in
    [−π, π); a natural reservoir-energy scale for synthetic processes.
    """
    return numerics.hermitian_part(1j * numerics.matrix_log_unitary(haar_unitary(d, stream)))


def random_density_matrix(d: int, stream, method: str = "induced-hs") -> np.ndarray:
    """Random d × d density matrix.

    ``pure-haar``        — |ψ⟩⟨ψ| with |ψ⟩ a Haar-random unit vector.
    ``induced-hs``       — partial trace over a d-dimensional ancilla of a
                           Haar-random pure state on d×d (Hilbert–Schmidt
                           induced measure; full rank almost surely).
    ``maximally-mixed``  — the deterministic state 1/d (useful as an exact
                           control: the fluctuation factor is then 1).
    """
    if d < 1:
        raise InvalidInputError(f"dimension must be >= 1, got {d}")
    if method == "maximally-mixed":
        return np.eye(d, dtype=complex) / d
    rng = _rng(stream)
    if method == "pure-haar":
        psi = ginibre(d, rng, cols=1)[:, 0]
        psi /= np.linalg.norm(psi)
        return np.outer(psi, psi.conj())
    if method == "induced-hs":
        g = ginibre(d, rng)
        rho = g @ g.conj().T
        return rho / np.trace(rho).real
    raise InvalidInputError(f"unknown density-matrix sampling method {method!r}")
