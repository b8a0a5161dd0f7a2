"""Landauer processes and their heat / bound statistics.

A process is the bundle (d_s, d_r, ρ_s, H_r, β, U, t): a system state and
a thermal reservoir, initially uncorrelated, evolved jointly by U.  Units
are k_B = ħ = 1 and t = 1 fixes the energy scale of extracted
Hamiltonians.

Sign conventions (validated by moment identities in the tests):
heat is positive when the reservoir gains energy, a heat atom is
Q = E_final − E_initial of the reservoir energy measurements, and the
entropy change is ΔS = S(ρ_s) − S(ρ_s'), positive when the system purifies.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import numerics, quantum, sampling
from .errors import InvalidInputError, InvalidStrategyError, LandauerLabError

CorrectionFn = Callable[[float, int], float]

# Energy-degeneracy tolerance when building energy-conserving unitaries.
ENERGY_DEGENERACY_TOL = 1e-9
# Heat atoms closer than this (relative to the reservoir energy scale) merge.
HEAT_MERGE_TOL = 1e-10


def extract_hamiltonians(
    unitary: np.ndarray, d_s: int, d_r: int, t: float = 1.0
) -> tuple[np.ndarray, np.ndarray]:
    """Local generators of a joint unitary: (i·tr_r[log U]/t, i·tr_s[log U]/t).

    The partial traces are not normalized by the traced-out dimension, and
    both outputs are symmetrized to be exactly Hermitian.
    """
    if t <= 0:
        raise InvalidInputError(f"evolution time must be positive, got {t}")
    log_u = numerics.matrix_log_unitary(unitary)
    if log_u.shape[0] != d_s * d_r:
        raise InvalidInputError(
            f"unitary dimension {log_u.shape[0]} != d_s*d_r = {d_s * d_r}"
        )
    generator = 1j * log_u / t
    h_s = numerics.hermitian_part(
        numerics.partial_trace(generator, d_s, d_r, keep="system")
    )
    h_r = numerics.hermitian_part(
        numerics.partial_trace(generator, d_s, d_r, keep="reservoir")
    )
    return h_s, h_r


@dataclass
class LandauerProcess:
    """One process instance with its derived thermal reservoir state."""

    d_s: int
    d_r: int
    system_state: np.ndarray
    reservoir_hamiltonian: np.ndarray
    beta: float
    unitary: np.ndarray
    t: float = 1.0
    reservoir_state: quantum.GibbsState = field(init=False, repr=False)
    _final_joint: np.ndarray | None = field(default=None, init=False, repr=False)
    _system_hamiltonian: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self) -> None:
        if self.d_s < 1 or self.d_r < 1:
            raise InvalidInputError("subsystem dimensions must be >= 1")
        self.system_state = quantum.require_density(self.system_state, "system state")
        if self.system_state.shape[0] != self.d_s:
            raise InvalidInputError("system state dimension mismatch")
        self.unitary = numerics.require_unitary(self.unitary, "joint unitary")
        if self.unitary.shape[0] != self.d_s * self.d_r:
            raise InvalidInputError("joint unitary dimension mismatch")
        self.reservoir_state = quantum.gibbs_state(self.reservoir_hamiltonian, self.beta)
        self.reservoir_hamiltonian = self.reservoir_state.hamiltonian
        if self.reservoir_hamiltonian.shape[0] != self.d_r:
            raise InvalidInputError("reservoir Hamiltonian dimension mismatch")

    @property
    def initial_joint(self) -> np.ndarray:
        return numerics.tensor_product(self.system_state, self.reservoir_state.matrix)

    @property
    def final_joint(self) -> np.ndarray:
        if self._final_joint is None:
            u = self.unitary
            self._final_joint = u @ self.initial_joint @ u.conj().T
        return self._final_joint

    @property
    def system_hamiltonian(self) -> np.ndarray:
        if self._system_hamiltonian is None:
            h_s, _ = extract_hamiltonians(self.unitary, self.d_s, self.d_r, self.t)
            self._system_hamiltonian = h_s
        return self._system_hamiltonian


def evolve(process: LandauerProcess) -> np.ndarray:
    """Final joint state U (ρ_s ⊗ ρ_r) U†."""
    return process.final_joint


def final_reservoir_state(process: LandauerProcess) -> np.ndarray:
    return numerics.partial_trace(
        process.final_joint, process.d_s, process.d_r, keep="reservoir"
    )


def final_system_state(process: LandauerProcess) -> np.ndarray:
    return numerics.partial_trace(
        process.final_joint, process.d_s, process.d_r, keep="system"
    )


def average_heat(process: LandauerProcess) -> float:
    """⟨Q⟩ = tr[H_r (ρ_r' − ρ_r)]: energy gained by the reservoir."""
    delta = final_reservoir_state(process) - process.reservoir_state.matrix
    return float(np.einsum("ij,ji->", process.reservoir_hamiltonian, delta).real)


def entropy_change(process: LandauerProcess) -> float:
    """ΔS = S(ρ_s) − S(ρ_s') in nats."""
    return quantum.von_neumann_entropy(process.system_state) - quantum.von_neumann_entropy(
        final_system_state(process)
    )


def average_exponentiated_heat(process: LandauerProcess) -> float:
    """Fluctuation factor ⟨e^{−βQ}⟩ = tr[U† (1 ⊗ ρ_r) U (ρ_s ⊗ 1)]."""
    u = process.unitary
    rotated = u.conj().T @ numerics.tensor_product(
        np.eye(process.d_s), process.reservoir_state.matrix
    ) @ u
    weighted = numerics.tensor_product(process.system_state, np.eye(process.d_r))
    value = complex(np.einsum("ij,ji->", rotated, weighted))
    if abs(value.imag) > 1e-8:
        raise LandauerLabError(
            f"fluctuation factor has imaginary residue {value.imag:.3e}"
        )
    return float(value.real)


def reduced_operators(process: LandauerProcess) -> tuple[np.ndarray, np.ndarray]:
    """Reduced fluctuation operators (on system, on reservoir).

    Both are density matrices, and the fluctuation factor can be recovered
    from either: d_s·tr[M_s ρ_s] = d_r·tr[M_r ρ_r] = ⟨e^{−βQ}⟩.
    """
    d_s, d_r = process.d_s, process.d_r
    u = process.unitary
    on_system = numerics.partial_trace(
        u.conj().T
        @ numerics.tensor_product(np.eye(d_s) / d_s, process.reservoir_state.matrix)
        @ u,
        d_s,
        d_r,
        keep="system",
    )
    on_reservoir = numerics.partial_trace(
        u
        @ numerics.tensor_product(process.system_state, np.eye(d_r) / d_r)
        @ u.conj().T,
        d_s,
        d_r,
        keep="reservoir",
    )
    return numerics.hermitian_part(on_system), numerics.hermitian_part(on_reservoir)


@dataclass(frozen=True)
class HeatDistribution:
    """Discrete heat distribution from two-point reservoir-energy measurement."""

    heats: np.ndarray
    probabilities: np.ndarray

    def mean(self) -> float:
        return float(np.sum(self.probabilities * self.heats))

    def exponentiated_average(self, beta: float) -> float:
        return float(np.sum(self.probabilities * np.exp(-beta * self.heats)))


def heat_distribution(process: LandauerProcess) -> HeatDistribution:
    """Exact P(Q) of the two-point measurement scheme.

    The reservoir energy is measured projectively before and after the
    evolution; transition probabilities come from the Kraus operators
    A_{jk} = √λ_j (⟨k| ⊗ 1) U (|j⟩ ⊗ 1) built on the eigenbasis
    {λ_j, |j⟩} of ρ_s.  A heat atom is Q = E_final − E_initial; atoms
    closer than 1e−10·max(1, ‖H_r‖) merge.
    """
    d_s, d_r = process.d_s, process.d_r
    energies, res_basis = numerics.hermitian_eig(process.reservoir_hamiltonian)
    sys_weights, sys_basis = np.linalg.eigh(process.system_state)
    sys_weights = np.clip(sys_weights, 0.0, None)

    basis = numerics.tensor_product(sys_basis, res_basis)
    u_local = basis.conj().T @ process.unitary @ basis
    amplitude_sq = np.abs(u_local.reshape(d_s, d_r, d_s, d_r)) ** 2
    transition = np.einsum("kmjn,j->mn", amplitude_sq, sys_weights)

    # Thermal populations evaluated directly from the spectrum: reading
    # them off the state matrix would lose all relative precision on
    # exponentially small weights, which e^{+beta*Q} factors then amplify.
    boltzmann = np.exp(-process.beta * (energies - energies[0]))
    initial = boltzmann / boltzmann.sum()
    joint = transition * initial[np.newaxis, :]
    heat_values = energies[:, np.newaxis] - energies[np.newaxis, :]

    order = np.argsort(heat_values, axis=None, kind="stable")
    q_flat = heat_values.ravel()[order]
    p_flat = joint.ravel()[order]

    tol = HEAT_MERGE_TOL * max(1.0, float(np.max(np.abs(energies))) if energies.size else 1.0)
    # Each merged group is represented by its probability-weighted mean
    # heat, so the merge perturbs the moments only at second order in tol.
    anchor: list[float] = []
    merged_qp: list[float] = []
    merged_p: list[float] = []
    for q, p in zip(q_flat, p_flat):
        if anchor and q - anchor[-1] <= tol:
            merged_qp[-1] += q * p
            merged_p[-1] += p
        else:
            anchor.append(float(q))
            merged_qp.append(float(q * p))
            merged_p.append(float(p))
    probs = np.clip(np.array(merged_p), 0.0, None)
    with np.errstate(invalid="ignore", divide="ignore"):
        heats = np.where(probs > 0, np.array(merged_qp) / np.where(probs > 0, probs, 1.0), anchor)
    # Atoms carrying no weight (forbidden transitions) are not part of the
    # distribution; the pruned mass is far below the normalization check.
    support = probs > 1e-15
    probs, heats = probs[support], heats[support]
    total = probs.sum()
    if abs(total - 1.0) > 1e-9:
        raise LandauerLabError(f"heat distribution sums to {total!r}")
    return HeatDistribution(heats=heats, probabilities=probs)


def jensen_bound(process: LandauerProcess) -> float:
    """γ = −ln⟨e^{−βQ}⟩, a lower bound on β⟨Q⟩ by Jensen's inequality."""
    return jensen_bound_from_factor(average_exponentiated_heat(process))


def jensen_bound_from_factor(factor: float) -> float:
    if factor <= 0:
        raise LandauerLabError(f"fluctuation factor must be positive, got {factor}")
    return float(-np.log(factor))


def fluctuation_deviation(process: LandauerProcess) -> float:
    """μ = |⟨e^{−βQ}⟩ − 1|: distance from the fluctuation-relation value."""
    return abs(average_exponentiated_heat(process) - 1.0)


def bounds(
    process: LandauerProcess, correction: CorrectionFn | None = None
) -> tuple[float, float]:
    """(Landauer bound ΔS, corrected bound ω = ΔS + R(ΔS, d_r)).

    ``correction`` is a pluggable nonnegative finite-reservoir term;
    ``None`` means R ≡ 0, so ω reduces to the plain Landauer bound.
    """
    delta_s = entropy_change(process)
    return delta_s, corrected_bound(delta_s, process.d_r, correction)


def corrected_bound(
    delta_s: float, d_r: int, correction: CorrectionFn | None = None
) -> float:
    if correction is None:
        return delta_s
    r = float(correction(delta_s, d_r))
    if r < 0:
        raise InvalidStrategyError(f"correction strategy returned negative value {r}")
    return delta_s + r


def heat_decomposition_residual(process: LandauerProcess) -> float:
    """Residual of the exact identity β⟨Q⟩ = ΔS + I(s':r') + D(ρ_r'‖ρ_r).

    Zero to numerical precision for every valid process; a nonzero value
    flags an implementation bug, not physics.
    """
    final = process.final_joint
    info = quantum.mutual_information(final, process.d_s, process.d_r)
    divergence = quantum.relative_entropy(
        final_reservoir_state(process), process.reservoir_state.matrix
    )
    return (
        process.beta * average_heat(process)
        - entropy_change(process)
        - info
        - divergence
    )


def thermal_operation(
    system_hamiltonian: np.ndarray,
    reservoir_hamiltonian: np.ndarray,
    stream,
) -> np.ndarray:
    """Random unitary commuting with H_s ⊗ 1 + 1 ⊗ H_r.

    Haar blocks are drawn independently on each total-energy eigenspace
    (grouped with tolerance ``ENERGY_DEGENERACY_TOL``) and rotated back to
    the computational basis.  Such unitaries leave the fluctuation factor
    at exactly 1 for any thermal reservoir state.
    """
    h_s = numerics.require_hermitian(system_hamiltonian, "system Hamiltonian")
    h_r = numerics.require_hermitian(reservoir_hamiltonian, "reservoir Hamiltonian")
    total = numerics.tensor_product(h_s, np.eye(h_r.shape[0])) + numerics.tensor_product(
        np.eye(h_s.shape[0]), h_r
    )
    energies, basis = np.linalg.eigh(total)
    rng = sampling._rng(stream)
    blocks = np.zeros((energies.size, energies.size), dtype=complex)
    start = 0
    for i in range(1, energies.size + 1):
        if i == energies.size or energies[i] - energies[i - 1] > ENERGY_DEGENERACY_TOL:
            blocks[start:i, start:i] = sampling.haar_unitary(i - start, rng)
            start = i
    return basis @ blocks @ basis.conj().T


@dataclass(frozen=True)
class ProcessStats:
    """Scalar summary of one process.  Entropic quantities in nats."""

    average_heat: float
    entropy_change: float
    exp_heat_avg: float
    jensen_bound: float
    deviation: float
    mutual_information: float
    reservoir_relative_entropy: float
    landauer_bound: float
    corrected_bound: float


def process_stats(
    process: LandauerProcess,
    correction: CorrectionFn | None = None,
    include_information: bool = True,
) -> ProcessStats:
    """All per-process scalars in one pass over the evolved state.

    ``include_information=False`` skips the mutual-information and
    relative-entropy terms (the only ones needing a full-dimension
    eigendecomposition), leaving them NaN; parameter sweeps use this.
    """
    q = average_heat(process)
    delta_s = entropy_change(process)
    factor = average_exponentiated_heat(process)
    bound = jensen_bound_from_factor(factor)
    if include_information:
        info = quantum.mutual_information(process.final_joint, process.d_s, process.d_r)
        divergence = quantum.relative_entropy(
            final_reservoir_state(process), process.reservoir_state.matrix
        )
    else:
        info = float("nan")
        divergence = float("nan")
    return ProcessStats(
        average_heat=q,
        entropy_change=delta_s,
        exp_heat_avg=factor,
        jensen_bound=bound,
        deviation=abs(factor - 1.0),
        mutual_information=info,
        reservoir_relative_entropy=divergence,
        landauer_bound=delta_s,
        corrected_bound=corrected_bound(delta_s, process.d_r, correction),
    )
