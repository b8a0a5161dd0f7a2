"""Empirical concentration-of-measure experiments.

Reduced states of Haar-random unitary orbits concentrate around the
maximally mixed state; these experiments measure the tail of the trace
distance against the analytic bound 2·exp(−d_s d_r ε²/16), the mean
purity of the reduced state, and the uniformity of Haar matrix elements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics, quantum, sampling
from .errors import InvalidInputError


def reduced_distance(
    unitary: np.ndarray,
    joint_state: np.ndarray,
    d_s: int,
    d_r: int,
    keep: str = "system",
) -> float:
    """Trace distance of a reduced evolved state from maximally mixed.

    ‖tr_other[U τ U†] − 1/d_keep‖₁ for the kept factor.
    """
    evolved = unitary @ joint_state @ unitary.conj().T
    reduced = numerics.partial_trace(evolved, d_s, d_r, keep=keep)
    d_keep = d_s if keep == "system" else d_r
    return numerics.trace_norm(
        numerics.hermitian_part(reduced) - np.eye(d_keep) / d_keep
    )


def levy_tail_bound(epsilon: float, d_s: int, d_r: int) -> float:
    """Concentration tail bound 2·exp(−d_s·d_r·ε²/16)."""
    if epsilon < 0:
        raise InvalidInputError(f"epsilon must be >= 0, got {epsilon}")
    return float(2.0 * np.exp(-d_s * d_r * epsilon**2 / 16.0))


def default_epsilon_grid(points: int = 16, lo: float = 0.01, hi: float = 1.5) -> np.ndarray:
    """Log-spaced ε grid spanning the vacuous-to-tight bound regimes."""
    return np.geomspace(lo, hi, points)


@dataclass(frozen=True)
class TailReport:
    """Empirical tail probabilities of the reduced-state trace distance."""

    d_s: int
    d_r: int
    epsilons: np.ndarray
    empirical_tails: np.ndarray
    tail_stderrs: np.ndarray
    bounds: np.ndarray
    samples: int
    tau_description: str
    mean_distance: float
    mean_distance_stderr: float
    mean_distance_bound: float
    distances: np.ndarray


def tail_experiment(
    d_s: int,
    d_r: int,
    reservoir_state: np.ndarray,
    samples: int,
    epsilons: np.ndarray,
    seed: int,
    tau_description: str = "(1/d_s) x rho_r",
) -> TailReport:
    """Tail of ‖σ_s − 1/d_s‖₁ over the Haar orbit of τ = (1/d_s) ⊗ ρ_r.

    For each ε the empirical frequency of distance ≥ √(d_s/d_r) + ε is
    reported with its binomial standard error next to the analytic bound.
    Trial i draws from stream (seed, i), so extending ``samples`` keeps
    the earlier trials bit-identical.
    """
    if samples < 100:
        raise InvalidInputError(f"need at least 100 samples, got {samples}")
    epsilons = np.asarray(epsilons, dtype=float)
    tau = numerics.tensor_product(np.eye(d_s) / d_s, reservoir_state)
    distances = np.empty(samples)
    for i in range(samples):
        u = sampling.haar_unitary(d_s * d_r, sampling.RandomStream(seed, i))
        distances[i] = reduced_distance(u, tau, d_s, d_r, keep="system")
    offset = np.sqrt(d_s / d_r)
    tails = np.array([np.mean(distances >= offset + eps) for eps in epsilons])
    stderrs = np.sqrt(tails * (1.0 - tails) / samples)
    return TailReport(
        d_s=d_s,
        d_r=d_r,
        epsilons=epsilons,
        empirical_tails=tails,
        tail_stderrs=stderrs,
        bounds=np.array([levy_tail_bound(e, d_s, d_r) for e in epsilons]),
        samples=samples,
        tau_description=tau_description,
        mean_distance=float(distances.mean()),
        mean_distance_stderr=float(distances.std(ddof=1) / np.sqrt(samples)),
        mean_distance_bound=float(offset),
        distances=distances,
    )


@dataclass(frozen=True)
class PurityReport:
    d_s: int
    d_r: int
    samples: int
    tau_description: str
    mean_purity: float
    purity_stderr: float
    expected_purity: float
    mean_distance: float
    distance_stderr: float
    distance_bound: float


def expected_orbit_purity(d_s: int, d_r: int) -> float:
    """Haar average of tr[σ_s²] over pure-state orbits: (d_s+d_r)/(d_s·d_r+1)."""
    return (d_s + d_r) / (d_s * d_r + 1.0)


def purity_experiment(
    d_s: int,
    d_r: int,
    joint_state: np.ndarray,
    samples: int,
    seed: int,
    tau_description: str = "pure",
) -> PurityReport:
    """Monte Carlo mean purity (and trace distance) of the reduced orbit state.

    The closed-form average (d_s+d_r)/(d_s·d_r+1) is derived for pure-state
    orbits; runs on mixed τ are reported under their own description rather
    than assumed to coincide.
    """
    if samples < 1000:
        raise InvalidInputError(f"need at least 1000 samples, got {samples}")
    purities = np.empty(samples)
    distances = np.empty(samples)
    identity = np.eye(d_s) / d_s
    for i in range(samples):
        u = sampling.haar_unitary(d_s * d_r, sampling.RandomStream(seed, i))
        reduced = numerics.partial_trace(
            u @ joint_state @ u.conj().T, d_s, d_r, keep="system"
        )
        reduced = numerics.hermitian_part(reduced)
        purities[i] = quantum.purity(reduced)
        distances[i] = numerics.trace_norm(reduced - identity)
    return PurityReport(
        d_s=d_s,
        d_r=d_r,
        samples=samples,
        tau_description=tau_description,
        mean_purity=float(purities.mean()),
        purity_stderr=float(purities.std(ddof=1) / np.sqrt(samples)),
        expected_purity=expected_orbit_purity(d_s, d_r),
        mean_distance=float(distances.mean()),
        distance_stderr=float(distances.std(ddof=1) / np.sqrt(samples)),
        distance_bound=float(np.sqrt(d_s / d_r)),
    )


@dataclass(frozen=True)
class UniformityReport:
    """Statistics of Haar matrix-element magnitudes.

    ``mean_scaled`` averages d·|U_ij|² (exactly 1 in expectation);
    ``variance`` is the sample variance of the unscaled |U_ij|², which
    shrinks with dimension as the bases become mutually unbiased.
    """

    dimension: int
    samples: int
    mean_scaled: float
    mean_scaled_stderr: float
    variance: float
    variance_scaled: float


def matrix_element_uniformity(d: int, samples: int, seed: int) -> UniformityReport:
    """Sample |U_ij|² over Haar unitaries, one uniformly random entry each."""
    if samples < 1000:
        raise InvalidInputError(f"need at least 1000 samples, got {samples}")
    values = np.empty(samples)
    for i in range(samples):
        rng = sampling.RandomStream(seed, i).generator()
        u = sampling.haar_unitary(d, rng)
        row, col = rng.integers(d, size=2)
        values[i] = np.abs(u[row, col]) ** 2
    scaled = d * values
    return UniformityReport(
        dimension=d,
        samples=samples,
        mean_scaled=float(scaled.mean()),
        mean_scaled_stderr=float(scaled.std(ddof=1) / np.sqrt(samples)),
        variance=float(values.var(ddof=1)),
        variance_scaled=float(scaled.var(ddof=1)),
    )
