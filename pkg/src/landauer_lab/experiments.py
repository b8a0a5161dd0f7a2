"""Parameter sweeps, temperature scaling, curve fitting, and hull peeling.

Temperature regimes are compared across random reservoir Hamiltonians by
a dimensionless scaled temperature: the inverse temperature of each trial
is solved from the target scale and that trial's spectrum, so one T-axis
is shared by all samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import landauer, numerics, sampling
from .errors import DegenerateSpectrumError, InvalidInputError

REGIMES = ("low", "mid", "high")
RHO_S_METHODS = ("induced-hs", "pure-haar", "maximally-mixed")
UNITARY_KINDS = ("haar", "thermal")

GAP_TOL = 1e-12


# ---------------------------------------------------------------------------
# Scaled temperature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TemperatureSpec:
    """A regime plus the dimensionless temperature targeted within it."""

    regime: str
    t_tilde: float

    def __post_init__(self) -> None:
        if self.regime not in REGIMES:
            raise InvalidInputError(f"unknown regime {self.regime!r}")
        if not (self.t_tilde > 0 and math.isfinite(self.t_tilde)):
            raise InvalidInputError(f"scaled temperature must be > 0, got {self.t_tilde}")


def _gap_scale(hamiltonian: np.ndarray, regime: str) -> float:
    """Energy scale dividing 1/β for the given regime.

    low  — smallest gap |E_1 − E_0|
    high — full width |E_N − E_0|
    mid  — mean-gap-like scale: Σ|E_n − E_{n−1}| / (N − 1), which for an
           ascending spectrum telescopes to (E_N − E_0)/(N − 1)
    """
    energies = np.sort(np.linalg.eigvalsh(numerics.require_hermitian(hamiltonian)))
    top = energies.size - 1
    if top < 1:
        raise DegenerateSpectrumError("need at least two energy levels")
    if regime == "low":
        gap = energies[1] - energies[0]
    elif regime == "high":
        gap = energies[top] - energies[0]
    elif regime == "mid":
        if top < 2:
            raise DegenerateSpectrumError(
                "mid regime is undefined for a two-level reservoir"
            )
        gap = float(np.sum(np.diff(energies))) / (top - 1)
    else:
        raise InvalidInputError(f"unknown regime {regime!r}")
    if abs(gap) < GAP_TOL:
        raise DegenerateSpectrumError(f"degenerate spectrum: {regime} gap {gap!r}")
    return float(abs(gap))


def scaled_temperature(hamiltonian: np.ndarray, beta: float, regime: str) -> float:
    """Dimensionless temperature of ``beta`` relative to the spectrum."""
    if not (beta > 0 and math.isfinite(beta)):
        raise InvalidInputError(f"beta must be finite and > 0, got {beta}")
    return 1.0 / (beta * _gap_scale(hamiltonian, regime))


def beta_for_target(hamiltonian: np.ndarray, spec: TemperatureSpec) -> float:
    """Inverse temperature realizing ``spec`` for this spectrum (closed form)."""
    return 1.0 / (spec.t_tilde * _gap_scale(hamiltonian, spec.regime))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    """Deterministic description of one Monte Carlo sweep."""

    experiment: str
    d_s: int
    d_r: int
    regime: str
    t_grid: tuple[float, ...]
    n_per_point: int
    rho_s_method: str = "induced-hs"
    correction: str = "zero"
    unitary_kind: str = "haar"
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.d_s < 1 or self.d_r < 2:
            raise InvalidInputError("need d_s >= 1 and d_r >= 2")
        if self.regime not in REGIMES:
            raise InvalidInputError(f"unknown regime {self.regime!r}")
        if self.regime == "mid" and self.d_r == 2:
            raise InvalidInputError(
                "mid regime is undefined for a two-level reservoir (d_r = 2)"
            )
        if not self.t_grid or any(not (t > 0) for t in self.t_grid):
            raise InvalidInputError("t_grid must be nonempty with positive entries")
        if self.n_per_point < 1:
            raise InvalidInputError("n_per_point must be >= 1")
        if self.rho_s_method not in RHO_S_METHODS:
            raise InvalidInputError(f"unknown rho_s method {self.rho_s_method!r}")
        if self.unitary_kind not in UNITARY_KINDS:
            raise InvalidInputError(f"unknown unitary kind {self.unitary_kind!r}")
        resolve_correction(self.correction)

    @property
    def total_trials(self) -> int:
        return len(self.t_grid) * self.n_per_point


def resolve_correction(name: str) -> landauer.CorrectionFn | None:
    """Named finite-reservoir correction strategies.

    ``zero`` is the identity-free default; ``constant:<x>`` adds a fixed
    nonnegative offset (mainly for plumbing tests).
    """
    if name == "zero":
        return None
    if name.startswith("constant:"):
        value = float(name.split(":", 1)[1])
        if value < 0:
            raise InvalidInputError(f"constant correction must be >= 0, got {value}")
        return lambda delta_s, d_r: value
    raise InvalidInputError(f"unknown correction strategy {name!r}")


@dataclass(frozen=True)
class TrialRecord:
    """One sweep row; mirrors the trials CSV schema."""

    experiment: str
    trial: int
    d_s: int
    d_r: int
    regime: str
    t_tilde: float
    beta: float
    rho_s_method: str
    q_avg: float
    delta_s: float
    fluctuation_factor: float
    jensen_bound: float
    deviation: float
    corrected_bound: float
    jensen_gap: float
    bound_gap: float
    skipped: bool
    master_seed: int
    stream_index: int


def run_trial(config: SweepConfig, ordinal: int) -> TrialRecord:
    """Compute the trial with the given ordinal; pure and order-free.

    Draw order within the trial's stream is fixed (joint unitary, then the
    thermal-block unitary if requested, then the system state), so records
    are bit-identical for a fixed (config, ordinal) on any worker.
    """
    point, _ = divmod(ordinal, config.n_per_point)
    t_tilde = config.t_grid[point]
    rng = sampling.RandomStream(config.master_seed, ordinal).generator()
    unitary = sampling.haar_unitary(config.d_s * config.d_r, rng)
    h_s, h_r = landauer.extract_hamiltonians(unitary, config.d_s, config.d_r)

    def _skipped() -> TrialRecord:
        nan = float("nan")
        return TrialRecord(
            experiment=config.experiment, trial=ordinal, d_s=config.d_s,
            d_r=config.d_r, regime=config.regime, t_tilde=t_tilde, beta=nan,
            rho_s_method=config.rho_s_method, q_avg=nan, delta_s=nan,
            fluctuation_factor=nan, jensen_bound=nan, deviation=nan,
            corrected_bound=nan, jensen_gap=nan, bound_gap=nan, skipped=True,
            master_seed=config.master_seed, stream_index=ordinal,
        )

    try:
        beta = beta_for_target(h_r, TemperatureSpec(config.regime, t_tilde))
    except DegenerateSpectrumError:
        return _skipped()
    if config.unitary_kind == "thermal":
        unitary = landauer.thermal_operation(h_s, h_r, rng)
    system_state = sampling.random_density_matrix(config.d_s, rng, config.rho_s_method)
    process = landauer.LandauerProcess(
        d_s=config.d_s, d_r=config.d_r, system_state=system_state,
        reservoir_hamiltonian=h_r, beta=beta, unitary=unitary,
    )
    stats = landauer.process_stats(
        process, resolve_correction(config.correction), include_information=False
    )
    return TrialRecord(
        experiment=config.experiment,
        trial=ordinal,
        d_s=config.d_s,
        d_r=config.d_r,
        regime=config.regime,
        t_tilde=t_tilde,
        beta=beta,
        rho_s_method=config.rho_s_method,
        q_avg=stats.average_heat,
        delta_s=stats.entropy_change,
        fluctuation_factor=stats.exp_heat_avg,
        jensen_bound=stats.jensen_bound,
        deviation=stats.deviation,
        corrected_bound=stats.corrected_bound,
        jensen_gap=beta * stats.average_heat - stats.jensen_bound,
        bound_gap=stats.jensen_bound - stats.corrected_bound,
        skipped=False,
        master_seed=config.master_seed,
        stream_index=ordinal,
    )


def temperature_sweep(config: SweepConfig) -> list[TrialRecord]:
    """All trials of the sweep in ordinal order (sequential reference path)."""
    return [run_trial(config, k) for k in range(config.total_trials)]


def bound_compare_sweep(
    experiment: str,
    d_s: int,
    d_r: int,
    regime: str,
    t_tilde: float,
    n: int,
    correction: str = "zero",
    unitary_kind: str = "haar",
    rho_s_method: str = "induced-hs",
    master_seed: int = 0,
) -> list[TrialRecord]:
    """Single-temperature sweep populating the bound-gap columns."""
    config = SweepConfig(
        experiment=experiment, d_s=d_s, d_r=d_r, regime=regime,
        t_grid=(t_tilde,), n_per_point=n, rho_s_method=rho_s_method,
        correction=correction, unitary_kind=unitary_kind, master_seed=master_seed,
    )
    return temperature_sweep(config)


# ---------------------------------------------------------------------------
# Saturating-exponential fit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of y = a·(1 − exp(−b/T))."""

    a: float
    b: float
    covariance: np.ndarray
    residual_norm: float
    converged: bool
    iterations: int
    degenerate: bool = False


def saturating_exponential(t: np.ndarray, a: float, b: float) -> np.ndarray:
    with np.errstate(over="ignore"):
        return a * (1.0 - np.exp(-b / np.asarray(t, dtype=float)))


def fit_saturating_exponential(points: Iterable[tuple[float, float]]) -> FitResult:
    """Damped Gauss–Newton (Levenberg–Marquardt) fit of a·(1 − e^{−b/T}).

    Starts from a₀ = max y, b₀ = median T, capped at 200 iterations.
    Converged means numerically stationary: the relative parameter step
    fell below 1e−10, the cost stopped improving, or the residual became
    orthogonal to the Jacobian columns (worst cosine ≤ 1e−4, the classic
    least-squares gtol; decisive when only a parameter combination is
    identified, e.g. the a·b product for b far below every abscissa).
    The covariance comes from the linearized normal equations at the
    optimum and reports any such ambiguity.
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or np.unique(pts[:, 0]).size < 3:
        raise InvalidInputError("need points (T, y) with at least 3 distinct T")
    t, y = pts[:, 0], pts[:, 1]
    if np.any(t <= 0):
        raise InvalidInputError("abscissae must be positive")
    if np.all(y == 0):
        return FitResult(
            a=0.0, b=float(np.median(t)), covariance=np.zeros((2, 2)),
            residual_norm=0.0, converged=True, iterations=0, degenerate=True,
        )

    def residuals(a: float, b: float) -> np.ndarray:
        return y - saturating_exponential(t, a, b)

    def jacobian(a: float, b: float) -> np.ndarray:
        decay = np.exp(-b / t)
        return np.column_stack([1.0 - decay, a * decay / t])

    def gradient_cosine(jac: np.ndarray, r: np.ndarray) -> float:
        norms = np.linalg.norm(jac, axis=0) * (np.linalg.norm(r) + 1e-300)
        return float(np.max(np.abs(jac.T @ r) / np.maximum(norms, 1e-300)))

    a, b = float(np.max(y)), float(np.median(t))
    cost = float(np.sum(residuals(a, b) ** 2))
    damping = 1e-3
    converged = False
    iterations = 0
    for iterations in range(1, 201):
        jac = jacobian(a, b)
        r = residuals(a, b)
        if gradient_cosine(jac, r) <= 1e-4:
            converged = True
            break
        jtj = jac.T @ jac
        grad = jac.T @ r
        stepped = False
        for _ in range(50):
            lhs = jtj + damping * np.diag(np.maximum(np.diag(jtj), 1e-30))
            try:
                step = np.linalg.solve(lhs, grad)
            except np.linalg.LinAlgError:
                damping *= 10
                continue
            a_new, b_new = a + step[0], b + step[1]
            new_cost = float(np.sum(residuals(a_new, b_new) ** 2))
            if np.isfinite(new_cost) and new_cost <= cost:
                rel_step = np.linalg.norm(step) / (np.hypot(a, b) + 1e-300)
                improvement = cost - new_cost
                a, b, cost = a_new, b_new, new_cost
                damping = max(damping / 3, 1e-12)
                stepped = True
                if rel_step < 1e-10 or improvement <= 1e-12 * max(cost, 1e-300):
                    converged = True
                break
            damping *= 10
        if converged or not stepped:
            converged = True
            break

    jac = jacobian(a, b)
    r = residuals(a, b)
    dof = max(t.size - 2, 1)
    sigma_sq = float(r @ r) / dof
    covariance = sigma_sq * np.linalg.pinv(jac.T @ jac)
    return FitResult(
        a=float(a), b=float(b), covariance=covariance,
        residual_norm=float(np.linalg.norm(r)), converged=converged,
        iterations=iterations,
    )


def fit_from_records(records: Sequence[TrialRecord]) -> FitResult:
    """Fit deviation-vs-temperature over the non-skipped rows of a sweep."""
    pts = [(rec.t_tilde, rec.deviation) for rec in records if not rec.skipped]
    return fit_saturating_exponential(pts)


# ---------------------------------------------------------------------------
# Bivariate geometry
# ---------------------------------------------------------------------------

def bivariate_median(points: np.ndarray) -> tuple[float, float]:
    """Coordinate-wise median."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise InvalidInputError("need at least one point")
    return float(np.median(pts[:, 0])), float(np.median(pts[:, 1]))


def convex_hull(points: np.ndarray) -> np.ndarray:
    """Convex hull by Andrew's monotone chain, vertices counterclockwise.

    Collinear boundary points are not vertices and are excluded.  Returns
    fewer than 3 points when the input is degenerate (collinear).
    """
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if pts.shape[0] <= 2:
        return pts

    def cross(o, a, b) -> float:
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[np.ndarray] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[np.ndarray] = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        # All points collinear: report the extreme segment.
        return np.array([pts[0], pts[-1]])
    return np.array(hull)


@dataclass(frozen=True)
class HullPeeling:
    """Nested hull layers peeled from a planar point cloud."""

    layers: list[np.ndarray]
    confidence_polygon: np.ndarray
    retained_fractions: list[float]
    final_retained_fraction: float
    degenerate: bool


def convex_hull_peel(points: np.ndarray, target_fraction: float = 0.95) -> HullPeeling:
    """Peel hull layers until ≤ ``target_fraction`` of the points remain.

    The hull of what is left is the confidence polygon.  Degenerate
    (collinear or exhausted) configurations are flagged rather than
    raised, since they can arise from legitimate data.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
        raise InvalidInputError("need a nonempty (n, 2) point array")
    if not (0.0 <= target_fraction <= 1.0):
        raise InvalidInputError("target_fraction must lie in [0, 1]")
    total = pts.shape[0]
    remaining = pts
    layers: list[np.ndarray] = []
    retained: list[float] = []
    degenerate = False
    while remaining.shape[0] / total > target_fraction:
        if remaining.shape[0] < 3:
            degenerate = True
            break
        hull = convex_hull(remaining)
        if hull.shape[0] < 3:
            degenerate = True
            break
        layers.append(hull)
        on_hull = (remaining[:, None, :] == hull[None, :, :]).all(axis=2).any(axis=1)
        remaining = remaining[~on_hull]
        retained.append(remaining.shape[0] / total)

    polygon = convex_hull(remaining) if remaining.shape[0] else np.empty((0, 2))
    if polygon.shape[0] < 3:
        degenerate = True
    return HullPeeling(
        layers=layers,
        confidence_polygon=polygon,
        retained_fractions=retained,
        final_retained_fraction=remaining.shape[0] / total,
        degenerate=degenerate,
    )


# ---------------------------------------------------------------------------
# Aggregation
# ---------------------------------------------------------------------------

SUMMARY_FIELDS = ("deviation", "jensen_gap", "bound_gap")


def summarize(
    records: Sequence[TrialRecord], group_keys: Sequence[str]
) -> list[dict]:
    """Order statistics of deviation and bound gaps per group.

    Skipped rows are excluded; groups are emitted in sorted key order, so
    the output is independent of record ordering.
    """
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in records:
        if rec.skipped:
            continue
        key = tuple(getattr(rec, k) for k in group_keys)
        groups.setdefault(key, []).append(rec)
    rows = []
    for key in sorted(groups):
        batch = groups[key]
        row: dict = dict(zip(group_keys, key))
        row["count"] = len(batch)
        for field_name in SUMMARY_FIELDS:
            # Sorted before aggregation so results are bit-identical under
            # any permutation of the input records.
            values = np.sort([getattr(rec, field_name) for rec in batch])
            q1, med, q3 = np.percentile(values, [25, 50, 75])
            row[f"{field_name}_median"] = float(med)
            row[f"{field_name}_q1"] = float(q1)
            row[f"{field_name}_q3"] = float(q3)
            row[f"{field_name}_mean"] = float(values.mean())
            row[f"{field_name}_stderr"] = float(
                values.std(ddof=1) / np.sqrt(values.size) if values.size > 1 else 0.0
            )
        rows.append(row)
    return rows


def bootstrap_median_difference(
    x: np.ndarray,
    y: np.ndarray,
    n_boot: int = 2000,
    seed: int = 0,
    alpha: float = 0.05,
) -> tuple[float, float]:
    """Bootstrap CI for median(x) − median(y); deterministic for a seed."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rng = sampling.RandomStream(seed, 0).generator()
    diffs = np.empty(n_boot)
    for i in range(n_boot):
        diffs[i] = np.median(rng.choice(x, x.size)) - np.median(rng.choice(y, y.size))
    lo, hi = np.quantile(diffs, [alpha / 2, 1 - alpha / 2])
    return float(lo), float(hi)
