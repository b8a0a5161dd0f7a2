"""Cross-module invariant suite behind the ``selftest`` subcommand.

Each check is deterministic for a fixed master seed and cheap (the whole
suite runs in well under a minute); failures indicate bugs, not
statistical bad luck.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg

from . import concentration, experiments, landauer, numerics, quantum, sampling

Check = tuple[str, bool, str]


def _random_hermitian(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return numerics.hermitian_part(g)


def _random_process(d_s: int, d_r: int, beta: float, stream: sampling.RandomStream,
                    method: str = "induced-hs") -> landauer.LandauerProcess:
    rng = stream.generator()
    unitary = sampling.haar_unitary(d_s * d_r, rng)
    _, h_r = landauer.extract_hamiltonians(unitary, d_s, d_r)
    state = sampling.random_density_matrix(d_s, rng, method)
    return landauer.LandauerProcess(
        d_s=d_s, d_r=d_r, system_state=state,
        reservoir_hamiltonian=h_r, beta=beta, unitary=unitary,
    )


def run_all(seed: int) -> list[Check]:
    checks: list[Check] = []

    def check(name: str, fn: Callable[[], bool]) -> None:
        try:
            checks.append((name, bool(fn()), ""))
        except Exception as exc:  # a selftest must not abort mid-suite
            checks.append((name, False, f"{type(exc).__name__}: {exc}"))

    rng = sampling.RandomStream(seed, sampling.SETUP_STREAM_BASE + 1).generator()

    def eig_reconstruction() -> bool:
        a = _random_hermitian(64, rng)
        w, v = numerics.hermitian_eig(a)
        residual = numerics.frobenius(a - (v * w) @ v.conj().T)
        return residual < 1e-9 * max(1.0, numerics.frobenius(a))

    check("hermitian_eig reconstruction (d=64)", eig_reconstruction)

    def log_round_trip() -> bool:
        u = sampling.haar_unitary(6, rng)
        log_u = numerics.matrix_log_unitary(u)
        anti = numerics.frobenius(log_u + log_u.conj().T)
        return anti < 1e-9 and numerics.frobenius(scipy.linalg.expm(log_u) - u) < 1e-8

    check("matrix log of unitary round trip (d=6)", log_round_trip)

    def ptrace_product() -> bool:
        a = _random_hermitian(3, rng)
        b = _random_hermitian(4, rng)
        joint = numerics.tensor_product(a, b)
        err_s = numerics.frobenius(
            numerics.partial_trace(joint, 3, 4, "system") - np.trace(b) * a
        )
        err_r = numerics.frobenius(
            numerics.partial_trace(joint, 3, 4, "reservoir") - np.trace(a) * b
        )
        return max(err_s, err_r) < 1e-12

    check("partial trace of a product factorizes", ptrace_product)

    def trace_norm_matches() -> bool:
        a = _random_hermitian(8, rng)
        return abs(numerics.trace_norm(a) - np.sum(np.abs(np.linalg.eigvalsh(a)))) < 1e-10

    check("trace norm equals absolute eigenvalue sum", trace_norm_matches)

    def haar_deterministic() -> bool:
        stream = sampling.RandomStream(seed, 12345)
        u1 = sampling.haar_unitary(8, stream)
        u2 = sampling.haar_unitary(8, stream)
        defect = numerics.frobenius(u1.conj().T @ u1 - np.eye(8))
        return np.array_equal(u1, u2) and defect < 1e-10 * np.sqrt(8)

    check("haar sampling unitary and bit-reproducible", haar_deterministic)

    def density_valid() -> bool:
        rho = sampling.random_density_matrix(5, sampling.RandomStream(seed, 5))
        quantum.require_density(rho)
        pure = sampling.random_density_matrix(
            5, sampling.RandomStream(seed, 6), method="pure-haar"
        )
        return abs(quantum.purity(pure) - 1.0) < 1e-12

    check("random density matrices valid; pure sampling has purity 1", density_valid)

    def gibbs_closed_form() -> bool:
        state = quantum.gibbs_state(np.diag([0.0, 1.0]), 1.0)
        p = 1.0 / (1.0 + np.exp(-1.0))
        err = numerics.frobenius(state.matrix - np.diag([p, 1 - p]))
        flat = quantum.gibbs_state(_random_hermitian(4, rng), 0.0).matrix
        return err < 1e-12 and numerics.frobenius(flat - np.eye(4) / 4) < 1e-12

    check("thermal state closed forms (two-level, beta=0)", gibbs_closed_form)

    def entropy_basics() -> bool:
        maximally_mixed = np.eye(4) / 4
        ok = abs(quantum.von_neumann_entropy(maximally_mixed) - np.log(4)) < 1e-12
        rho = sampling.random_density_matrix(4, sampling.RandomStream(seed, 7))
        sigma = sampling.random_density_matrix(4, sampling.RandomStream(seed, 8))
        ok = ok and quantum.relative_entropy(rho, sigma) > -1e-10
        return ok and abs(quantum.relative_entropy(rho, rho)) < 1e-10

    check("entropy and relative entropy basics", entropy_basics)

    def process_identities() -> bool:
        for i in range(20):
            beta = (0.4, 2.0)[i % 2]
            p = _random_process(2, 4, beta, sampling.RandomStream(seed, 100 + i))
            factor = landauer.average_exponentiated_heat(p)
            m_s, m_r = landauer.reduced_operators(p)
            via_s = p.d_s * np.einsum("ij,ji->", m_s, p.system_state).real
            via_r = p.d_r * np.einsum("ij,ji->", m_r, p.reservoir_state.matrix).real
            dist = landauer.heat_distribution(p)
            if max(abs(via_s - factor), abs(via_r - factor)) > 1e-9:
                return False
            if abs(dist.exponentiated_average(beta) - factor) > 1e-9:
                return False
            if abs(dist.mean() - landauer.average_heat(p)) > 1e-9:
                return False
            if abs(landauer.heat_decomposition_residual(p)) > 1e-8:
                return False
            if beta * landauer.average_heat(p) < landauer.jensen_bound(p) - 1e-10:
                return False
            mu = abs(factor - 1.0)
            mu_s = numerics.trace_norm(m_s - np.eye(p.d_s) / p.d_s)
            mu_tilde = numerics.trace_norm(
                p.reservoir_state.matrix - np.eye(p.d_r) / p.d_r
            )
            if mu > p.d_s * mu_s + 1e-9 or mu_s > mu_tilde + 1e-9:
                return False
        return True

    check("process identities on 20 random processes (2x4)", process_identities)

    def exact_unity() -> bool:
        p_mixed = _random_process(
            3, 3, 1.3, sampling.RandomStream(seed, 200), method="maximally-mixed"
        )
        p_hot = _random_process(3, 3, 0.0, sampling.RandomStream(seed, 201))
        return (
            abs(landauer.average_exponentiated_heat(p_mixed) - 1.0) < 1e-12
            and abs(landauer.average_exponentiated_heat(p_hot) - 1.0) < 1e-12
        )

    check("fluctuation factor is exactly 1 for mixed system or beta=0", exact_unity)

    def thermal_ops() -> bool:
        for i in range(5):
            stream = sampling.RandomStream(seed, 300 + i)
            gen = stream.generator()
            h_s = _random_hermitian(2, gen)
            h_r = _random_hermitian(3, gen)
            u = landauer.thermal_operation(h_s, h_r, gen)
            total = numerics.tensor_product(h_s, np.eye(3)) + numerics.tensor_product(
                np.eye(2), h_r
            )
            if numerics.frobenius(u @ total - total @ u) > 1e-8:
                return False
            state = sampling.random_density_matrix(2, gen)
            p = landauer.LandauerProcess(
                d_s=2, d_r=3, system_state=state, reservoir_hamiltonian=h_r,
                beta=float(gen.uniform(0.1, 3.0)), unitary=u,
            )
            if abs(landauer.average_exponentiated_heat(p) - 1.0) > 1e-9:
                return False
        return True

    check("energy-conserving unitaries give fluctuation factor 1", thermal_ops)

    def temperature_scales() -> bool:
        h = np.diag([0.0, 1.0, 4.0])
        vals = [
            experiments.scaled_temperature(h, 1.0, "low"),
            experiments.scaled_temperature(h, 1.0, "high"),
            experiments.scaled_temperature(h, 1.0, "mid"),
        ]
        if not np.allclose(vals, [1.0, 0.25, 0.25], atol=1e-12):
            return False
        h_rand = sampling.haar_hamiltonian(5, sampling.RandomStream(seed, 400))
        for regime in experiments.REGIMES:
            spec = experiments.TemperatureSpec(regime, 0.7)
            beta = experiments.beta_for_target(h_rand, spec)
            if abs(experiments.scaled_temperature(h_rand, beta, regime) - 0.7) > 1e-12:
                return False
        return True

    check("scaled temperature closed forms and inversion", temperature_scales)

    def fit_recovery() -> bool:
        t = np.linspace(0.2, 10.0, 20)
        y = experiments.saturating_exponential(t, 0.5, 2.0)
        fit = experiments.fit_saturating_exponential(list(zip(t, y)))
        return fit.converged and abs(fit.a - 0.5) < 1e-6 and abs(fit.b - 2.0) < 1e-6

    check("curve fit recovers noiseless parameters", fit_recovery)

    def hull_square() -> bool:
        gen = sampling.RandomStream(seed, 500).generator()
        corners = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
        interior = gen.uniform(0.25, 0.75, size=(100, 2))
        peel = experiments.convex_hull_peel(np.vstack([corners, interior]), 0.95)
        first = {tuple(v) for v in peel.layers[0]}
        return first == {tuple(c) for c in corners}

    check("hull peel strips the square corners first", hull_square)

    def tail_quick() -> bool:
        h_r = sampling.haar_hamiltonian(8, sampling.RandomStream(seed, 600))
        rho_r = quantum.gibbs_state(h_r, 1.0).matrix
        report = concentration.tail_experiment(
            2, 8, rho_r, 200, concentration.default_epsilon_grid(8), seed
        )
        slack = report.bounds + 3 * report.tail_stderrs
        mean_ok = (
            report.mean_distance
            <= report.mean_distance_bound + 3 * report.mean_distance_stderr
        )
        return bool(np.all(report.empirical_tails <= slack)) and mean_ok

    check("trace-distance tail below analytic bound (2x8, n=200)", tail_quick)

    def purity_quick() -> bool:
        joint = np.zeros((4, 4), dtype=complex)
        joint[0, 0] = 1.0
        report = concentration.purity_experiment(2, 2, joint, 1000, seed)
        return abs(report.mean_purity - report.expected_purity) <= 3 * report.purity_stderr

    check("mean orbit purity matches closed form (2x2, n=1000)", purity_quick)

    def sweep_deterministic() -> bool:
        config = experiments.SweepConfig(
            experiment="selftest", d_s=2, d_r=3, regime="mid",
            t_grid=(0.5, 2.0), n_per_point=5, master_seed=seed,
        )
        first = experiments.temperature_sweep(config)
        second = experiments.temperature_sweep(config)
        return first == second and sum(r.skipped for r in first) == 0

    check("temperature sweep reproducible trial-for-trial", sweep_deterministic)

    return checks
