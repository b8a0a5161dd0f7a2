"""Command-line entry point, configuration, and persistence.

Subcommands
-----------
gamma    — statistics of a single random process, printed as key=value
levy     — tail of the reduced-state trace distance vs the analytic bound
purity   — Monte Carlo mean purity of reduced orbit states
sweep    — temperature sweep with a saturating-exponential fit
bounds   — single-temperature bound comparison with hull-peel polygons
selftest — run the cross-module invariant suite

Every run writes a JSON manifest (config echo, version, wall clock, skip
counts, sha256 of each output file) that suffices to reproduce it.  CSV
numbers use 17 significant digits so doubles round-trip exactly.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import multiprocessing
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__, concentration, experiments, landauer, numerics, quantum, sampling
from .errors import InvalidInputError, LandauerLabError

SEED_ENV_VAR = "LANDAUER_LAB_SEED"

TRIAL_COLUMNS = (
    ("experiment", "experiment"),
    ("trial", "trial"),
    ("d_s", "d_s"),
    ("d_r", "d_r"),
    ("regime", "regime"),
    ("T_tilde", "t_tilde"),
    ("beta", "beta"),
    ("rho_s_method", "rho_s_method"),
    ("Q_avg", "q_avg"),
    ("delta_S", "delta_s"),
    ("Gamma", "fluctuation_factor"),
    ("gamma", "jensen_bound"),
    ("mu", "deviation"),
    ("omega", "corrected_bound"),
    ("betaQ_minus_gamma", "jensen_gap"),
    ("gamma_minus_omega", "bound_gap"),
    ("skipped", "skipped"),
)
FIT_COLUMNS = (
    "experiment", "d_s", "d_r", "regime", "a", "b",
    "cov_aa", "cov_ab", "cov_bb", "residual_norm", "converged",
)
LEVY_COLUMNS = ("d_s", "d_r", "beta", "epsilon", "empirical_tail", "stderr", "bound", "n")
PURITY_COLUMNS = (
    "d_s", "d_r", "tau", "beta", "n", "mean_purity", "purity_stderr",
    "expected_purity", "mean_distance", "distance_stderr", "distance_bound",
)
HULL_COLUMNS = ("experiment", "layer", "vertex_index", "x", "y", "retained_fraction")


def format_value(value) -> str:
    """CSV cell formatting: booleans as 0/1, floats at 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def write_manifest(
    out_dir: Path,
    name: str,
    subcommand: str,
    config: dict,
    files: Sequence[Path],
    started: float,
    extra: dict | None = None,
) -> Path:
    manifest = {
        "artifact_version": __version__,
        "experiment": name,
        "subcommand": subcommand,
        "config": config,
        "wall_clock_seconds": time.time() - started,
        "files": {p.name: f"sha256:{_sha256(p)}" for p in files},
    }
    if extra:
        manifest.update(extra)
    path = out_dir / f"{name}_manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Option plumbing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Opt:
    name: str
    type: Callable
    default: object
    help: str
    choices: tuple | None = None


_COMMON = (
    Opt("out", str, ".", "output directory"),
    Opt("name", str, None, "experiment name (defaults to the subcommand)"),
    Opt("seed", int, None, f"master seed (falls back to ${SEED_ENV_VAR}, then 0)"),
    Opt("config", str, None, "flat key=value config file; flags override it"),
)

OPTIONS: dict[str, tuple[Opt, ...]] = {
    "gamma": _COMMON + (
        Opt("ds", int, 2, "system dimension"),
        Opt("dr", int, 2, "reservoir dimension"),
        Opt("beta", float, None, "inverse temperature (overrides regime/ttilde)"),
        Opt("regime", str, "high", "temperature regime", ("low", "mid", "high")),
        Opt("ttilde", float, 1.0, "target scaled temperature"),
        Opt("method", str, "induced-hs", "system-state sampling method",
            experiments.RHO_S_METHODS),
        Opt("rstrategy", str, "zero", "finite-reservoir correction strategy"),
    ),
    "levy": _COMMON + (
        Opt("ds", int, 2, "system dimension"),
        Opt("dr", int, 16, "reservoir dimension"),
        Opt("beta", float, 1.0, "reservoir inverse temperature"),
        Opt("n", int, 2000, "number of samples"),
        Opt("eps_min", float, 0.01, "smallest epsilon"),
        Opt("eps_max", float, 1.5, "largest epsilon"),
        Opt("eps_points", int, 16, "number of (log-spaced) epsilon grid points"),
    ),
    "purity": _COMMON + (
        Opt("ds", int, 2, "system dimension"),
        Opt("dr", int, 2, "reservoir dimension"),
        Opt("n", int, 5000, "number of samples"),
        Opt("tau", str, "pure", "orbit seed state", ("pure", "mixed")),
        Opt("beta", float, 1.0, "reservoir inverse temperature (mixed tau)"),
    ),
    "sweep": _COMMON + (
        Opt("ds", int, 2, "system dimension"),
        Opt("dr", int, 2, "reservoir dimension"),
        Opt("regime", str, "mid", "temperature regime", ("low", "mid", "high")),
        Opt("tmin", float, 0.1, "smallest scaled temperature"),
        Opt("tmax", float, 10.0, "largest scaled temperature"),
        Opt("points", int, 8, "number of (log-spaced) temperature points"),
        Opt("n", int, 100, "trials per temperature point"),
        Opt("method", str, "induced-hs", "system-state sampling method",
            experiments.RHO_S_METHODS),
        Opt("rstrategy", str, "zero", "finite-reservoir correction strategy"),
        Opt("workers", int, 1, "worker processes"),
    ),
    "bounds": _COMMON + (
        Opt("ds", int, 2, "system dimension"),
        Opt("dr", int, 2, "reservoir dimension"),
        Opt("regime", str, "mid", "temperature regime", ("low", "mid", "high")),
        Opt("ttilde", float, 1.0, "target scaled temperature"),
        Opt("n", int, 5000, "number of samples"),
        Opt("method", str, "induced-hs", "system-state sampling method",
            experiments.RHO_S_METHODS),
        Opt("rstrategy", str, "zero", "finite-reservoir correction strategy"),
        Opt("unitary", str, "haar", "interaction ensemble", ("haar", "thermal")),
        Opt("target", float, 0.95, "hull-peel retained fraction"),
        Opt("workers", int, 1, "worker processes"),
    ),
    "selftest": _COMMON,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="landauer-lab",
        description="Monte Carlo laboratory for heat statistics of random Landauer processes.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for sub, opts in OPTIONS.items():
        sp = subparsers.add_parser(sub)
        for opt in opts:
            sp.add_argument(
                f"--{opt.name.replace('_', '-')}",
                dest=opt.name,
                type=opt.type,
                default=None,
                choices=opt.choices,
                help=opt.help,
            )
    return parser


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


def _effective_options(args: argparse.Namespace, opts: tuple[Opt, ...]) -> dict:
    """Merge defaults, config file, environment, and flags (flags win)."""
    table = {opt.name: opt for opt in opts}
    effective = {name: opt.default for name, opt in table.items()}
    if args.config is not None:
        for key, raw in _load_config_file(args.config).items():
            if key not in table or key == "config":
                raise InvalidInputError(f"unknown config key {key!r}")
            opt = table[key]
            try:
                value = opt.type(raw)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise InvalidInputError(f"config key {key!r}: {exc}") from exc
            if opt.choices and value not in opt.choices:
                raise InvalidInputError(
                    f"config key {key!r}: {value!r} not in {opt.choices}"
                )
            effective[key] = value
    for name in table:
        flag_value = getattr(args, name)
        if flag_value is not None:
            effective[name] = flag_value
    if effective.get("seed") is None:
        env = os.environ.get(SEED_ENV_VAR)
        effective["seed"] = int(env) if env else 0
    if effective.get("name") is None:
        effective["name"] = args.subcommand
    effective.pop("config", None)
    return effective


# ---------------------------------------------------------------------------
# Parallel trial execution
# ---------------------------------------------------------------------------

def _trial_task(payload: tuple[experiments.SweepConfig, int]) -> experiments.TrialRecord:
    config, ordinal = payload
    return experiments.run_trial(config, ordinal)


def run_sweep_trials(
    config: experiments.SweepConfig, workers: int = 1
) -> list[experiments.TrialRecord]:
    """All trials of a sweep, optionally on a process pool.

    Trials are pure functions of (config, ordinal) and results are
    collected in ordinal order, so the output is identical for any worker
    count.
    """
    total = config.total_trials
    if workers <= 1:
        return [experiments.run_trial(config, k) for k in range(total)]
    chunk = max(1, total // (workers * 8))
    with multiprocessing.Pool(workers) as pool:
        return pool.map(_trial_task, [(config, k) for k in range(total)], chunksize=chunk)


def _trial_rows(records: Sequence[experiments.TrialRecord]) -> list[list]:
    return [[getattr(rec, attr) for _, attr in TRIAL_COLUMNS] for rec in records]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_gamma(options: dict, out_dir: Path, started: float) -> int:
    d_s, d_r = options["ds"], options["dr"]
    rng = sampling.RandomStream(options["seed"], 0).generator()
    unitary = sampling.haar_unitary(d_s * d_r, rng)
    _, h_r = landauer.extract_hamiltonians(unitary, d_s, d_r)
    if options["beta"] is not None:
        beta = options["beta"]
    else:
        beta = experiments.beta_for_target(
            h_r, experiments.TemperatureSpec(options["regime"], options["ttilde"])
        )
    system_state = sampling.random_density_matrix(d_s, rng, options["method"])
    process = landauer.LandauerProcess(
        d_s=d_s, d_r=d_r, system_state=system_state,
        reservoir_hamiltonian=h_r, beta=beta, unitary=unitary,
    )
    stats = landauer.process_stats(
        process, experiments.resolve_correction(options["rstrategy"])
    )
    record = {
        "d_s": d_s,
        "d_r": d_r,
        "beta": beta,
        "rho_s_method": options["method"],
        "Q_avg": stats.average_heat,
        "delta_S": stats.entropy_change,
        "Gamma": stats.exp_heat_avg,
        "gamma": stats.jensen_bound,
        "mu": stats.deviation,
        "omega": stats.corrected_bound,
        "betaQ_minus_gamma": beta * stats.average_heat - stats.jensen_bound,
        "gamma_minus_omega": stats.jensen_bound - stats.corrected_bound,
        "mutual_information": stats.mutual_information,
        "reservoir_relative_entropy": stats.reservoir_relative_entropy,
        "decomposition_residual": landauer.heat_decomposition_residual(process),
    }
    for key, value in record.items():
        print(f"{key}={format_value(value)}")
    write_manifest(out_dir, options["name"], "gamma", options, [], started)
    return 0


def _cmd_levy(options: dict, out_dir: Path, started: float) -> int:
    d_s, d_r, seed = options["ds"], options["dr"], options["seed"]
    setup = sampling.RandomStream(seed, sampling.SETUP_STREAM_BASE)
    h_r = sampling.haar_hamiltonian(d_r, setup)
    rho_r = quantum.gibbs_state(h_r, options["beta"]).matrix
    report = concentration.tail_experiment(
        d_s, d_r, rho_r, options["n"],
        concentration.default_epsilon_grid(
            options["eps_points"], options["eps_min"], options["eps_max"]
        ),
        seed,
        tau_description=f"(1/{d_s}) x gibbs(haar_hamiltonian({d_r}), beta={options['beta']})",
    )
    rows = [
        [d_s, d_r, options["beta"], eps, tail, err, bound, report.samples]
        for eps, tail, err, bound in zip(
            report.epsilons, report.empirical_tails, report.tail_stderrs, report.bounds
        )
    ]
    csv_path = out_dir / f"{options['name']}_levy.csv"
    write_csv(csv_path, LEVY_COLUMNS, rows)
    write_manifest(
        out_dir, options["name"], "levy", options, [csv_path], started,
        extra={
            "tau": report.tau_description,
            "mean_distance": report.mean_distance,
            "mean_distance_stderr": report.mean_distance_stderr,
            "mean_distance_bound": report.mean_distance_bound,
        },
    )
    return 0


def _cmd_purity(options: dict, out_dir: Path, started: float) -> int:
    d_s, d_r, seed = options["ds"], options["dr"], options["seed"]
    if options["tau"] == "pure":
        joint = np.zeros((d_s * d_r, d_s * d_r), dtype=complex)
        joint[0, 0] = 1.0
        beta = float("nan")
        description = "pure |0><0|"
    else:
        setup = sampling.RandomStream(seed, sampling.SETUP_STREAM_BASE)
        h_r = sampling.haar_hamiltonian(d_r, setup)
        beta = options["beta"]
        joint = numerics.tensor_product(
            np.eye(d_s) / d_s, quantum.gibbs_state(h_r, beta).matrix
        )
        description = f"(1/{d_s}) x gibbs(haar_hamiltonian({d_r}), beta={beta})"
    report = concentration.purity_experiment(
        d_s, d_r, joint, options["n"], seed, tau_description=description
    )
    csv_path = out_dir / f"{options['name']}_purity.csv"
    write_csv(
        csv_path,
        PURITY_COLUMNS,
        [[
            d_s, d_r, options["tau"], beta, report.samples, report.mean_purity,
            report.purity_stderr, report.expected_purity, report.mean_distance,
            report.distance_stderr, report.distance_bound,
        ]],
    )
    write_manifest(
        out_dir, options["name"], "purity", options, [csv_path], started,
        extra={"tau": description},
    )
    return 0


def _sweep_config(options: dict, t_grid: tuple[float, ...], unitary_kind: str = "haar"):
    return experiments.SweepConfig(
        experiment=options["name"],
        d_s=options["ds"],
        d_r=options["dr"],
        regime=options["regime"],
        t_grid=t_grid,
        n_per_point=options["n"],
        rho_s_method=options["method"],
        correction=options["rstrategy"],
        unitary_kind=unitary_kind,
        master_seed=options["seed"],
    )


def _cmd_sweep(options: dict, out_dir: Path, started: float) -> int:
    t_grid = tuple(np.geomspace(options["tmin"], options["tmax"], options["points"]))
    config = _sweep_config(options, t_grid)
    records = run_sweep_trials(config, options["workers"])
    trials_path = out_dir / f"{options['name']}_trials.csv"
    write_csv(trials_path, [c for c, _ in TRIAL_COLUMNS], _trial_rows(records))

    fit = experiments.fit_from_records(records)
    fit_path = out_dir / f"{options['name']}_fit.csv"
    write_csv(
        fit_path,
        FIT_COLUMNS,
        [[
            options["name"], config.d_s, config.d_r, config.regime, fit.a, fit.b,
            fit.covariance[0, 0], fit.covariance[0, 1], fit.covariance[1, 1],
            fit.residual_norm, fit.converged,
        ]],
    )
    skipped = sum(rec.skipped for rec in records)
    write_manifest(
        out_dir, options["name"], "sweep", options, [trials_path, fit_path], started,
        extra={"skipped_trials": skipped, "fit_degenerate": fit.degenerate},
    )
    return 0


def _cmd_bounds(options: dict, out_dir: Path, started: float) -> int:
    config = _sweep_config(options, (options["ttilde"],), unitary_kind=options["unitary"])
    records = run_sweep_trials(config, options["workers"])
    trials_path = out_dir / f"{options['name']}_trials.csv"
    write_csv(trials_path, [c for c, _ in TRIAL_COLUMNS], _trial_rows(records))

    live = [rec for rec in records if not rec.skipped]
    points = np.array([[rec.bound_gap, rec.jensen_gap] for rec in live])
    peeling = experiments.convex_hull_peel(points, options["target"])
    polygons = peeling.layers + [peeling.confidence_polygon]
    fractions = peeling.retained_fractions + [peeling.final_retained_fraction]
    hull_rows = [
        [options["name"], layer_idx, vertex_idx, vertex[0], vertex[1], fraction]
        for layer_idx, (polygon, fraction) in enumerate(zip(polygons, fractions))
        for vertex_idx, vertex in enumerate(polygon)
    ]
    hull_path = out_dir / f"{options['name']}_hull.csv"
    write_csv(hull_path, HULL_COLUMNS, hull_rows)
    median = experiments.bivariate_median(points) if live else (float("nan"),) * 2
    write_manifest(
        out_dir, options["name"], "bounds", options, [trials_path, hull_path], started,
        extra={
            "skipped_trials": len(records) - len(live),
            "bivariate_median": list(median),
            "hull_degenerate": peeling.degenerate,
        },
    )
    return 0


def _cmd_selftest(options: dict, out_dir: Path, started: float) -> int:
    from . import selftest

    results = selftest.run_all(options["seed"])
    failures = 0
    for name, ok, detail in results:
        status = "ok" if ok else "FAIL"
        print(f"{status:4s} {name}" + (f"  ({detail})" if detail else ""))
        if not ok:
            failures += 1
    print(f"{len(results) - failures}/{len(results)} checks passed")
    write_manifest(
        out_dir, options["name"], "selftest", options, [], started,
        extra={"failures": failures, "checks": len(results)},
    )
    return 1 if failures else 0


_COMMANDS = {
    "gamma": _cmd_gamma,
    "levy": _cmd_levy,
    "purity": _cmd_purity,
    "sweep": _cmd_sweep,
    "bounds": _cmd_bounds,
    "selftest": _cmd_selftest,
}


def run(argv: Sequence[str]) -> int:
    """Parse and execute; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    started = time.time()
    try:
        options = _effective_options(args, OPTIONS[args.subcommand])
        out_dir = Path(options["out"])
        out_dir.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.subcommand](options, out_dir, started)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (LandauerLabError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run(sys.argv[1:]))
