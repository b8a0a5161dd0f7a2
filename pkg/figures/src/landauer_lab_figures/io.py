"""CSV loading with schema validation.

Only the documented columns are ever read; extra columns are ignored.
Schema violations always name the first offending column.
"""

from __future__ import annotations

import csv
from pathlib import Path


class SchemaError(ValueError):
    """A required column is missing from an input CSV."""


class EmptyDataError(ValueError):
    """The CSV is schema-valid but contains no data rows."""


TRIALS_COLUMNS = (
    "experiment", "trial", "d_s", "d_r", "regime", "T_tilde", "beta",
    "rho_s_method", "Q_avg", "delta_S", "Gamma", "gamma", "mu", "omega",
    "betaQ_minus_gamma", "gamma_minus_omega", "skipped",
)
FIT_COLUMNS = (
    "experiment", "d_s", "d_r", "regime", "a", "b",
    "cov_aa", "cov_ab", "cov_bb", "residual_norm", "converged",
)
HULL_COLUMNS = ("experiment", "layer", "vertex_index", "x", "y", "retained_fraction")


def load_rows(path: str | Path, required: tuple[str, ...]) -> list[dict[str, str]]:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise SchemaError(f"missing column '{column}' in {path}")
        rows = [{c: row[c] for c in required} for row in reader]
    if not rows:
        raise EmptyDataError(f"{path} has a valid header but no data rows")
    return rows


def load_trials(path: str | Path) -> list[dict[str, str]]:
    return load_rows(path, TRIALS_COLUMNS)


def load_fits(path: str | Path) -> list[dict[str, str]]:
    return load_rows(path, FIT_COLUMNS)


def load_hulls(path: str | Path) -> list[dict[str, str]]:
    return load_rows(path, HULL_COLUMNS)
