"""Figure construction from trials / fit / hull CSV files.

Each renderer writes an image and returns the exact data series it drew,
so tests (and downstream tooling) can verify the plotted values without
scraping the image.  Fitted curves are re-evaluated from the stored
(a, b, covariance) parameters; nothing is re-fit here.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from . import io

CURVE_POINTS = 200
SERIES_STYLES = ("C0", "C1", "C2", "C3", "C4", "C5")


def saturating_exponential(t: np.ndarray, a: float, b: float) -> np.ndarray:
    return a * (1.0 - np.exp(-b / t))


def curve_stderr(t: np.ndarray, a: float, b: float, cov: np.ndarray) -> np.ndarray:
    """Pointwise standard error of the fitted curve from the linearization."""
    decay = np.exp(-b / t)
    grad = np.stack([1.0 - decay, a * decay / t])
    return np.sqrt(np.einsum("ik,ij,jk->k", grad, cov, grad))


@dataclass(frozen=True)
class Fig1Series:
    d_s: int
    d_r: int
    t: np.ndarray
    central: np.ndarray
    band_low: np.ndarray | None
    band_high: np.ndarray | None
    from_fit: bool


@dataclass(frozen=True)
class Fig1Render:
    path: Path
    series: dict[tuple[int, int], Fig1Series]


def _trials_by_dims(rows: list[dict[str, str]]) -> dict[tuple[int, int], list[dict]]:
    grouped: dict[tuple[int, int], list[dict]] = {}
    for row in rows:
        if row["skipped"] not in ("0", "", "False", "false"):
            continue
        grouped.setdefault((int(row["d_s"]), int(row["d_r"])), []).append(row)
    return grouped


def render_fig1(
    trials_csv: str | Path,
    fit_csv: str | Path,
    out_path: str | Path,
    styles: dict[tuple[int, int], str] | None = None,
) -> Fig1Render:
    """Fitted deviation-vs-temperature curves with ~95% confidence bands.

    One series per (d_s, d_r), optionally styled via a color map keyed by
    those dimensions.  A series whose fit did not converge falls back to
    the per-temperature medians of the raw trials, with a warning.
    """
    trials = _trials_by_dims(io.load_trials(trials_csv))
    fits = {
        (int(row["d_s"]), int(row["d_r"])): row for row in io.load_fits(fit_csv)
    }
    out_path = Path(out_path)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    series: dict[tuple[int, int], Fig1Series] = {}
    for fallback, (dims, rows) in zip(
        itertools.cycle(SERIES_STYLES), sorted(trials.items())
    ):
        style = (styles or {}).get(dims, fallback)
        t_values = np.array(sorted({float(row["T_tilde"]) for row in rows}))
        fit = fits.get(dims)
        label = f"{dims[0]}x{dims[1]}"
        if fit is not None and fit["converged"] not in ("0", "false", "False"):
            a, b = float(fit["a"]), float(fit["b"])
            cov = np.array(
                [
                    [float(fit["cov_aa"]), float(fit["cov_ab"])],
                    [float(fit["cov_ab"]), float(fit["cov_bb"])],
                ]
            )
            t_dense = np.geomspace(t_values.min(), t_values.max(), CURVE_POINTS)
            central = saturating_exponential(t_dense, a, b)
            stderr = curve_stderr(t_dense, a, b, cov)
            low, high = central - 2 * stderr, central + 2 * stderr
            ax.plot(t_dense, central, color=style, label=label)
            ax.fill_between(t_dense, low, high, color=style, alpha=0.25, linewidth=0)
            series[dims] = Fig1Series(
                d_s=dims[0], d_r=dims[1], t=t_dense, central=central,
                band_low=low, band_high=high, from_fit=True,
            )
        else:
            warnings.warn(
                f"fit for series {label} not converged; drawing raw medians",
                stacklevel=2,
            )
            medians = np.array(
                [
                    np.median(
                        [float(r["mu"]) for r in rows if float(r["T_tilde"]) == t]
                    )
                    for t in t_values
                ]
            )
            ax.plot(t_values, medians, "o--", color=style, label=f"{label} (medians)")
            series[dims] = Fig1Series(
                d_s=dims[0], d_r=dims[1], t=t_values, central=medians,
                band_low=None, band_high=None, from_fit=False,
            )
    ax.set_xscale("log")
    ax.set_xlabel(r"$\tilde{T}$")
    ax.set_ylabel(r"$\mu$")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return Fig1Render(path=out_path, series=series)


@dataclass(frozen=True)
class BoundsRender:
    path: Path
    points: np.ndarray
    polygons: dict[int, np.ndarray]
    confidence_layer: int


def render_bounds(
    trials_csv: str | Path, hull_csv: str | Path, out_path: str | Path
) -> BoundsRender:
    """Bound-gap scatter with nested hull-peel polygons overlaid.

    x is the gap between the two heat bounds, y the slack of the tighter
    one; the innermost (highest-index) polygon is the confidence polytope
    and is drawn emphasized.
    """
    trials = io.load_trials(trials_csv)
    hull_rows = io.load_hulls(hull_csv)
    out_path = Path(out_path)

    points = np.array(
        [
            [float(row["gamma_minus_omega"]), float(row["betaQ_minus_gamma"])]
            for row in trials
            if row["skipped"] in ("0", "", "False", "false")
        ]
    )
    polygons: dict[int, np.ndarray] = {}
    for row in sorted(
        hull_rows, key=lambda r: (int(r["layer"]), int(r["vertex_index"]))
    ):
        layer = int(row["layer"])
        vertex = [float(row["x"]), float(row["y"])]
        polygons.setdefault(layer, [])
        polygons[layer].append(vertex)
    polygons = {layer: np.array(vertices) for layer, vertices in polygons.items()}
    confidence_layer = max(polygons) if polygons else -1

    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    if points.size:
        ax.scatter(points[:, 0], points[:, 1], s=6, alpha=0.4, color="C0", label="trials")
    for layer, polygon in sorted(polygons.items()):
        closed = np.vstack([polygon, polygon[:1]])
        emphasized = layer == confidence_layer
        ax.plot(
            closed[:, 0],
            closed[:, 1],
            color="C3" if emphasized else "C7",
            linewidth=2.0 if emphasized else 0.8,
            label=f"layer {layer}" + (" (confidence)" if emphasized else ""),
        )
    ax.set_xlabel(r"$\gamma - \omega$")
    ax.set_ylabel(r"$\beta \langle Q \rangle - \gamma$")
    ax.legend(frameon=False, fontsize=7)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return BoundsRender(
        path=out_path,
        points=points,
        polygons=polygons,
        confidence_layer=confidence_layer,
    )
