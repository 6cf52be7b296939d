"""Render per-k metric curves and per-cluster tables to files.

The CSV outputs are always written; figure rendering degrades to CSV-only
with a warning when the plotting backend is unavailable.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path

log = logging.getLogger(__name__)

PER_K_COLUMNS = (
    "model",
    "set",
    "k",
    "n_points",
    "inertia",
    "purity_variant",
    "purity_dtag",
    "overall_accuracy",
    "overall_accuracy_partial",
    "so_accuracy",
    "correct_mean_ld",
    "error_mean_ld",
)

_CURVES = (
    ("overall_accuracy", "Overall accuracy"),
    ("so_accuracy", "SO accuracy"),
    ("purity_variant", "Variant-kind purity"),
    ("purity_dtag", "Dtag purity"),
    ("inertia", "Inertia"),
)


def write_per_k_csv(path: str | Path, per_k_rows: list[dict]) -> None:
    """One row per (model, set, k); empty cells where a measure is undefined."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=PER_K_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        for row in per_k_rows:
            writer.writerow({col: _cell(row.get(col)) for col in PER_K_COLUMNS})


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def emit_figures(per_k_rows: list[dict], out_dir: str | Path) -> list[Path]:
    """Render one curve figure per measure with a line per (model, set).

    Returns the paths written.  The per-k CSV is the canonical output; any
    plotting failure is logged and skipped.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "per_k.csv"
    write_per_k_csv(csv_path, per_k_rows)
    written = [csv_path]

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except Exception as exc:  # pragma: no cover - depends on environment
        log.warning("plotting backend unavailable (%s); CSV only", exc)
        return written

    series: dict[tuple[str, str], list[dict]] = {}
    for row in per_k_rows:
        series.setdefault((row["model"], row["set"]), []).append(row)
    for rows in series.values():
        rows.sort(key=lambda r: r["k"])

    for measure, title in _CURVES:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        plotted = False
        for (model, set_name), rows in sorted(series.items()):
            ks = [r["k"] for r in rows if r.get(measure) is not None]
            values = [r[measure] for r in rows if r.get(measure) is not None]
            if not ks:
                continue
            ax.plot(ks, values, marker="o", markersize=3, label=f"{model} / {set_name}")
            plotted = True
        if not plotted:
            plt.close(fig)
            continue
        ax.set_xlabel("k")
        ax.set_ylabel(title)
        ax.set_title(f"{title} by k")
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7)
        fig.tight_layout()
        path = out_dir / f"{measure}_by_k.png"
        try:
            fig.savefig(path, dpi=150)
            written.append(path)
        except Exception as exc:  # pragma: no cover
            log.warning("could not render %s (%s)", path, exc)
        finally:
            plt.close(fig)
    return written


def write_cluster_table(path: str | Path, cluster_rows: list[dict]) -> None:
    """Per-cluster table: size, top dtag proportions, phonetic and semantic scores."""
    columns = (
        "cluster",
        "size",
        "top_dtags",
        "mphone_similarity",
        "semantic_coherency",
        "coherency_coverage",
        "top_edits",
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in cluster_rows:
            writer.writerow(
                {
                    "cluster": row["cluster"],
                    "size": row["size"],
                    "top_dtags": ";".join(
                        f"{tag}:{frac:.2f}" for tag, frac in row.get("top_dtags", [])
                    ),
                    "mphone_similarity": _round_cell(row.get("mphone_similarity")),
                    "semantic_coherency": _round_cell(row.get("semantic_coherency")),
                    "coherency_coverage": _round_cell(row.get("coherency_coverage")),
                    "top_edits": ";".join(
                        f"{edit}:{count}" for edit, count in row.get("top_edits", [])
                    ),
                }
            )


def write_edit_table(path: str | Path, edit_rows: list[dict]) -> None:
    """Ranked edits per cluster with one example standard/observed pair each."""
    columns = ("cluster", "edit", "count", "example_standard", "example_observed")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        for row in edit_rows:
            writer.writerow({col: row.get(col, "") for col in columns})


def _round_cell(value, digits: int = 2):
    # Reports round to 2 decimals; metrics.json keeps full precision.
    if value is None:
        return ""
    return f"{value:.{digits}f}"
