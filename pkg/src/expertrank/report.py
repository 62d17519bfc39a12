"""Render an evaluation report as a delimited table, markdown, and figures.

Tables have one row per cutoff N and one MAP column per ranking kind. Figures
are written through the Agg backend with fixed metadata, so rerunning a
pipeline reproduces them byte for byte.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import ranking as rk
from .evaluation import EvalReport


def render_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["N"] + [rk.COLUMN_LABELS[k] for k in report.kinds])
    for n in report.ns:
        writer.writerow(
            [n] + [f"{report.map_score(kind, n):.4f}" for kind in report.kinds]
        )
    return buf.getvalue()


def render_markdown(report: EvalReport) -> str:
    labels = [rk.COLUMN_LABELS[k] for k in report.kinds]
    lines = ["# Expert ranking report", "", "## MAP at N", ""]
    lines.append("| N | " + " | ".join(labels) + " |")
    lines.append("|--:|" + "|".join("--:" for _ in labels) + "|")
    for n in report.ns:
        cells = [f"{report.map_score(kind, n):.4f}" for kind in report.kinds]
        lines.append(f"| {n} | " + " | ".join(cells) + " |")
    lines += ["", "## Fused rankings", ""]
    for field in report.fields():
        chosen = report.chosen.get(field, ())
        joined = " + ".join(chosen) if chosen else "(none)"
        lines.append(f"- {field}: {joined}")
    lines.append("")
    return "\n".join(lines)


# ---------- figures ----------

_SAVE_OPTS = {"dpi": 100, "metadata": {"Software": None}}


def _map_figure(report: EvalReport, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for kind in report.kinds:
        ys = [report.map_score(kind, n) for n in report.ns]
        ax.plot(report.ns, ys, marker="o", markersize=3,
                label=rk.COLUMN_LABELS[kind])
    ax.set_xlabel("N")
    ax.set_ylabel("MAP@N")
    ax.set_xticks(list(report.ns))
    ax.grid(True, alpha=0.3)
    ax.legend(ncol=3, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def _field_figure(report: EvalReport, path: Path, n: int = 10) -> None:
    fields = report.fields()
    width = 0.8 / len(report.kinds)
    fig, ax = plt.subplots(figsize=(max(6.0, 1.8 * len(fields)), 4.0))
    for j, kind in enumerate(report.kinds):
        xs = [i + j * width for i in range(len(fields))]
        ys = [report.per_field[f][kind][n] for f in fields]
        ax.bar(xs, ys, width=width, label=rk.COLUMN_LABELS[kind])
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(fields))])
    ax.set_xticklabels(fields)
    ax.set_ylabel(f"ap@{n}")
    ax.legend(ncol=3, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_OPTS)
    plt.close(fig)


def save_figures(report: EvalReport, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "map_at_n.png", out / "field_ap10.png"]
    _map_figure(report, paths[0])
    n = 10 if 10 in report.ns else report.ns[0]
    _field_figure(report, paths[1], n)
    return paths


def write_report(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """report.json + report.csv + report.md + figures under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "report.csv").write_text(render_csv(report), encoding="utf-8")
    (out / "report.md").write_text(render_markdown(report), encoding="utf-8")
    figures = save_figures(report, out)
    return [out / "report.json", out / "report.csv", out / "report.md", *figures]
