"""
Export Service
Result files of a run: byte-stable CSV tables, a styled Excel workbook, a
one-page PDF report and static plots
"""

import csv
import logging
from datetime import datetime, timezone
from io import BytesIO
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from fpdf import FPDF
from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter

from config import settings
from constants import COMPARE_CSV_HEADER, FLOAT_FORMAT, METHOD_LABELS, SWEEP_CSV_HEADER
from models import BenchmarkRow, EvalReport, EvalRow, MergeStep, RunManifest, SeparationStats, SweepPoint

logger = logging.getLogger(__name__)


def _sanitize_text_for_pdf(text: str) -> str:
    """
    Replace characters the core Helvetica font cannot render with ASCII
    equivalents.

    Args:
        text: Input text that may contain special characters

    Returns:
        Sanitized text safe for PDF rendering
    """
    if not text:
        return text

    replacements = {
        "–": "-",  # en-dash
        "—": "-",  # em-dash
        "−": "-",  # minus sign
        "…": "...",
        "→": "->",
        "≥": ">=",
        "≤": "<=",
        "±": "+/-",
        "×": "x",
        "·": "*",
        "∞": "inf",
        " ": " ",
    }

    result = text
    for char, replacement in replacements.items():
        result = result.replace(char, replacement)
    return result


def _fmt(value: Optional[float]) -> str:
    return "" if value is None else FLOAT_FORMAT.format(value)


# ════════════════════════════════════════════════════════════════
# CSV
# ════════════════════════════════════════════════════════════════


def write_compare_csv(report: EvalReport, path: Path) -> None:
    """Per-scenario rows sorted by scenario and method, then one overall row per method"""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(COMPARE_CSV_HEADER)
        for row in report.sorted_rows() + report.aggregate():
            writer.writerow([row.scenario, row.method, _fmt(row.f1), _fmt(row.modularity), row.decision_path])


def write_sweep_csv(points: Sequence[SweepPoint], path: Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SWEEP_CSV_HEADER)
        for p in points:
            snr = "none" if p.snr_db is None else FLOAT_FORMAT.format(p.snr_db)
            writer.writerow([snr, p.method, _fmt(p.f1), _fmt(p.same_group_mean), _fmt(p.cross_group_mean)])


def write_separation_csv(stats: Sequence[SeparationStats], path: Path) -> None:
    """Quartiles and gap per method and population"""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["method", "population", "n", "q1", "median", "q3", "gap"])
        for s in stats:
            for population, values, quartiles in (
                ("same", s.same, s.same_quartiles()),
                ("cross", s.cross, s.cross_quartiles()),
            ):
                q1, q2, q3 = quartiles if quartiles else (None, None, None)
                writer.writerow([s.method, population, len(values), _fmt(q1), _fmt(q2), _fmt(q3), _fmt(s.gap())])


def write_benchmark_csv(rows: Sequence[BenchmarkRow], path: Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["method", "repeats", "wall_s", "peak_kib"])
        for row in rows:
            writer.writerow([row.method, row.repeats, _fmt(row.wall_s), f"{row.peak_kib:.0f}"])


def write_merge_trace_csv(trace: Sequence[MergeStep], path: Path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["n_communities", "modularity", "delta_sigma", "merged_a", "merged_b"])
        for step in trace:
            writer.writerow([
                step.n_communities,
                _fmt(step.modularity),
                FLOAT_FORMAT.format(step.delta_sigma),
                " ".join(step.merged[0]),
                " ".join(step.merged[1]),
            ])


# ════════════════════════════════════════════════════════════════
# STATISTICS
# ════════════════════════════════════════════════════════════════


def get_report_statistics(report: EvalReport) -> Dict[str, Any]:
    """
    Summary numbers of a comparison.

    Returns:
        Dictionary with scenario and method counts and mean F1 per method label
    """
    if not report.rows:
        return {"scenarios": 0, "methods": 0, "mean_f1": {}}
    return {
        "scenarios": len({r.scenario for r in report.rows}),
        "methods": len({r.method for r in report.rows}),
        "mean_f1": {METHOD_LABELS.get(r.method, r.method): round(r.f1, 4) for r in report.aggregate()},
    }


# ════════════════════════════════════════════════════════════════
# EXCEL
# ════════════════════════════════════════════════════════════════


def create_excel_export(
    report: EvalReport,
    sweep: Optional[Sequence[SweepPoint]] = None,
    bench: Optional[Sequence[BenchmarkRow]] = None,
) -> bytes:
    """
    Workbook with the comparison rows, a scenario x method F1 table and,
    when given, the noise sweep and the cost benchmark.

    Returns:
        Excel file as bytes
    """
    wb = Workbook()

    header_fill = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
    header_font = Font(bold=True, color="FFFFFF", size=12)
    border = Border(
        left=Side(style="thin"),
        right=Side(style="thin"),
        top=Side(style="thin"),
        bottom=Side(style="thin"),
    )

    def write_sheet(ws, headers: List[str], rows: List[List[Any]], width: int = 15) -> None:
        for col_num, header in enumerate(headers, 1):
            cell = ws.cell(row=1, column=col_num, value=header)
            cell.fill = header_fill
            cell.font = header_font
            cell.alignment = Alignment(horizontal="center", vertical="center")
            cell.border = border
        for row_num, values in enumerate(rows, 2):
            for col_num, value in enumerate(values, 1):
                cell = ws.cell(row=row_num, column=col_num, value=value)
                cell.border = border
                if isinstance(value, float):
                    cell.number_format = "0.0000"
                    cell.alignment = Alignment(horizontal="right")
        for col in range(1, len(headers) + 1):
            ws.column_dimensions[get_column_letter(col)].width = width

    ws_compare = wb.active
    ws_compare.title = "Comparison"
    write_sheet(
        ws_compare,
        ["Scenario", "Method", "F1", "Modularity", "Decision path"],
        [
            [r.scenario, METHOD_LABELS.get(r.method, r.method), r.f1, r.modularity, r.decision_path]
            for r in report.sorted_rows()
        ],
    )
    ws_compare.column_dimensions["E"].width = 22

    table = report.f1_table()
    labels = sorted({label for per_method in table.values() for label in per_method})
    write_sheet(
        wb.create_sheet("F1 table"),
        ["Scenario"] + labels,
        [[scenario] + [table[scenario].get(label) for label in labels] for scenario in sorted(table)],
    )

    ws_overall = wb.create_sheet("Overall")
    ws_overall.sheet_properties.tabColor = "FFD700"
    write_sheet(
        ws_overall,
        ["Method", "Mean F1", "Mean modularity"],
        [[METHOD_LABELS.get(r.method, r.method), r.f1, r.modularity] for r in report.aggregate()],
    )

    if sweep:
        write_sheet(
            wb.create_sheet("Noise sweep"),
            ["SNR (dB)", "Method", "F1", "Same-group mean", "Cross-group mean"],
            [
                ["none" if p.snr_db is None else p.snr_db, METHOD_LABELS.get(p.method, p.method), p.f1,
                 p.same_group_mean, p.cross_group_mean]
                for p in sweep
            ],
            width=18,
        )
    if bench:
        write_sheet(
            wb.create_sheet("Benchmark"),
            ["Method", "Repeats", "Wall time (s)", "Peak memory (KiB)"],
            [[METHOD_LABELS.get(b.method, b.method), b.repeats, b.wall_s, round(b.peak_kib, 1)] for b in bench],
            width=18,
        )

    output = BytesIO()
    wb.save(output)
    output.seek(0)
    return output.getvalue()


# ════════════════════════════════════════════════════════════════
# PDF
# ════════════════════════════════════════════════════════════════


def create_pdf_export(report: EvalReport, manifest: Optional[RunManifest] = None) -> bytes:
    """
    One-page run report: run parameters, the comparison table and the
    per-method means.

    Returns:
        PDF file as bytes
    """
    pdf = FPDF()
    pdf.add_page()
    pdf.set_auto_page_break(auto=True, margin=15)

    pdf.set_font("Helvetica", "B", 18)
    pdf.cell(0, 10, "MeetSense run report", ln=True, align="C")
    pdf.ln(4)

    if manifest is not None:
        pdf.set_font("Helvetica", "B", 11)
        pdf.cell(0, 6, "Run:", ln=True)
        pdf.set_font("Helvetica", "", 10)
        pdf.cell(0, 5, _sanitize_text_for_pdf(f"  - Command: {manifest.command}"), ln=True)
        pdf.cell(0, 5, _sanitize_text_for_pdf(f"  - Seed: {manifest.seed}"), ln=True)
        pdf.cell(0, 5, _sanitize_text_for_pdf(f"  - Version: {manifest.tool_version}"), ln=True)
        pdf.cell(0, 5, _sanitize_text_for_pdf(f"  - Inputs: {len(manifest.input_hashes)} files"), ln=True)
        pdf.ln(3)

    widths = [30, 35, 25, 30, 60]
    pdf.set_font("Helvetica", "B", 10)
    for width, header in zip(widths, ["Scenario", "Method", "F1", "Modularity", "Decision path"]):
        pdf.cell(width, 7, header, border=1, align="C")
    pdf.ln()
    pdf.set_font("Helvetica", "", 9)
    for row in report.sorted_rows():
        values = [
            row.scenario,
            METHOD_LABELS.get(row.method, row.method),
            FLOAT_FORMAT.format(row.f1),
            FLOAT_FORMAT.format(row.modularity),
            row.decision_path,
        ]
        for width, value in zip(widths, values):
            pdf.cell(width, 6, _sanitize_text_for_pdf(value), border=1)
        pdf.ln()
    pdf.ln(4)

    stats = get_report_statistics(report)
    pdf.set_font("Helvetica", "B", 11)
    pdf.cell(0, 6, "Mean F1:", ln=True)
    pdf.set_font("Helvetica", "", 10)
    for label, value in stats["mean_f1"].items():
        pdf.cell(0, 5, _sanitize_text_for_pdf(f"  - {label}: {value:.4f}"), ln=True)

    pdf.set_y(-30)
    pdf.set_font("Helvetica", "I", 9)
    created = manifest.created_at if manifest is not None else datetime.now(timezone.utc)
    pdf.cell(0, 5, f"Created {created.strftime('%Y-%m-%d %H:%M UTC')}", ln=True, align="C")
    pdf.cell(0, 5, f"{settings.APP_NAME} {settings.VERSION}", ln=True, align="C")

    return bytes(pdf.output())


# ════════════════════════════════════════════════════════════════
# PLOTS
# ════════════════════════════════════════════════════════════════


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> None:
    fig.savefig(path, dpi=settings.PLOT_DPI)
    _pyplot().close(fig)
    logger.info(f"Wrote plot {path}")


def plot_noise_sweep(points: Sequence[SweepPoint], path: Path) -> None:
    """F1 and same-group mean similarity against SNR, one line per method"""
    plt = _pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(10, 3.8), constrained_layout=True)
    by_method: Dict[str, List[SweepPoint]] = {}
    for p in points:
        if p.snr_db is not None:
            by_method.setdefault(p.method, []).append(p)
    for method, series in sorted(by_method.items()):
        series = sorted(series, key=lambda p: p.snr_db)
        label = METHOD_LABELS.get(method, method)
        axes[0].plot([p.snr_db for p in series], [p.f1 for p in series], marker="o", label=label)
        axes[1].plot(
            [p.snr_db for p in series],
            [p.same_group_mean if p.same_group_mean is not None else float("nan") for p in series],
            marker="o",
            label=label,
        )
    axes[0].set_ylabel("F1")
    axes[0].set_ylim(0.0, 1.05)
    axes[1].set_ylabel("Same-group mean similarity")
    for ax in axes:
        ax.set_xlabel("SNR (dB)")
        ax.grid(True, alpha=0.3)
    axes[-1].legend(loc="best", fontsize=8)
    _save(fig, path)


def plot_separation(stats: Sequence[SeparationStats], path: Path) -> None:
    """ECDFs of same- and cross-group similarity (left) and box plots (right)"""
    plt = _pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(11, 4), constrained_layout=True)
    boxes: List[List[float]] = []
    box_labels: List[str] = []
    for s in stats:
        label = METHOD_LABELS.get(s.method, s.method)
        for population, values, style in (("same", s.same, "-"), ("cross", s.cross, "--")):
            if not values:
                continue
            xs, ys = SeparationStats.ecdf(values)
            axes[0].step(xs, ys, where="post", linestyle=style, label=f"{label} {population}")
            boxes.append(values)
            box_labels.append(f"{label}\n{population}")
    axes[0].set_xlabel("Pair similarity")
    axes[0].set_ylabel("ECDF")
    axes[0].grid(True, alpha=0.3)
    axes[0].legend(loc="best", fontsize=7)
    if boxes:
        axes[1].boxplot(boxes)
        axes[1].set_xticks(range(1, len(boxes) + 1))
        axes[1].set_xticklabels(box_labels, fontsize=7)
    axes[1].set_ylabel("Pair similarity")
    axes[1].grid(True, alpha=0.3)
    _save(fig, path)


def plot_weight_sweep(curve: Sequence[Tuple[float, float]], path: Path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5), constrained_layout=True)
    ax.plot([w for w, _ in curve], [m for _, m in curve], marker="o")
    ax.set_xlabel("Audio weight w")
    ax.set_ylabel("Modularity")
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def plot_modularity_vs_f1(rows: Sequence[EvalRow], path: Path) -> None:
    """Scatter of accepting-stage modularity against F1, one colour per method"""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.5), constrained_layout=True)
    by_method: Dict[str, List[EvalRow]] = {}
    for row in rows:
        by_method.setdefault(row.method, []).append(row)
    for method, method_rows in sorted(by_method.items()):
        ax.scatter([r.modularity for r in method_rows], [r.f1 for r in method_rows],
                   label=METHOD_LABELS.get(method, method))
    ax.set_xlabel("Modularity")
    ax.set_ylabel("F1")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    _save(fig, path)
