"""
Report Export Service
Writes sweep outputs: per-trial CSV, JSON summary, SVG success-rate plot and an optional Excel workbook
"""

import json
import platform
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import scipy
from loguru import logger
from openpyxl import Workbook
from openpyxl.chart import LineChart, Reference
from openpyxl.styles import Alignment, Font, PatternFill

from src.core.errors import OutputWriteError
from src.schemas.experiments import CSV_COLUMNS, ExperimentSpec, RateRow, SweepSummary, TrialFailure, TrialRecord

SEED_DERIVATION = "SeedSequence(entropy=base_seed, spawn_key=(experiment_code, K, trial)).generate_state(3, uint64)"


def environment_info() -> Dict[str, str]:
    return {
        "python": platform.python_version(),
        "platform": platform.platform(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pandas": pd.__version__,
    }


def build_summary(spec: ExperimentSpec, table: Dict[int, float], records: List[TrialRecord]) -> SweepSummary:
    """Assemble the JSON summary from a sweep's table and records"""
    counts: Dict[int, List[int]] = {k: [0, 0] for k in table}
    for record in records:
        counts.setdefault(record.k, [0, 0])
        counts[record.k][0] += 1
        counts[record.k][1] += int(record.success)

    rows = [
        RateRow(K=k, trials=counts[k][0], successes=counts[k][1], rate=table[k])
        for k in sorted(table)
    ]
    failures = [
        TrialFailure(K=r.k, trial=r.trial, cause=r.cause)
        for r in records if r.cause
    ]
    return SweepSummary(
        spec=spec,
        table=rows,
        environment=environment_info(),
        seeds={"base_seed": spec.base_seed, "experiment_code": spec.experiment.code, "derivation": SEED_DERIVATION},
        failures=failures,
    )


def load_summary(path: Path) -> SweepSummary:
    """Read and validate a JSON summary"""
    with open(path, "r", encoding="utf-8") as f:
        return SweepSummary.model_validate(json.load(f))


class ReportExporter:
    """Service for exporting sweep results in various formats"""

    def __init__(self):
        self.colors = {
            "header": "4472C4",
            "success": "90EE90",
            "failure": "C5504B",
        }

    def export_all(
        self,
        spec: ExperimentSpec,
        table: Dict[int, float],
        records: List[TrialRecord],
        out_dir: Path,
        stem: Optional[str] = None,
        excel: bool = False
    ) -> Dict[str, Path]:
        """
        Write CSV, JSON and SVG (and optionally XLSX) for one sweep

        Args:
            spec: Sweep specification
            table: Success rate per K
            records: Per-trial records
            out_dir: Output directory (created if missing)
            stem: File name stem, derived from the spec by default
            excel: Also write an Excel workbook

        Returns:
            Mapping of format to written path
        """
        out_dir = Path(out_dir)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputWriteError(out_dir, e) from e

        stem = stem or f"{spec.experiment.value}_q{spec.q}_N{spec.n}"
        summary = build_summary(spec, table, records)

        paths = {
            "csv": self.export_to_csv(records, out_dir / f"{stem}.csv"),
            "json": self.export_to_json(summary, out_dir / f"{stem}.json"),
            "svg": self.export_to_svg(table, spec.n, out_dir / f"{stem}.svg", title=self._title(spec)),
        }
        if excel:
            paths["xlsx"] = self.export_to_excel(summary, records, out_dir / f"{stem}.xlsx")
        return paths

    def _title(self, spec: ExperimentSpec) -> str:
        order = {3: "bispectrum", 4: "trispectrum"}[spec.q]
        return f"{spec.experiment.value}, {order}, N={spec.n}"

    def export_to_csv(self, records: Sequence[TrialRecord], output_file: Path) -> Path:
        """Per-trial records with the fixed column set; header only when empty"""
        try:
            logger.info(f"Exporting trial records to CSV: {output_file}")
            frame = pd.DataFrame([r.to_row() for r in records], columns=CSV_COLUMNS)
            frame.to_csv(output_file, index=False)
            return Path(output_file)
        except OSError as e:
            logger.error(f"Error exporting to CSV: {e}")
            raise OutputWriteError(output_file, e) from e

    def export_to_json(self, summary: SweepSummary, output_file: Path) -> Path:
        try:
            logger.info(f"Exporting sweep summary to JSON: {output_file}")
            with open(output_file, "w", encoding="utf-8") as f:
                f.write(summary.model_dump_json(indent=2))
            return Path(output_file)
        except OSError as e:
            logger.error(f"Error exporting to JSON: {e}")
            raise OutputWriteError(output_file, e) from e

    def export_to_svg(self, table: Dict[int, float], n: int, output_file: Path, title: str = "") -> Path:
        """Success rate against K with a red vertical line at K = N"""
        ks = sorted(table)
        fig, ax = plt.subplots(figsize=(6, 4))
        try:
            ax.plot(ks, [table[k] for k in ks], marker="o", color="tab:blue", label="success rate")
            ax.axvline(n, color="red", linestyle="-", linewidth=1.0, label=f"N = {n}")
            self._style_axes(ax, title)
            fig.savefig(output_file, format="svg", bbox_inches="tight")
            logger.info(f"SVG plot written to {output_file}")
            return Path(output_file)
        except OSError as e:
            logger.error(f"Error exporting to SVG: {e}")
            raise OutputWriteError(output_file, e) from e
        finally:
            plt.close(fig)

    def export_comparison_svg(self, summaries: Sequence[SweepSummary], output_file: Path, title: str = "") -> Path:
        """Overlay several sweeps, one curve per summary and one marker per distinct N"""
        fig, ax = plt.subplots(figsize=(6, 4))
        try:
            for summary in summaries:
                rates = summary.rates()
                ks = sorted(rates)
                label = f"{summary.spec.experiment.value} (q={summary.spec.q})"
                ax.plot(ks, [rates[k] for k in ks], marker="o", label=label)
            for n in sorted({s.spec.n for s in summaries}):
                ax.axvline(n, color="red", linewidth=1.0)
            self._style_axes(ax, title)
            fig.savefig(output_file, format="svg", bbox_inches="tight")
            logger.info(f"Comparison plot written to {output_file}")
            return Path(output_file)
        except OSError as e:
            logger.error(f"Error exporting comparison SVG: {e}")
            raise OutputWriteError(output_file, e) from e
        finally:
            plt.close(fig)

    def _style_axes(self, ax, title: str):
        ax.set_xlabel("K")
        ax.set_ylabel("success rate")
        ax.set_ylim(-0.02, 1.02)
        ax.grid(True, alpha=0.3)
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right")

    def export_to_excel(self, summary: SweepSummary, records: Sequence[TrialRecord], output_file: Path) -> Path:
        """Workbook with a rates sheet (plus line chart) and a trials sheet"""
        try:
            logger.info(f"Exporting sweep to Excel: {output_file}")
            wb = Workbook()
            wb.remove(wb.active)

            ws_rates = wb.create_sheet("Success Rates")
            self._create_header_row(ws_rates, ["K", "Trials", "Successes", "Rate"], 1)
            for row, rate_row in enumerate(summary.table, 2):
                ws_rates.cell(row=row, column=1, value=rate_row.K)
                ws_rates.cell(row=row, column=2, value=rate_row.trials)
                ws_rates.cell(row=row, column=3, value=rate_row.successes)
                ws_rates.cell(row=row, column=4, value=rate_row.rate)

            if summary.table:
                chart = LineChart()
                chart.title = "Success rate"
                chart.x_axis.title = "K"
                chart.y_axis.title = "rate"
                last = len(summary.table) + 1
                chart.add_data(Reference(ws_rates, min_col=4, min_row=1, max_row=last), titles_from_data=True)
                chart.set_categories(Reference(ws_rates, min_col=1, min_row=2, max_row=last))
                ws_rates.add_chart(chart, "F2")

            ws_trials = wb.create_sheet("Trials")
            self._create_header_row(ws_trials, CSV_COLUMNS + ["cause"], 1)
            for row, record in enumerate(records, 2):
                values = list(record.to_row().values()) + [record.cause or ""]
                for col, value in enumerate(values, 1):
                    if isinstance(value, float) and not np.isfinite(value):
                        value = None
                    ws_trials.cell(row=row, column=col, value=value)
                fill = self.colors["success"] if record.success else self.colors["failure"]
                ws_trials.cell(row=row, column=CSV_COLUMNS.index("success") + 1).fill = PatternFill("solid", fgColor=fill)

            wb.save(output_file)
            return Path(output_file)
        except OSError as e:
            logger.error(f"Error exporting to Excel: {e}")
            raise OutputWriteError(output_file, e) from e

    def _create_header_row(self, ws, headers: List[str], row: int):
        """Create formatted header row"""
        for col, header in enumerate(headers, 1):
            cell = ws.cell(row=row, column=col, value=header)
            cell.font = Font(bold=True, color="FFFFFF")
            cell.fill = PatternFill("solid", fgColor=self.colors["header"])
            cell.alignment = Alignment(horizontal="center")
