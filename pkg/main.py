#!/usr/bin/env python3
"""
hos-recover - CLI Entry Point
Recovers signals from linear measurements of their high-order spectra and runs the success-rate experiments.
"""

import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import typer
from loguru import logger

from src.core.config import load_config_file, parse_k_values, settings
from src.schemas.experiments import ExperimentKind, ExperimentSpec, SolverConfig
from src.services.report_export import ReportExporter, load_summary
from src.services.sensing import OperatorKind
from workflows.diagnostics import run_analytic_demo, run_rank_probe
from workflows.sweep import run_sweep

app = typer.Typer(name="hos-recover", help="High-order spectra recovery - experiments and diagnostics")


def configure_logging():
    handlers = [{"sink": sys.stderr, "level": settings.log_level}]
    if settings.log_file:
        Path(settings.log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append({"sink": settings.log_file, "level": settings.log_level, "rotation": "10 MB"})
    logger.configure(handlers=handlers)


def _pick(flag: Any, config: Dict[str, Any], key: str, default: Any) -> Any:
    """CLI flag, then config file, then default"""
    if flag is not None:
        return flag
    return config.get(key, default)


@app.command()
def sweep(
    experiment: Optional[ExperimentKind] = typer.Option(None, "--experiment", "-e", help="random | spectra-rows | samples"),
    q: Optional[int] = typer.Option(None, "--q", help="Spectrum order (3 or 4)"),
    n: Optional[int] = typer.Option(None, "--N", help="Signal length (default 30 for q=3, 10 for q=4)"),
    k: Optional[str] = typer.Option(None, "--K", help="K values: list '6,8,10' or inclusive range '20:90:5'"),
    trials: Optional[int] = typer.Option(None, "--trials", help="Trials per K"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Base seed (u64)"),
    starts: Optional[int] = typer.Option(None, "--starts", help="Random starts per solve"),
    max_iters: Optional[int] = typer.Option(None, "--max-iters", help="Iterations per start"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory (env HOS_OUTPUT_DIR)"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker processes"),
    xlsx: Optional[bool] = typer.Option(None, "--xlsx/--no-xlsx", help="Also write an Excel workbook"),
    db: Optional[str] = typer.Option(None, "--db", help="SQLAlchemy URL of the run ledger, e.g. sqlite:///runs.db"),
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="TOML or JSON file mirroring these flags")
):
    """Run a success-rate sweep over K and write CSV/JSON/SVG outputs."""
    try:
        file_values = load_config_file(config) if config else {}
        order = int(_pick(q, file_values, "q", 3))
        solver = SolverConfig(
            num_starts=int(_pick(starts, file_values, "starts", 3)),
            max_iters=int(_pick(max_iters, file_values, "max_iters", 10000)),
        )
        k_text = _pick(k, file_values, "K", None)
        if k_text is None:
            raise ValueError("No K values given (--K or 'K' in the config file)")
        if isinstance(k_text, list):
            k_text = ",".join(str(v) for v in k_text)

        spec = ExperimentSpec(
            experiment=ExperimentKind(_pick(experiment, file_values, "experiment", ExperimentKind.RANDOM)),
            q=order,
            n=_pick(n, file_values, "N", None),
            k_values=parse_k_values(k_text),
            trials=int(_pick(trials, file_values, "trials", 100)),
            solver=solver,
            base_seed=int(_pick(seed, file_values, "seed", 0)),
        )
        out_dir = Path(_pick(out, file_values, "out", settings.output_dir))

        result = run_sweep(
            spec,
            workers=int(_pick(workers, file_values, "workers", settings.workers)),
            out_dir=out_dir,
            db_url=_pick(db, file_values, "db", None),
            excel=bool(_pick(xlsx, file_values, "xlsx", False)),
        )
    except Exception as e:
        logger.error(f"Sweep failed: {e}")
        typer.echo(f"❌ Sweep failed: {e}", err=True)
        raise typer.Exit(1)

    typer.echo(f"✅ Sweep completed: {spec.experiment.value}, q={spec.q}, N={spec.n}")
    for k_value, rate in result.table.items():
        typer.echo(f"   K={k_value:>5}  success rate {rate:.3f}")
    for fmt, path in result.outputs.items():
        typer.echo(f"📄 {fmt.upper()}: {path}")


@app.command("rank-probe")
def rank_probe(
    n: int = typer.Option(..., "--N", help="Signal length"),
    q: int = typer.Option(3, "--q", help="Spectrum order"),
    k: Optional[int] = typer.Option(None, "--K", help="Measurements (default N+1)"),
    trials: int = typer.Option(50, "--trials", help="Random (x, A) draws"),
    seed: int = typer.Option(0, "--seed", help="Base seed"),
    kind: OperatorKind = typer.Option(OperatorKind.DENSE_RANDOM, "--kind", help="Operator family"),
    rel_tol: Optional[float] = typer.Option(None, "--rel-tol", help="Singular value threshold relative to the largest"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the JSON report here")
):
    """Check that the compressed spectrum Jacobian has rank N at random signals."""
    try:
        report = run_rank_probe(n, q, k or n + 1, trials, seed, kind=kind, rel_tol=rel_tol, out_file=out)
    except Exception as e:
        logger.error(f"Rank probe failed: {e}")
        typer.echo(f"❌ Rank probe failed: {e}", err=True)
        raise typer.Exit(1)

    status = "✅" if report.passed else "⚠️"
    typer.echo(f"{status} N={n} q={q} K={report.k}: min generic rank {report.min_rank} over {report.trials} trials")
    if not report.passed:
        raise typer.Exit(2)


@app.command("analytic-demo")
def analytic_demo(
    n: int = typer.Option(30, "--N", help="Signal length"),
    trials: int = typer.Option(100, "--trials", help="Constructed signals"),
    seed: int = typer.Option(0, "--seed", help="Construction seed"),
    q: int = typer.Option(3, "--q", help="3 (bispectrum) or 4 (trispectrum)")
):
    """Recover unit-modulus signals from N-2 spectrum entries by recursion."""
    try:
        report = run_analytic_demo(n, trials=trials, seed=seed, q=q)
    except Exception as e:
        logger.error(f"Analytic demo failed: {e}")
        typer.echo(f"❌ Analytic demo failed: {e}", err=True)
        raise typer.Exit(1)

    typer.echo(f"✅ Recovered {len(report.errors)}/{trials} signals of length {n} from {report.entries_consumed} entries")
    typer.echo(f"📈 Max aligned error {report.max_error:.3e} in {report.seconds:.2f} s")
    if report.failures:
        raise typer.Exit(2)


@app.command()
def compare(
    summaries: List[Path] = typer.Argument(..., help="Sweep JSON summaries"),
    output: Path = typer.Option(Path("comparison.svg"), "--output", "-o", help="SVG output path"),
    title: str = typer.Option("", "--title", help="Plot title")
):
    """Overlay the success-rate curves of several sweeps."""
    try:
        loaded = [load_summary(path) for path in summaries]
        ReportExporter().export_comparison_svg(loaded, output, title=title)
    except Exception as e:
        logger.error(f"Comparison failed: {e}")
        typer.echo(f"❌ Comparison failed: {e}", err=True)
        raise typer.Exit(1)

    typer.echo(f"📄 Comparison saved to: {output}")


@app.command()
def status():
    """Show configuration."""
    typer.echo("🔧 hos-recover configuration")
    typer.echo(f"Output dir: {settings.output_dir}")
    typer.echo(f"Spectrum entry cap: {settings.max_spectrum_entries}")
    typer.echo(f"Rank tolerance: {settings.rank_rel_tol}")
    typer.echo(f"Success threshold: {settings.success_threshold}")
    typer.echo(f"Workers: {settings.workers}")
    typer.echo(f"Results DB: {settings.results_db_url or 'disabled'}")
    typer.echo(f"Log Level: {settings.log_level}")


@app.callback()
def main():
    configure_logging()


if __name__ == "__main__":
    app()
