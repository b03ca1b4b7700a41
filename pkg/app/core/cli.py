# app/core/cli.py

"""
==========================================================
             STACKED DRAM EXPLORER - CLI
==========================================================

  Command-line entry point:

      evaluate     one design, with optional JSON dumps
      validate     replication targets, pass/fail table
      sweep        design-space sweep to a metrics CSV
      pareto       Pareto fronts (optionally per tier)
      hull         per-tier hull volume fractions
      project      2D projections of the metric space
      case-study   iso-constraint filter against a baseline

  Exit codes: 0 success, 1 tolerance failure or
  infeasible design, 2 input error.

==========================================================
"""

import logging
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table
from rich.text import Text
from rich.theme import Theme

from app.config.settings import settings
from app.core import initial_data
from app.core.exceptions import AnalysisError, DramModelError, RoutingInfeasibleError
from app.models.enums import Tier
from app.schemas.technode import TechnologyNode
from app.services import analysis
from app.services.config_service import config_id, load_config, load_sweep, sweep_size
from app.services.evaluator import DesignEvaluator
from app.services.replication import TargetResult, load_case_study, load_target_suite, run_suite
from app.services.sweep_engine import run_sweep, write_sweep
from app.services.technode_service import resolve_node
from app.utils.table_io import read_table, write_json, write_table

custom_theme = Theme({
    "info": "cyan",
    "success": "green",
    "warning": "yellow",
    "error": "red",
    "highlight": "magenta",
    "muted": "dim white",
    "accent": "blue",
    "primary": "#00A4BD",
    "metric_high": "#10B981",
    "metric_low": "#EF4444",
})

app = typer.Typer(help="Analytical model and design-space explorer for 3D die-stacked DRAM.")
console = Console(theme=custom_theme)

# service loggers live under "app"; route them through rich
logger = logging.getLogger("app")
logger.setLevel(settings.LOG_LEVEL)

if not logger.hasHandlers():
    rich_handler = RichHandler(
        console=console,
        rich_tracebacks=True,
        show_time=True,
        show_path=False,
    )
    rich_handler.setFormatter(logging.Formatter("%(name)s - %(message)s"))
    logger.addHandler(rich_handler)

EXIT_FAILURE = 1
EXIT_INPUT_ERROR = 2


def display_error(title: str, error: Exception) -> None:
    error_text = Text()
    error_text.append(f"{error}\n\n", style="red")
    error_text.append("Error Type: ", style="red dim")
    error_text.append(error.__class__.__name__, style="red bold")
    console.print(Panel(error_text, title=title, border_style="red", padding=(0, 1)))


def display_success(message: str, title: str = "Done") -> None:
    console.print(Panel(Text(message, style="green"), title=title, border_style="green", padding=(0, 1)))


def handle_errors(func: Callable) -> Callable:
    """Maps model errors to the exit-code contract."""

    @wraps(func)
    def wrapper(*args: Any, **kwargs: Any) -> Any:
        try:
            return func(*args, **kwargs)
        except RoutingInfeasibleError as e:
            display_error("Infeasible Design", e)
            raise typer.Exit(code=EXIT_FAILURE)
        except DramModelError as e:
            display_error("Input Error", e)
            raise typer.Exit(code=EXIT_INPUT_ERROR)
        except OSError as e:
            display_error("File Error", e)
            raise typer.Exit(code=EXIT_INPUT_ERROR)

    return wrapper


def _node(node: Optional[str], node_scaling: Optional[str], unscaled: bool) -> TechnologyNode:
    return resolve_node(node, node_scaling, use_default_scaling=not unscaled)


def _format(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4g}"
    return str(value)


def metrics_table(metrics: Dict[str, Any], title: str) -> Table:
    table = Table(show_header=True, header_style="bold blue", border_style="bright_black", title=title)
    table.add_column("Metric", style="cyan")
    table.add_column("Value", justify="right")
    for key, value in metrics.items():
        table.add_row(key, _format(value))
    return table


def frame_table(frame: Any, title: str, limit: int = 20) -> Table:
    table = Table(show_header=True, header_style="bold blue", border_style="bright_black", title=title)
    for column in frame.columns:
        table.add_column(str(column), justify="right")
    for _, row in frame.head(limit).iterrows():
        table.add_row(*(_format(value) for value in row.tolist()))
    if len(frame) > limit:
        table.caption = f"{len(frame) - limit} more rows not shown"
    return table


def _dump_path(out: Optional[Path], label: str, suffix: str) -> Path:
    base = out if out is not None else Path(f"{label}.json")
    return base.with_suffix(f".{suffix}.json")


@app.callback(invoke_without_command=True)
def main(ctx: typer.Context) -> None:
    """Shows the bundled catalog when no command is given."""
    if ctx.invoked_subcommand is not None:
        return
    catalog = initial_data.load_initial_data()
    console.print(Panel(
        Text.assemble(
            ("Stacked DRAM Explorer\n", "cyan bold"),
            ("configs: ", "dim"), (", ".join(catalog.configs) + "\n", "cyan"),
            ("nodes: ", "dim"), (", ".join(catalog.nodes) + "\n", "cyan"),
            ("sweeps: ", "dim"), (", ".join(catalog.sweeps) + "\n", "cyan"),
            ("targets: ", "dim"), (", ".join(catalog.targets) + "\n", "cyan"),
            ("Run with ", "dim"), ("--help", "cyan"), (" for the commands", "dim"),
        ),
        border_style="blue",
        padding=(0, 1),
    ))


@app.command()
@handle_errors
def evaluate(
    config: str = typer.Option(settings.DEFAULT_CONFIG, "--config", "-c", help="Config name or path"),
    node: Optional[str] = typer.Option(None, "--node", help="Node name or path"),
    node_scaling: Optional[str] = typer.Option(None, "--node-scaling", help="Node-scaling name or path"),
    unscaled: bool = typer.Option(False, "--unscaled", help="Evaluate on the unscaled node"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the metrics record as JSON"),
    dump_floorplan: bool = typer.Option(False, "--dump-floorplan", help="Write the die floorplan as JSON"),
    dump_routing: bool = typer.Option(False, "--dump-routing", help="Write all wire runs as JSON"),
    dump_energy: bool = typer.Option(False, "--dump-energy", help="Write the energy breakdown as JSON"),
) -> None:
    """Evaluates one design."""
    design = load_config(config)
    report = DesignEvaluator(_node(node, node_scaling, unscaled)).report(design)
    metrics = report.metrics.to_dict()
    console.print(metrics_table(metrics, f"{design.name or metrics['config_id']}"))

    label = design.name or metrics["config_id"]
    if out is not None:
        write_json(metrics, out)
    if dump_floorplan:
        path = write_json(report.floorplan.to_dict(), _dump_path(out, label, "floorplan"))
        console.print(f"[muted]floorplan -> {path}[/muted]")
    if dump_routing:
        routing = {
            "mat": report.routing.to_dict(),
            "datapath": [run.to_dict() for run in report.datapath_runs],
        }
        path = write_json(routing, _dump_path(out, label, "routing"))
        console.print(f"[muted]routing -> {path}[/muted]")
    if dump_energy:
        energy = report.energy.to_dict()
        energy["stages"] = [stage.to_dict() for stage in report.stages]
        path = write_json(energy, _dump_path(out, label, "energy"))
        console.print(f"[muted]energy -> {path}[/muted]")


def validation_table(result: TargetResult) -> Table:
    table = Table(
        show_header=True,
        header_style="bold blue",
        border_style="bright_black",
        title=f"{result.name} ({result.node})",
    )
    for column in ("Metric", "Reported", "Expected", "Model", "Error", "Tol", "Status"):
        table.add_column(column, justify="right" if column != "Metric" else "left")
    for check in result.checks:
        if check.passed:
            status = "[success]pass[/success]"
        elif check.advisory:
            status = "[warning]advisory[/warning]"
        else:
            status = "[error]FAIL[/error]"
        table.add_row(
            check.metric,
            _format(check.reported) if check.reported is not None else "-",
            _format(check.expected),
            _format(check.actual),
            f"{check.relative_error:.2%}",
            f"{check.tolerance:.2%}",
            status,
        )
    return table


@app.command()
@handle_errors
def validate(
    targets: str = typer.Option("hbm_parts", "--targets", "-t", help="Target suite name or path"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the report as JSON"),
) -> None:
    """Checks bundled designs against their expected metrics."""
    suite = load_target_suite(targets)
    results = run_suite(suite)
    for result in results:
        console.print(validation_table(result))
    if out is not None:
        write_json({"suite": suite.name, "targets": [result.to_dict() for result in results]}, out)

    failed = [result.name for result in results if not result.passed]
    if failed:
        display_error("Validation Failed", DramModelError(f"out of tolerance: {', '.join(failed)}"))
        raise typer.Exit(code=EXIT_FAILURE)
    display_success(f"{len(results)} target(s) within tolerance", "Validation Passed")


@app.command()
@handle_errors
def sweep(
    sweep_spec: str = typer.Option(..., "--sweep", "-s", help="Sweep spec name or path"),
    out: Path = typer.Option(..., "--out", "-o", help="Metrics CSV path"),
    node: Optional[str] = typer.Option(None, "--node", help="Node name or path"),
    node_scaling: Optional[str] = typer.Option(None, "--node-scaling", help="Node-scaling name or path"),
    unscaled: bool = typer.Option(False, "--unscaled", help="Evaluate on the unscaled node"),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="Worker processes"),
    chunk_size: Optional[int] = typer.Option(None, "--chunk-size", help="Designs per worker task"),
    jsonl: bool = typer.Option(False, "--jsonl", help="Also write the rows as JSON lines"),
) -> None:
    """Evaluates every point of a sweep spec."""
    spec = load_sweep(sweep_spec)
    tech = _node(node, node_scaling, unscaled)

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    ) as progress:
        task = progress.add_task(description=f"Sweeping {spec.name or sweep_spec}", total=sweep_size(spec))
        result = run_sweep(spec, tech, jobs=jobs, chunk_size=chunk_size, progress=lambda n: progress.advance(task, n))

    written = write_sweep(result, out, jsonl=jsonl)
    console.print(metrics_table(result.counts.to_dict(), "Sweep Counts"))
    display_success("\n".join(str(path) for path in written), "Sweep Written")


def _read(table_path: Path) -> Any:
    table = read_table(table_path)
    if table.empty:
        raise AnalysisError(f"{table_path} has no design rows")
    return table


@app.command()
@handle_errors
def pareto(
    table_path: Path = typer.Option(..., "--table", help="Metrics CSV from `sweep`"),
    x: Optional[str] = typer.Option(None, "--x", help="First objective"),
    y: Optional[str] = typer.Option(None, "--y", help="Second objective"),
    color: Optional[str] = typer.Option(None, "--color", help="Extra column carried into the output"),
    per_tier: bool = typer.Option(False, "--per-tier", help="One front per tier (tiers nest)"),
    scenario: Optional[str] = typer.Option(None, "--scenario", help=f"One of: {', '.join(analysis.SCENARIOS)}"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Front CSV; per-tier fronts get a .tier_<T> suffix"),
) -> None:
    """Pareto fronts of two metrics."""
    table = _read(table_path)
    if scenario is not None:
        preset = analysis.get_scenario(scenario)
        x, y, color = x or preset.x, y or preset.y, color or preset.color
        if preset.min_capacity_gb is not None:
            table = table[table["capacity_gb"] >= preset.min_capacity_gb]
        per_tier = True
    if x is None or y is None:
        raise AnalysisError("Give --x and --y, or a --scenario")
    if color is not None:
        analysis.check_metric(color, table)

    columns = [c for c in ("config_id", x, y, color, "tier") if c is not None]
    if per_tier:
        fronts = {tier.value: front[columns] for tier, front in analysis.pareto_per_tier(table, [x, y]).items()}
    else:
        fronts = {"all": analysis.pareto_front(table, [x, y])[columns]}

    for label, front in fronts.items():
        console.print(frame_table(front, f"Pareto front {x} x {y} [{label}]"))
        if out is not None:
            path = out if label == "all" else out.with_suffix(f".tier_{label}{out.suffix or '.csv'}")
            write_table(front, path)


@app.command()
@handle_errors
def hull(
    table_path: Path = typer.Option(..., "--table", help="Metrics CSV from `sweep`"),
    samples: Optional[int] = typer.Option(None, "--samples", "-n", help="Monte Carlo samples"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Sampling seed"),
    jobs: int = typer.Option(1, "--jobs", "-j", help="Worker processes"),
    membership: str = typer.Option("facets", "--membership", help="facets | lp"),
    baseline: str = typer.Option(settings.DEFAULT_CONFIG, "--baseline", help="Config anchoring the range summary"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the report as JSON"),
) -> None:
    """Per-tier hull volume as a fraction of the full design space."""
    table = _read(table_path)
    with Progress(SpinnerColumn(), TextColumn("[progress.description]{task.description}"), console=console, transient=True) as progress:
        progress.add_task(description="Sampling hulls...", total=None)
        reports = analysis.hull_volume_fractions(table, samples=samples, seed=seed, jobs=jobs, membership=membership)

    summary = Table(show_header=True, header_style="bold blue", border_style="bright_black", title="Hull Volume")
    for column in ("Tier", "Points", "Volume", "Std Err"):
        summary.add_column(column, justify="right")
    for report in reports:
        summary.add_row(report.tier.value, str(report.points), f"{report.volume_fraction:.4%}", f"{report.std_error:.2e}")
    console.print(summary)

    document: Dict[str, Any] = {"hull": [report.to_dict() for report in reports]}
    base_id = config_id(load_config(baseline))
    if (table["config_id"] == base_id).any():
        ranges = analysis.tier_ranges(table, analysis.find_baseline_row(table, base_id))
        console.print(frame_table(ranges, "Ranges vs baseline", limit=len(ranges)))
        document["baseline_id"] = base_id
        document["ranges"] = ranges.to_dict(orient="records")
    else:
        logger.warning(f"Baseline {baseline} ({base_id}) is not in the table; skipping the range summary")
    if out is not None:
        write_json(document, out)


@app.command()
@handle_errors
def project(
    table_path: Path = typer.Option(..., "--table", help="Metrics CSV from `sweep`"),
    x: Optional[str] = typer.Option(None, "--x", help="Horizontal metric"),
    y: Optional[str] = typer.Option(None, "--y", help="Vertical metric"),
    color: Optional[str] = typer.Option(None, "--color", help="Colour metric"),
    all_pairs: bool = typer.Option(False, "--all-pairs", help="Every pair of the five design-space metrics"),
    out: Path = typer.Option(..., "--out", "-o", help="CSV path, or a directory with --all-pairs"),
) -> None:
    """2D projections for external plotting."""
    table = _read(table_path)
    if all_pairs:
        written: List[Path] = []
        for metric_x, metric_y in analysis.metric_pairs():
            view = analysis.project(table, metric_x, metric_y, color)
            written.append(write_table(view, out / f"{metric_x}__{metric_y}.csv"))
        display_success(f"{len(written)} projections in {out}", "Projections Written")
        return
    if x is None or y is None:
        raise AnalysisError("Give --x and --y, or --all-pairs")
    path = write_table(analysis.project(table, x, y, color), out)
    display_success(str(path), "Projection Written")


@app.command("case-study")
@handle_errors
def case_study(
    table_path: Path = typer.Option(..., "--table", help="Metrics CSV from `sweep`"),
    constraints: str = typer.Option("server_gpu", "--constraints", help="Case-study name or path"),
    survivors_out: Optional[Path] = typer.Option(None, "--survivors", help="Write surviving rows as CSV"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the summary as JSON"),
) -> None:
    """Designs no worse than a baseline under a set of constraints."""
    table = _read(table_path)
    study = load_case_study(constraints)
    base_id = config_id(load_config(study.baseline))
    base_row = analysis.find_baseline_row(table, base_id)
    survivors = analysis.iso_filter(table, base_row, study.constraints)
    metrics = analysis.HULL_METRICS + ["power_w"]
    best = analysis.best_survivors(survivors, base_row, metrics)

    console.print(Panel(
        Text("\n".join(constraint.label() for constraint in study.constraints) or "no constraints"),
        title=f"{study.name or constraints}: {len(survivors)} of {len(table)} designs survive",
        border_style="blue",
        padding=(0, 1),
    ))
    summary = Table(show_header=True, header_style="bold blue", border_style="bright_black", title="Best Survivors")
    for column in ("Metric", "Design", "Value", "vs Baseline"):
        summary.add_column(column, justify="right")
    for name, entry in best.items():
        summary.add_row(name, str(entry["config_id"]), _format(entry["value"]), f"{entry['ratio']:.3f}x")
    console.print(summary)

    if survivors_out is not None:
        write_table(survivors, survivors_out)
    if out is not None:
        write_json(
            {
                "name": study.name,
                "baseline_id": base_id,
                "constraints": [constraint.label() for constraint in study.constraints],
                "designs": len(table),
                "survivors": len(survivors),
                "survivors_per_tier": {
                    tier.value: int((survivors["tier"] == tier.value).sum()) for tier in Tier
                },
                "best": best,
            },
            out,
        )


if __name__ == "__main__":
    app()
