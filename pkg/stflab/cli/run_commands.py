import click
from rich.console import Console
from rich.table import Table
from ..app.services import ExperimentService
from .parsing import report_failure


console = Console()


def _runs_table(title, recorded):
    table = Table(title=title)
    table.add_column("ID", style="cyan")
    table.add_column("Command")
    table.add_column("Estimator", style="magenta")
    table.add_column("Filter")
    table.add_column("Footprint")
    table.add_column("Noise")
    table.add_column("Zoom", justify="right")
    table.add_column("PSNR (dB)", justify="right", style="green")
    table.add_column("Recorded")
    for run in recorded:
        table.add_row(
            str(run.id),
            run.command,
            run.estimator,
            run.filter,
            run.footprint,
            run.noise,
            f"{run.zoom:g}",
            f"{run.psnr_db:.2f}",
            run.created_at.strftime("%Y-%m-%d %H:%M"),
        )
    return table


@click.group()
def runs():
    """Browse the experiment run ledger"""
    pass


@runs.command("list")
@click.option("--command", "command_name", help="Only runs recorded by this command, e.g. sweep")
@click.option("--estimator", help="Only runs of this estimator label, e.g. wis+clamp")
@click.option("--footprint", help="Only runs with this footprint")
@click.option("--noise", help="Only runs with this noise source")
@click.option("--limit", type=int, default=20, show_default=True)
def list_runs(command_name, estimator, footprint, noise, limit):
    """List recorded runs, newest first"""
    try:
        recorded = ExperimentService.latest_runs(
            command_name, limit, estimator=estimator, footprint=footprint, noise=noise
        )
        if not recorded:
            console.print("[yellow]No runs recorded[/yellow]")
            return

        console.print(_runs_table("Experiment runs", recorded))
        console.print(f"Showing {len(recorded)} of {ExperimentService.count_runs()} recorded runs")
    except Exception as e:
        report_failure(e, "runs list")


@runs.command()
@click.argument("run_id", type=int)
def show(run_id):
    """Show one recorded run"""
    try:
        run = ExperimentService.get_run(run_id)
        if run is None:
            console.print(f"[red]✗[/red] Run {run_id} not found")
            return
        console.print(f"[bold]Run #{run.id}:[/bold] {run.label}")
        console.print(f"  Command: {run.command}")
        console.print(f"  Filter: {run.filter}, zoom {run.zoom:g}, seed {run.seed}, frames {run.frames}")
        console.print(f"  MSE: {run.mse:.6f}")
        console.print(f"  PSNR: [green]{run.psnr_db:.2f} dB[/green]")
        console.print(f"  Recorded: {run.created_at:%Y-%m-%d %H:%M}")
    except Exception as e:
        report_failure(e, "runs show")


@runs.command()
@click.option("--estimator", required=True, help="Estimator label, e.g. wis")
@click.option("--command", "command_name", help="Restrict to runs recorded by this command")
def trend(estimator, command_name):
    """PSNR against zoom for one estimator"""
    try:
        recorded = ExperimentService.zoom_trend(estimator, command_name)
        if not recorded:
            console.print(f"[yellow]No runs recorded for {estimator}[/yellow]")
            return

        table = Table(title=f"{estimator} by zoom")
        table.add_column("Zoom", justify="right")
        table.add_column("Footprint")
        table.add_column("Noise")
        table.add_column("PSNR (dB)", justify="right", style="green")
        table.add_column("ID", style="cyan")
        for run in recorded:
            table.add_row(f"{run.zoom:g}", run.footprint, run.noise, f"{run.psnr_db:.2f}", str(run.id))
        console.print(table)
    except Exception as e:
        report_failure(e, "runs trend")


@runs.command()
@click.option("--command", "command_name", help="Restrict to runs recorded by this command")
def best(command_name):
    """Show the run with the highest PSNR"""
    try:
        run = ExperimentService.best_run(command_name)
        if run is None:
            console.print("[yellow]No runs recorded[/yellow]")
            return
        console.print(f"[bold]Best run:[/bold] #{run.id} {run.label}")
        console.print(f"  Command: {run.command}")
        console.print(f"  Filter: {run.filter}, zoom {run.zoom:g}, seed {run.seed}, frames {run.frames}")
        console.print(f"  MSE: {run.mse:.6f}")
        console.print(f"  PSNR: [green]{run.psnr_db:.2f} dB[/green]")
    except Exception as e:
        report_failure(e, "runs best")


@runs.command()
@click.argument("run_id", type=int)
def delete(run_id):
    """Delete a recorded run"""
    if click.confirm(f"Are you sure you want to delete run {run_id}?"):
        try:
            if ExperimentService.delete_run(run_id):
                console.print(f"[green]✓[/green] Run {run_id} deleted")
            else:
                console.print(f"[red]✗[/red] Run {run_id} not found")
        except Exception as e:
            report_failure(e, "runs delete")
