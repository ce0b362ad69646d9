import click
from rich.console import Console
from ..app.database import init_database
from ..app.utils import configure_logging, init_sentry
from .footprint_commands import gen_footprints
from .noise_commands import analyze_noise, gen_noise
from .render_commands import footprint_study, noise_study, render, spp_sweep, sweep
from .run_commands import runs
from .study_commands import taylor


console = Console()


init_sentry()


@click.group()
@click.version_option(version="1.0.0", prog_name="stflab")
@click.option("--log-level", help="Override LOG_LEVEL for this run")
def cli(log_level):
    """Stochastic texture filtering lab - shared-sample estimators, footprints and blue noise"""
    configure_logging(log_level)


@cli.command()
def init():
    """Initialize the run ledger database"""
    try:
        init_database()
        console.print("[green]✓[/green] Database initialized successfully!")
    except Exception as e:
        console.print(f"[red]✗[/red] Failed to initialize database: {e}")
        raise click.Abort()


cli.add_command(render)
cli.add_command(sweep)
cli.add_command(spp_sweep)
cli.add_command(footprint_study)
cli.add_command(noise_study)
cli.add_command(gen_footprints)
cli.add_command(gen_noise)
cli.add_command(analyze_noise)
cli.add_command(taylor)
cli.add_command(runs)


if __name__ == "__main__":
    cli()
