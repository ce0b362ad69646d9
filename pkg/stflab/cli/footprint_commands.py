import math
from pathlib import Path
import click
from rich.console import Console
from rich.table import Table
from ..app.config import settings
from ..app.models import OptParams
from ..app.services import FootprintService, WaveService
from ..app.utils import log_artifact_written
from .parsing import report_failure, wave_config


console = Console()


@click.command("gen-footprints")
@click.option("--size", type=int, default=9, show_default=True, help="Lanes per footprint")
@click.option("--sigma", type=float, default=1.4, show_default=True)
@click.option("--candidates", type=int, default=32, show_default=True, help="Candidates per lane")
@click.option("--trials", type=int, default=10000, show_default=True, help="Random selections per restart")
@click.option("--restarts", type=int, default=30, show_default=True)
@click.option("--frames", type=int, default=1, show_default=True, help="Tables to cycle over frames")
@click.option("--wave", help="Wave shape, e.g. 8x4")
@click.option("--seed", type=int, default=settings.default_seed, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("table.json"), show_default=True)
def gen_footprints(size, sigma, candidates, trials, restarts, frames, wave, seed, out):
    """Optimize pseudorandom sparse sharing footprints"""
    try:
        cfg = wave_config(wave)
        params = OptParams(
            sigma=sigma,
            candidates_per_lane=candidates,
            stage2_trials=trials,
            restarts=restarts,
            footprint_size=size,
            seed=seed,
        )
        if frames == 1:
            results = [FootprintService.optimize_sparse_footprints(cfg, params)]
        else:
            results = FootprintService.optimize_frames(cfg, params, frames)

        WaveService.save_footprints([result.table for result in results], out)
        log_artifact_written("footprints", out, f"frames={frames}, size={size}")

        baseline = None
        side = math.isqrt(size)
        if side * side == size and 2 <= side <= min(cfg.cols, cfg.rows):
            square = WaveService.build_square_footprint(cfg, side)
            baseline = FootprintService.usage_histogram(square).stddev

        table = Table(title=f"Sparse footprints ({cfg.cols}x{cfg.rows}, size {size})")
        table.add_column("Frame", style="cyan")
        table.add_column("Score", justify="right", style="green")
        table.add_column("Best restart", justify="right")
        table.add_column("Descent steps", justify="right")
        for index, result in enumerate(results):
            table.add_row(
                str(index),
                f"{result.score:.4f}",
                str(result.best_restart),
                str(len(result.descent_trace) - 1),
            )
        console.print(table)
        if baseline is not None:
            console.print(f"Square footprint baseline stddev: {baseline:.4f}")
        console.print(f"[green]✓[/green] Wrote {len(results)} table(s) to {out}")
    except Exception as e:
        report_failure(e, "gen-footprints")
