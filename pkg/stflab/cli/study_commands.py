from pathlib import Path
import click
from rich.console import Console
from rich.table import Table
from ..app.config import settings
from ..app.models import FilterKind, TaylorFunction
from ..app.services import ExperimentService, TextureService
from .parsing import parse_floats, report_failure


console = Console()


@click.command()
@click.option("--texture", "texture_path", type=click.Path(path_type=Path), help="Texture file")
@click.option(
    "--test-texture",
    type=click.Choice(["checker", "noise", "ramp", "constant"]),
    default="checker",
    show_default=True,
    help="Synthetic texture used when no file is given",
)
@click.option("--texture-size", type=int, default=16, show_default=True)
@click.option(
    "--filter",
    "filter_name",
    type=click.Choice([kind.value for kind in FilterKind]),
    default="bilinear",
    show_default=True,
)
@click.option("--lookup", default="3.25,4.5", show_default=True, help="Continuous texel coordinate x,y")
@click.option(
    "--fn",
    "function",
    type=click.Choice([fn.value for fn in TaylorFunction]),
    default="square",
    show_default=True,
)
@click.option("--channel", type=int, default=0, show_default=True)
@click.option("--trials", type=int, default=0, show_default=True, help="Monte Carlo draws to compare against")
@click.option("--seed", type=int, default=settings.default_seed, show_default=True)
def taylor(texture_path, test_texture, texture_size, filter_name, lookup, function, channel, trials, seed):
    """Bias of shading a one-tap filtered value against its second-order prediction"""
    try:
        point = parse_floats(lookup)
        if len(point) != 2:
            raise click.BadParameter(f"Expected x,y, got '{lookup}'", param_hint="--lookup")
        if texture_path is not None:
            tex = TextureService.load_texture(texture_path)
        else:
            tex = TextureService.make_test_texture(test_texture, texture_size, seed=seed)

        report = ExperimentService.taylor_bias_study(
            tex, FilterKind(filter_name), point, TaylorFunction(function), trials, seed, channel
        )

        table = Table(title=f"Shading bias ({function}, {filter_name} at {point[0]:g},{point[1]:g})")
        table.add_column("Quantity", style="cyan")
        table.add_column("Value", justify="right", style="green")
        table.add_row("Filtered mean", f"{report.mu:.6f}")
        table.add_row("Filtered variance", f"{report.var:.6f}")
        table.add_row("Bias (exact)", f"{report.empirical_bias:.6f}")
        table.add_row("Bias (predicted)", f"{report.predicted_bias:.6f}")
        table.add_row("Remainder", f"{report.remainder:.6f}")
        if report.sampled_bias is not None:
            table.add_row(f"Bias ({trials} draws)", f"{report.sampled_bias:.6f}")
        console.print(table)
    except Exception as e:
        report_failure(e, "taylor")
