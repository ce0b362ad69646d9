from pathlib import Path
from typing import List, Optional, Tuple
import click
from rich.console import Console
from ..app.config import settings
from ..app.models import EstimatorKind, Scene, WaveConfig
from ..app.services import RenderService, TextureService
from ..app.utils import log_error


console = Console()


def parse_floats(text: str) -> List[float]:
    try:
        return [float(token) for token in text.split(",") if token.strip()]
    except ValueError:
        raise click.BadParameter(f"Expected comma-separated numbers, got '{text}'")


def parse_ints(text: str) -> List[int]:
    try:
        return [int(token) for token in text.split(",") if token.strip()]
    except ValueError:
        raise click.BadParameter(f"Expected comma-separated integers, got '{text}'")


def parse_dims(text: str, count: int) -> Tuple[int, ...]:
    try:
        dims = tuple(int(token) for token in text.lower().split("x"))
    except ValueError:
        raise click.BadParameter(f"Expected dimensions like 64x64x16, got '{text}'")
    if len(dims) != count:
        raise click.BadParameter(f"Expected {count} dimensions, got '{text}'")
    return dims


def parse_estimators(text: str) -> List[EstimatorKind]:
    try:
        return [EstimatorKind.parse(token) for token in text.split(",") if token.strip()]
    except ValueError as e:
        raise click.BadParameter(str(e))


def wave_config(text: Optional[str]) -> WaveConfig:
    if not text:
        return WaveConfig(lanes=settings.wave_lanes, shape=(settings.wave_cols, settings.wave_rows))
    cols, rows = parse_dims(text, 2)
    return WaveConfig.from_shape(cols, rows)


def build_scene(
    scene_path: Optional[Path],
    test_texture: str,
    texture_size: int,
    resolution: Optional[str],
    zoom: Optional[float],
    seed: int,
) -> Scene:
    """Scene from JSON, or a magnified synthetic test texture when no scene is given."""
    if scene_path is not None:
        scene = RenderService.load_scene(scene_path)
    else:
        albedo = TextureService.make_test_texture(test_texture, texture_size, seed=seed)
        scene = Scene(albedo=albedo)

    update = {}
    if resolution:
        update["resolution"] = parse_dims(resolution, 2)
    if zoom is not None:
        update["zoom"] = zoom
    return Scene.model_validate({**dict(scene), **update}) if update else scene


def scene_options(func):
    """Shared options selecting the rendered scene."""
    options = [
        click.option("--scene", "scene_path", type=click.Path(path_type=Path), help="Scene JSON"),
        click.option(
            "--test-texture",
            type=click.Choice(["checker", "noise", "ramp", "constant"]),
            default="noise",
            show_default=True,
            help="Synthetic albedo used when no scene is given",
        ),
        click.option("--texture-size", type=int, default=64, show_default=True),
        click.option("--resolution", help="Override resolution, e.g. 256x256"),
        click.option("--zoom", type=float, help="Override zoom factor"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def report_failure(e: Exception, command: str):
    """Print a failed command's error and abort; usage errors pass through to click."""
    if isinstance(e, click.ClickException):
        raise e
    if isinstance(e, (ValueError, FileNotFoundError)):
        console.print(f"[red]✗[/red] {e}")
    else:
        log_error(e, {"command": {"name": command}})
        console.print(f"[red]✗[/red] Error: {e}")
    raise click.Abort()
