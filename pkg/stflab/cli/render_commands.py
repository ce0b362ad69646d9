import json
from pathlib import Path
import click
from rich.console import Console
from rich.table import Table
from ..app.config import settings
from ..app.models import EstimatorKind, FilterKind, SamplingMode, StudyRow
from ..app.services import ExperimentService, NoiseService, RenderService, WaveService
from ..app.utils import log_artifact_written
from ..app.utils.io import write_csv, write_png
from .parsing import (
    build_scene,
    parse_estimators,
    parse_floats,
    parse_ints,
    report_failure,
    scene_options,
    wave_config,
)


console = Console()

FILTER_CHOICE = click.Choice([kind.value for kind in FilterKind])
ESTIMATOR_CHOICE = click.Choice(["onetap", "is", "mis", "pmis", "regression", "wis"])
DEFAULT_ESTIMATORS = "onetap,is,is+clamp,mis,mis+clamp,pmis,pmis+clamp,regression,regression+clamp,wis"


def _print_rows(title: str, rows):
    table = Table(title=title)
    table.add_column("Estimator", style="cyan")
    table.add_column("Footprint")
    table.add_column("Noise")
    table.add_column("Zoom", justify="right")
    table.add_column("SPP", justify="right")
    table.add_column("MSE", justify="right")
    table.add_column("PSNR (dB)", justify="right", style="green")
    for row in rows:
        table.add_row(
            row.estimator,
            row.footprint,
            row.noise,
            f"{row.zoom:g}",
            str(row.spp),
            f"{row.mse:.6f}",
            f"{row.psnr_db:.2f}",
        )
    console.print(table)


@click.command()
@scene_options
@click.option("--estimator", type=ESTIMATOR_CHOICE, default="wis", show_default=True)
@click.option("--clamp", is_flag=True, help="Clamp to the shared texel range")
@click.option("--exact", is_flag=True, help="Exact filtering when all bilinear texels were shared")
@click.option("--filter", "filter_name", type=FILTER_CHOICE, default="bilinear", show_default=True)
@click.option("--footprint", default="quad", show_default=True, help="quad, square2-4, self, sparse:<json>")
@click.option("--noise", default="white", show_default=True, help="white, stbn:<mask>, stbnquad:<mask>")
@click.option("--frames", type=int, default=1, show_default=True)
@click.option("--spp", type=int, default=1, show_default=True)
@click.option("--ema-alpha", type=float, default=0.1, show_default=True)
@click.option("--ema-clamp", is_flag=True, help="Clamp history to the 3x3 neighborhood")
@click.option("--uniform", is_flag=True, help="Sample support texels with equal probability")
@click.option("--wave", help="Wave shape, e.g. 8x4")
@click.option("--seed", type=int, default=settings.default_seed, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=settings.output_dir, show_default=True)
@click.option("--record", is_flag=True, help="Append the result to the run ledger")
def render(
    scene_path,
    test_texture,
    texture_size,
    resolution,
    zoom,
    estimator,
    clamp,
    exact,
    filter_name,
    footprint,
    noise,
    frames,
    spp,
    ema_alpha,
    ema_clamp,
    uniform,
    wave,
    seed,
    out,
    record,
):
    """Render frames with shared-sample stochastic filtering"""
    try:
        scene = build_scene(scene_path, test_texture, texture_size, resolution, zoom, seed)
        kind = EstimatorKind(variant=estimator, clamp=clamp, exact_filtering=exact)
        filter_kind = FilterKind(filter_name)
        footprints = WaveService.footprint_from_spec(footprint, wave_config(wave))
        source = NoiseService.source_from_spec(noise, seed)
        sampling = SamplingMode.UNIFORM if uniform else SamplingMode.FILTER

        result, per_frame = RenderService.render_sequence(
            scene, kind, filter_kind, footprints, source, frames, ema_alpha, ema_clamp, spp, sampling
        )

        out.mkdir(parents=True, exist_ok=True)
        write_png(out / "image.png", result.image)
        write_png(out / "reference.png", result.reference)
        metrics = {
            "estimator": kind.label,
            "filter": filter_kind.value,
            "footprint": footprint,
            "noise": source.label,
            "zoom": scene.zoom,
            "frames": frames,
            "spp": spp,
            "mse": result.metrics.mse,
            "psnr_db": result.metrics.psnr_db,
            "frame_psnr_db": [m.psnr_db for m in per_frame],
        }
        (out / "metrics.json").write_text(json.dumps(metrics, indent=2))
        if frames > 1:
            write_csv(
                out / "frames.csv",
                ["frame", "mse", "psnr_db"],
                ([index, m.mse, m.psnr_db] for index, m in enumerate(per_frame)),
            )
        log_artifact_written("render", out, f"psnr={result.metrics.psnr_db:.2f}")

        if record:
            row = StudyRow(
                estimator=kind.label,
                footprint=footprint,
                noise=source.label,
                zoom=scene.zoom,
                spp=spp,
                trials=1,
                mse=result.metrics.mse,
                psnr_db=result.metrics.psnr_db,
            )
            ExperimentService.record_runs("render", [row], filter_kind, seed, frames)

        console.print(
            f"[green]✓[/green] Rendered {kind.label} ({footprint}, {source.label}): "
            f"MSE {result.metrics.mse:.6f}, PSNR {result.metrics.psnr_db:.2f} dB → {out}"
        )
    except Exception as e:
        report_failure(e, "render")


@click.command()
@scene_options
@click.option("--zooms", default="1,1.5,2,4,8,16,32,64", show_default=True)
@click.option("--estimators", default=DEFAULT_ESTIMATORS, show_default=True)
@click.option("--filter", "filter_name", type=FILTER_CHOICE, default="bilinear", show_default=True)
@click.option("--footprint", default="quad", show_default=True)
@click.option("--noise", default="white", show_default=True)
@click.option("--trials", type=int, default=4, show_default=True)
@click.option("--wave", help="Wave shape, e.g. 8x4")
@click.option("--seed", type=int, default=settings.default_seed, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("sweep.csv"), show_default=True)
@click.option("--record", is_flag=True, help="Append rows to the run ledger")
def sweep(
    scene_path,
    test_texture,
    texture_size,
    resolution,
    zoom,
    zooms,
    estimators,
    filter_name,
    footprint,
    noise,
    trials,
    wave,
    seed,
    out,
    record,
):
    """PSNR of each estimator as a function of zoom"""
    try:
        scene = build_scene(scene_path, test_texture, texture_size, resolution, zoom, seed)
        filter_kind = FilterKind(filter_name)
        rows = ExperimentService.zoom_sweep(
            scene,
            parse_estimators(estimators),
            parse_floats(zooms),
            filter_kind,
            WaveService.footprint_from_spec(footprint, wave_config(wave)),
            footprint,
            NoiseService.source_from_spec(noise, seed),
            trials,
            seed,
        )
        ExperimentService.write_rows(rows, out)
        if record:
            ExperimentService.record_runs("sweep", rows, filter_kind, seed)
        _print_rows("Zoom sweep", rows)
        console.print(f"[green]✓[/green] Wrote {len(rows)} rows to {out}")
    except Exception as e:
        report_failure(e, "sweep")


@click.command("spp-sweep")
@scene_options
@click.option("--spp-list", default="1,2,4,8", show_default=True)
@click.option("--estimators", default=DEFAULT_ESTIMATORS, show_default=True)
@click.option("--filter", "filter_name", type=FILTER_CHOICE, default="bilinear", show_default=True)
@click.option("--footprint", default="quad", show_default=True)
@click.option("--noise", default="white", show_default=True)
@click.option("--trials", type=int, default=4, show_default=True)
@click.option("--wave", help="Wave shape, e.g. 8x4")
@click.option("--seed", type=int, default=settings.default_seed, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("spp.csv"), show_default=True)
@click.option("--record", is_flag=True, help="Append rows to the run ledger")
def spp_sweep(
    scene_path,
    test_texture,
    texture_size,
    resolution,
    zoom,
    spp_list,
    estimators,
    filter_name,
    footprint,
    noise,
    trials,
    wave,
    seed,
    out,
    record,
):
    """PSNR of each estimator as a function of samples per pixel"""
    try:
        scene = build_scene(scene_path, test_texture, texture_size, resolution, zoom, seed)
        filter_kind = FilterKind(filter_name)
        rows = ExperimentService.spp_sweep(
            scene,
            parse_estimators(estimators),
            parse_ints(spp_list),
            filter_kind,
            WaveService.footprint_from_spec(footprint, wave_config(wave)),
            footprint,
            NoiseService.source_from_spec(noise, seed),
            trials,
            seed,
        )
        ExperimentService.write_rows(rows, out)
        if record:
            ExperimentService.record_runs("spp-sweep", rows, filter_kind, seed)
        _print_rows("Samples per pixel", rows)
        console.print(f"[green]✓[/green] Wrote {len(rows)} rows to {out}")
    except Exception as e:
        report_failure(e, "spp-sweep")


@click.command("footprint-study")
@scene_options
@click.option("--footprints", default="quad,square3,square4", show_default=True)
@click.option("--filter", "filter_name", type=FILTER_CHOICE, default="bilinear", show_default=True)
@click.option("--noise", default="white", show_default=True)
@click.option("--trials", type=int, default=8, show_default=True)
@click.option("--no-exact", is_flag=True, help="Skip the exact filtering variants")
@click.option("--wave", help="Wave shape, e.g. 8x4")
@click.option("--seed", type=int, default=settings.default_seed, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("footprints.csv"), show_default=True)
@click.option("--record", is_flag=True, help="Append rows to the run ledger")
def footprint_study(
    scene_path,
    test_texture,
    texture_size,
    resolution,
    zoom,
    footprints,
    filter_name,
    noise,
    trials,
    no_exact,
    wave,
    seed,
    out,
    record,
):
    """Compare sharing footprints at one sample per pixel"""
    try:
        scene = build_scene(scene_path, test_texture, texture_size, resolution, zoom, seed)
        filter_kind = FilterKind(filter_name)
        cfg = wave_config(wave)
        named = {
            name.strip(): WaveService.footprint_from_spec(name, cfg)
            for name in footprints.split(",")
            if name.strip()
        }
        rows = ExperimentService.footprint_study(
            scene,
            named,
            filter_kind,
            NoiseService.source_from_spec(noise, seed),
            trials,
            seed,
            exact_options=(False,) if no_exact else (False, True),
        )
        ExperimentService.write_rows(rows, out)
        if record:
            ExperimentService.record_runs("footprint-study", rows, filter_kind, seed)
        _print_rows("Sharing footprints", rows)
        console.print(f"[green]✓[/green] Wrote {len(rows)} rows to {out}")
    except Exception as e:
        report_failure(e, "footprint-study")


@click.command("noise-study")
@scene_options
@click.option("--footprints", default="quad", show_default=True)
@click.option(
    "--noises",
    default="white",
    show_default=True,
    help="Comma-separated sources, e.g. white,stbn:mask.bin,stbnquad:quad.bin",
)
@click.option("--estimator", "estimator_label", default="wis", show_default=True)
@click.option("--filter", "filter_name", type=FILTER_CHOICE, default="bilinear", show_default=True)
@click.option("--trials", type=int, default=8, show_default=True)
@click.option("--wave", help="Wave shape, e.g. 8x4")
@click.option("--seed", type=int, default=settings.default_seed, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("noise.csv"), show_default=True)
@click.option("--record", is_flag=True, help="Append rows to the run ledger")
def noise_study(
    scene_path,
    test_texture,
    texture_size,
    resolution,
    zoom,
    footprints,
    noises,
    estimator_label,
    filter_name,
    trials,
    wave,
    seed,
    out,
    record,
):
    """Rank random number sources under each sharing footprint"""
    try:
        scene = build_scene(scene_path, test_texture, texture_size, resolution, zoom, seed)
        filter_kind = FilterKind(filter_name)
        cfg = wave_config(wave)
        named = {
            name.strip(): WaveService.footprint_from_spec(name, cfg)
            for name in footprints.split(",")
            if name.strip()
        }
        sources = [
            NoiseService.source_from_spec(spec, seed) for spec in noises.split(",") if spec.strip()
        ]
        rows = ExperimentService.noise_study(
            scene,
            named,
            sources,
            parse_estimators(estimator_label)[0],
            filter_kind,
            trials,
            seed,
        )
        ExperimentService.write_rows(rows, out)
        if record:
            ExperimentService.record_runs("noise-study", rows, filter_kind, seed)
        _print_rows("Noise sources", rows)
        console.print(f"[green]✓[/green] Wrote {len(rows)} rows to {out}")
    except Exception as e:
        report_failure(e, "noise-study")
