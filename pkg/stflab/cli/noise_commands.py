from pathlib import Path
from typing import Optional
import click
from rich.console import Console
from ..app.config import settings
from ..app.models import NoiseVariant, StbnParams
from ..app.services import NoiseService
from ..app.utils import log_artifact_written
from ..app.utils.io import write_csv
from .parsing import parse_dims, report_failure


console = Console()


@click.command("gen-noise")
@click.option("--dims", default="64x64x16", show_default=True, help="Mask size as XxYxT")
@click.option(
    "--variant",
    type=click.Choice([variant.value for variant in NoiseVariant]),
    default="scalar",
    show_default=True,
)
@click.option("--spatial-sigma", type=float, default=1.9, show_default=True)
@click.option("--temporal-sigma", type=float, default=0.8, show_default=True)
@click.option("--quad-boost", type=float, help="Energy factor inside 2x2 quads (quad variant: 2.0)")
@click.option("--seed", type=int, default=settings.default_seed, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("mask.bin"), show_default=True)
def gen_noise(dims, variant, spatial_sigma, temporal_sigma, quad_boost: Optional[float], seed, out):
    """Generate a spatiotemporal blue-noise mask"""
    try:
        params = {"spatial_sigma": spatial_sigma, "temporal_sigma": temporal_sigma, "seed": seed}
        if quad_boost is not None:
            params["quad_boost"] = quad_boost
        stbn = StbnParams.for_variant(NoiseVariant(variant), **params)

        mask = NoiseService.generate_stbn(parse_dims(dims, 3), stbn)
        NoiseService.save_mask(mask, out)

        console.print(f"Rank property: {'ok' if mask.has_rank_property() else 'violated'}")
        if mask.width == mask.height and mask.width >= 16:
            ratio = NoiseService.spectral_band_ratio(NoiseService.power_spectrum(mask, 0))
            console.print(f"Low/high band energy ratio: {ratio:.3f}")
        if mask.width % 2 == 0 and mask.height % 2 == 0:
            console.print(f"Quad partner spread: {NoiseService.quad_partner_spread(mask):.4f}")
        console.print(f"[green]✓[/green] Wrote {variant} mask {mask.dims} to {out}")
    except Exception as e:
        report_failure(e, "gen-noise")


@click.command("analyze-noise")
@click.option("--mask", "mask_path", type=click.Path(path_type=Path), help="Mask file to analyze")
@click.option("--white", "white_dims", help="Analyze hashed white noise of this size instead, e.g. 64x64x1")
@click.option("--slice", "slice_t", type=int, default=0, show_default=True)
@click.option("--seed", type=int, default=settings.default_seed, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("psd.csv"), show_default=True)
def analyze_noise(mask_path, white_dims, slice_t, seed, out):
    """Radially averaged power spectrum of one mask slice"""
    try:
        if mask_path is not None:
            mask = NoiseService.load_mask(mask_path)
        elif white_dims:
            mask = NoiseService.white_noise_mask(parse_dims(white_dims, 3), seed)
        else:
            raise click.UsageError("Pass --mask or --white")

        spectrum = NoiseService.power_spectrum(mask, slice_t)
        write_csv(out, ["frequency", "energy"], spectrum)
        log_artifact_written("power spectrum", out, f"bins={len(spectrum)}")

        ratio = NoiseService.spectral_band_ratio(spectrum)
        console.print(f"Low/high band energy ratio: {ratio:.3f}")
        console.print(f"[green]✓[/green] Wrote {len(spectrum)} frequency bins to {out}")
    except Exception as e:
        report_failure(e, "analyze-noise")
