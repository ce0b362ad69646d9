#!/usr/bin/env python
"""
Lab initialization script for stflab.
Creates the run ledger tables and a demo scene with synthetic textures.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from stflab.app.config import settings
from stflab.app.database import create_db_and_tables
from stflab.app.models import BlinnPhongShading, SceneSpec
from stflab.app.services import TextureService
from rich.console import Console
from rich.prompt import Confirm


console = Console()


def create_demo_scene(directory: Path, size: int = 64, seed: int = 0):
    """Write demo textures and a scene.json pointing at them"""
    directory.mkdir(parents=True, exist_ok=True)

    for kind in ("checker", "noise", "ramp"):
        tex = TextureService.make_test_texture(kind, size, seed=seed)
        path = TextureService.save_texture(tex, directory / f"{kind}.png")
        console.print(f"[green]✓[/green] Wrote {kind} texture: {path}")

    albedo = TextureService.make_test_texture("noise", size, channels=3, seed=seed)
    TextureService.save_texture(albedo, directory / "albedo.png")
    normals = TextureService.make_test_texture("normals", size, seed=seed)
    TextureService.save_texture(normals, directory / "normals.pfm")
    console.print("[green]✓[/green] Wrote albedo and normal map")

    spec = SceneSpec(
        albedo=Path("albedo.png"),
        normal_map=Path("normals.pfm"),
        zoom=8.0,
        shading=BlinnPhongShading(),
        resolution=(256, 256),
    )
    scene_path = directory / "scene.json"
    scene_path.write_text(spec.model_dump_json(indent=2))
    console.print(f"[green]✓[/green] Wrote scene: {scene_path}")
    return scene_path


def init_lab():
    """Create the run ledger and optionally a demo scene"""
    console.print("[cyan]Initializing stflab...[/cyan]")

    try:
        console.print("Creating database tables...")
        create_db_and_tables()
        console.print("[green]✓[/green] Database tables created successfully!")

        if "--demo" in sys.argv or Confirm.ask("Do you want to create a demo scene?", default=True):
            scene_path = create_demo_scene(Path(settings.output_dir) / "demo", seed=settings.default_seed)
            console.print("\n[cyan]You can now render with:[/cyan]")
            console.print(f"  stflab render --scene {scene_path} --estimator wis")

        console.print("\n[green]✓[/green] Lab initialization complete!")

    except Exception as e:
        console.print(f"[red]✗[/red] Lab initialization failed: {e}")
        sys.exit(1)


if __name__ == "__main__":
    init_lab()
