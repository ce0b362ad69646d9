import json
import logging
import math
from pathlib import Path
from typing import List, Optional, Tuple, Union
import numpy as np
from scipy import ndimage
from ..config import settings
from ..models.estimator import Estimator, EstimatorKind, SamplingMode
from ..models.noise import NoiseSource
from ..models.scene import (
    AlbedoShading,
    FrameDiagnostics,
    FrameResult,
    Metrics,
    Scene,
    SceneSpec,
    Shading,
)
from ..models.texture import FilterKind, Texture
from ..models.wave import FootprintSet, FootprintTable, WaveConfig, WaveTiling
from ..utils import filtering
from .estimator_service import EstimatorService, technique_probabilities
from .noise_service import NoiseService
from .texture_service import TextureService


logger = logging.getLogger(__name__)

PSNR_SENTINEL_DB = 99.0


def _normalize(vectors: np.ndarray) -> np.ndarray:
    length = np.linalg.norm(vectors, axis=-1, keepdims=True)
    up = np.zeros_like(vectors)
    up[..., 2] = 1.0
    return np.where(length > 0.0, vectors / np.where(length > 0.0, length, 1.0), up)


def decode_normals(encoded: np.ndarray) -> np.ndarray:
    """[0, 1]^3 normal-map data to unit vectors."""
    return _normalize(2.0 * np.asarray(encoded, dtype=np.float64) - 1.0)


def _lookup_points(tex: Texture, scene: Scene, pixels: np.ndarray) -> np.ndarray:
    dims = np.array([tex.width, tex.height], dtype=np.float64)
    offset = np.asarray(scene.uv_offset, dtype=np.float64) * dims
    return (pixels + 0.5) / scene.zoom + offset - 0.5


class _TextureEstimate:
    """Phase 1 and 2 of the sharing loop for one texture over a batch of waves."""

    def __init__(self, tex: Texture, kind: FilterKind, lookup: np.ndarray, u: np.ndarray, sampling):
        self.tex = tex
        self.kind = kind
        self.lookup = lookup
        self.sampling = sampling
        self.support_coords, self.support_weights = filtering.support_arrays(kind, lookup)
        probabilities = filtering.sampling_weights(
            self.support_weights, uniform=sampling is SamplingMode.UNIFORM
        )
        index = filtering.invert_cdf(probabilities, u)
        picked = np.take_along_axis(self.support_coords, index[..., None, None], axis=-2)
        self.coords = picked[..., 0, :]
        if sampling is SamplingMode.FILTER:
            self.pmf = filtering.filter_weights(kind, lookup - self.coords)
        else:
            self.pmf = np.take_along_axis(probabilities, index[..., None], axis=-1)[..., 0]
        self.values = filtering.fetch(tex, self.coords)

    def estimate(
        self,
        estimator: EstimatorKind,
        table: np.ndarray,
        with_bounds: bool = False,
        active: Optional[np.ndarray] = None,
    ):
        """Per-lane estimates; samples of lanes outside ``active`` get zero filter weight."""
        waves, lanes = self.coords.shape[:2]
        n = table.shape[1]
        batch = waves * lanes
        usable = np.ones((batch, n), dtype=bool)
        if active is not None:
            usable = active[:, table].reshape(batch, n)
            # a lane always keeps its own sample
            usable[:, 0] = True

        shared_coords = self.coords[:, table].reshape(batch, n, 2)
        shared_pmf = self.pmf[:, table].reshape(batch, n)
        shared_values = self.values[:, table].reshape(batch, n, -1)
        own_lookup = self.lookup.reshape(batch, 1, 2)
        fc = np.where(usable, filtering.filter_weights(self.kind, own_lookup - shared_coords), 0.0)

        variant = estimator.variant
        if variant is Estimator.ONE_TAP:
            value = shared_values[:, 0]
        elif variant is Estimator.IS:
            value = EstimatorService.batch_is(fc, shared_pmf, shared_values)
        elif variant in (Estimator.MIS, Estimator.PAIRWISE_MIS):
            shared_lookup = self.lookup[:, table].reshape(batch, n, 2)
            pmat = technique_probabilities(self.kind, shared_lookup, shared_coords, self.sampling)
            if variant is Estimator.MIS:
                value = EstimatorService.batch_mis(fc, shared_values, pmat)
            else:
                value = EstimatorService.batch_pmis(fc, shared_values, pmat)
        elif variant is Estimator.REGRESSION:
            value = EstimatorService.batch_regression(fc, shared_pmf, shared_values)
        else:
            value = EstimatorService.batch_wis(fc, shared_pmf, shared_values)

        if estimator.clamp:
            value = EstimatorService.batch_clamp(value, fc, shared_values)

        exact = np.zeros(batch, dtype=bool)
        if estimator.exact_filtering:
            exact_value, exact = EstimatorService.batch_exact(
                self.support_coords.reshape(batch, -1, 2),
                self.support_weights.reshape(batch, -1),
                shared_coords,
                shared_values,
                usable,
            )
            value = np.where(exact[:, None], exact_value, value)

        bounds = EstimatorService.batch_hull(fc, shared_values) if with_bounds else None
        return value, exact, bounds


class RenderService:
    @staticmethod
    def load_scene(path: Path) -> Scene:
        """Scene JSON with texture paths relative to the JSON file."""
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"Scene file {path} not found")
        spec = SceneSpec.model_validate(json.loads(path.read_text()))

        def resolve(texture_path: Path) -> Path:
            return texture_path if texture_path.is_absolute() else path.parent / texture_path

        albedo = TextureService.load_texture(resolve(spec.albedo))
        normal_map = None
        if spec.normal_map:
            normal_map = TextureService.load_texture(resolve(spec.normal_map))
        return Scene(
            albedo=albedo,
            normal_map=normal_map,
            zoom=spec.zoom,
            uv_offset=spec.uv_offset,
            shading=spec.shading,
            resolution=spec.resolution,
        )

    @staticmethod
    def shade(
        shading: Shading, albedo_value: np.ndarray, normal_value: Optional[np.ndarray] = None
    ) -> np.ndarray:
        """Albedo passes through; Blinn-Phong adds a white specular lobe to the diffuse term."""
        albedo_value = np.asarray(albedo_value, dtype=np.float64)
        if isinstance(shading, AlbedoShading):
            return albedo_value

        if normal_value is None:
            normal = np.zeros(albedo_value.shape[:-1] + (3,))
            normal[..., 2] = 1.0
        else:
            normal = _normalize(np.asarray(normal_value, dtype=np.float64))
        light = _normalize(np.asarray(shading.light_dir, dtype=np.float64))
        view = _normalize(np.asarray(shading.view_dir, dtype=np.float64))
        half = _normalize(light + view)

        diffuse = np.maximum(0.0, normal @ light)
        specular = np.maximum(0.0, normal @ half) ** shading.exponent
        return albedo_value * diffuse[..., None] + specular[..., None]

    @staticmethod
    def render_frame(
        scene: Scene,
        estimator: EstimatorKind,
        filter: FilterKind,
        footprint: Union[FootprintTable, FootprintSet],
        noise: NoiseSource,
        frame_index: int = 0,
        spp: int = 1,
        sampling: SamplingMode = SamplingMode.FILTER,
        cfg: Optional[WaveConfig] = None,
        with_diagnostics: bool = False,
    ) -> FrameResult:
        """Render one frame with the wave sharing loop; ``spp`` averages shaded samples."""
        estimator.check_filter(filter)
        if spp < 1:
            raise ValueError("Samples per pixel must be at least 1")
        table = footprint.for_frame(frame_index) if isinstance(footprint, FootprintSet) else footprint
        if cfg is not None and (cfg.lanes, cfg.shape) != (table.lanes, table.shape):
            raise ValueError(
                f"Footprint for {table.shape} waves does not match wave config {cfg.shape}"
            )
        cfg = table.wave_config

        width, height = scene.resolution
        tiling = WaveTiling(config=cfg, width=width, height=height)
        reference = RenderService.reference_image(scene, filter)
        padded_w, padded_h = tiling.padded_size
        channels = reference.shape[2]

        image = np.zeros((padded_h, padded_w, channels))
        diagnostics = None
        if with_diagnostics:
            albedo_channels = scene.albedo.channels
            filtered = np.zeros((padded_h, padded_w, albedo_channels))
            hull_lo = np.zeros_like(filtered)
            hull_hi = np.zeros_like(filtered)
            exact_mask = np.zeros((padded_h, padded_w), dtype=bool)

        lane_table = table.as_array()
        pixels = tiling.lane_pixels()
        active = tiling.active_mask()
        chunk = settings.render_chunk_waves
        for start in range(0, tiling.wave_count, chunk):
            wave_pixels = pixels[start : start + chunk]
            wave_active = active[start : start + chunk]
            px, py = wave_pixels[..., 0], wave_pixels[..., 1]
            albedo_lookup = _lookup_points(scene.albedo, scene, wave_pixels)
            normal_lookup = (
                _lookup_points(scene.normal_map, scene, wave_pixels) if scene.normal_map else None
            )

            for sample in range(spp):
                u = NoiseService.sample_source(noise, px, py, frame_index * spp + sample)
                albedo = _TextureEstimate(scene.albedo, filter, albedo_lookup, u, sampling)
                record = with_diagnostics and sample == 0
                albedo_value, exact, bounds = albedo.estimate(
                    estimator, lane_table, record, wave_active
                )

                normal_value = None
                if scene.normal_map is not None:
                    normals = _TextureEstimate(scene.normal_map, filter, normal_lookup, u, sampling)
                    normal_value = decode_normals(
                        normals.estimate(estimator, lane_table, active=wave_active)[0]
                    )

                color = RenderService.shade(scene.shading, albedo_value, normal_value)
                image[py.ravel(), px.ravel()] += color

                if record:
                    filtered[py.ravel(), px.ravel()] = albedo_value
                    hull_lo[py.ravel(), px.ravel()] = bounds[0]
                    hull_hi[py.ravel(), px.ravel()] = bounds[1]
                    exact_mask[py.ravel(), px.ravel()] = exact

        image = image[:height, :width] / spp
        if with_diagnostics:
            diagnostics = FrameDiagnostics(
                filtered=filtered[:height, :width],
                hull_lo=hull_lo[:height, :width],
                hull_hi=hull_hi[:height, :width],
                exact_mask=exact_mask[:height, :width],
            )

        metrics = RenderService.compute_metrics(image, reference)
        logger.debug(
            f"Frame {frame_index} {estimator.label}/{filter.value}/{table.kind.value}: "
            f"psnr {metrics.psnr_db:.2f} dB"
        )
        return FrameResult(image=image, reference=reference, metrics=metrics, diagnostics=diagnostics)

    @staticmethod
    def reference_image(scene: Scene, filter: FilterKind) -> np.ndarray:
        """Filtering-before-shading ground truth."""
        width, height = scene.resolution
        ys, xs = np.mgrid[0:height, 0:width]
        pixels = np.stack([xs, ys], axis=-1).astype(np.float64)

        albedo = filtering.reference_values(
            scene.albedo, filter, _lookup_points(scene.albedo, scene, pixels)
        )
        normal = None
        if scene.normal_map is not None:
            raw = filtering.reference_values(
                scene.normal_map, filter, _lookup_points(scene.normal_map, scene, pixels)
            )
            normal = decode_normals(raw)
        return RenderService.shade(scene.shading, albedo, normal)

    @staticmethod
    def accumulate_ema(
        history: np.ndarray, frame: np.ndarray, alpha: float, neighborhood_clamp: bool = False
    ) -> np.ndarray:
        """Exponential moving average; optionally clamp history to the frame's 3x3 min/max first."""
        history = np.asarray(history, dtype=np.float64)
        frame = np.asarray(frame, dtype=np.float64)
        if history.shape != frame.shape:
            raise ValueError(f"History shape {history.shape} does not match frame {frame.shape}")
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"EMA alpha must lie in (0, 1], got {alpha}")

        if neighborhood_clamp:
            size = (3, 3) + (1,) * (frame.ndim - 2)
            lo = ndimage.minimum_filter(frame, size=size, mode="nearest")
            hi = ndimage.maximum_filter(frame, size=size, mode="nearest")
            history = np.clip(history, lo, hi)
        return alpha * frame + (1.0 - alpha) * history

    @staticmethod
    def compute_metrics(
        image: np.ndarray, reference: np.ndarray, mask: Optional[np.ndarray] = None
    ) -> Metrics:
        """Channel-averaged MSE and PSNR with peak 1.0, capped at the 99 dB sentinel."""
        image = np.asarray(image, dtype=np.float64)
        reference = np.asarray(reference, dtype=np.float64)
        if image.shape != reference.shape:
            raise ValueError(f"Image shape {image.shape} does not match reference {reference.shape}")

        error = (image - reference) ** 2
        if mask is not None:
            error = error[np.asarray(mask, dtype=bool)]
        mse = float(np.mean(error))
        return Metrics(mse=mse, psnr_db=RenderService.psnr(mse))

    @staticmethod
    def psnr(mse: float) -> float:
        if mse <= 0.0:
            return PSNR_SENTINEL_DB
        return min(PSNR_SENTINEL_DB, 10.0 * math.log10(1.0 / mse))

    @staticmethod
    def render_sequence(
        scene: Scene,
        estimator: EstimatorKind,
        filter: FilterKind,
        footprint: Union[FootprintTable, FootprintSet],
        noise: NoiseSource,
        frames: int,
        ema_alpha: float = 0.1,
        ema_clamp: bool = False,
        spp: int = 1,
        sampling: SamplingMode = SamplingMode.FILTER,
    ) -> Tuple[FrameResult, List[Metrics]]:
        """Render ``frames`` frames into an EMA history; the first frame seeds the history."""
        if frames < 1:
            raise ValueError("At least one frame is required")

        history = None
        reference = None
        per_frame = []
        for frame_index in range(frames):
            result = RenderService.render_frame(
                scene, estimator, filter, footprint, noise, frame_index, spp, sampling
            )
            per_frame.append(result.metrics)
            reference = result.reference
            if history is None:
                history = result.image
            else:
                history = RenderService.accumulate_ema(history, result.image, ema_alpha, ema_clamp)

        accumulated = FrameResult(
            image=history,
            reference=reference,
            metrics=RenderService.compute_metrics(history, reference),
        )
        return accumulated, per_frame
