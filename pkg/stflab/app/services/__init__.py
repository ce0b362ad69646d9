from .texture_service import TextureService
from .wave_service import InactiveLaneError, WaveService
from .estimator_service import EstimatorService
from .noise_service import NoiseService
from .footprint_service import FootprintService
from .render_service import RenderService
from .experiment_service import ExperimentService

__all__ = [
    "TextureService",
    "WaveService",
    "InactiveLaneError",
    "EstimatorService",
    "NoiseService",
    "FootprintService",
    "RenderService",
    "ExperimentService",
]
