from .texture import AddressMode, FilterKind, FilterSupport, SupportEntry, Texture, TextureFormat
from .wave import (
    FootprintKind,
    FootprintSet,
    FootprintTable,
    LaneRecord,
    LaneSample,
    WaveConfig,
    WaveTiling,
)
from .estimator import Estimator, EstimatorContext, EstimatorKind, SamplingMode
from .noise import NoiseMask, NoiseSource, NoiseVariant, StbnParams
from .footprint import OptimizationResult, OptParams, UsageHistogram
from .scene import (
    AlbedoShading,
    BlinnPhongShading,
    FrameDiagnostics,
    FrameResult,
    Metrics,
    Scene,
    SceneSpec,
    StudyRow,
    TaylorFunction,
    TaylorReport,
)
from .run import ExperimentRun

__all__ = [
    "AddressMode",
    "FilterKind",
    "FilterSupport",
    "SupportEntry",
    "Texture",
    "TextureFormat",
    "FootprintKind",
    "FootprintSet",
    "FootprintTable",
    "LaneRecord",
    "LaneSample",
    "WaveConfig",
    "WaveTiling",
    "Estimator",
    "EstimatorContext",
    "EstimatorKind",
    "SamplingMode",
    "NoiseMask",
    "NoiseSource",
    "NoiseVariant",
    "StbnParams",
    "OptimizationResult",
    "OptParams",
    "UsageHistogram",
    "AlbedoShading",
    "BlinnPhongShading",
    "FrameDiagnostics",
    "FrameResult",
    "Metrics",
    "Scene",
    "SceneSpec",
    "StudyRow",
    "TaylorFunction",
    "TaylorReport",
    "ExperimentRun",
]
