import logging
from pathlib import Path
from typing import Optional, Sequence, Union
import numpy as np
from scipy import ndimage
from ..models.texture import (
    AddressMode,
    FilterKind,
    FilterSupport,
    SupportEntry,
    Texture,
    TextureFormat,
)
from ..utils import filtering
from ..utils import io
from ..utils.io import UnsupportedFormatError


logger = logging.getLogger(__name__)

TEST_TEXTURE_KINDS = ("checker", "noise", "ramp", "constant", "normals")

_SUFFIX_FORMATS = {
    ".png": TextureFormat.PNG,
    ".pfm": TextureFormat.PFM,
    ".bin": TextureFormat.RAW_F32,
    ".raw": TextureFormat.RAW_F32,
    ".f32": TextureFormat.RAW_F32,
}


def _format_for(path: Path, format: Optional[Union[TextureFormat, str]]) -> TextureFormat:
    if format is not None:
        return TextureFormat(format)
    suffix = Path(path).suffix.lower()
    if suffix not in _SUFFIX_FORMATS:
        raise UnsupportedFormatError(f"Cannot infer texture format from '{suffix}'")
    return _SUFFIX_FORMATS[suffix]


class TextureService:
    @staticmethod
    def load_texture(
        path: Path,
        format: Optional[Union[TextureFormat, str]] = None,
        srgb: bool = False,
        address_mode: AddressMode = AddressMode.CLAMP,
    ) -> Texture:
        """Load a texture as linear floats; ``srgb`` applies the sRGB decode to 8-bit PNGs."""
        texture_format = _format_for(path, format)
        if texture_format is TextureFormat.PNG:
            array = io.read_png(path, srgb=srgb)
        elif texture_format is TextureFormat.PFM:
            array = io.read_pfm(path)
        else:
            array = io.read_raw_f32(path)

        if array.shape[2] > 4:
            raise UnsupportedFormatError(f"Unsupported channel count {array.shape[2]} (max 4)")
        if array.shape[0] == 0 or array.shape[1] == 0:
            raise UnsupportedFormatError(f"Texture {path} is zero-sized")

        texture = Texture.from_array(array, address_mode=address_mode)
        logger.debug(f"Loaded {texture!r} from {path}")
        return texture

    @staticmethod
    def save_texture(
        tex: Texture, path: Path, format: Optional[Union[TextureFormat, str]] = None
    ) -> Path:
        texture_format = _format_for(path, format)
        if texture_format is TextureFormat.PNG:
            io.write_png(path, tex.data)
        elif texture_format is TextureFormat.PFM:
            io.write_pfm(path, tex.data)
        else:
            io.write_raw_f32(path, tex.data)
        return Path(path)

    @staticmethod
    def fetch_texel(tex: Texture, coords: Sequence[int]) -> np.ndarray:
        return filtering.fetch(tex, np.asarray(coords, dtype=np.int64)).copy()

    @staticmethod
    def filter_weight(kind: FilterKind, offset: Sequence[float]) -> float:
        return float(filtering.filter_weights(kind, np.asarray(offset, dtype=np.float64)))

    @staticmethod
    def get_filter_pmf(
        kind: FilterKind, lookup_point: Sequence[float], texel_coords: Sequence[int]
    ) -> float:
        offset = np.asarray(lookup_point, dtype=np.float64) - np.asarray(texel_coords)
        return TextureService.filter_weight(kind, offset)

    @staticmethod
    def filter_support(kind: FilterKind, tex: Texture, lookup_point: Sequence[float]) -> FilterSupport:
        """All 4 (bilinear) or 16 (B-spline) support texels, zero weights included.

        Coordinates are left unaddressed so lanes agree on texel identity; the
        texture's address mode only applies when values are fetched.
        """
        lookup = np.asarray(lookup_point, dtype=np.float64)
        coords, weights = filtering.support_arrays(kind, lookup)
        entries = [
            SupportEntry(texel=(int(x), int(y)), weight=float(w))
            for (x, y), w in zip(coords, weights)
        ]
        return FilterSupport(entries=entries, lookup_point=(float(lookup[0]), float(lookup[1])))

    @staticmethod
    def reference_filter(tex: Texture, kind: FilterKind, lookup_point: Sequence[float]) -> np.ndarray:
        return filtering.reference_values(tex, kind, np.asarray(lookup_point, dtype=np.float64))

    @staticmethod
    def make_test_texture(
        kind: str,
        width: int = 64,
        height: Optional[int] = None,
        channels: int = 1,
        seed: int = 0,
        value: float = 0.5,
        address_mode: AddressMode = AddressMode.CLAMP,
    ) -> Texture:
        """Deterministic synthetic textures.

        ``checker`` alternates per texel (highest frequency), ``noise`` is
        uniform random, ``ramp`` rises linearly along x, ``constant`` fills
        ``value`` and ``normals`` encodes a smooth bump field as a normal map.
        """
        if kind not in TEST_TEXTURE_KINDS:
            raise ValueError(f"Unknown test texture '{kind}', expected one of {TEST_TEXTURE_KINDS}")
        height = height or width
        rng = np.random.default_rng(seed)

        if kind == "checker":
            ys, xs = np.mgrid[0:height, 0:width]
            base = ((xs + ys) % 2).astype(np.float64)
            array = np.repeat(base[:, :, None], channels, axis=2)
        elif kind == "noise":
            array = rng.random((height, width, channels))
        elif kind == "ramp":
            ramp = np.arange(width, dtype=np.float64) / max(width - 1, 1)
            array = np.broadcast_to(ramp[None, :, None], (height, width, channels)).copy()
        elif kind == "constant":
            array = np.full((height, width, channels), float(value))
        else:
            bumps = ndimage.gaussian_filter(rng.random((height, width)), sigma=2.0, mode="wrap")
            bumps = (bumps - bumps.mean()) * 40.0
            dy, dx = np.gradient(bumps)
            normals = np.stack([-dx, -dy, np.ones_like(bumps)], axis=-1)
            normals /= np.linalg.norm(normals, axis=-1, keepdims=True)
            array = 0.5 * (normals + 1.0)

        return Texture.from_array(array, address_mode=address_mode)
