"""Vectorized reconstruction-filter kernels shared by the services.

Coordinates are (x, y) pairs in continuous texel space where texel (i, j) sits
at integer position (i, j); a uv lookup maps to ``uv * dims - 0.5``.
"""

import numpy as np
from ..models.texture import AddressMode, FilterKind, Texture


def kernel_1d(kind: FilterKind, distance: np.ndarray) -> np.ndarray:
    d = np.abs(np.asarray(distance, dtype=np.float64))
    if kind is FilterKind.BILINEAR:
        return np.maximum(0.0, 1.0 - d)
    inner = (3.0 * d**3 - 6.0 * d**2 + 4.0) / 6.0
    outer = (2.0 - d) ** 3 / 6.0
    return np.where(d < 1.0, inner, np.where(d < 2.0, outer, 0.0))


def filter_weights(kind: FilterKind, offsets: np.ndarray) -> np.ndarray:
    """Separable filter weight for ``offsets = lookup - texel`` of shape (..., 2)."""
    offsets = np.asarray(offsets, dtype=np.float64)
    return kernel_1d(kind, offsets[..., 0]) * kernel_1d(kind, offsets[..., 1])


def support_arrays(kind: FilterKind, lookup: np.ndarray):
    """Support texel coords (..., K, 2) and weights (..., K), rows of y outer, x inner."""
    lookup = np.asarray(lookup, dtype=np.float64)
    taps = np.arange(kind.taps_1d)
    shift = 0 if kind is FilterKind.BILINEAR else 1
    base = np.floor(lookup).astype(np.int64) - shift

    xs = base[..., 0:1] + taps
    ys = base[..., 1:2] + taps
    wx = kernel_1d(kind, lookup[..., 0:1] - xs)
    wy = kernel_1d(kind, lookup[..., 1:2] - ys)

    k = kind.taps_1d
    batch = lookup.shape[:-1]
    cx = np.broadcast_to(xs[..., None, :], batch + (k, k))
    cy = np.broadcast_to(ys[..., :, None], batch + (k, k))
    coords = np.stack([cx, cy], axis=-1).reshape(batch + (k * k, 2))
    weights = (wy[..., :, None] * wx[..., None, :]).reshape(batch + (k * k,))
    return coords, weights


def resolve_coords(tex: Texture, coords: np.ndarray):
    coords = np.asarray(coords, dtype=np.int64)
    x = coords[..., 0]
    y = coords[..., 1]
    if tex.address_mode is AddressMode.WRAP:
        return np.mod(x, tex.width), np.mod(y, tex.height)
    return np.clip(x, 0, tex.width - 1), np.clip(y, 0, tex.height - 1)


def fetch(tex: Texture, coords: np.ndarray) -> np.ndarray:
    """Texel values (..., channels) for integer coords (..., 2) after addressing."""
    x, y = resolve_coords(tex, coords)
    return tex.data[y, x]


def reference_values(tex: Texture, kind: FilterKind, lookup: np.ndarray) -> np.ndarray:
    coords, weights = support_arrays(kind, lookup)
    return np.sum(weights[..., None] * fetch(tex, coords), axis=-2)


def sampling_weights(weights: np.ndarray, uniform: bool = False) -> np.ndarray:
    """Selection probabilities over support entries (filter weights or uniform over nonzero)."""
    if not uniform:
        return weights
    inside = (weights > 0.0).astype(np.float64)
    return inside / inside.sum(axis=-1, keepdims=True)


def invert_cdf(probabilities: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index of the first entry whose running sum exceeds ``u``; zero entries are never picked."""
    cdf = np.cumsum(probabilities, axis=-1)
    u = np.asarray(u, dtype=np.float64)
    index = np.sum(cdf <= u[..., None], axis=-1)
    k = probabilities.shape[-1]
    last_nonzero = k - 1 - np.argmax(probabilities[..., ::-1] > 0.0, axis=-1)
    return np.where(index >= k, last_nonzero, index)
