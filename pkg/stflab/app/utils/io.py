"""File formats: PNG via Pillow, PFM, and the raw float32 ``STFT`` container."""

import csv
import struct
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple
import numpy as np
from PIL import Image


MAGIC = b"STFT"
_HEADER = struct.Struct("<4sIII")
_MASK_HEADER = struct.Struct("<4sIIII")
_PNG_CHANNELS = {"L": 1, "LA": 2, "RGB": 3, "RGBA": 4}
_PNG_MODES = {count: mode for mode, count in _PNG_CHANNELS.items()}


class UnsupportedFormatError(ValueError):
    pass


def _require_file(path: Path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"File {path} not found")
    return path


def srgb_to_linear(values: np.ndarray) -> np.ndarray:
    return np.where(values <= 0.04045, values / 12.92, ((values + 0.055) / 1.055) ** 2.4)


def read_png(path: Path, srgb: bool = False) -> np.ndarray:
    path = _require_file(path)
    with Image.open(path) as image:
        image.load()
        if image.mode in ("I;16", "I;16B", "I;16L", "I"):
            array = np.asarray(image, dtype=np.float64) / 65535.0
            array = array[:, :, None]
        else:
            if image.mode not in _PNG_CHANNELS:
                image = image.convert("RGBA" if "A" in image.getbands() else "RGB")
            array = np.asarray(image, dtype=np.float64) / 255.0
            if array.ndim == 2:
                array = array[:, :, None]
    if array.size == 0:
        raise UnsupportedFormatError(f"Image {path} is empty")
    if srgb:
        colour = min(array.shape[2], 3) if array.shape[2] != 2 else 1
        array = array.copy()
        array[:, :, :colour] = srgb_to_linear(array[:, :, :colour])
    return array


def write_png(path: Path, image: np.ndarray):
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        image = image[:, :, None]
    channels = image.shape[2]
    if channels not in _PNG_MODES:
        raise UnsupportedFormatError(f"Cannot write {channels}-channel PNG")
    data = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    if channels == 1:
        data = data[:, :, 0]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(data).save(path)


def read_raw_f32(path: Path) -> np.ndarray:
    path = _require_file(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise UnsupportedFormatError(f"{path} is too short for an STFT header")
    magic, width, height, channels = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise UnsupportedFormatError(f"{path} has bad magic {magic!r}")
    if width == 0 or height == 0 or channels == 0:
        raise UnsupportedFormatError(f"{path} has zero-sized dimensions")
    count = width * height * channels
    data = np.frombuffer(blob, dtype="<f4", count=count, offset=_HEADER.size)
    return data.astype(np.float64).reshape(height, width, channels)


def write_raw_f32(path: Path, array: np.ndarray):
    array = np.asarray(array)
    if array.ndim == 2:
        array = array[:, :, None]
    height, width, channels = array.shape
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(_HEADER.pack(MAGIC, width, height, channels))
        handle.write(np.ascontiguousarray(array, dtype="<f4").tobytes())


def read_pfm(path: Path) -> np.ndarray:
    path = _require_file(path)
    with open(path, "rb") as handle:
        kind = handle.readline().strip()
        if kind not in (b"PF", b"Pf"):
            raise UnsupportedFormatError(f"{path} is not a PFM file")
        width, height = (int(token) for token in handle.readline().split())
        scale = float(handle.readline().strip())
        channels = 3 if kind == b"PF" else 1
        dtype = "<f4" if scale < 0 else ">f4"
        data = np.frombuffer(handle.read(), dtype=dtype, count=width * height * channels)
    if width == 0 or height == 0:
        raise UnsupportedFormatError(f"{path} has zero-sized dimensions")
    # PFM rows run bottom to top
    return np.flipud(data.astype(np.float64).reshape(height, width, channels)).copy()


def write_pfm(path: Path, array: np.ndarray):
    array = np.asarray(array, dtype=np.float64)
    if array.ndim == 2:
        array = array[:, :, None]
    height, width, channels = array.shape
    if channels not in (1, 3):
        raise UnsupportedFormatError("PFM stores 1 or 3 channels")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(b"PF\n" if channels == 3 else b"Pf\n")
        handle.write(f"{width} {height}\n-1.0\n".encode("ascii"))
        handle.write(np.ascontiguousarray(np.flipud(array), dtype="<f4").tobytes())


def read_mask_bin(path: Path) -> np.ndarray:
    """Mask values as a (depth, height, width) array."""
    path = _require_file(path)
    blob = path.read_bytes()
    if len(blob) < _MASK_HEADER.size:
        raise UnsupportedFormatError(f"{path} is too short for a mask header")
    magic, width, height, channels, depth = _MASK_HEADER.unpack_from(blob)
    if magic != MAGIC or channels != 1:
        raise UnsupportedFormatError(f"{path} is not a scalar STFT mask")
    count = width * height * depth
    data = np.frombuffer(blob, dtype="<f4", count=count, offset=_MASK_HEADER.size)
    return data.astype(np.float64).reshape(depth, height, width)


def write_mask_bin(path: Path, values: np.ndarray):
    depth, height, width = values.shape
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as handle:
        handle.write(_MASK_HEADER.pack(MAGIC, width, height, 1, depth))
        handle.write(np.ascontiguousarray(values, dtype="<f4").tobytes())


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format_cell(cell) for cell in row])


def read_csv(path: Path) -> Tuple[List[str], List[List[str]]]:
    with open(_require_file(path), newline="") as handle:
        rows = list(csv.reader(handle))
    return rows[0], rows[1:]


def _format_cell(cell) -> str:
    if isinstance(cell, float):
        return f"{cell:.6f}"
    return str(cell)
