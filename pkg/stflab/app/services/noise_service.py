import logging
import math
from pathlib import Path
from typing import List, Sequence, Tuple
import numpy as np
from ..models.noise import NoiseMask, NoiseSource, StbnParams
from ..utils import io
from ..utils.logging import log_action, log_artifact_written


logger = logging.getLogger(__name__)

MAX_MASK_DIM = 128
INITIAL_DENSITY = 0.1

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)


def _to_u64(values) -> np.ndarray:
    return np.asarray(values, dtype=np.int64).astype(np.uint64)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX_1
    z = (z ^ (z >> np.uint64(27))) * _MIX_2
    return z ^ (z >> np.uint64(31))


def _is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


class _EnergyField:
    """Toroidal 3D energy of a binary site pattern under a separable Gaussian splat."""

    def __init__(self, dims: Tuple[int, int, int], params: StbnParams):
        width, height, depth = dims
        self.energy = np.zeros((depth, height, width))
        self.shape = self.energy.shape
        self.boost = params.quad_boost

        self.offsets = [
            self._window(depth, params.temporal_sigma),
            self._window(height, params.spatial_sigma),
            self._window(width, params.spatial_sigma),
        ]
        dt, dy, dx = (self._toroidal(d, size) for d, size in zip(self.offsets, self.shape))
        spatial = np.exp(-(dy[:, None] ** 2 + dx[None, :] ** 2) / (2.0 * params.spatial_sigma**2))
        temporal = np.exp(-(dt**2) / (2.0 * params.temporal_sigma**2))
        self.kernel = temporal[:, None, None] * spatial[None, :, :]
        self.spatial_sigma = params.spatial_sigma

    @staticmethod
    def _window(size: int, sigma: float) -> np.ndarray:
        radius = int(math.ceil(4.0 * sigma))
        if 2 * radius + 1 >= size:
            return np.arange(size) - size // 2
        return np.arange(-radius, radius + 1)

    @staticmethod
    def _toroidal(offsets: np.ndarray, size: int) -> np.ndarray:
        distance = np.abs(offsets)
        return np.minimum(distance, size - distance).astype(np.float64)

    def splat(self, site: Tuple[int, int, int], sign: float):
        t, y, x = site
        depth, height, width = self.shape
        index = np.ix_(
            (t + self.offsets[0]) % depth,
            (y + self.offsets[1]) % height,
            (x + self.offsets[2]) % width,
        )
        self.energy[index] += sign * self.kernel

        if self.boost > 1.0 and height % 2 == 0 and width % 2 == 0:
            qy, qx = y - y % 2, x - x % 2
            for py in (qy, qy + 1):
                for px in (qx, qx + 1):
                    if (py, px) == (y, x):
                        continue
                    distance2 = (py - y) ** 2 + (px - x) ** 2
                    gain = math.exp(-distance2 / (2.0 * self.spatial_sigma**2))
                    self.energy[t, py, px] += sign * (self.boost - 1.0) * gain

    def tightest_cluster(self, pattern: np.ndarray, t: int) -> Tuple[int, int, int]:
        index = int(np.argmax(np.where(pattern[t], self.energy[t], -np.inf)))
        return (t,) + divmod(index, self.shape[2])

    def largest_void(self, pattern: np.ndarray, t: int) -> Tuple[int, int, int]:
        index = int(np.argmin(np.where(pattern[t], np.inf, self.energy[t])))
        return (t,) + divmod(index, self.shape[2])


class NoiseService:
    @staticmethod
    def white_noise(seed: int, pixel: Tuple[int, int], frame: int) -> float:
        return float(NoiseService.white_noise_array(seed, pixel[0], pixel[1], frame))

    @staticmethod
    def white_noise_array(seed: int, xs, ys, frame) -> np.ndarray:
        """Hashed uniform values in [0, 1) for broadcastable pixel/frame arrays."""
        with np.errstate(over="ignore"):
            h = _mix(_to_u64(seed) + _GOLDEN)
            for component in (xs, ys, frame):
                h = _mix(h ^ (_to_u64(component) + _GOLDEN))
        return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)

    @staticmethod
    def white_noise_mask(dims: Tuple[int, int, int], seed: int = 0) -> NoiseMask:
        width, height, depth = dims
        t, y, x = np.meshgrid(np.arange(depth), np.arange(height), np.arange(width), indexing="ij")
        return NoiseMask.from_array(NoiseService.white_noise_array(seed, x, y, t))

    @staticmethod
    @log_action("Generate spatiotemporal blue noise")
    def generate_stbn(dims: Tuple[int, int, int], params: StbnParams) -> NoiseMask:
        """Void-and-cluster ranking under a 3D energy, with exact ranks in every time slice."""
        dims = tuple(int(d) for d in dims)
        if len(dims) != 3 or not all(_is_power_of_two(d) and d <= MAX_MASK_DIM for d in dims):
            raise ValueError(f"Mask dims must be powers of two up to {MAX_MASK_DIM}, got {dims}")

        width, height, depth = dims
        per_slice = width * height
        if per_slice == 1:
            return NoiseMask.from_array(np.full((depth, 1, 1), 0.5))

        rng = np.random.default_rng(params.seed)
        field = _EnergyField(dims, params)
        initial_count = min(max(1, int(round(INITIAL_DENSITY * per_slice))), per_slice - 1)

        pattern = np.zeros((depth, height, width), dtype=bool)
        for t in range(depth):
            for index in rng.choice(per_slice, size=initial_count, replace=False):
                site = (t,) + divmod(int(index), width)
                pattern[site] = True
                field.splat(site, 1.0)

        NoiseService._relax(pattern, field, per_slice)
        initial = pattern.copy()
        initial_energy = field.energy.copy()
        ranks = np.zeros((depth, height, width), dtype=np.int64)

        for rank in range(initial_count - 1, -1, -1):
            for t in range(depth):
                site = field.tightest_cluster(pattern, t)
                pattern[site] = False
                field.splat(site, -1.0)
                ranks[site] = rank

        pattern = initial
        field.energy = initial_energy
        for rank in range(initial_count, per_slice):
            for t in range(depth):
                site = field.largest_void(pattern, t)
                pattern[site] = True
                field.splat(site, 1.0)
                ranks[site] = rank

        logger.info(
            f"Generated {width}x{height}x{depth} STBN mask "
            f"(sigma_s={params.spatial_sigma}, sigma_t={params.temporal_sigma}, "
            f"quad_boost={params.quad_boost}, seed={params.seed})"
        )
        return NoiseMask.from_array((ranks + 0.5) / per_slice)

    @staticmethod
    def _relax(pattern: np.ndarray, field: _EnergyField, max_passes: int):
        """Move each slice's tightest cluster to its largest void until nothing moves."""
        for sweep in range(max_passes):
            moved = False
            for t in range(pattern.shape[0]):
                cluster = field.tightest_cluster(pattern, t)
                pattern[cluster] = False
                field.splat(cluster, -1.0)
                void = field.largest_void(pattern, t)
                pattern[void] = True
                field.splat(void, 1.0)
                moved = moved or void != cluster
            if not moved:
                logger.debug(f"Initial pattern settled after {sweep + 1} passes")
                return

    @staticmethod
    def generate_stbn_vec2(
        dims: Tuple[int, int, int], params: StbnParams
    ) -> Tuple[NoiseMask, NoiseMask]:
        """Two independent scalar realizations (seeds s and s + 1) for two-dimensional samples."""
        second = params.model_copy(update={"seed": params.seed + 1})
        return NoiseService.generate_stbn(dims, params), NoiseService.generate_stbn(dims, second)

    @staticmethod
    def sample_mask(mask: NoiseMask, pixel: Tuple[int, int], frame: int) -> float:
        return float(mask.values[frame % mask.depth, pixel[1] % mask.height, pixel[0] % mask.width])

    @staticmethod
    def sample_mask_array(mask: NoiseMask, xs, ys, frame) -> np.ndarray:
        return mask.values[
            np.mod(frame, mask.depth), np.mod(ys, mask.height), np.mod(xs, mask.width)
        ]

    @staticmethod
    def mask_offset(source: NoiseSource) -> Tuple[int, int]:
        """Per-seed toroidal shift so trials with different seeds see decorrelated mask tiles."""
        rng = np.random.default_rng(source.seed)
        return int(rng.integers(source.mask.width)), int(rng.integers(source.mask.height))

    @staticmethod
    def sample_source(source: NoiseSource, xs, ys, frame) -> np.ndarray:
        if source.kind == "white":
            return NoiseService.white_noise_array(source.seed, xs, ys, frame)
        ox, oy = NoiseService.mask_offset(source)
        return NoiseService.sample_mask_array(source.mask, np.add(xs, ox), np.add(ys, oy), frame)

    @staticmethod
    def source_from_spec(spec: str, seed: int = 0) -> NoiseSource:
        """Resolve ``white``, ``stbn:<mask.bin>`` or ``stbnquad:<mask.bin>``."""
        spec = spec.strip()
        if spec == "white":
            return NoiseSource(kind="white", seed=seed, label="white")
        label, sep, path = spec.partition(":")
        if not sep or label not in ("stbn", "stbnquad"):
            raise ValueError(f"Unknown noise source '{spec}'")
        mask = NoiseService.load_mask(Path(path))
        return NoiseSource(kind="mask", seed=seed, mask=mask, label=label)

    @staticmethod
    def power_spectrum(mask: NoiseMask, slice_t: int = 0) -> List[Tuple[int, float]]:
        """Radially averaged power spectrum of one slice, DC excluded."""
        if mask.width != mask.height:
            raise ValueError(f"Power spectrum needs a square slice, got {mask.width}x{mask.height}")
        size = mask.width
        plane = mask.values[slice_t % mask.depth]
        power = np.abs(np.fft.fft2(plane - plane.mean())) ** 2 / plane.size

        freqs = np.fft.fftfreq(size) * size
        radius = np.rint(np.hypot(freqs[:, None], freqs[None, :])).astype(np.int64)
        spectrum = []
        for frequency in range(1, size // 2 + 1):
            ring = power[radius == frequency]
            spectrum.append((frequency, float(ring.mean()) if ring.size else 0.0))
        return spectrum

    @staticmethod
    def spectral_band_ratio(psd: Sequence[Tuple[int, float]]) -> float:
        """Mean energy of the lowest-eighth frequency annulus over that of the highest eighth."""
        frequencies = np.array([frequency for frequency, _ in psd], dtype=np.float64)
        energies = np.array([energy for _, energy in psd], dtype=np.float64)
        nyquist = frequencies.max()
        low = energies[frequencies <= nyquist / 8.0]
        high = energies[frequencies > nyquist * 7.0 / 8.0]
        if low.size == 0 or high.size == 0:
            raise ValueError("Spectrum too short to compare frequency bands")
        high_mean = high.mean()
        if high_mean == 0.0:
            return math.inf if low.mean() > 0.0 else 0.0
        return float(low.mean() / high_mean)

    @staticmethod
    def quad_partner_spread(mask: NoiseMask) -> float:
        """Mean |value difference| over all pixel pairs inside each fixed 2x2 quad."""
        if mask.width % 2 or mask.height % 2:
            raise ValueError("Quad statistics need even mask dimensions")
        corners = [
            mask.values[:, 0::2, 0::2],
            mask.values[:, 0::2, 1::2],
            mask.values[:, 1::2, 0::2],
            mask.values[:, 1::2, 1::2],
        ]
        pairs = [
            np.abs(corners[a] - corners[b]).mean() for a in range(4) for b in range(a + 1, 4)
        ]
        return float(np.mean(pairs))

    @staticmethod
    def save_mask(mask: NoiseMask, path: Path) -> Path:
        io.write_mask_bin(path, mask.values)
        log_artifact_written("noise mask", path, f"dims={mask.dims}")
        return Path(path)

    @staticmethod
    def load_mask(path: Path) -> NoiseMask:
        values = io.read_mask_bin(path)
        # float32 storage can round the top rank up to exactly 1.0
        values = np.minimum(values, np.nextafter(1.0, 0.0))
        return NoiseMask.from_array(values)
