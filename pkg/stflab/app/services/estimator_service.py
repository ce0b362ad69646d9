"""Single-frame estimators of a lane's filtered texture value from shared texel samples.

Every estimator is implemented once as an array kernel over a batch of lanes:
``fc`` (batch, n) is the current lane's filter weight at each shared texel,
``p`` (batch, n) the probability each sharing lane drew its texel with,
``values`` (batch, n, channels) the shared texel values and, for the MIS
variants, ``pmat`` (batch, n, n) with ``pmat[b, i, j]`` the probability lane
``j`` would have drawn texel ``i``. The owning lane is always index 0. The
list-based methods wrap the same kernels so a single lane and a full render
compute identical numbers.
"""

import logging
from typing import Optional, Sequence
import numpy as np
from ..models.estimator import Estimator, EstimatorContext, EstimatorKind, SamplingMode
from ..models.texture import FilterKind, FilterSupport, Texture
from ..models.wave import LaneSample
from ..utils import filtering


logger = logging.getLogger(__name__)

REGRESSION_EPSILON = 1e-12


def _lift(fc, p, values):
    # single lane -> batch of one
    return fc[None], p[None], values[None]


class EstimatorService:
    @staticmethod
    def sample_texel(
        support: FilterSupport,
        u: float,
        tex: Texture,
        texture_id: str = "albedo",
        sampling: SamplingMode = SamplingMode.FILTER,
    ) -> LaneSample:
        """Pick one support texel by CDF inversion in list order; zero-weight texels are never chosen."""
        if not 0.0 <= u < 1.0:
            raise ValueError(f"Random value {u} outside [0, 1)")
        probabilities = filtering.sampling_weights(
            support.weights, uniform=sampling is SamplingMode.UNIFORM
        )
        index = int(filtering.invert_cdf(probabilities, np.asarray(u)))
        texel = support.entries[index].texel
        return LaneSample(
            texel_coords=texel,
            value=filtering.fetch(tex, np.asarray(texel)),
            pmf=float(probabilities[index]),
            texture_id=texture_id,
        )

    @staticmethod
    def estimate_one_tap(sample: LaneSample) -> np.ndarray:
        return sample.value

    @staticmethod
    def estimate_is(shared: Sequence[LaneSample], ctx: EstimatorContext) -> np.ndarray:
        fc, p, values = _unpack(shared, ctx)
        return EstimatorService.batch_is(*_lift(fc, p, values))[0]

    @staticmethod
    def estimate_mis(
        shared: Sequence[LaneSample],
        ctx: EstimatorContext,
        all_supports: Sequence[FilterSupport],
    ) -> np.ndarray:
        fc, _, values = _unpack(shared, ctx)
        pmat = _technique_matrix(shared, all_supports, ctx.sampling)
        return EstimatorService.batch_mis(fc[None], values[None], pmat[None])[0]

    @staticmethod
    def estimate_pmis(
        shared: Sequence[LaneSample],
        ctx: EstimatorContext,
        all_supports: Sequence[FilterSupport],
    ) -> np.ndarray:
        """Pairwise MIS with the current lane's own technique as the canonical one."""
        fc, _, values = _unpack(shared, ctx)
        pmat = _technique_matrix(shared, all_supports, ctx.sampling)
        return EstimatorService.batch_pmis(fc[None], values[None], pmat[None])[0]

    @staticmethod
    def estimate_regression(shared: Sequence[LaneSample], ctx: EstimatorContext) -> np.ndarray:
        fc, p, values = _unpack(shared, ctx)
        return EstimatorService.batch_regression(*_lift(fc, p, values))[0]

    @staticmethod
    def estimate_wis(shared: Sequence[LaneSample], ctx: EstimatorContext) -> np.ndarray:
        fc, p, values = _unpack(shared, ctx)
        return EstimatorService.batch_wis(*_lift(fc, p, values))[0]

    @staticmethod
    def apply_clamp(
        value: np.ndarray, shared: Sequence[LaneSample], ctx: EstimatorContext
    ) -> np.ndarray:
        fc, _, values = _unpack(shared, ctx)
        estimate = np.atleast_1d(np.asarray(value, dtype=np.float64))
        return EstimatorService.batch_clamp(estimate[None], fc[None], values[None])[0]

    @staticmethod
    def try_exact_filter(
        shared: Sequence[LaneSample], ctx: EstimatorContext
    ) -> Optional[np.ndarray]:
        """Exact bilinear value when every nonzero-weight support texel was shared, else None."""
        if ctx.filter is not FilterKind.BILINEAR:
            raise ValueError("Exact filtering is only supported with the bilinear filter")
        coords = np.array([sample.texel_coords for sample in shared], dtype=np.int64)
        values = np.stack([sample.value for sample in shared])
        matches = np.array([sample.texture_id == ctx.texture_id for sample in shared])
        value, exact = EstimatorService.batch_exact(
            ctx.support.coords[None],
            ctx.support.weights[None],
            coords[None],
            values[None],
            matches[None],
        )
        return value[0] if exact[0] else None

    @staticmethod
    def evaluate(
        kind: EstimatorKind,
        shared: Sequence[LaneSample],
        ctx: EstimatorContext,
        all_supports: Optional[Sequence[FilterSupport]] = None,
    ) -> np.ndarray:
        kind.check_filter(ctx.filter)
        if kind.exact_filtering:
            exact = EstimatorService.try_exact_filter(shared, ctx)
            if exact is not None:
                return exact

        variant = kind.variant
        if variant in (Estimator.MIS, Estimator.PAIRWISE_MIS) and all_supports is None:
            raise ValueError(f"{variant.value} needs the filter support of every sharing lane")

        if variant is Estimator.ONE_TAP:
            value = EstimatorService.estimate_one_tap(shared[0])
        elif variant is Estimator.IS:
            value = EstimatorService.estimate_is(shared, ctx)
        elif variant is Estimator.MIS:
            value = EstimatorService.estimate_mis(shared, ctx, all_supports)
        elif variant is Estimator.PAIRWISE_MIS:
            value = EstimatorService.estimate_pmis(shared, ctx, all_supports)
        elif variant is Estimator.REGRESSION:
            value = EstimatorService.estimate_regression(shared, ctx)
        else:
            value = EstimatorService.estimate_wis(shared, ctx)

        if kind.clamp:
            value = EstimatorService.apply_clamp(value, shared, ctx)
        return value

    # Array kernels

    @staticmethod
    def batch_is(fc: np.ndarray, p: np.ndarray, values: np.ndarray) -> np.ndarray:
        return np.mean((fc / p)[..., None] * values, axis=1)

    @staticmethod
    def batch_mis(fc: np.ndarray, values: np.ndarray, pmat: np.ndarray) -> np.ndarray:
        """Balance heuristic: sum_i fc(x_i) T_i / sum_j p_j(x_i)."""
        return np.sum((fc / pmat.sum(axis=2))[..., None] * values, axis=1)

    @staticmethod
    def batch_pmis(fc: np.ndarray, values: np.ndarray, pmat: np.ndarray) -> np.ndarray:
        n = fc.shape[1]
        pc_own = pmat[:, 0, 0]
        canonical = (fc[:, 0] / pc_own)[:, None] * values[:, 0]
        if n == 1:
            return canonical

        others = n - 1
        pc_at_shared = pmat[:, 1:, 0]
        pi_at_shared = np.diagonal(pmat, axis1=1, axis2=2)[:, 1:]
        foreign = fc[:, 1:] / (others * pi_at_shared + pc_at_shared)
        foreign_sum = np.sum(foreign[..., None] * values[:, 1:], axis=1)

        pi_at_own = pmat[:, 0, 1:]
        canonical_weight = np.mean(pc_own[:, None] / (pc_own[:, None] + others * pi_at_own), axis=1)
        return canonical_weight[:, None] * canonical + foreign_sum

    @staticmethod
    def batch_regression(fc: np.ndarray, p: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Control variate on the filter weights; beta falls back to 0 for equal weights."""
        weighted = fc[..., None] * values
        spread = fc - fc.mean(axis=1, keepdims=True)
        denominator = np.sum(spread**2, axis=1)
        degenerate = denominator < REGRESSION_EPSILON
        safe = np.where(degenerate, 1.0, denominator)
        beta = np.sum(spread[..., None] * weighted, axis=1) / safe[:, None]
        beta = np.where(degenerate[:, None], 0.0, beta)

        control = (fc / p - 1.0)[..., None] * beta[:, None, :]
        return np.mean(weighted / p[..., None] - control, axis=1)

    @staticmethod
    def batch_wis(fc: np.ndarray, p: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Self-normalized weights fc/p; a convex combination of the shared texels."""
        weights = fc / p
        return np.sum(weights[..., None] * values, axis=1) / np.sum(weights, axis=1)[:, None]

    @staticmethod
    def batch_clamp(estimate: np.ndarray, fc: np.ndarray, values: np.ndarray) -> np.ndarray:
        lo, hi = EstimatorService.batch_hull(fc, values)
        return np.clip(estimate, lo, hi)

    @staticmethod
    def batch_hull(fc: np.ndarray, values: np.ndarray):
        """Componentwise bounds of shared texels inside the current filter, own value if none are."""
        inside = (fc > 0.0)[..., None]
        lo = np.min(np.where(inside, values, np.inf), axis=1)
        hi = np.max(np.where(inside, values, -np.inf), axis=1)
        none = ~inside.any(axis=1)
        lo = np.where(none, values[:, 0], lo)
        hi = np.where(none, values[:, 0], hi)
        return lo, hi

    @staticmethod
    def batch_exact(
        support_coords: np.ndarray,
        support_weights: np.ndarray,
        shared_coords: np.ndarray,
        shared_values: np.ndarray,
        texture_match: np.ndarray,
    ):
        """Exact filtered values (batch, channels) and a mask of lanes where they are valid."""
        same = np.all(support_coords[:, :, None, :] == shared_coords[:, None, :, :], axis=-1)
        same &= texture_match[:, None, :]
        found = same.any(axis=2)
        first = np.argmax(same, axis=2)
        picked = np.take_along_axis(shared_values, first[..., None], axis=1)
        exact = np.all(found | (support_weights <= 0.0), axis=1)
        value = np.sum(support_weights[..., None] * picked, axis=1)
        return value, exact


def _unpack(shared: Sequence[LaneSample], ctx: EstimatorContext):
    if not shared:
        raise ValueError("At least one shared sample is required")
    coords = np.array([sample.texel_coords for sample in shared], dtype=np.float64)
    lookup = np.asarray(ctx.lookup_point, dtype=np.float64)
    fc = filtering.filter_weights(ctx.filter, lookup - coords)
    foreign_texture = np.array([sample.texture_id != ctx.texture_id for sample in shared])
    fc = np.where(foreign_texture, 0.0, fc)
    p = np.array([sample.pmf for sample in shared], dtype=np.float64)
    values = np.stack([sample.value for sample in shared])
    return fc, p, values


def _technique_matrix(
    shared: Sequence[LaneSample],
    supports: Sequence[FilterSupport],
    sampling: SamplingMode,
) -> np.ndarray:
    """pmat[i, j]: probability lane j's sampling technique assigns to shared texel i."""
    if len(supports) != len(shared):
        raise ValueError(f"Expected {len(shared)} filter supports, got {len(supports)}")
    n = len(shared)
    pmat = np.zeros((n, n))
    for j, support in enumerate(supports):
        probabilities = filtering.sampling_weights(
            support.weights, uniform=sampling is SamplingMode.UNIFORM
        )
        lookup = {entry.texel: prob for entry, prob in zip(support.entries, probabilities)}
        for i, sample in enumerate(shared):
            pmat[i, j] = lookup.get(tuple(sample.texel_coords), 0.0)
    return pmat


def technique_probabilities(
    kind: FilterKind, lookups: np.ndarray, coords: np.ndarray, sampling: SamplingMode
) -> np.ndarray:
    """Vectorized pmat for a batch: lookups (batch, n, 2), coords (batch, n, 2) -> (batch, n, n)."""
    offsets = lookups[:, None, :, :] - coords[:, :, None, :]
    weights = filtering.filter_weights(kind, offsets)
    if sampling is SamplingMode.FILTER:
        return weights
    counts = _nonzero_support_counts(kind, lookups)
    return np.where(weights > 0.0, 1.0 / counts[:, None, :], 0.0)


def _nonzero_support_counts(kind: FilterKind, lookups: np.ndarray) -> np.ndarray:
    _, weights = filtering.support_arrays(kind, lookups)
    return np.count_nonzero(weights > 0.0, axis=-1).astype(np.float64)


