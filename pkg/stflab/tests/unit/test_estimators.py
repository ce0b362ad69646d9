"""
Unit tests for texel sampling and the shared-sample estimators
"""

import pytest
import numpy as np
from pydantic import ValidationError
from stflab.app.models import (
    Estimator,
    EstimatorContext,
    EstimatorKind,
    FilterKind,
    LaneSample,
    SamplingMode,
    Texture,
)
from stflab.app.services import EstimatorService, TextureService
from stflab.app.services.estimator_service import _technique_matrix, technique_probabilities
from stflab.app.utils import filtering


@pytest.fixture
def row_texture():
    """One texel row with values 1 and 5"""
    return Texture.from_array(np.array([[1.0, 5.0]]))


def _ctx(tex, lookup, kind=FilterKind.BILINEAR, sampling=SamplingMode.FILTER):
    return EstimatorContext(
        filter=kind,
        lookup_point=lookup,
        support=TextureService.filter_support(kind, tex, lookup),
        sampling=sampling,
    )


def _sample(tex, texel, pmf):
    return LaneSample(texel_coords=texel, value=TextureService.fetch_texel(tex, texel), pmf=pmf)


@pytest.fixture
def two_lane_case(row_texture):
    """Lane A at x=0.3 drew texel 0, lane B at x=0.7 drew texel 1, both with p=0.7"""
    ctx_a = _ctx(row_texture, (0.3, 0.0))
    ctx_b = _ctx(row_texture, (0.7, 0.0))
    shared = [_sample(row_texture, (0, 0), 0.7), _sample(row_texture, (1, 0), 0.7)]
    return ctx_a, ctx_b, shared


def test_estimator_kind_labels():
    """Test labels round-trip through parse"""
    kind = EstimatorKind.parse("wis+clamp+exact")
    assert kind.variant is Estimator.WIS
    assert kind.clamp and kind.exact_filtering
    assert kind.label == "wis+clamp+exact"
    assert EstimatorKind.parse("pmis").variant is Estimator.PAIRWISE_MIS

    with pytest.raises(ValueError, match="Unknown estimator flags"):
        EstimatorKind.parse("wis+fast")


def test_exact_filtering_needs_bilinear():
    """Test exact filtering is rejected with the B-spline filter"""
    kind = EstimatorKind(variant=Estimator.WIS, exact_filtering=True)
    with pytest.raises(ValueError, match="bilinear"):
        kind.check_filter(FilterKind.BICUBIC_BSPLINE)


def test_context_support_size(row_texture):
    """Test the context support matches the filter's texel count"""
    support = TextureService.filter_support(FilterKind.BILINEAR, row_texture, (0.3, 0.0))
    with pytest.raises(ValidationError, match="16 entries"):
        EstimatorContext(filter=FilterKind.BICUBIC_BSPLINE, lookup_point=(0.3, 0.0), support=support)


def test_sample_texel_cdf_inversion(two_by_two_texture):
    """Test CDF inversion in list order"""
    support = TextureService.filter_support(FilterKind.BILINEAR, two_by_two_texture, (0.5, 0.5))

    third = EstimatorService.sample_texel(support, 0.6, two_by_two_texture)
    assert third.texel_coords == (0, 1)
    assert third.pmf == pytest.approx(0.25)
    assert third.value[0] == 2.0

    first = EstimatorService.sample_texel(support, 0.0, two_by_two_texture)
    assert first.texel_coords == (0, 0)


def test_sample_texel_never_picks_zero_weight(two_by_two_texture):
    """Test zero-weight texels are never selected"""
    support = TextureService.filter_support(FilterKind.BILINEAR, two_by_two_texture, (1.0, 0.0))
    for u in np.linspace(0.0, 0.999, 50):
        assert EstimatorService.sample_texel(support, u, two_by_two_texture).texel_coords == (1, 0)


def test_sample_texel_frequencies(noise_texture):
    """Test selection frequencies over a uniform u grid match the weights"""
    for kind in FilterKind:
        support = TextureService.filter_support(kind, noise_texture, (4.3, 6.6))
        counts = {}
        for k in range(10000):
            texel = EstimatorService.sample_texel(support, k / 10000, noise_texture).texel_coords
            counts[texel] = counts.get(texel, 0) + 1
        for entry in support.entries:
            assert counts.get(entry.texel, 0) / 10000 == pytest.approx(entry.weight, abs=0.01)


def test_sample_texel_uniform_mode(two_by_two_texture):
    """Test uniform sampling spreads probability over nonzero-weight texels"""
    support = TextureService.filter_support(FilterKind.BILINEAR, two_by_two_texture, (1.0, 0.5))
    sample = EstimatorService.sample_texel(
        support, 0.9, two_by_two_texture, sampling=SamplingMode.UNIFORM
    )
    assert sample.pmf == pytest.approx(0.5)
    assert sample.texel_coords == (1, 1)


def test_sample_texel_rejects_u_outside_range(two_by_two_texture):
    """Test random values must lie in [0, 1)"""
    support = TextureService.filter_support(FilterKind.BILINEAR, two_by_two_texture, (0.5, 0.5))
    with pytest.raises(ValueError, match="outside"):
        EstimatorService.sample_texel(support, 1.0, two_by_two_texture)


def test_one_tap_unbiased(noise_texture):
    """Test the pmf-weighted one-tap expectation equals the reference"""
    rng = np.random.default_rng(4)
    for kind in FilterKind:
        for lookup in rng.uniform(0.0, 15.0, size=(200, 2)):
            support = TextureService.filter_support(kind, noise_texture, lookup)
            expectation = sum(
                entry.weight
                * EstimatorService.estimate_one_tap(
                    _sample(noise_texture, entry.texel, max(entry.weight, 1e-9))
                )
                for entry in support.entries
            )
            reference = TextureService.reference_filter(noise_texture, kind, lookup)
            np.testing.assert_allclose(expectation, reference, atol=1e-6)


def test_one_tap_returns_sample_value():
    """Test one-tap returns the sample unchanged"""
    sample = LaneSample(texel_coords=(0, 0), value=[3.0], pmf=0.5)
    assert EstimatorService.estimate_one_tap(sample)[0] == 3.0


def test_wis_two_lane_example(two_lane_case):
    """Test WIS against a hand-evaluated two-lane case"""
    ctx_a, _, shared = two_lane_case
    expected = (1.0 * 1.0 + (0.3 / 0.7) * 5.0) / (1.0 + 0.3 / 0.7)

    value = EstimatorService.estimate_wis(shared, ctx_a)

    assert value[0] == pytest.approx(expected)
    assert value[0] == pytest.approx(2.2)


def test_is_two_lane_example(two_lane_case):
    """Test IS against a hand-evaluated two-lane case"""
    ctx_a, _, shared = two_lane_case
    assert EstimatorService.estimate_is(shared, ctx_a)[0] == pytest.approx((1.0 + 0.3 / 0.7 * 5.0) / 2)


def test_mis_two_lane_example(two_lane_case):
    """Test the balance heuristic against a hand-evaluated case"""
    ctx_a, ctx_b, shared = two_lane_case
    supports = [ctx_a.support, ctx_b.support]
    # each texel: p_A + p_B = 1, so MIS = sum fc * T
    assert EstimatorService.estimate_mis(shared, ctx_a, supports)[0] == pytest.approx(0.7 + 0.3 * 5.0)


def test_pmis_two_lane_example(two_lane_case):
    """Test pairwise MIS with the current lane as canonical"""
    ctx_a, ctx_b, shared = two_lane_case
    canonical = 0.7 / (0.7 + 0.3) * (0.7 / 0.7 * 1.0)
    foreign = 0.3 * 5.0 / (0.7 + 0.3)

    value = EstimatorService.estimate_pmis(shared, ctx_a, [ctx_a.support, ctx_b.support])

    assert value[0] == pytest.approx(canonical + foreign)


def test_pmis_single_lane_is_one_tap(row_texture):
    """Test PMIS with only the own sample returns the one-tap value"""
    ctx = _ctx(row_texture, (0.3, 0.0))
    shared = [_sample(row_texture, (1, 0), 0.3)]
    value = EstimatorService.estimate_pmis(shared, ctx, [ctx.support])
    assert value[0] == pytest.approx(5.0)


def test_pmis_zero_overlap_keeps_canonical():
    """Test foreign samples outside the current filter drop out"""
    tex = Texture.from_array(np.arange(8.0)[None, :])
    ctx = _ctx(tex, (1.0, 0.0))
    far = _ctx(tex, (5.5, 0.0))
    shared = [_sample(tex, (1, 0), 1.0), _sample(tex, (5, 0), 0.5)]

    value = EstimatorService.estimate_pmis(shared, ctx, [ctx.support, far.support])

    # canonical weight 1 / (1 + 0) against a technique with no mass at the own texel
    assert value[0] == pytest.approx(1.0)


def test_regression_two_lane_example(two_lane_case):
    """Test the control-variate estimator against a direct evaluation"""
    ctx_a, _, shared = two_lane_case
    fc = np.array([0.7, 0.3])
    p = np.array([0.7, 0.7])
    t = np.array([1.0, 5.0])
    w_bar = fc.mean()
    beta = np.sum((fc - w_bar) * fc * t) / np.sum((fc - w_bar) ** 2)
    expected = np.mean(fc * t / p) - beta * (np.mean(fc / p) - 1.0)

    assert EstimatorService.estimate_regression(shared, ctx_a)[0] == pytest.approx(expected)
    assert expected == pytest.approx(1.0)


def test_regression_constant_texture_exact():
    """Test the control variate cancels on constant textures"""
    tex = TextureService.make_test_texture("constant", 4, value=7.0)
    ctx = _ctx(tex, (1.2, 1.7))
    shared = [_sample(tex, (1, 1), 0.24), _sample(tex, (2, 2), 0.14), _sample(tex, (2, 1), 0.3)]

    assert EstimatorService.estimate_regression(shared, ctx)[0] == pytest.approx(7.0)


def test_equal_pmfs_make_estimators_agree(noise_texture):
    """Test IS, MIS, PMIS and regression coincide when every lane shares one lookup"""
    lookup = (6.5, 3.5)
    ctx = _ctx(noise_texture, lookup)
    shared = [
        _sample(noise_texture, (6, 3), 0.25),
        _sample(noise_texture, (7, 4), 0.25),
        _sample(noise_texture, (6, 4), 0.25),
    ]
    supports = [ctx.support] * 3

    is_value = EstimatorService.estimate_is(shared, ctx)
    np.testing.assert_allclose(EstimatorService.estimate_mis(shared, ctx, supports), is_value, atol=1e-9)
    np.testing.assert_allclose(EstimatorService.estimate_pmis(shared, ctx, supports), is_value, atol=1e-9)
    np.testing.assert_allclose(EstimatorService.estimate_regression(shared, ctx), is_value, atol=1e-9)


def test_wis_constant_texture_exact():
    """Test WIS is a convex combination and reproduces constants"""
    tex = TextureService.make_test_texture("constant", 4, value=7.0)
    ctx = _ctx(tex, (1.2, 1.7))
    shared = [_sample(tex, (1, 2), 0.56), _sample(tex, (2, 1), 0.06), _sample(tex, (3, 3), 0.5)]

    assert EstimatorService.estimate_wis(shared, ctx)[0] == pytest.approx(7.0)


def test_wis_never_worse_than_one_tap(noise_texture):
    """Test WIS returns the own texel exactly when no foreign sample is inside the filter"""
    lookup = (4.3, 4.6)
    ctx = _ctx(noise_texture, lookup)
    own = EstimatorService.sample_texel(ctx.support, 0.4, noise_texture)
    shared = [own, _sample(noise_texture, (9, 9), 0.5), _sample(noise_texture, (0, 12), 0.25)]

    value = EstimatorService.estimate_wis(shared, ctx)

    np.testing.assert_array_equal(value, EstimatorService.estimate_one_tap(own))


def test_wis_inside_hull(noise_texture):
    """Test WIS stays within the texels it combines"""
    rng = np.random.default_rng(5)
    for _ in range(200):
        lookups = rng.uniform(3.0, 6.0, size=(4, 2))
        samples = []
        for lane, lookup in enumerate(lookups):
            support = TextureService.filter_support(FilterKind.BILINEAR, noise_texture, lookup)
            samples.append(EstimatorService.sample_texel(support, rng.random(), noise_texture))
        ctx = _ctx(noise_texture, tuple(lookups[0]))
        value = EstimatorService.estimate_wis(samples, ctx)[0]
        inside = [s.value[0] for s in samples if ctx.support.weight_of(s.texel_coords) > 0.0]
        assert min(inside) - 1e-12 <= value <= max(inside) + 1e-12


def test_wis_variance_falls_with_more_shares(noise_texture):
    """Test WIS error shrinks as more same-lookup samples are shared"""
    rng = np.random.default_rng(6)
    lookup = np.array([5.4, 7.7])
    coords, weights = filtering.support_arrays(FilterKind.BILINEAR, lookup)
    reference = filtering.reference_values(noise_texture, FilterKind.BILINEAR, lookup)

    def mse(n, trials=4000):
        picks = filtering.invert_cdf(np.broadcast_to(weights, (trials, n, 4)), rng.random((trials, n)))
        values = filtering.fetch(noise_texture, coords[picks])
        p = weights[picks]
        estimates = EstimatorService.batch_wis(p, p, values)
        return float(np.mean((estimates - reference) ** 2))

    assert mse(64) < mse(4)


def test_apply_clamp(two_by_two_texture):
    """Test clamping to texels inside the current filter"""
    ctx = _ctx(two_by_two_texture, (0.5, 0.5))
    shared = [_sample(two_by_two_texture, (1, 0), 0.25), _sample(two_by_two_texture, (1, 1), 0.25)]

    assert EstimatorService.apply_clamp(np.array([25.0]), shared, ctx)[0] == 3.0
    assert EstimatorService.apply_clamp(np.array([2.0]), shared, ctx)[0] == 2.0
    assert EstimatorService.apply_clamp(np.array([-4.0]), shared, ctx)[0] == 1.0


def test_apply_clamp_own_sample_only(two_by_two_texture):
    """Test only the own texel bounds the value when nothing else is inside the filter"""
    ctx = _ctx(two_by_two_texture, (0.5, 0.5))
    shared = [_sample(two_by_two_texture, (0, 0), 0.25), _sample(two_by_two_texture, (5, 5), 0.5)]

    assert EstimatorService.apply_clamp(np.array([25.0]), shared, ctx)[0] == 0.0


def test_apply_clamp_idempotent(noise_texture):
    """Test clamping twice equals clamping once"""
    ctx = _ctx(noise_texture, (3.3, 8.1))
    shared = [_sample(noise_texture, (3, 8), 0.56), _sample(noise_texture, (4, 9), 0.03)]
    once = EstimatorService.apply_clamp(np.array([3.0]), shared, ctx)
    np.testing.assert_array_equal(EstimatorService.apply_clamp(once, shared, ctx), once)


def test_try_exact_filter(two_by_two_texture):
    """Test exact filtering when the whole bilinear support was shared"""
    ctx = _ctx(two_by_two_texture, (0.5, 0.5))
    texels = [(1, 1), (0, 0), (0, 1), (1, 0)]
    shared = [_sample(two_by_two_texture, texel, 0.25) for texel in texels]

    assert EstimatorService.try_exact_filter(shared, ctx)[0] == pytest.approx(1.5)
    assert EstimatorService.try_exact_filter(shared[:3], ctx) is None


def test_try_exact_filter_integer_lookup(two_by_two_texture):
    """Test zero-weight texels are not needed for an exact hit"""
    ctx = _ctx(two_by_two_texture, (1.0, 0.0))
    shared = [_sample(two_by_two_texture, (1, 0), 1.0)]

    exact = EstimatorService.try_exact_filter(shared, ctx)

    assert exact[0] == TextureService.reference_filter(two_by_two_texture, FilterKind.BILINEAR, (1.0, 0.0))[0]


def test_try_exact_filter_other_texture(two_by_two_texture):
    """Test samples from another texture do not count toward exact filtering"""
    ctx = _ctx(two_by_two_texture, (1.0, 0.0))
    shared = [
        LaneSample(texel_coords=(1, 0), value=[1.0], pmf=1.0, texture_id="normal"),
    ]
    assert EstimatorService.try_exact_filter(shared, ctx) is None


def test_try_exact_filter_bspline(noise_texture):
    """Test exact filtering refuses the B-spline filter"""
    ctx = _ctx(noise_texture, (4.5, 4.5), FilterKind.BICUBIC_BSPLINE)
    with pytest.raises(ValueError, match="bilinear"):
        EstimatorService.try_exact_filter([_sample(noise_texture, (4, 4), 0.1)], ctx)


def test_foreign_texture_samples_get_zero_weight(two_by_two_texture):
    """Test samples tagged with another texture contribute nothing"""
    ctx = _ctx(two_by_two_texture, (0.5, 0.5))
    own = _sample(two_by_two_texture, (0, 0), 0.25)
    foreign = LaneSample(texel_coords=(1, 1), value=[100.0], pmf=0.25, texture_id="normal")

    assert EstimatorService.estimate_wis([own, foreign], ctx)[0] == 0.0


def test_evaluate_dispatch(two_lane_case):
    """Test evaluate picks the estimator and applies clamp last"""
    ctx_a, ctx_b, shared = two_lane_case
    supports = [ctx_a.support, ctx_b.support]

    wis = EstimatorService.evaluate(EstimatorKind(variant=Estimator.WIS), shared, ctx_a)
    assert wis[0] == pytest.approx(2.2)

    one_tap = EstimatorService.evaluate(EstimatorKind(variant=Estimator.ONE_TAP), shared, ctx_a)
    assert one_tap[0] == 1.0

    pmis = EstimatorService.evaluate(EstimatorKind(variant=Estimator.PAIRWISE_MIS), shared, ctx_a, supports)
    assert pmis[0] == pytest.approx(2.2)

    with pytest.raises(ValueError, match="filter support of every sharing lane"):
        EstimatorService.evaluate(EstimatorKind(variant=Estimator.MIS), shared, ctx_a)


def test_evaluate_exact_then_fallback(two_by_two_texture):
    """Test exact filtering wins when possible and WIS runs otherwise"""
    ctx = _ctx(two_by_two_texture, (0.5, 0.5))
    kind = EstimatorKind(variant=Estimator.WIS, exact_filtering=True)
    full = [_sample(two_by_two_texture, texel, 0.25) for texel in [(0, 0), (1, 0), (0, 1), (1, 1)]]
    partial = full[:2]

    assert EstimatorService.evaluate(kind, full, ctx)[0] == pytest.approx(1.5)
    assert EstimatorService.evaluate(kind, partial, ctx)[0] == pytest.approx(0.5)


def test_technique_probabilities_match_list_path(noise_texture):
    """Test the vectorized technique matrix equals the per-lane construction"""
    rng = np.random.default_rng(7)
    lookups = rng.uniform(2.0, 8.0, size=(4, 2))
    supports = [TextureService.filter_support(FilterKind.BILINEAR, noise_texture, lp) for lp in lookups]
    shared = [EstimatorService.sample_texel(s, rng.random(), noise_texture) for s in supports]
    coords = np.array([sample.texel_coords for sample in shared], dtype=np.float64)

    for sampling in SamplingMode:
        listed = _technique_matrix(shared, supports, sampling)
        batched = technique_probabilities(FilterKind.BILINEAR, lookups[None], coords[None], sampling)[0]
        np.testing.assert_allclose(batched, listed, atol=1e-12)
