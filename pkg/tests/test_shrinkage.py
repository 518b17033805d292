"""Thresholding, noise-scale estimation, and complete-data pipelines."""

import math

import numpy as np
import pytest

from wavesc.shrinkage import (
    AnscombePoissonShrinker,
    NoiseScale,
    ThresholdPolicy,
    WaveletShrinker,
    adjusted_threshold,
    hard_threshold,
    inflate_variance,
    mad_sigma,
    residual_sigma,
    soft_threshold,
    universal_threshold,
)
from wavesc.wavelets import WaveletSpec, dwt_1d, idwt_1d


def coeffs_from(values, primary_level=1):
    spec = WaveletSpec.from_name("haar", primary_level)
    return dwt_1d(np.zeros(len(values)), spec).with_values(
        np.asarray(values, dtype=float))


# ---------------------------------------------------------------------------
# threshold operators
# ---------------------------------------------------------------------------

def test_hard_keeps_or_kills():
    c = coeffs_from([9.0, -9.0, 3.0, -2.0, 0.5, -0.4, 1.0, -1.0], 1)
    out = hard_threshold(c, 1.0).values
    np.testing.assert_allclose(out, [9.0, -9.0, 3.0, -2.0, 0.0, 0.0,
                                     1.0, -1.0])


def test_soft_shrinks_toward_zero():
    c = coeffs_from([9.0, -9.0, 3.0, -2.0, 0.5, -0.4, 1.0, -1.0], 1)
    out = soft_threshold(c, 1.0).values
    np.testing.assert_allclose(out, [9.0, -9.0, 2.0, -1.0, 0.0, 0.0,
                                     0.0, 0.0])


def test_scaling_block_is_protected():
    c = coeffs_from([0.1, -0.2, 5.0, 5.0], 1)
    np.testing.assert_allclose(hard_threshold(c, 1.0).values,
                               [0.1, -0.2, 5.0, 5.0])
    np.testing.assert_allclose(soft_threshold(c, 1.0).values,
                               [0.1, -0.2, 4.0, 4.0])
    unprotected = hard_threshold(c, 1.0, protect_coarse=False).values
    np.testing.assert_allclose(unprotected, [0.0, 0.0, 5.0, 5.0])


def test_threshold_2d_applies_to_all_detail_blocks():
    spec = WaveletSpec.from_name("haar", 1)
    rng = np.random.default_rng(5)
    from wavesc.wavelets import dwt_2d
    coeffs = dwt_2d(rng.standard_normal((8, 8)), spec)
    big = 1e9
    out = hard_threshold(coeffs, big).values
    assert np.all(out[2:, :] == 0.0) and np.all(out[:, 2:] == 0.0)
    np.testing.assert_allclose(out[:2, :2], coeffs.values[:2, :2])


# ---------------------------------------------------------------------------
# noise scales and threshold formulas
# ---------------------------------------------------------------------------

def test_mad_scale_from_finest_details():
    # n=8, primary level 1: finest details occupy the back half.
    values = [7.0, 7.0, 9.0, 9.0, 1.0, -1.0, 2.0, -2.0]
    scale = mad_sigma(coeffs_from(values, 1))
    assert scale.source == "mad"
    assert abs(scale.sigma - 1.5 / 0.6745) < 1e-14


def test_universal_threshold_formula():
    assert abs(universal_threshold(2.0, 1024)
               - 2.0 * math.sqrt(2.0 * math.log(1024.0))) < 1e-14
    assert universal_threshold(0.0, 64) == 0.0


def test_adjusted_threshold_formula_and_domain():
    n = 1024
    expected = math.sqrt(2.0 * math.log(n)
                         - math.log(1.0 + 256.0 * math.log(n)))
    assert abs(adjusted_threshold(1.0, n) - expected) < 1e-14
    assert adjusted_threshold(1.0, n) < universal_threshold(1.0, n)
    with pytest.raises(ValueError):
        adjusted_threshold(1.0, 8)  # log correction exceeds the main term


def test_policy_parse_and_dispatch():
    p = ThresholdPolicy.parse("fixed=1.5", "soft")
    assert p.selector == "fixed" and p.fixed_value == 1.5
    assert p.threshold_value(123.0, 64) == 1.5
    u = ThresholdPolicy.parse("universal")
    assert abs(u.threshold_value(2.0, 256)
               - universal_threshold(2.0, 256)) < 1e-15
    a = ThresholdPolicy.parse("adjusted")
    assert abs(a.threshold_value(2.0, 256)
               - adjusted_threshold(2.0, 256)) < 1e-15
    with pytest.raises(ValueError):
        ThresholdPolicy.parse("median")
    with pytest.raises(ValueError):
        ThresholdPolicy.parse("fixed=-1")


def test_variance_inflation_combines_scales():
    combined = inflate_variance(1.0, 2.0, 0.25)
    assert combined.source == "inflated"
    assert abs(combined.sigma - math.sqrt(2.0)) < 1e-14
    assert inflate_variance(1.3, 99.0, 0.0).sigma == 1.3
    assert abs(inflate_variance(0.0, 2.0, 0.5).sigma
               - math.sqrt(2.0)) < 1e-14


def test_residual_scale_is_rms():
    scale = residual_sigma(np.array([1.0, 2.0, 3.0]), np.zeros(3))
    assert scale.source == "residual_mle"
    assert abs(scale.sigma - math.sqrt(14.0 / 3.0)) < 1e-14


def test_noise_scale_floor():
    tiny = NoiseScale(0.0, "known")
    assert tiny.degenerate
    assert tiny.floored() > 0.0


# ---------------------------------------------------------------------------
# complete-data pipelines
# ---------------------------------------------------------------------------

def test_shrinker_equals_manual_composition():
    rng = np.random.default_rng(40)
    y = np.sin(np.linspace(0.0, 6.0, 256)) + 0.1 * rng.standard_normal(256)
    spec = WaveletSpec.from_name("db3", 3)
    policy = ThresholdPolicy("universal", "hard")

    coeffs = dwt_1d(y, spec)
    sigma = mad_sigma(coeffs).sigma
    c = universal_threshold(sigma, 256)
    manual = idwt_1d(hard_threshold(coeffs, c))

    np.testing.assert_array_equal(WaveletShrinker()(y, spec, policy), manual)


def test_shrinker_known_sigma_overrides_mad():
    rng = np.random.default_rng(41)
    y = rng.standard_normal(128)
    spec = WaveletSpec.from_name("haar", 2)
    policy = ThresholdPolicy("universal", "soft")
    fixed = WaveletShrinker(known_sigma=0.5)(y, spec, policy)
    coeffs = dwt_1d(y, spec)
    c = universal_threshold(0.5, 128)
    np.testing.assert_array_equal(fixed, idwt_1d(soft_threshold(coeffs, c)))


def test_shrinker_kills_pure_noise_details():
    rng = np.random.default_rng(42)
    y = rng.standard_normal(512)
    spec = WaveletSpec.from_name("db5", 3)
    out = WaveletShrinker()(y, spec, ThresholdPolicy("universal", "hard"))
    # Nearly everything is below the universal threshold; variance collapses.
    assert np.var(out) < 0.25 * np.var(y)


def test_count_shrinker_zero_counts_give_zero():
    spec = WaveletSpec.from_name("haar", 2)
    out = AnscombePoissonShrinker()(np.zeros(64), spec,
                                    ThresholdPolicy("universal", "hard"))
    np.testing.assert_allclose(out, 0.0, atol=1e-12)


def test_count_shrinker_output_nonnegative_and_tracks_mean():
    rng = np.random.default_rng(43)
    intensity = np.full(256, 20.0)
    counts = rng.poisson(intensity).astype(float)
    spec = WaveletSpec.from_name("db4", 3)
    out = AnscombePoissonShrinker()(counts, spec,
                                    ThresholdPolicy("universal", "hard"))
    assert out.min() >= 0.0
    assert abs(out.mean() - 20.0) < 1.5


def test_count_shrinker_rejects_negative_counts():
    spec = WaveletSpec.from_name("haar", 1)
    with pytest.raises(ValueError):
        AnscombePoissonShrinker()(np.array([1.0, -2.0, 3.0, 4.0]), spec,
                                  ThresholdPolicy("universal", "hard"))
