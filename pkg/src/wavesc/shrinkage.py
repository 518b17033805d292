"""Complete-data shrinkage building blocks.

Thresholding operators, threshold selectors, robust and residual-based noise
scale estimation, the variance-inflation adjustment used by the single
imputation loop, and the pluggable complete-data shrinker consumed by the
multiple-imputation engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .wavelets import CoefficientArray, WaveletSpec, transform, inverse_transform

__all__ = [
    "ThresholdPolicy",
    "NoiseScale",
    "hard_threshold",
    "soft_threshold",
    "mad_sigma",
    "universal_threshold",
    "adjusted_threshold",
    "inflate_variance",
    "residual_sigma",
    "WaveletShrinker",
    "AnscombePoissonShrinker",
]

MAD_CONSTANT = 0.6745
SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class NoiseScale:
    """A noise standard deviation together with how it was obtained.

    A scale of exactly zero is legal but flagged as degenerate so iteration
    loops can apply a floor instead of dividing by zero.
    """

    sigma: float
    source: str = "known"

    _SOURCES = ("mad", "inflated", "residual_mle", "known")

    def __post_init__(self):
        if self.source not in self._SOURCES:
            raise ValueError(f"unknown noise-scale source {self.source!r}")
        if not math.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError("sigma must be finite and non-negative")

    @property
    def degenerate(self) -> bool:
        return self.sigma == 0.0

    def floored(self) -> float:
        """Scale with the division-safety floor applied."""
        return max(self.sigma, SIGMA_FLOOR)


@dataclass(frozen=True)
class ThresholdPolicy:
    """Threshold selector (universal, adjusted, or fixed) plus operator."""

    selector: str = "universal"
    operator: str = "hard"
    fixed_value: float | None = None

    def __post_init__(self):
        if self.selector not in ("universal", "adjusted", "fixed"):
            raise ValueError(f"unknown threshold selector {self.selector!r}")
        if self.operator not in ("hard", "soft"):
            raise ValueError(f"unknown threshold operator {self.operator!r}")
        if self.selector == "fixed":
            if self.fixed_value is None or self.fixed_value < 0:
                raise ValueError("fixed selector requires fixed_value >= 0")

    @classmethod
    def parse(cls, selector: str, operator: str = "hard") -> "ThresholdPolicy":
        """Parse a CLI-style selector: universal, adjusted, or fixed=<c>."""
        selector = selector.strip().lower()
        if selector.startswith("fixed="):
            return cls("fixed", operator, float(selector[6:]))
        return cls(selector, operator)

    def threshold_value(self, sigma: float, n_total: int) -> float:
        """Threshold c for noise scale sigma on n_total coefficients."""
        if self.selector == "fixed":
            return float(self.fixed_value)
        if self.selector == "universal":
            return universal_threshold(sigma, n_total)
        return adjusted_threshold(sigma, n_total)

    def apply(self, coeffs: CoefficientArray, c: float,
              protect_coarse: bool = True) -> CoefficientArray:
        fn = hard_threshold if self.operator == "hard" else soft_threshold
        return fn(coeffs, c, protect_coarse)


def hard_threshold(coeffs: CoefficientArray, c: float,
                   protect_coarse: bool = True) -> CoefficientArray:
    """Keep-or-kill: detail w becomes w when |w| >= c, else 0.

    Scaling coefficients pass through untouched when protect_coarse is set
    (the default); thresholding them would bias the mean level.
    """
    if c < 0:
        raise ValueError("threshold must be non-negative")
    w = coeffs.values
    keep = np.abs(w) >= c
    if protect_coarse:
        keep |= ~coeffs.detail_mask()
    return coeffs.with_values(np.where(keep, w, 0.0))


def soft_threshold(coeffs: CoefficientArray, c: float,
                   protect_coarse: bool = True) -> CoefficientArray:
    """Shrink-toward-zero: detail w becomes sign(w) * max(|w| - c, 0)."""
    if c < 0:
        raise ValueError("threshold must be non-negative")
    w = coeffs.values
    shrunk = np.sign(w) * np.maximum(np.abs(w) - c, 0.0)
    if protect_coarse:
        shrunk = np.where(coeffs.detail_mask(), shrunk, w)
    return coeffs.with_values(shrunk)


def mad_sigma(coeffs: CoefficientArray) -> NoiseScale:
    """Robust noise scale from the finest-level detail coefficients.

    sigma = median(|finest details|) / 0.6745.  An all-zero finest level
    yields a degenerate (zero) scale that callers must guard.
    """
    finest = coeffs.finest_details()
    if finest.size == 0:
        raise ValueError("finest detail level is empty")
    return NoiseScale(float(np.median(np.abs(finest))) / MAD_CONSTANT, "mad")


def universal_threshold(sigma: float, n_total: int) -> float:
    """sigma * sqrt(2 ln N) for N coefficients."""
    if n_total < 2:
        raise ValueError("need at least 2 coefficients")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    return sigma * math.sqrt(2.0 * math.log(n_total))


def adjusted_threshold(sigma: float, n_total: int) -> float:
    """sigma * sqrt(2 ln N - ln(1 + 256 ln N)); smaller than universal.

    Raises for small N where the radicand turns non-positive.
    """
    if n_total < 2:
        raise ValueError("need at least 2 coefficients")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    log_n = math.log(n_total)
    radicand = 2.0 * log_n - math.log1p(256.0 * log_n)
    if radicand <= 0:
        raise ValueError(f"adjusted threshold undefined for N = {n_total}")
    return sigma * math.sqrt(radicand)


def inflate_variance(sigma_unadjusted: float, sigma_prev: float,
                     missing_fraction: float) -> NoiseScale:
    """Variance inflation for deterministically imputed data.

    Imputing missing points by the current fit removes their noise, so the
    raw scale estimate is too small; the corrected scale restores the missing
    share from the previous iterate:

        sigma = sqrt(sigma_unadjusted**2 + missing_fraction * sigma_prev**2)
    """
    if not 0.0 <= missing_fraction < 1.0:
        raise ValueError("missing_fraction must lie in [0, 1)")
    if sigma_unadjusted < 0 or sigma_prev < 0:
        raise ValueError("scales must be non-negative")
    sigma = math.sqrt(sigma_unadjusted ** 2
                      + missing_fraction * sigma_prev ** 2)
    return NoiseScale(sigma, "inflated")


def residual_sigma(y_obs: np.ndarray, f_hat_at_obs: np.ndarray) -> NoiseScale:
    """Gaussian maximum-likelihood scale from observed residuals.

    sigma**2 = mean((y_i - f_hat(x_i))**2) over observed points.
    """
    y_obs = np.asarray(y_obs, dtype=float)
    f_hat_at_obs = np.asarray(f_hat_at_obs, dtype=float)
    if y_obs.shape != f_hat_at_obs.shape:
        raise ValueError("mismatched residual inputs")
    if y_obs.size < 2:
        raise ValueError("need at least 2 observed points")
    return NoiseScale(float(np.sqrt(np.mean((y_obs - f_hat_at_obs) ** 2))),
                      "residual_mle")


class WaveletShrinker:
    """Complete-data pipeline: transform, estimate scale, threshold, invert.

    This is the pluggable unit the multiple-imputation engine consumes.  The
    noise scale is estimated by MAD from the finest details unless a known
    scale is supplied.
    """

    def __init__(self, known_sigma: float | None = None):
        self.known_sigma = known_sigma

    def __call__(self, complete_y: np.ndarray, spec: WaveletSpec,
                 policy: ThresholdPolicy) -> np.ndarray:
        coeffs = transform(complete_y, spec)
        if self.known_sigma is not None:
            scale = NoiseScale(self.known_sigma, "known")
        else:
            scale = mad_sigma(coeffs)
        c = policy.threshold_value(scale.sigma, coeffs.values.size)
        return inverse_transform(policy.apply(coeffs, c))


class AnscombePoissonShrinker:
    """Count-data shrinker: variance-stabilize, run the Gaussian pipeline, invert.

    Counts y map to 2*sqrt(y + 3/8), which is approximately unit-variance
    Gaussian for Poisson data; the Gaussian threshold pipeline runs on that
    scale and the fitted curve maps back through the inverse square, clamped
    at zero since intensities cannot be negative.
    """

    def __call__(self, counts: np.ndarray, spec: WaveletSpec,
                 policy: ThresholdPolicy) -> np.ndarray:
        counts = np.asarray(counts, dtype=float)
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        stabilized = 2.0 * np.sqrt(counts + 0.375)
        fitted = WaveletShrinker()(stabilized, spec, policy)
        return np.maximum((fitted / 2.0) ** 2 - 0.375, 0.0)
