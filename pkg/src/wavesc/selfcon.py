"""Self-consistent estimation engines for incompletely observed signals.

Three iteration schemes recover a wavelet-denoised curve or image when part
of the grid is unobserved:

* ``run_sim``: deterministic single imputation by the current fit, with a
  variance-inflation correction to the noise scale (imputed points carry no
  noise, so the raw scale estimate is biased low).
* ``run_ref``: the same loop, but each detail coefficient is updated by the
  closed-form conditional expectation of its thresholded value given the
  observed data, using per-coefficient missing-information fractions
  (eta_mode "exact") or their common average (eta_mode "average").
* ``run_misc``: multiple imputation; each iteration draws M stochastic
  completions, shrinks each with a pluggable complete-data shrinker, and
  averages.

All engines stop when the relative change of the noise scale (or of the fit,
for count data) drops below ``epsilon``, and are bit-reproducible from their
configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .imputation import NoiseModel, draw_missing
from .shrinkage import (
    SIGMA_FLOOR,
    AnscombePoissonShrinker,
    ThresholdPolicy,
    WaveletShrinker,
    inflate_variance,
    mad_sigma,
    residual_sigma,
)
from .wavelets import (
    IrregularityMap,
    ResponseIndicator,
    WaveletSpec,
    inverse_transform,
    irregularity_map,
    transform,
)

__all__ = [
    "ObservationSet",
    "SelfConConfig",
    "EstimateReport",
    "initial_estimate",
    "conditional_mean_hard",
    "conditional_mean_soft",
    "interpolate_hybrid",
    "run_sim",
    "run_ref",
    "run_misc",
    "ls_fixed_point_oracle",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# data model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ObservationSet:
    """Responses observed on part of a regular dyadic grid.

    ``grid_shape`` is (N,) for signals or (N, N) for images; indices are flat
    row-major positions.  Design points are x_i = i/N in 1D.
    """

    grid_shape: tuple
    observed_indices: np.ndarray
    y_obs: np.ndarray

    def __post_init__(self):
        shape = tuple(int(s) for s in self.grid_shape)
        object.__setattr__(self, "grid_shape", shape)
        idx = np.asarray(self.observed_indices, dtype=np.intp)
        y = np.asarray(self.y_obs, dtype=float)
        object.__setattr__(self, "observed_indices", idx)
        object.__setattr__(self, "y_obs", y)
        if len(shape) not in (1, 2):
            raise ValueError("grid must be 1D or square 2D")
        if len(shape) == 2 and shape[0] != shape[1]:
            raise ValueError("2D grids must be square")
        if idx.ndim != 1 or idx.shape != y.shape:
            raise ValueError("observed_indices and y_obs must align")
        if idx.size < 2:
            raise ValueError("need at least 2 observed points")
        if idx.size and (idx[0] < 0 or idx[-1] >= self.n_total):
            raise ValueError("observed index out of range")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("observed_indices must be strictly increasing")

    @classmethod
    def from_full(cls, y_full: np.ndarray, mask: np.ndarray) -> "ObservationSet":
        """Build from a full grid of responses and a boolean observed mask."""
        y_full = np.asarray(y_full, dtype=float)
        mask = np.asarray(mask, dtype=bool)
        if y_full.shape != mask.shape:
            raise ValueError("response and mask shapes differ")
        idx = np.flatnonzero(mask.reshape(-1))
        return cls(y_full.shape, idx, y_full.reshape(-1)[idx])

    @property
    def is_2d(self) -> bool:
        return len(self.grid_shape) == 2

    @property
    def n_total(self) -> int:
        return int(np.prod(self.grid_shape))

    @property
    def n_observed(self) -> int:
        return self.observed_indices.size

    @property
    def missing_fraction(self) -> float:
        return 1.0 - self.n_observed / self.n_total

    @property
    def missing_indices(self) -> np.ndarray:
        present = np.zeros(self.n_total, dtype=bool)
        present[self.observed_indices] = True
        return np.flatnonzero(~present)

    def mask(self) -> ResponseIndicator:
        m = np.zeros(self.n_total, dtype=bool)
        m[self.observed_indices] = True
        return ResponseIndicator(m.reshape(self.grid_shape))

    def design_1d(self) -> np.ndarray:
        """Grid coordinates x_i = i/N (1D only)."""
        if self.is_2d:
            raise ValueError("design coordinates are defined for 1D grids")
        n = self.grid_shape[0]
        return np.arange(n) / n

    def complete_with(self, f_full: np.ndarray) -> np.ndarray:
        """Full grid carrying observed y and f_full at missing positions."""
        out = np.asarray(f_full, dtype=float).reshape(self.grid_shape).copy()
        out.reshape(-1)[self.observed_indices] = self.y_obs
        return out

    def at_observed(self, f_full: np.ndarray) -> np.ndarray:
        return np.asarray(f_full, dtype=float).reshape(-1)[self.observed_indices]


@dataclass(frozen=True)
class SelfConConfig:
    """Knobs shared by every engine; defaults follow the library conventions.

    ``eta_mode`` selects per-coefficient ("exact") or averaged ("average")
    missing-information fractions in the conditional-mean update.
    ``variance_inflation`` exists so the uncorrected single-imputation
    baseline can be run for comparison; leave it on for real use.
    """

    wavelet: WaveletSpec = WaveletSpec()
    policy: ThresholdPolicy = ThresholdPolicy()
    epsilon: float = 1e-4
    max_iterations: int = 100
    M: int = 100
    eta_mode: str = "average"
    interpolation: str = "none"
    init: str = "local_linear"
    init_span: float = 0.10
    rng_seed: int = 0
    variance_inflation: bool = True
    noise: str = "gaussian"

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if self.eta_mode not in ("exact", "average"):
            raise ValueError(f"unknown eta_mode {self.eta_mode!r}")
        if self.interpolation not in ("none", "linear"):
            raise ValueError(f"unknown interpolation {self.interpolation!r}")
        if self.init not in ("local_linear", "linear_interp"):
            raise ValueError(f"unknown init {self.init!r}")
        if not 0 < self.init_span <= 1:
            raise ValueError("init_span must lie in (0, 1]")
        if self.noise not in ("gaussian", "poisson"):
            raise ValueError(f"unknown noise kind {self.noise!r}")

    def to_dict(self) -> dict:
        return {
            "wavelet": self.wavelet.name,
            "primary_level": self.wavelet.primary_level,
            "threshold": self.policy.selector,
            "fixed_value": self.policy.fixed_value,
            "operator": self.policy.operator,
            "epsilon": self.epsilon,
            "max_iterations": self.max_iterations,
            "M": self.M,
            "eta_mode": self.eta_mode,
            "interpolation": self.interpolation,
            "init": self.init,
            "init_span": self.init_span,
            "rng_seed": self.rng_seed,
            "variance_inflation": self.variance_inflation,
            "noise": self.noise,
        }


@dataclass
class EstimateReport:
    """Outcome of one engine run."""

    algorithm: str
    f_hat: np.ndarray
    sigma_hat: float
    sigma_trajectory: list
    iterations: int
    converged: bool
    eta: IrregularityMap | None = None
    config: SelfConConfig | None = None
    mrss_obs_trajectory: list = field(default_factory=list)
    mse_obs_trajectory: list | None = None

    def to_json_dict(self) -> dict:
        eta_sq = None
        if self.eta is not None:
            eta_sq = np.asarray(self.eta.eta_sq).tolist()
        return {
            "algorithm": self.algorithm,
            "config": self.config.to_dict() if self.config else None,
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "sigma_hat": float(self.sigma_hat),
            "sigma_trajectory": [float(s) for s in self.sigma_trajectory],
            "f_hat": np.asarray(self.f_hat).tolist(),
            "eta_sq": eta_sq,
        }


# ---------------------------------------------------------------------------
# closed-form conditional means
# ---------------------------------------------------------------------------

def _phi(z):
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(z))


def conditional_mean_hard(w, eta_sq, sigma, c):
    """Conditional expectation of a hard-thresholded coefficient.

    For a coefficient whose complete-data value is N(w, tau^2) with
    tau = sqrt(eta_sq) * sigma, returns E[ 1(|W| >= c) * W ]:

        alpha + beta * w,
        alpha = tau * (phi((c - w)/tau) - phi((c + w)/tau)),
        beta  = 2 - Phi((c - w)/tau) - Phi((c + w)/tau).

    At eta_sq = 0 this is exactly the hard-threshold value w * 1(|w| >= c).
    Accepts scalars or arrays (broadcast together).

    Parameters
    ----------
    w : float or ndarray
        Coefficient value(s) from the currently completed data.
    eta_sq : float or ndarray
        Missing-information fraction(s) in [0, 1].
    sigma : float
        Noise scale.
    c : float
        Threshold, treated as known within the update.
    """
    w_arr, tau, scalar = _broadcast_tau(w, eta_sq, sigma)
    out = np.where(np.abs(w_arr) >= c, w_arr, 0.0)
    live = tau > 0
    if np.any(live):
        wl, tl = w_arr[live], tau[live]
        lo = (c - wl) / tl
        hi = (c + wl) / tl
        alpha = tl * (_phi(lo) - _phi(hi))
        beta = 2.0 - ndtr(lo) - ndtr(hi)
        out[live] = alpha + beta * wl
    return float(out[0]) if scalar else out


def conditional_mean_soft(w, eta_sq, sigma, c):
    """Conditional expectation of a soft-thresholded coefficient.

    E[ 1(|W| >= c) * sign(W) * (|W| - c) ] for W ~ N(w, tau^2): the hard
    value plus c * (Phi((c - w)/tau) - Phi((c + w)/tau)).  At eta_sq = 0 this
    is exactly the soft-threshold value.
    """
    w_arr, tau, scalar = _broadcast_tau(w, eta_sq, sigma)
    out = np.asarray(np.sign(w_arr) * np.maximum(np.abs(w_arr) - c, 0.0))
    live = tau > 0
    if np.any(live):
        wl, tl = w_arr[live], tau[live]
        lo = (c - wl) / tl
        hi = (c + wl) / tl
        alpha = tl * (_phi(lo) - _phi(hi))
        beta = 2.0 - ndtr(lo) - ndtr(hi)
        out[live] = alpha + beta * wl + c * (ndtr(lo) - ndtr(hi))
    return float(out[0]) if scalar else out


def _broadcast_tau(w, eta_sq, sigma):
    w_arr = np.asarray(w, dtype=float)
    eta_arr = np.asarray(eta_sq, dtype=float)
    if np.any(eta_arr < 0) or np.any(eta_arr > 1):
        raise ValueError("eta_sq must lie in [0, 1]")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    scalar = w_arr.ndim == 0 and eta_arr.ndim == 0
    w_arr, tau = np.broadcast_arrays(np.atleast_1d(w_arr),
                                     np.atleast_1d(np.sqrt(eta_arr) * sigma))
    return np.array(w_arr, dtype=float), np.asarray(tau), scalar


# ---------------------------------------------------------------------------
# initialization and the interpolation hybrid
# ---------------------------------------------------------------------------

def initial_estimate(obs: ObservationSet,
                     config: SelfConConfig) -> tuple[np.ndarray, float]:
    """Starting curve f0 on the full grid and starting noise scale sigma0.

    1D "local_linear": tricube-weighted local linear fit at every grid point
    using the span*n nearest observed neighbors.  1D "linear_interp":
    piecewise-linear through the observed points, constant outside their
    range.  2D grids use a nearest-observed-neighbor fill for either setting.
    sigma0 is the MAD scale of the transform of the initial curve overlaid
    with the observed responses.
    """
    if obs.is_2d:
        f0 = _nearest_fill_2d(obs)
    elif config.init == "linear_interp":
        x = obs.design_1d()
        f0 = np.interp(x, x[obs.observed_indices], obs.y_obs)
    else:
        f0 = _local_linear_1d(obs, config.init_span)
    completed = obs.complete_with(f0)
    sigma0 = mad_sigma(transform(completed, config.wavelet)).sigma
    return f0, sigma0


def _local_linear_1d(obs: ObservationSet, span: float) -> np.ndarray:
    x_obs = obs.design_1d()[obs.observed_indices]
    y_obs = obs.y_obs
    n = x_obs.size
    r = min(n, max(3, math.ceil(span * n)))
    x_eval = obs.design_1d()
    fitted = np.empty(x_eval.size)
    for i, xe in enumerate(x_eval):
        d = np.abs(x_obs - xe)
        h = np.partition(d, r - 1)[r - 1]
        if h <= 0:
            fitted[i] = y_obs[np.argmin(d)]
            continue
        u = np.minimum(d / h, 1.0)
        w = (1.0 - u ** 3) ** 3
        t = x_obs - xe
        s0, s1, s2 = w.sum(), (w * t).sum(), (w * t * t).sum()
        denom = s0 * s2 - s1 * s1
        if denom <= 1e-14 * max(s0 * s2, 1e-300):
            fitted[i] = (w * y_obs).sum() / s0
        else:
            # intercept of the weighted linear fit in centered coordinates
            fitted[i] = (s2 * (w * y_obs).sum() - s1 * (w * t * y_obs).sum()) / denom
    return fitted


def _nearest_fill_2d(obs: ObservationSet) -> np.ndarray:
    from scipy.ndimage import distance_transform_edt

    grid = np.zeros(obs.grid_shape)
    grid.reshape(-1)[obs.observed_indices] = obs.y_obs
    mask = obs.mask().mask
    _, (ri, ci) = distance_transform_edt(~mask, return_indices=True)
    return grid[ri, ci]


def interpolate_hybrid(f_hat: np.ndarray, obs: ObservationSet) -> np.ndarray:
    """Replace the fit at missing points by linear interpolation (1D).

    Each missing interior point takes the straight-line value between the
    fitted values at its nearest observed neighbors on either side; missing
    points outside the observed range copy the nearest observed point's fit.
    Observed positions are untouched.
    """
    if obs.is_2d:
        raise ValueError("the interpolation hybrid is defined for 1D grids")
    out = np.asarray(f_hat, dtype=float).copy()
    missing = obs.missing_indices
    if missing.size:
        out[missing] = np.interp(missing.astype(float),
                                 obs.observed_indices.astype(float),
                                 out[obs.observed_indices])
    return out


# ---------------------------------------------------------------------------
# engines
# ---------------------------------------------------------------------------

def run_sim(obs: ObservationSet, config: SelfConConfig,
            f_true: np.ndarray | None = None) -> EstimateReport:
    """Single-imputation engine.

    Per iteration: impute missing responses by the current fit, transform,
    estimate the raw MAD scale, inflate it by the missing fraction, threshold
    at the selected level, invert.  Deterministic given (obs, config).
    """
    return _run_deterministic(obs, config, refine=False, f_true=f_true)


def run_ref(obs: ObservationSet, config: SelfConConfig,
            f_true: np.ndarray | None = None) -> EstimateReport:
    """Conditional-mean refinement engine.

    Identical to :func:`run_sim` except the thresholding step: every detail
    coefficient is replaced by the closed-form conditional expectation of its
    thresholded value, driven by per-coefficient missing-information
    fractions (``eta_mode="exact"``) or their common average, the missing
    fraction (``eta_mode="average"``).
    """
    return _run_deterministic(obs, config, refine=True, f_true=f_true)


def _algorithm_name(refine: bool, config: SelfConConfig) -> str:
    if not refine:
        base = "Sim"
    elif config.eta_mode == "average":
        base = "RefA"
    else:
        base = "Ref"
    return base + ("I" if config.interpolation == "linear" else "")


def _check_interpolation(obs, config):
    if config.interpolation == "linear" and obs.is_2d:
        raise ValueError("interpolation=linear is only available on 1D grids")


def _complete_data_report(obs, config, algorithm, shrinker=None,
                          f_true=None) -> EstimateReport:
    # No missing data: every engine is one plain complete-data shrink, and
    # all of them must agree bit for bit.
    y_full = obs.complete_with(np.zeros(obs.grid_shape))
    shrinker = shrinker or WaveletShrinker()
    f_hat = shrinker(y_full, config.wavelet, config.policy)
    sigma = mad_sigma(transform(y_full, config.wavelet)).sigma
    report = EstimateReport(
        algorithm=algorithm,
        f_hat=f_hat,
        sigma_hat=sigma,
        sigma_trajectory=[sigma],
        iterations=1,
        converged=True,
        config=config,
        mrss_obs_trajectory=[float(np.mean((obs.y_obs - obs.at_observed(f_hat)) ** 2))],
    )
    if f_true is not None:
        truth_obs = obs.at_observed(f_true)
        report.mse_obs_trajectory = [
            float(np.mean((truth_obs - obs.at_observed(f_hat)) ** 2))
        ]
    return report


def _run_deterministic(obs, config, refine, f_true):
    _check_interpolation(obs, config)
    algorithm = _algorithm_name(refine, config)
    if obs.missing_fraction == 0.0:
        return _complete_data_report(obs, config, algorithm, f_true=f_true)

    spec, policy = config.wavelet, config.policy
    c_m = obs.missing_fraction
    n_total = obs.n_total

    eta = None
    eta_sq = None
    if refine:
        if config.eta_mode == "exact":
            eta = irregularity_map(obs.mask(), spec)
            eta_sq = eta.eta_sq
        else:
            eta_sq = c_m  # scalar broadcast over all coefficients

    f_prev, sigma_prev = initial_estimate(obs, config)
    trajectory = [sigma_prev]
    mrss_traj: list = []
    mse_traj: list | None = [] if f_true is not None else None
    truth_obs = obs.at_observed(f_true) if f_true is not None else None

    converged = False
    iterations = 0
    f_hat = f_prev
    sigma_hat = sigma_prev
    for t in range(1, config.max_iterations + 1):
        iterations = t
        completed = obs.complete_with(f_prev)
        coeffs = transform(completed, spec)
        sigma_tilde = mad_sigma(coeffs).sigma
        if config.variance_inflation:
            sigma_hat = inflate_variance(sigma_tilde, sigma_prev, c_m).sigma
        else:
            sigma_hat = sigma_tilde
        c = policy.threshold_value(sigma_hat, n_total)

        if not refine:
            shrunk = policy.apply(coeffs, c)
        else:
            shrunk = _conditional_update(coeffs, eta_sq, sigma_hat, c, policy)
        f_hat = inverse_transform(shrunk)
        if config.interpolation == "linear":
            f_hat = interpolate_hybrid(f_hat, obs)

        trajectory.append(sigma_hat)
        mrss_traj.append(float(np.mean((obs.y_obs - obs.at_observed(f_hat)) ** 2)))
        if mse_traj is not None:
            mse_traj.append(float(np.mean((truth_obs - obs.at_observed(f_hat)) ** 2)))

        denom = max(sigma_hat, SIGMA_FLOOR)
        if abs(sigma_hat - sigma_prev) / denom < config.epsilon:
            converged = True
            f_prev, sigma_prev = f_hat, sigma_hat
            break
        f_prev, sigma_prev = f_hat, sigma_hat

    return EstimateReport(
        algorithm=algorithm,
        f_hat=f_hat,
        sigma_hat=sigma_hat,
        sigma_trajectory=trajectory,
        iterations=iterations,
        converged=converged,
        eta=eta,
        config=config,
        mrss_obs_trajectory=mrss_traj,
        mse_obs_trajectory=mse_traj,
    )


def _conditional_update(coeffs, eta_sq, sigma, c, policy):
    w = coeffs.values
    detail = coeffs.detail_mask()
    eta_detail = (np.broadcast_to(eta_sq, w.shape)[detail]
                  if np.ndim(eta_sq) else eta_sq)
    fn = (conditional_mean_hard if policy.operator == "hard"
          else conditional_mean_soft)
    updated = w.copy()
    updated[detail] = fn(w[detail], eta_detail, sigma, c)
    return coeffs.with_values(updated)


def run_misc(obs: ObservationSet, config: SelfConConfig,
             shrinker=None, f_true: np.ndarray | None = None) -> EstimateReport:
    """Multiple-imputation engine.

    Per iteration: draw M independent stochastic completions of the missing
    responses from the configured noise model around the current fit, shrink
    each completion with the pluggable complete-data shrinker, and average.
    The Gaussian path re-estimates the noise scale from observed residuals
    and stops on its relative change; the Poisson path stops on the relative
    L2 change of the fit.  Bit-reproducible from ``config.rng_seed``.
    """
    _check_interpolation(obs, config)
    algorithm = "MISC" + ("I" if config.interpolation == "linear" else "")
    poisson = config.noise == "poisson"
    if shrinker is None:
        shrinker = AnscombePoissonShrinker() if poisson else WaveletShrinker()
    if obs.missing_fraction == 0.0:
        return _complete_data_report(obs, config, algorithm, shrinker, f_true)

    spec, policy = config.wavelet, config.policy
    f_prev, sigma_prev = initial_estimate(obs, config)
    trajectory = [] if poisson else [sigma_prev]
    mrss_traj: list = []
    mse_traj: list | None = [] if f_true is not None else None
    truth_obs = obs.at_observed(f_true) if f_true is not None else None

    converged = False
    iterations = 0
    f_hat = f_prev
    sigma_hat = sigma_prev
    for t in range(1, config.max_iterations + 1):
        iterations = t
        if poisson:
            model = NoiseModel("poisson", rng_seed=config.rng_seed)
        else:
            model = NoiseModel("gaussian", sigma=max(sigma_prev, SIGMA_FLOOR),
                               rng_seed=config.rng_seed)
        accum = np.zeros(obs.grid_shape)
        for m in range(1, config.M + 1):
            fills = draw_missing(f_prev, obs, model, iteration=t, replicate=m)
            completed = obs.complete_with(f_prev)
            completed.reshape(-1)[obs.missing_indices] = fills
            accum += shrinker(completed, spec, policy)
        f_hat = accum / config.M
        if config.interpolation == "linear":
            f_hat = interpolate_hybrid(f_hat, obs)

        mrss_traj.append(float(np.mean((obs.y_obs - obs.at_observed(f_hat)) ** 2)))
        if mse_traj is not None:
            mse_traj.append(float(np.mean((truth_obs - obs.at_observed(f_hat)) ** 2)))

        if poisson:
            delta = float(np.linalg.norm((f_hat - f_prev).ravel()))
            scale = max(float(np.linalg.norm(f_hat.ravel())), SIGMA_FLOOR)
            converged = delta / scale < config.epsilon
            f_prev = f_hat
        else:
            sigma_hat = residual_sigma(obs.y_obs, obs.at_observed(f_hat)).sigma
            trajectory.append(sigma_hat)
            denom = max(sigma_hat, SIGMA_FLOOR)
            converged = abs(sigma_hat - sigma_prev) / denom < config.epsilon
            f_prev, sigma_prev = f_hat, sigma_hat
        if converged:
            break

    return EstimateReport(
        algorithm=algorithm,
        f_hat=f_hat,
        sigma_hat=0.0 if poisson else sigma_hat,
        sigma_trajectory=trajectory,
        iterations=iterations,
        converged=converged,
        config=config,
        mrss_obs_trajectory=mrss_traj,
        mse_obs_trajectory=mse_traj,
    )


# ---------------------------------------------------------------------------
# least-squares fixed-point demonstration
# ---------------------------------------------------------------------------

def ls_fixed_point_oracle(x, y, m: int, seed_beta: float = 0.0) -> float:
    """Impute-refit iteration for a no-intercept line, run to its fixed point.

    With the first ``m`` responses observed, repeat: fill y_i = beta * x_i
    for i > m, then refit the slope by full-data least squares.  The map is
    an affine contraction whenever the observed x carry any energy, and its
    fixed point is exactly the m-point least-squares slope; this analytically
    solvable case validates the self-consistent iteration machinery.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length vectors")
    n = x.size
    if not 0 < m < n:
        raise ValueError("need 0 < m < len(x)")
    sxx_obs = float(np.dot(x[:m], x[:m]))
    if sxx_obs <= 0:
        raise ValueError("observed x must carry positive energy")
    sxy_obs = float(np.dot(x[:m], y[:m]))
    sxx_all = float(np.dot(x, x))
    sxx_tail = sxx_all - sxx_obs

    beta = float(seed_beta)
    for _ in range(10_000):
        beta_next = (sxy_obs + beta * sxx_tail) / sxx_all
        if abs(beta_next - beta) < 1e-12:
            return beta_next
        beta = beta_next
    raise RuntimeError("impute-refit iteration failed to settle")
