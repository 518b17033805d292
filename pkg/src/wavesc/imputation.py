"""Conditional samplers for the multiple-imputation step.

Fills for missing grid positions are drawn from counter-based RNG substreams
keyed by (seed, iteration, replicate), so serial and replicate-parallel
execution produce bit-identical fills and any replicate can be regenerated in
isolation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NoiseModel", "substream", "draw_missing"]

_UINT64_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class NoiseModel:
    """Observation noise model: i.i.d. Gaussian with scale sigma, or Poisson."""

    kind: str
    sigma: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("gaussian", "poisson"):
            raise ValueError(f"unknown noise model {self.kind!r}")
        if self.kind == "gaussian":
            if self.sigma is None or self.sigma < 0:
                raise ValueError("gaussian noise requires sigma >= 0")
        if not 0 <= int(self.rng_seed) <= _UINT64_MAX:
            raise ValueError("rng_seed must fit in 64 bits")


def substream(seed: int, iteration: int, replicate: int) -> np.random.Generator:
    """Independent generator for one (iteration, replicate) cell.

    Implemented with the Philox counter-based generator: the key is the seed
    and the high counter words hold (replicate, iteration), so distinct cells
    occupy disjoint counter ranges no matter how many values each draws.
    """
    counter = np.array([0, 0, replicate, iteration], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def draw_missing(f_hat: np.ndarray, obs, model: NoiseModel,
                 iteration: int = 1, replicate: int = 1) -> np.ndarray:
    """Draw fill values for the missing positions of a grid.

    Gaussian: independent N(f_hat[i], sigma^2) at each missing i.  Poisson:
    independent Poisson(max(f_hat[i], 0)) (wavelet intensity estimates can dip
    below zero; negative intensities are clamped).  Fills are generated in
    ascending flat-index order from the (iteration, replicate) substream, so
    they are deterministic given (rng_seed, iteration, replicate) and
    untouched by whatever other replicates draw.

    Parameters
    ----------
    f_hat : ndarray
        Current full-grid estimate (1D or 2D).
    obs : ObservationSet
        Supplies the missing index set; observed values are never altered.
    model : NoiseModel
    iteration, replicate : int
        Substream key components.

    Returns
    -------
    ndarray
        One fill value per missing index, in ascending flat-index order.
    """
    missing = obs.missing_indices
    centers = np.asarray(f_hat, dtype=float).reshape(-1)[missing]
    rng = substream(model.rng_seed, iteration, replicate)
    if model.kind == "gaussian":
        if model.sigma == 0:
            return centers.copy()
        return centers + model.sigma * rng.standard_normal(centers.size)
    return rng.poisson(np.maximum(centers, 0.0)).astype(float)
