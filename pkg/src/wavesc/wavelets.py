"""Orthogonal periodized discrete wavelet transforms and the irregularity map.

The analysis operator W maps a length-N signal (N a power of two) to a flat
coefficient vector holding 2^p scaling coefficients followed by detail blocks
from coarse to fine, where p is the primary resolution level.  Periodic
(circular) boundary handling keeps W exactly orthogonal: W @ W.T == I up to
round-off, for every admissible N.

The 2D transform is the separable tensor product: the full 1D transform is
applied to every column and then to every row, so the coefficient grid is
W @ X @ W.T and inherits the 1D orthogonality.

The irregularity map quantifies, coefficient by coefficient, how much of each
coefficient's information comes from unobserved grid positions: eta_sq[l] is
the l-th diagonal entry of I - W R W.T for a 0/1 response indicator R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "WaveletSpec",
    "CoefficientArray",
    "ResponseIndicator",
    "IrregularityMap",
    "daubechies_filter",
    "dwt_1d",
    "idwt_1d",
    "dwt_2d",
    "idwt_2d",
    "irregularity_map",
    "eta_to_csv",
]

_MAX_VANISHING_MOMENTS = 20


@lru_cache(maxsize=None)
def daubechies_filter(vanishing_moments: int) -> np.ndarray:
    """Scaling (low-pass) filter of the extremal-phase Daubechies family.

    Computed by spectral factorization of the half-band autocorrelation
    polynomial at 50-digit working precision, then rounded to float64, so the
    double-shift orthonormality relations hold to machine accuracy for every
    supported order.

    Parameters
    ----------
    vanishing_moments : int
        Number of vanishing moments v; the filter has 2v taps.  v = 1 is the
        Haar filter.

    Returns
    -------
    ndarray
        Filter taps h[0..2v-1] with sum(h) = sqrt(2) and unit energy.
    """
    v = int(vanishing_moments)
    if not 1 <= v <= _MAX_VANISHING_MOMENTS:
        raise ValueError(
            f"vanishing_moments must be in [1, {_MAX_VANISHING_MOMENTS}], got {v}"
        )
    if v == 1:
        r = 1.0 / math.sqrt(2.0)
        return np.array([r, r])

    import mpmath as mp

    with mp.workdps(50):
        # P(y) = sum_k C(v-1+k, k) y^k, the residual factor of the half-band
        # autocorrelation; its roots drive the factorization.
        p_desc = [mp.binomial(v - 1 + k, k) for k in reversed(range(v))]
        roots_y = mp.polyroots(p_desc, maxsteps=200, extraprec=200)

        # Each root y maps to a reciprocal pair z, 1/z via z + 1/z = 2 - 4y;
        # keeping |z| < 1 yields the minimum-phase (extremal-phase) factor.
        z_roots = []
        for y in roots_y:
            b = 2 - 4 * y
            disc = mp.sqrt(b * b - 4)
            z1, z2 = (b + disc) / 2, (b - disc) / 2
            z_roots.append(z1 if abs(z1) < 1 else z2)

        # h(z) = norm * (1+z)^v * prod_i (z - z_i), coefficients in descending
        # powers of z; that ordering is the conventional h_0..h_{2v-1}.
        poly = [mp.mpf(1)]
        for _ in range(v):
            poly = _poly_mul(poly, [mp.mpf(1), mp.mpf(1)])
        for z0 in z_roots:
            poly = _poly_mul(poly, [mp.mpc(1), -z0])

        imag_max = max(abs(mp.im(c)) for c in poly)
        if imag_max > mp.mpf("1e-30"):
            raise RuntimeError("filter construction lost conjugate symmetry")
        taps = [mp.re(c) for c in poly]
        scale = mp.sqrt(2) / mp.fsum(taps)
        h = np.array([float(c * scale) for c in taps])
    return h


def _poly_mul(a: list, b: list) -> list:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def _qmf(h: np.ndarray) -> np.ndarray:
    """Detail (high-pass) filter paired with h: g[k] = (-1)^k h[L-1-k]."""
    g = h[::-1].copy()
    g[1::2] = -g[1::2]
    return g


@dataclass(frozen=True)
class WaveletSpec:
    """Wavelet family, order, boundary rule, and primary resolution level.

    ``primary_level`` p is the coarsest decomposition level: the transform
    stops with 2^p scaling coefficients, which downstream shrinkage never
    touches.
    """

    family: str = "daubechies"
    vanishing_moments: int = 5
    primary_level: int = 3
    boundary: str = "periodic"

    def __post_init__(self):
        if self.family not in ("haar", "daubechies"):
            raise ValueError(f"unknown wavelet family {self.family!r}")
        if self.boundary != "periodic":
            raise ValueError("only periodic boundary handling is supported")
        if self.primary_level < 0:
            raise ValueError("primary_level must be non-negative")
        if self.family == "daubechies":
            if not 1 <= int(self.vanishing_moments) <= _MAX_VANISHING_MOMENTS:
                raise ValueError("unsupported number of vanishing moments")

    @classmethod
    def from_name(cls, name: str, primary_level: int = 3) -> "WaveletSpec":
        """Build a spec from a short name: ``haar`` or ``db<v>`` (e.g. db5)."""
        name = name.strip().lower()
        if name == "haar":
            return cls("haar", 1, primary_level)
        if name.startswith("db"):
            try:
                v = int(name[2:])
            except ValueError:
                raise ValueError(f"cannot parse wavelet name {name!r}") from None
            return cls("daubechies", v, primary_level)
        raise ValueError(f"cannot parse wavelet name {name!r}")

    @property
    def name(self) -> str:
        if self.family == "haar":
            return "haar"
        return f"db{self.vanishing_moments}"

    def filters(self) -> tuple[np.ndarray, np.ndarray]:
        """Analysis filter pair (low-pass h, high-pass g)."""
        if self.family == "haar":
            h = daubechies_filter(1)
        else:
            h = daubechies_filter(self.vanishing_moments)
        return h, _qmf(h)

    def validate_length(self, n: int) -> int:
        """Check n is a power of two deep enough for primary_level; return J."""
        if n < 2 or n & (n - 1):
            raise ValueError(f"signal length {n} is not a power of two >= 2")
        j = n.bit_length() - 1
        if self.primary_level >= j:
            raise ValueError(
                f"primary_level {self.primary_level} too deep for length {n}"
            )
        return j


@dataclass(frozen=True)
class CoefficientArray:
    """Wavelet coefficients in the flat scaling-then-details layout.

    For a 1D transform of length N = 2^J with primary level p, flat indices
    [0, 2^p) hold the scaling block and, for each level j in [p, J), indices
    [2^j, 2^(j+1)) hold that level's detail coefficients; the layout is a
    bijection onto 0..N-1.  A 2D coefficient grid indexes rows and columns by
    the same 1D layout.
    """

    values: np.ndarray
    spec: WaveletSpec

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        if v.ndim not in (1, 2):
            raise ValueError("coefficients must be a vector or a square grid")
        if v.ndim == 2 and v.shape[0] != v.shape[1]:
            raise ValueError("2D coefficient grids must be square")
        self.spec.validate_length(v.shape[-1])

    @property
    def is_2d(self) -> bool:
        return self.values.ndim == 2

    @property
    def n(self) -> int:
        return self.values.shape[-1]

    @property
    def coarse_size(self) -> int:
        return 2 ** self.spec.primary_level

    def detail_mask(self) -> np.ndarray:
        """Boolean array marking coefficients subject to shrinkage.

        Everything outside the pure scaling block: in 2D only the top-left
        coarse-by-coarse corner is protected.
        """
        nc = self.coarse_size
        scaling_1d = np.arange(self.n) < nc
        if self.is_2d:
            return ~(scaling_1d[:, None] & scaling_1d[None, :])
        return ~scaling_1d

    @property
    def finest_level_slice(self):
        """Index expression selecting the finest-detail coefficients."""
        half = self.n // 2
        if self.is_2d:
            return (slice(half, self.n), slice(half, self.n))
        return slice(half, self.n)

    def finest_details(self) -> np.ndarray:
        """Finest-detail coefficients as a flat vector (1D slice or 2D corner)."""
        return np.ravel(self.values[self.finest_level_slice])

    def level_and_position(self, flat_index: int) -> tuple[int, int]:
        """Map a 1D flat index to (level, position); level -1 is the scaling block."""
        l = int(flat_index)
        if not 0 <= l < self.n:
            raise IndexError(f"flat index {l} out of range")
        nc = self.coarse_size
        if l < nc:
            return -1, l
        level = l.bit_length() - 1
        return level, l - (1 << level)

    def with_values(self, values: np.ndarray) -> "CoefficientArray":
        return CoefficientArray(values, self.spec)


@dataclass(frozen=True)
class ResponseIndicator:
    """0/1 observation mask over the grid (True = observed)."""

    mask: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mask, dtype=bool)
        object.__setattr__(self, "mask", m)
        if m.ndim not in (1, 2):
            raise ValueError("mask must be a vector or a square grid")
        if m.ndim == 2 and m.shape[0] != m.shape[1]:
            raise ValueError("2D masks must be square")

    @property
    def n_observed(self) -> int:
        return int(self.mask.sum())

    @property
    def n_total(self) -> int:
        return self.mask.size

    @property
    def missing_fraction(self) -> float:
        return 1.0 - self.n_observed / self.n_total

    def observed_flat(self) -> np.ndarray:
        return np.flatnonzero(self.mask.ravel())

    def missing_flat(self) -> np.ndarray:
        return np.flatnonzero(~self.mask.ravel())


@dataclass(frozen=True)
class IrregularityMap:
    """Per-coefficient missing-information fractions eta_sq in [0, 1].

    eta_sq[l] is the l-th diagonal entry of I - W R W.T; its mean over all
    coefficients equals the missing fraction of the mask that produced it.
    """

    eta_sq: np.ndarray
    primary_level: int = 3

    def __post_init__(self):
        v = np.asarray(self.eta_sq, dtype=float)
        object.__setattr__(self, "eta_sq", v)
        if np.any(v < -1e-9) or np.any(v > 1 + 1e-9):
            raise ValueError("eta_sq entries must lie in [0, 1]")


# ---------------------------------------------------------------------------
# periodized filter-bank stages, batched over leading axes
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _analysis_indices(n: int, taps: int) -> np.ndarray:
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(taps)[None, :]) % n
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=None)
def _synthesis_indices(n_half: int, taps: int) -> np.ndarray:
    idx = (np.arange(n_half)[:, None] - np.arange(taps // 2)[None, :]) % n_half
    idx.setflags(write=False)
    return idx


def _analysis_stage(x, h, g):
    # x: (..., n), n even -> approximation and detail, each (..., n/2)
    n = x.shape[-1]
    window = x[..., _analysis_indices(n, len(h))]
    return window @ h, window @ g


def _synthesis_stage(a, d, h, g):
    # exact adjoint of _analysis_stage (inverse, by orthogonality)
    n_half = a.shape[-1]
    idx = _synthesis_indices(n_half, len(h))
    aw, dw = a[..., idx], d[..., idx]
    out = np.empty(a.shape[:-1] + (2 * n_half,), dtype=float)
    out[..., 0::2] = aw @ h[0::2] + dw @ g[0::2]
    out[..., 1::2] = aw @ h[1::2] + dw @ g[1::2]
    return out


def _forward(x: np.ndarray, spec: WaveletSpec) -> np.ndarray:
    """Full multi-level analysis along the last axis; x shape (..., N)."""
    n = x.shape[-1]
    j_max = spec.validate_length(n)
    h, g = spec.filters()
    out = np.empty_like(x, dtype=float)
    approx = np.asarray(x, dtype=float)
    for j in range(j_max - 1, spec.primary_level - 1, -1):
        approx, detail = _analysis_stage(approx, h, g)
        out[..., 1 << j: 2 << j] = detail
    out[..., : 1 << spec.primary_level] = approx
    return out


def _inverse(w: np.ndarray, spec: WaveletSpec) -> np.ndarray:
    """Inverse of _forward along the last axis."""
    n = w.shape[-1]
    j_max = spec.validate_length(n)
    h, g = spec.filters()
    approx = np.asarray(w[..., : 1 << spec.primary_level], dtype=float)
    for j in range(spec.primary_level, j_max):
        approx = _synthesis_stage(approx, w[..., 1 << j: 2 << j], h, g)
    return approx


def _forward_2d(x: np.ndarray, spec: WaveletSpec) -> np.ndarray:
    # rows then columns; the two passes commute exactly in exact arithmetic
    y = _forward(x, spec)
    return _forward(y.swapaxes(-1, -2), spec).swapaxes(-1, -2)


def _inverse_2d(w: np.ndarray, spec: WaveletSpec) -> np.ndarray:
    y = _inverse(w.swapaxes(-1, -2), spec).swapaxes(-1, -2)
    return _inverse(y, spec)


# ---------------------------------------------------------------------------
# public transform API
# ---------------------------------------------------------------------------

def dwt_1d(signal: np.ndarray, spec: WaveletSpec) -> CoefficientArray:
    """Orthogonal analysis transform of a 1D signal.

    Parameters
    ----------
    signal : array_like, shape (N,)
        Input samples; N must be a power of two with N > 2**primary_level.
    spec : WaveletSpec
        Wavelet family/order and primary resolution.

    Returns
    -------
    CoefficientArray
        Flat coefficients: scaling block first, then detail levels coarse to
        fine.  Energy is preserved (Parseval).
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("dwt_1d expects a 1D signal")
    return CoefficientArray(_forward(x, spec), spec)


def idwt_1d(coeffs: CoefficientArray, spec: WaveletSpec | None = None) -> np.ndarray:
    """Invert :func:`dwt_1d`; exact up to floating-point round-off."""
    spec = coeffs.spec if spec is None else spec
    if spec != coeffs.spec:
        raise ValueError("coefficient layout was produced under a different spec")
    if coeffs.is_2d:
        raise ValueError("idwt_1d expects 1D coefficients")
    return _inverse(coeffs.values, spec)


def dwt_2d(image: np.ndarray, spec: WaveletSpec) -> CoefficientArray:
    """Separable tensor-product analysis transform of a square image.

    Applies the full 1D transform to every column and then to every row, so
    the coefficient grid equals W @ X @ W.T and the transform is orthogonal
    whenever the 1D transform is.
    """
    x = np.asarray(image, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("dwt_2d expects a square image")
    return CoefficientArray(_forward_2d(x, spec), spec)


def idwt_2d(coeffs: CoefficientArray, spec: WaveletSpec | None = None) -> np.ndarray:
    """Invert :func:`dwt_2d`."""
    spec = coeffs.spec if spec is None else spec
    if spec != coeffs.spec:
        raise ValueError("coefficient layout was produced under a different spec")
    if not coeffs.is_2d:
        raise ValueError("idwt_2d expects 2D coefficients")
    return _inverse_2d(coeffs.values, spec)


def transform(data: np.ndarray, spec: WaveletSpec) -> CoefficientArray:
    """Dimension-dispatching analysis transform (1D vector or square image)."""
    data = np.asarray(data, dtype=float)
    return dwt_2d(data, spec) if data.ndim == 2 else dwt_1d(data, spec)


def inverse_transform(coeffs: CoefficientArray) -> np.ndarray:
    """Dimension-dispatching inverse of :func:`transform`."""
    return idwt_2d(coeffs) if coeffs.is_2d else idwt_1d(coeffs)


# ---------------------------------------------------------------------------
# irregularity map
# ---------------------------------------------------------------------------

_ETA_CHUNK = 64


def irregularity_map(mask: ResponseIndicator | np.ndarray,
                     spec: WaveletSpec) -> IrregularityMap:
    """Per-coefficient missing-information fractions for an observation mask.

    eta_sq[l] = sum over missing grid positions i of W[l, i]^2, computed by
    transforming unit vectors at those positions and accumulating squared
    coefficients; the dense matrix W is never materialized.  When more than
    half the grid is missing the complementary accumulation over observed
    positions is used (eta_sq = 1 - sum over observed), which is algebraically
    identical because W has orthonormal rows.

    Parameters
    ----------
    mask : ResponseIndicator or boolean array
        True entries mark observed grid positions.
    spec : WaveletSpec

    Returns
    -------
    IrregularityMap
        Same shape as the mask; entries clipped to [0, 1] against round-off.
    """
    if not isinstance(mask, ResponseIndicator):
        mask = ResponseIndicator(mask)
    m = mask.mask
    spec.validate_length(m.shape[-1])
    missing = np.flatnonzero(~m.ravel())
    use_complement = missing.size > m.size // 2
    targets = np.flatnonzero(m.ravel()) if use_complement else missing

    acc = np.zeros(m.shape, dtype=float)
    fwd = _forward_2d if m.ndim == 2 else _forward
    for start in range(0, targets.size, _ETA_CHUNK):
        chunk = targets[start:start + _ETA_CHUNK]
        units = np.zeros((chunk.size,) + m.shape, dtype=float)
        units.reshape(chunk.size, -1)[np.arange(chunk.size), chunk] = 1.0
        acc += np.square(fwd(units, spec)).sum(axis=0)

    eta_sq = (1.0 - acc) if use_complement else acc
    np.clip(eta_sq, 0.0, 1.0, out=eta_sq)
    return IrregularityMap(eta_sq, spec.primary_level)


def eta_to_csv(eta: IrregularityMap, path) -> None:
    """Write a 1D irregularity map as CSV.

    Columns are ``flat_index, level, position, eta_sq``; level -1 labels the
    scaling block.  2D maps have tuple-valued levels and are serialized
    through report JSON instead.
    """
    values = eta.eta_sq
    if values.ndim != 1:
        raise ValueError("CSV export is defined for 1D irregularity maps")
    nc = 1 << eta.primary_level
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("flat_index,level,position,eta_sq\n")
        for l, v in enumerate(values):
            if l < nc:
                level, pos = -1, l
            else:
                level = l.bit_length() - 1
                pos = l - (1 << level)
            fh.write(f"{l},{level},{pos},{float(v)!r}\n")
