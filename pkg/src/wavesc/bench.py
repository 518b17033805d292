"""Benchmark harness: test signals, missingness generators, metrics, ranks.

Everything needed to run paired simulation studies of the estimation engines
on standard test signals: deterministic data generation from a scenario seed,
per-replicate metric rows, complete-data baseline ratios, and the pairwise
rank-sum ranking of algorithms.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from .selfcon import (
    ObservationSet,
    SelfConConfig,
    run_misc,
    run_ref,
    run_sim,
)
from .shrinkage import ThresholdPolicy, WaveletShrinker
from .wavelets import ResponseIndicator, WaveletSpec

__all__ = [
    "Scenario",
    "MetricRow",
    "test_function",
    "synthetic_image",
    "synthetic_intensity",
    "apply_snr",
    "make_missing",
    "metrics",
    "mse_ratio",
    "rank_sum_test",
    "rank_by_significance",
    "wilcoxon_rank",
    "run_scenario",
    "ALGORITHMS",
]

# ---------------------------------------------------------------------------
# test signals
# ---------------------------------------------------------------------------

_DJ_POS = np.array([0.1, 0.13, 0.15, 0.23, 0.25, 0.4, 0.44, 0.65, 0.76,
                    0.78, 0.81])
_BLOCKS_HGT = np.array([4.0, -5.0, 3.0, -4.0, 5.0, -4.2, 2.1, 4.3, -3.1,
                        2.1, -4.2])
_BUMPS_HGT = np.array([4.0, 5.0, 3.0, 4.0, 5.0, 4.2, 2.1, 4.3, 3.1, 5.1,
                       4.2])
_BUMPS_WTH = np.array([0.005, 0.005, 0.006, 0.01, 0.01, 0.03, 0.01, 0.01,
                       0.005, 0.008, 0.005])


def _blocks(x):
    # step closed on the left so a jump landing exactly on a grid point
    # contributes a single nonzero finite difference
    steps = (x[:, None] >= _DJ_POS[None, :]).astype(float)
    return steps @ _BLOCKS_HGT


def _bumps(x):
    t = np.abs(x[:, None] - _DJ_POS[None, :]) / _BUMPS_WTH[None, :]
    return ((1.0 + t) ** -4) @ _BUMPS_HGT


def _heavisine(x):
    return 4.0 * np.sin(4.0 * np.pi * x) - np.sign(x - 0.3) - np.sign(0.72 - x)


def _doppler(x):
    return np.sqrt(x * (1.0 - x)) * np.sin(2.0 * np.pi * 1.05 / (x + 0.05))


_TEST_FUNCTIONS = {
    "blocks": _blocks,
    "bumps": _bumps,
    "heavisine": _heavisine,
    "doppler": _doppler,
}


def test_function(name: str, n: int) -> np.ndarray:
    """Evaluate a standard test signal on the grid x_i = i/N.

    Supported names: blocks, bumps, heavisine, doppler, with the classic
    published amplitude/position constants and no rescaling.
    """
    key = name.strip().lower()
    if key not in _TEST_FUNCTIONS:
        raise ValueError(f"unknown test function {name!r}")
    if n < 8:
        raise ValueError("need a grid of at least 8 points")
    x = np.arange(n) / n
    return _TEST_FUNCTIONS[key](x)


def synthetic_image(n: int) -> np.ndarray:
    """Piecewise-smooth test image: ramp background, disk, bar, smooth blob."""
    if n < 8:
        raise ValueError("need at least an 8x8 image")
    g = np.arange(n) / n
    xx, yy = np.meshgrid(g, g, indexing="ij")
    img = 30.0 + 40.0 * xx + 20.0 * yy
    img += 60.0 * (((xx - 0.35) ** 2 + (yy - 0.4) ** 2) < 0.04)
    img += 40.0 * ((np.abs(xx - 0.7) < 0.12) & (np.abs(yy - 0.65) < 0.2))
    img += 25.0 * np.exp(-((xx - 0.75) ** 2 + (yy - 0.2) ** 2) / 0.01)
    return img


def synthetic_intensity(n: int) -> np.ndarray:
    """Smooth strictly positive intensity for count-data demonstrations."""
    x = np.arange(n) / n
    return (8.0 + 30.0 * np.exp(-((x - 0.3) / 0.12) ** 2)
            + 20.0 * np.exp(-((x - 0.7) / 0.08) ** 2)
            + 6.0 * np.sin(2.0 * np.pi * x))


def apply_snr(f: np.ndarray, snr: float) -> float:
    """Noise scale giving the requested signal-to-noise ratio: sd(f)/snr."""
    if snr <= 0:
        raise ValueError("snr must be positive")
    sd = float(np.std(np.asarray(f, dtype=float)))
    if sd == 0:
        raise ValueError("test signal is constant; snr is undefined")
    return sd / snr


# ---------------------------------------------------------------------------
# missingness
# ---------------------------------------------------------------------------

def make_missing(shape, missing_fraction: float, kind: str = "random",
                 seed: int = 0) -> ResponseIndicator:
    """Observation mask with an exact number of missing positions.

    ``random`` deletes round(C_m * N) positions uniformly without
    replacement.  ``clustered`` unions random axis-aligned rectangles (1D:
    intervals) with side lengths uniform on [4, 16] until the target count is
    reached, then trims the last rectangle to hit it exactly.
    """
    if isinstance(shape, (int, np.integer)):
        shape = (int(shape),)
    shape = tuple(int(s) for s in shape)
    n_total = int(np.prod(shape))
    if not 0.0 <= missing_fraction < 1.0:
        raise ValueError("missing_fraction must lie in [0, 1)")
    target = int(round(missing_fraction * n_total))
    if missing_fraction > 0 and target < 1:
        raise ValueError("missing_fraction too small for this grid")
    if n_total - target < 2:
        raise ValueError("fewer than 2 surviving observations")
    if kind not in ("random", "clustered"):
        raise ValueError(f"unknown missingness kind {kind!r}")

    rng = np.random.default_rng(seed)
    flat_missing = np.zeros(n_total, dtype=bool)
    if target == 0:
        pass
    elif kind == "random":
        flat_missing[rng.choice(n_total, size=target, replace=False)] = True
    else:
        count = 0
        while count < target:
            added = _random_box(rng, shape, flat_missing)
            if count + added.size > target:
                added = added[: target - count]
            flat_missing[added] = True
            count += added.size
    return ResponseIndicator(~flat_missing.reshape(shape))


def _random_box(rng, shape, already):
    """Flat indices of a random rectangle's newly missing cells, row-major."""
    sides = rng.integers(4, 17, size=len(shape))
    corners = [rng.integers(0, s) for s in shape]
    slices = tuple(np.arange(c, min(c + w, s))
                   for c, w, s in zip(corners, sides, shape))
    if len(shape) == 1:
        flat = slices[0]
    else:
        flat = (slices[0][:, None] * shape[1] + slices[1][None, :]).ravel()
    return flat[~already[flat]]


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

@dataclass
class MetricRow:
    """One (algorithm, replicate) outcome of a scenario."""

    algorithm: str
    replicate: int
    mse_com: float
    mse_obs: float
    mse_mis: float | None
    mrss_obs: float
    runtime_ms: float
    iterations: int

    CSV_HEADER = "algorithm,replicate,mse_com,mse_obs,mse_mis,mrss_obs,runtime_ms,iterations"

    def csv_line(self) -> str:
        mis = "" if self.mse_mis is None else repr(self.mse_mis)
        return (f"{self.algorithm},{self.replicate},{self.mse_com!r},"
                f"{self.mse_obs!r},{mis},{self.mrss_obs!r},"
                f"{self.runtime_ms:.3f},{self.iterations}")


def metrics(f_true, f_hat, y, mask) -> dict:
    """Error summaries of a fit against the truth and the noisy responses.

    Returns mse_com / mse_obs / mse_mis (squared error against the truth
    averaged over all, observed, and missing grid positions; mse_mis is None
    when nothing is missing) and mrss_obs (mean squared residual against the
    observed responses).
    """
    f_true = np.asarray(f_true, dtype=float).reshape(-1)
    f_hat = np.asarray(f_hat, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    m = np.asarray(mask, dtype=bool).reshape(-1)
    if not (f_true.shape == f_hat.shape == y.shape == m.shape):
        raise ValueError("metric inputs must share one grid shape")
    err = (f_hat - f_true) ** 2
    out = {
        "mse_com": float(err.mean()),
        "mse_obs": float(err[m].mean()),
        "mse_mis": float(err[~m].mean()) if np.any(~m) else None,
        "mrss_obs": float(((f_hat - y)[m] ** 2).mean()),
    }
    return out


def mse_ratio(rows: list, algorithm: str, metric: str = "mse_com",
              baseline: str = "UniComp") -> np.ndarray:
    """Per-replicate ratio of an algorithm's error to the baseline's.

    Rows must come from paired runs (identical data per replicate); the
    result is aligned by replicate index.
    """
    alg = {r.replicate: getattr(r, metric) for r in rows
           if r.algorithm == algorithm}
    base = {r.replicate: getattr(r, metric) for r in rows
            if r.algorithm == baseline}
    common = sorted(set(alg) & set(base))
    if not common:
        raise ValueError(f"no paired replicates for {algorithm} vs {baseline}")
    ratios = np.empty(len(common))
    for i, rep in enumerate(common):
        if not base[rep]:
            raise ValueError(f"zero baseline {metric} in replicate {rep}")
        ratios[i] = alg[rep] / base[rep]
    return ratios


# ---------------------------------------------------------------------------
# rank-sum test and ranking
# ---------------------------------------------------------------------------

_EXACT_LIMIT = 10


def rank_sum_test(x, y) -> tuple[float, float]:
    """Two-sided rank-sum test of location difference between two samples.

    Returns (rank sum of the first sample using midranks, p-value).  For
    sample sizes up to 10 with no ties the p-value comes from the exact null
    distribution of the rank sum; otherwise a normal approximation with
    midrank tie correction is used.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, m = x.size, y.size
    if n < 1 or m < 1:
        raise ValueError("both samples must be non-empty")
    pooled = np.concatenate([x, y])
    ranks = _midranks(pooled)
    w = float(ranks[:n].sum())

    no_ties = np.unique(pooled).size == pooled.size
    if no_ties and max(n, m) <= _EXACT_LIMIT:
        return w, _exact_rank_sum_p(int(round(w)), n, m)

    mu = n * (n + m + 1) / 2.0
    var = n * m * (n + m + 1) / 12.0
    if not no_ties:
        # midrank tie correction to the null variance
        _, counts = np.unique(pooled, return_counts=True)
        t = counts.astype(float)
        var -= n * m * np.sum(t ** 3 - t) / (12.0 * (n + m) * (n + m - 1))
    if var <= 0:
        return w, 1.0
    z = (w - mu) / math.sqrt(var)
    return w, math.erfc(abs(z) / math.sqrt(2.0))


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=float)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def _exact_rank_sum_p(w: int, n: int, m: int) -> float:
    """Two-sided p from the exact rank-sum null distribution (no ties)."""
    counts = _rank_sum_counts(n, n + m)
    total = math.comb(n + m, n)
    offset = n * (n + 1) // 2  # minimum achievable rank sum
    mu2 = n * (n + m + 1)      # 2 * mean, kept integral
    dev2 = abs(2 * w - mu2)
    hits = sum(cnt for s, cnt in enumerate(counts, start=offset)
               if abs(2 * s - mu2) >= dev2)
    return hits / total


def _rank_sum_counts(k: int, top: int) -> list:
    """counts[s - k(k+1)/2] = number of k-subsets of {1..top} with sum s."""
    min_sum = k * (k + 1) // 2
    max_sum = k * (2 * top - k + 1) // 2
    width = max_sum - min_sum + 1
    # dp[j][s] = subsets of size j with sum s (absolute indexing)
    dp = [[0] * (max_sum + 1) for _ in range(k + 1)]
    dp[0][0] = 1
    for value in range(1, top + 1):
        for j in range(min(value, k), 0, -1):
            row, prev = dp[j], dp[j - 1]
            for s in range(max_sum, value - 1, -1):
                if prev[s - value]:
                    row[s] += prev[s - value]
    return dp[k][min_sum:min_sum + width]


def rank_by_significance(samples: dict, alpha: float = 0.0125) -> dict:
    """Rank algorithms by pairwise significant wins on one metric.

    A beats B when the two-sided rank-sum test is significant at ``alpha``
    and A's median is smaller (errors: lower is better).  Algorithms are
    ranked by win count; equal win counts share the averaged rank.
    """
    names = sorted(samples)
    if len(names) < 2:
        raise ValueError("ranking needs at least 2 algorithms")
    wins = {name: 0 for name in names}
    for a, b in combinations(names, 2):
        _, p = rank_sum_test(samples[a], samples[b])
        if p < alpha:
            med_a = float(np.median(samples[a]))
            med_b = float(np.median(samples[b]))
            if med_a < med_b:
                wins[a] += 1
            elif med_b < med_a:
                wins[b] += 1
    by_wins = sorted(names, key=lambda nm: (-wins[nm], nm))
    ranks = {}
    pos = 1
    i = 0
    while i < len(by_wins):
        j = i
        while j + 1 < len(by_wins) and wins[by_wins[j + 1]] == wins[by_wins[i]]:
            j += 1
        shared = (2 * pos + (j - i)) / 2.0  # average of pos..pos+(j-i)
        for nm in by_wins[i:j + 1]:
            ranks[nm] = shared
        pos += j - i + 1
        i = j + 1
    return ranks


def wilcoxon_rank(rows: list, metric_names=("mse_com", "mse_obs", "mse_mis"),
                  alpha: float = 0.0125) -> dict:
    """Rank table across algorithms for each metric with complete data.

    Requires at least 2 algorithms with at least 10 replicates each; metrics
    where any value is absent (e.g. mse_mis with nothing missing) are
    skipped.
    """
    by_alg: dict = {}
    for row in rows:
        by_alg.setdefault(row.algorithm, []).append(row)
    if len(by_alg) < 2:
        raise ValueError("ranking needs at least 2 algorithms")
    if min(len(v) for v in by_alg.values()) < 10:
        raise ValueError("ranking needs at least 10 replicates per algorithm")
    table = {}
    for metric in metric_names:
        samples = {}
        ok = True
        for alg, alg_rows in by_alg.items():
            vals = [getattr(r, metric) for r in alg_rows]
            if any(v is None for v in vals):
                ok = False
                break
            samples[alg] = np.asarray(vals, dtype=float)
        if ok:
            table[metric] = rank_by_significance(samples, alpha)
    return table


# ---------------------------------------------------------------------------
# scenario runner
# ---------------------------------------------------------------------------

ALGORITHMS = ("Sim", "SimI", "Ref", "RefI", "RefA", "RefAI", "MISC", "MISCI",
              "UniComp")


@dataclass(frozen=True)
class Scenario:
    """A paired simulation design: one data-generating law, many algorithms."""

    test_function: str = "heavisine"
    n: int = 512
    snr: float = 7.0
    missing_fraction: float = 0.3
    missing_kind: str = "random"
    algorithms: tuple = ALGORITHMS
    replicates: int = 50
    seed: int = 0
    threshold: str = "adjusted"
    operator: str = "hard"
    wavelet: str = "db5"
    primary_level: int = 3
    epsilon: float = 1e-4
    max_iterations: int = 100
    M: int = 100
    init: str = "local_linear"
    f_true: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ValueError(f"unknown algorithms: {bad}")
        if not self.algorithms:
            raise ValueError("need at least one algorithm")

    def truth(self) -> np.ndarray:
        if self.f_true is not None:
            return np.asarray(self.f_true, dtype=float)
        if self.test_function == "synthetic_image":
            return synthetic_image(self.n)
        return test_function(self.test_function, self.n)

    def spec(self) -> WaveletSpec:
        return WaveletSpec.from_name(self.wavelet, self.primary_level)

    def policy(self) -> ThresholdPolicy:
        return ThresholdPolicy.parse(self.threshold, self.operator)

    def base_config(self, rng_seed: int = 0) -> SelfConConfig:
        init = "linear_interp" if self.test_function == "synthetic_image" \
            else self.init
        return SelfConConfig(
            wavelet=self.spec(),
            policy=self.policy(),
            epsilon=self.epsilon,
            max_iterations=self.max_iterations,
            M=self.M,
            init=init,
            rng_seed=rng_seed,
        )

    def to_dict(self) -> dict:
        return {
            "test_function": self.test_function,
            "n": self.n,
            "snr": self.snr,
            "missing_fraction": self.missing_fraction,
            "missing_kind": self.missing_kind,
            "algorithms": list(self.algorithms),
            "replicates": self.replicates,
            "seed": self.seed,
            "threshold": self.threshold,
            "operator": self.operator,
            "wavelet": self.wavelet,
            "primary_level": self.primary_level,
            "epsilon": self.epsilon,
            "max_iterations": self.max_iterations,
            "M": self.M,
            "init": self.init,
        }


def _algorithm_config(name: str, base: SelfConConfig) -> SelfConConfig:
    interp = "linear" if name.endswith("I") else "none"
    eta = "exact" if name in ("Ref", "RefI") else "average"
    return replace(base, interpolation=interp, eta_mode=eta)


def run_algorithm(name: str, obs: ObservationSet, y_full: np.ndarray,
                  base: SelfConConfig, f_true=None):
    """Run one named algorithm; returns (f_hat, iterations)."""
    if name == "UniComp":
        f_hat = WaveletShrinker()(y_full, base.wavelet, base.policy)
        return f_hat, 1
    cfg = _algorithm_config(name, base)
    if name.startswith("Sim"):
        report = run_sim(obs, cfg, f_true)
    elif name.startswith("Ref"):
        report = run_ref(obs, cfg, f_true)
    else:
        report = run_misc(obs, cfg, f_true=f_true)
    return report.f_hat, report.iterations


def _run_replicate(scenario: Scenario, rep: int, f_true: np.ndarray,
                   sigma: float) -> list:
    root = np.random.SeedSequence(entropy=scenario.seed, spawn_key=(rep,))
    noise_ss, mask_ss, engine_ss = root.spawn(3)
    noise = np.random.default_rng(noise_ss).standard_normal(f_true.shape)
    y_full = f_true + sigma * noise
    mask_seed = int(mask_ss.generate_state(1, np.uint64)[0])
    mask = make_missing(f_true.shape, scenario.missing_fraction,
                        scenario.missing_kind, mask_seed)
    obs = ObservationSet.from_full(y_full, mask.mask)
    engine_seed = int(engine_ss.generate_state(1, np.uint64)[0])
    base = scenario.base_config(rng_seed=engine_seed)

    rows = []
    for name in scenario.algorithms:
        start = time.perf_counter()
        f_hat, iterations = run_algorithm(name, obs, y_full, base)
        elapsed_ms = (time.perf_counter() - start) * 1e3
        m = metrics(f_true, f_hat, y_full, mask.mask)
        rows.append(MetricRow(algorithm=name, replicate=rep,
                              runtime_ms=elapsed_ms, iterations=iterations,
                              **m))
    return rows


def run_scenario(scenario: Scenario, threads: int = 1,
                 alpha: float = 0.0125) -> tuple[list, dict]:
    """Execute a scenario; returns (metric rows, summary dictionary).

    Every algorithm within a replicate sees the identical noisy data and
    mask, so paired comparisons are valid; every replicate owns RNG
    substreams split from the scenario seed, so the metric table (runtime
    aside) is a pure function of the scenario.
    """
    f_true = scenario.truth()
    sigma = apply_snr(f_true, scenario.snr)

    rows: list = []
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_replicate, scenario, rep, f_true, sigma)
                       for rep in range(scenario.replicates)]
            for fut in futures:
                rows.extend(fut.result())
    else:
        for rep in range(scenario.replicates):
            rows.extend(_run_replicate(scenario, rep, f_true, sigma))
    rows.sort(key=lambda r: (r.replicate, r.algorithm))

    medians: dict = {}
    for name in scenario.algorithms:
        sub = [r for r in rows if r.algorithm == name]
        entry = {}
        for metric in ("mse_com", "mse_obs", "mse_mis", "mrss_obs"):
            vals = [getattr(r, metric) for r in sub]
            entry[metric] = (None if any(v is None for v in vals)
                             else float(np.median(vals)))
        entry["iterations"] = float(np.median([r.iterations for r in sub]))
        medians[name] = entry

    ranks = None
    if len(scenario.algorithms) >= 2 and scenario.replicates >= 10:
        ranks = wilcoxon_rank(rows, alpha=alpha)
    summary = {
        "scenario": scenario.to_dict(),
        "noise_sigma": sigma,
        "medians": medians,
        "ranks": ranks,
        "alpha": alpha,
    }
    return rows, summary
