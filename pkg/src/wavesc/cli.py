"""Command-line interface.

Five subcommands: ``denoise1d``, ``denoise2d``, ``simulate``, ``bench``,
``poisson-demo``.  Outputs go to a fresh directory named by ``--out``
(``--force`` allows reuse); every run drops a ``manifest.json`` recording
the resolved configuration, input digests, and seed, so results can be
reproduced bit for bit (wall-clock fields aside).

Exit codes: 0 success, 2 input error, 3 numerical failure.  Non-convergence
is not a failure: the run exits 0 and the report carries ``converged:
false``.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (ALGORITHMS, Scenario, apply_snr, make_missing,
                    run_scenario, synthetic_intensity, test_function)
from .fileio import (FileFormatError, OverwriteRefused, parse_config_text,
                     prepare_out_dir, read_pgm, read_series_csv,
                     write_curves_csv, write_fhat_csv, write_json,
                     write_manifest, write_metrics_csv, write_pgm,
                     write_ranks_csv, write_series_csv, write_truth_csv)
from .selfcon import (ObservationSet, SelfConConfig, run_misc, run_ref,
                      run_sim)
from .shrinkage import AnscombePoissonShrinker, ThresholdPolicy
from .wavelets import WaveletSpec, eta_to_csv, irregularity_map

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(Exception):
    """Bad input file or parameter; maps to exit code 2."""


class NumericalFailure(Exception):
    """Estimation produced no usable numbers; maps to exit code 3."""


# ---------------------------------------------------------------------------
# shared helpers
# ---------------------------------------------------------------------------

def _resolve_seed(args) -> int:
    """--seed flag, else the WAVESC_SEED environment variable, else 0."""
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("WAVESC_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(
                f"WAVESC_SEED must be an integer, got {env!r}") from None
    return 0


def _require_dyadic(n: int, what: str) -> None:
    if n < 2 or n & (n - 1):
        raise InputError(f"{what} length {n} is not a power of two")


def _build_wavelet(args, n: int) -> WaveletSpec:
    try:
        spec = WaveletSpec.from_name(args.wavelet, args.primary_level)
        spec.validate_length(n)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return spec


def _build_policy(args) -> ThresholdPolicy:
    try:
        return ThresholdPolicy.parse(args.threshold, args.operator)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _build_config(args, spec: WaveletSpec, seed: int, *,
                  interpolation: str = "none", init: str = "local_linear",
                  noise: str = "gaussian") -> SelfConConfig:
    eta_mode = "exact" if args.algo == "ref" else "average"
    try:
        return SelfConConfig(
            wavelet=spec,
            policy=_build_policy(args),
            epsilon=args.epsilon,
            max_iterations=args.max_iter,
            M=args.M,
            eta_mode=eta_mode,
            interpolation=interpolation,
            init=init,
            rng_seed=seed,
            noise=noise,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _run_engine(algo: str, obs: ObservationSet, config: SelfConConfig):
    """Dispatch to an estimation engine; non-finite output is a failure."""
    try:
        if algo == "sim":
            report = run_sim(obs, config)
        elif algo in ("ref", "refa"):
            report = run_ref(obs, config)
        elif algo == "misc":
            report = run_misc(obs, config)
        else:
            raise InputError(f"unknown algorithm {algo!r}")
        if not np.all(np.isfinite(report.f_hat)):
            raise NumericalFailure("estimate contains non-finite values")
        return report
    except (ValueError, FloatingPointError) as exc:
        raise NumericalFailure(f"estimation failed: {exc}") from exc


def _spawn_seeds(seed: int, count: int) -> list:
    """Independent integer seeds derived from one master seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def _print_report(report) -> None:
    print(f"algorithm={report.algorithm} iterations={report.iterations} "
          f"converged={str(report.converged).lower()} "
          f"sigma_hat={report.sigma_hat:.6g}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_denoise1d(args) -> int:
    t0 = time.perf_counter()
    y, observed = read_series_csv(args.input)
    n = y.size
    _require_dyadic(n, "input")
    n_obs = int(observed.sum())
    if n_obs < 2:
        raise InputError(f"need at least 2 observed points, found {n_obs}")
    spec = _build_wavelet(args, n)
    seed = _resolve_seed(args)
    config = _build_config(args, spec, seed, interpolation=args.interp)
    obs = ObservationSet.from_full(y, observed)

    out = prepare_out_dir(args.out, args.force)
    report = _run_engine(args.algo, obs, config)

    write_fhat_csv(out / "fhat.csv", report.f_hat)
    write_json(out / "report.json", report.to_json_dict())
    if args.eta:
        eta_to_csv(irregularity_map(obs.mask(), spec), out / "eta.csv")
    manifest_config = config.to_dict()
    manifest_config.update({"algo": args.algo, "eta": bool(args.eta)})
    write_manifest(out, "denoise1d", manifest_config,
                   {"input": args.input}, seed,
                   time.perf_counter() - t0)
    _print_report(report)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_denoise2d(args) -> int:
    t0 = time.perf_counter()
    image, maxval, magic = read_pgm(args.image)
    mask_values, _, _ = read_pgm(args.mask)
    if image.shape != mask_values.shape:
        raise InputError(f"image is {image.shape[0]}x{image.shape[1]} but "
                         f"mask is {mask_values.shape[0]}x"
                         f"{mask_values.shape[1]}")
    side = image.shape[0]
    if image.shape[1] != side:
        raise InputError(f"image must be square, got "
                         f"{image.shape[0]}x{image.shape[1]}")
    _require_dyadic(side, "image side")
    observed = mask_values > 0
    n_obs = int(observed.sum())
    if n_obs < 2:
        raise InputError(f"need at least 2 observed pixels, found {n_obs}")
    spec = _build_wavelet(args, side)
    seed = _resolve_seed(args)
    config = _build_config(args, spec, seed, init="linear_interp")
    obs = ObservationSet.from_full(image, observed)

    out = prepare_out_dir(args.out, args.force)
    report = _run_engine(args.algo, obs, config)

    write_pgm(out / "recon.pgm", report.f_hat, maxval, magic)
    write_json(out / "report.json", report.to_json_dict())
    manifest_config = config.to_dict()
    manifest_config.update({"algo": args.algo, "maxval": maxval})
    write_manifest(out, "denoise2d", manifest_config,
                   {"image": args.image, "mask": args.mask}, seed,
                   time.perf_counter() - t0)
    _print_report(report)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    t0 = time.perf_counter()
    seed = _resolve_seed(args)
    _require_dyadic(args.n, "series")
    if not 0.0 <= args.missing < 1.0:
        raise InputError(f"missing fraction must lie in [0, 1), "
                         f"got {args.missing}")
    try:
        f = test_function(args.function, args.n)
        sigma = apply_snr(f, args.snr)
        noise_ss, mask_ss = np.random.SeedSequence(seed).spawn(2)
        noise = np.random.default_rng(noise_ss).standard_normal(args.n)
        mask_seed = int(mask_ss.generate_state(1, np.uint64)[0])
        indicator = make_missing(args.n, args.missing, args.kind, mask_seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    y = f + sigma * noise

    out = prepare_out_dir(args.out, args.force)
    write_series_csv(out / "data.csv", y, indicator.mask)
    write_truth_csv(out / "truth.csv", f)
    manifest_config = {
        "function": args.function, "n": args.n, "snr": args.snr,
        "missing_fraction": args.missing, "missing_kind": args.kind,
        "noise_sigma": sigma,
    }
    write_manifest(out, "simulate", manifest_config, {}, seed,
                   time.perf_counter() - t0)
    print(f"n={args.n} sigma={sigma:.6g} "
          f"missing={int(args.n - indicator.mask.sum())}")
    print(f"wrote {out}")
    return EXIT_OK


_SCENARIO_CASTS = {
    "function": str, "n": int, "snr": float, "missing": float, "kind": str,
    "replicates": int, "algorithms": str, "threshold": str, "operator": str,
    "wavelet": str, "primary_level": int, "epsilon": float, "max_iter": int,
    "M": int, "init": str, "seed": int, "alpha": float,
}

_SCENARIO_FIELDS = {
    "function": "test_function", "n": "n", "snr": "snr",
    "missing": "missing_fraction", "kind": "missing_kind",
    "replicates": "replicates", "threshold": "threshold",
    "operator": "operator", "wavelet": "wavelet",
    "primary_level": "primary_level", "epsilon": "epsilon",
    "max_iter": "max_iterations", "M": "M", "init": "init", "seed": "seed",
}


def _build_scenario(args) -> tuple[Scenario, float]:
    """Merge config-file settings and CLI overrides into a Scenario."""
    settings: dict = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise InputError(f"cannot read {args.config}: {exc}") from None
        for key, raw in parse_config_text(text).items():
            if key not in _SCENARIO_CASTS:
                raise InputError(f"unknown config key {key!r}")
            try:
                settings[key] = _SCENARIO_CASTS[key](raw)
            except ValueError:
                raise InputError(
                    f"config key {key!r}: cannot parse {raw!r}") from None
    for key in _SCENARIO_CASTS:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
    if "seed" not in settings:
        settings["seed"] = _resolve_seed(args)

    alpha = settings.pop("alpha", 0.0125)
    fields: dict = {}
    for key, value in settings.items():
        if key == "algorithms":
            names = [a.strip() for a in value.split(",") if a.strip()]
            fields["algorithms"] = tuple(names)
        else:
            fields[_SCENARIO_FIELDS[key]] = value
    try:
        scenario = Scenario(**fields)
        scenario.truth()
        scenario.spec().validate_length(scenario.n)
        scenario.policy()
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return scenario, alpha


def cmd_bench(args) -> int:
    t0 = time.perf_counter()
    scenario, alpha = _build_scenario(args)
    if args.threads < 1:
        raise InputError(f"--threads must be at least 1, got {args.threads}")

    out = prepare_out_dir(args.out, args.force)
    try:
        rows, summary = run_scenario(scenario, threads=args.threads,
                                     alpha=alpha)
    except (ValueError, FloatingPointError) as exc:
        raise NumericalFailure(f"scenario failed: {exc}") from exc

    write_metrics_csv(out / "metrics.csv", rows)
    write_json(out / "summary.json", summary)
    write_ranks_csv(out / "ranks.csv", summary["ranks"] or {},
                    summary["medians"])
    manifest_config = scenario.to_dict()
    manifest_config.update({"alpha": alpha, "threads": args.threads})
    inputs = {"config": args.config} if args.config else {}
    write_manifest(out, "bench", manifest_config, inputs, scenario.seed,
                   time.perf_counter() - t0)

    for name in scenario.algorithms:
        med = summary["medians"][name]
        cell = ("none" if med["mse_mis"] is None
                else f"{med['mse_mis']:.6g}")
        print(f"{name:8s} mse_com={med['mse_com']:.6g} mse_mis={cell}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_poisson_demo(args) -> int:
    t0 = time.perf_counter()
    seed = _resolve_seed(args)
    noise_seed, mask_seed, engine_seed = _spawn_seeds(seed, 3)

    if args.counts:
        counts, obs_flags = read_series_csv(args.counts)
        if not obs_flags.all():
            raise InputError("counts input must be fully observed; the demo "
                             "removes points itself")
        if (counts < 0).any():
            raise InputError("negative counts in input")
        intensity = None
        n = counts.size
    else:
        n = args.n
        if n < 8:
            raise InputError(f"series length {n} is too short, need >= 8")
        intensity = synthetic_intensity(n)
        counts = np.random.default_rng(noise_seed).poisson(
            intensity).astype(float)
    _require_dyadic(n, "series")
    if not 0.0 <= args.missing < 1.0:
        raise InputError(f"missing fraction must lie in [0, 1), "
                         f"got {args.missing}")
    spec = _build_wavelet(args, n)
    policy = _build_policy(args)
    try:
        indicator = make_missing(n, args.missing, args.kind, mask_seed)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if int(indicator.mask.sum()) < 2:
        raise InputError("missing fraction leaves fewer than 2 observed "
                         "points")
    args.algo = "misc"
    config = _build_config(args, spec, engine_seed, noise="poisson")
    obs = ObservationSet.from_full(counts, indicator.mask)

    out = prepare_out_dir(args.out, args.force)
    try:
        f_complete = AnscombePoissonShrinker()(counts, spec, policy)
    except ValueError as exc:
        raise NumericalFailure(f"estimation failed: {exc}") from exc
    report = _run_engine("misc", obs, config)

    write_curves_csv(out / "curves.csv", counts, indicator.mask,
                     f_complete, report.f_hat, intensity)
    write_json(out / "report.json", report.to_json_dict())
    manifest_config = config.to_dict()
    manifest_config.update({
        "n": n, "missing_fraction": args.missing, "missing_kind": args.kind,
        "synthetic": args.counts is None,
    })
    inputs = {"counts": args.counts} if args.counts else {}
    write_manifest(out, "poisson-demo", manifest_config, inputs, seed,
                   time.perf_counter() - t0)
    _print_report(report)
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(sp, algos=("sim", "ref", "refa", "misc"),
                threshold_default="universal") -> None:
    sp.add_argument("--algo", choices=algos, default="refa",
                    help="estimation engine (default refa)")
    sp.add_argument("--threshold", default=threshold_default, metavar="SEL",
                    help="universal, adjusted, or fixed=<c> "
                         f"(default {threshold_default})")
    sp.add_argument("--operator", choices=("hard", "soft"), default="hard",
                    help="thresholding operator (default hard)")
    sp.add_argument("--wavelet", default="db5", metavar="NAME",
                    help="haar or db<v>, e.g. db5 (default db5)")
    sp.add_argument("--primary-level", type=int, default=3, metavar="P",
                    help="coarsest decomposition level (default 3)")
    sp.add_argument("--epsilon", type=float, default=1e-4,
                    help="relative convergence tolerance (default 1e-4)")
    sp.add_argument("--max-iter", type=int, default=100, metavar="T",
                    help="iteration cap (default 100)")
    sp.add_argument("--M", type=int, default=100,
                    help="stochastic completions per iteration for the "
                         "misc engine (default 100)")
    sp.add_argument("--seed", type=int, default=None,
                    help="RNG seed (default: WAVESC_SEED env var, else 0)")


def _add_out(sp) -> None:
    sp.add_argument("--out", required=True, metavar="DIR",
                    help="output directory")
    sp.add_argument("--force", action="store_true",
                    help="allow writing into a non-empty output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavesc",
        description="Wavelet regression for incomplete dyadic data.")
    parser.add_argument("--version", action="version",
                        version=f"wavesc {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    sp = sub.add_parser(
        "denoise1d", help="denoise an incomplete 1D series",
        description="Estimate a curve from a CSV with header "
                    "index,y,observed; unobserved rows leave y empty.")
    sp.add_argument("input", help="input CSV (index,y,observed)")
    _add_common(sp)
    sp.add_argument("--interp", choices=("none", "linear"), default="none",
                    help="replace estimates at interior missing points by "
                         "linear interpolation each iteration")
    sp.add_argument("--eta", action="store_true",
                    help="also export eta.csv, the per-coefficient "
                         "missing-information map")
    _add_out(sp)
    sp.set_defaults(func=cmd_denoise1d)

    sp = sub.add_parser(
        "denoise2d", help="reconstruct an incomplete grayscale image",
        description="Estimate a square dyadic image from a PGM plus a mask "
                    "PGM where 0 marks missing pixels.")
    sp.add_argument("image", help="input image (PGM, P2 or P5)")
    sp.add_argument("mask", help="mask image (PGM; 0 = missing)")
    _add_common(sp)
    _add_out(sp)
    sp.set_defaults(func=cmd_denoise2d)

    sp = sub.add_parser(
        "simulate", help="generate a noisy incomplete test data set",
        description="Sample one noisy series from a named test function, "
                    "delete a fraction of points, and write data.csv plus "
                    "truth.csv.")
    sp.add_argument("--function", default="heavisine",
                    choices=("blocks", "bumps", "heavisine", "doppler"),
                    help="test function (default heavisine)")
    sp.add_argument("--n", type=int, default=1024,
                    help="series length, a power of two (default 1024)")
    sp.add_argument("--snr", type=float, default=7.0,
                    help="signal-to-noise ratio sd(f)/sigma (default 7)")
    sp.add_argument("--missing", type=float, default=0.3, metavar="FRAC",
                    help="fraction of points deleted (default 0.3)")
    sp.add_argument("--kind", choices=("random", "clustered"),
                    default="random", help="missingness pattern")
    sp.add_argument("--seed", type=int, default=None,
                    help="RNG seed (default: WAVESC_SEED env var, else 0)")
    _add_out(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser(
        "bench", help="run a paired simulation benchmark",
        description="Run every configured algorithm on identical replicated "
                    "data sets; write metrics.csv, summary.json, ranks.csv.")
    sp.add_argument("--config", metavar="FILE",
                    help="key = value scenario file; flags override it")
    sp.add_argument("--function", default=None,
                    help="test function, or synthetic_image "
                         "(default heavisine)")
    sp.add_argument("--n", type=int, default=None,
                    help="grid length or image side (default 512)")
    sp.add_argument("--snr", type=float, default=None,
                    help="signal-to-noise ratio (default 7)")
    sp.add_argument("--missing", type=float, default=None, metavar="FRAC",
                    help="fraction of points deleted (default 0.3)")
    sp.add_argument("--kind", default=None,
                    choices=("random", "clustered"),
                    help="missingness pattern (default random)")
    sp.add_argument("--replicates", type=int, default=None,
                    help="paired replicates (default 50)")
    sp.add_argument("--algorithms", default=None, metavar="LIST",
                    help="comma-separated subset of "
                         + ",".join(ALGORITHMS))
    sp.add_argument("--threshold", default=None, metavar="SEL",
                    help="universal, adjusted, or fixed=<c> "
                         "(default adjusted)")
    sp.add_argument("--operator", default=None, choices=("hard", "soft"),
                    help="thresholding operator (default hard)")
    sp.add_argument("--wavelet", default=None, metavar="NAME",
                    help="haar or db<v> (default db5)")
    sp.add_argument("--primary-level", type=int, default=None, metavar="P",
                    dest="primary_level",
                    help="coarsest decomposition level (default 3)")
    sp.add_argument("--epsilon", type=float, default=None,
                    help="convergence tolerance (default 1e-4)")
    sp.add_argument("--max-iter", type=int, default=None, metavar="T",
                    dest="max_iter", help="iteration cap (default 100)")
    sp.add_argument("--M", type=int, default=None,
                    help="completions per iteration for misc (default 100)")
    sp.add_argument("--init", default=None,
                    choices=("local_linear", "linear_interp"),
                    help="initial curve construction (default local_linear)")
    sp.add_argument("--alpha", type=float, default=None,
                    help="significance level for the rank table "
                         "(default 0.0125)")
    sp.add_argument("--seed", type=int, default=None,
                    help="scenario seed (default: WAVESC_SEED env var, "
                         "else 0)")
    sp.add_argument("--threads", type=int, default=1,
                    help="worker processes for replicates (default 1)")
    _add_out(sp)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser(
        "poisson-demo", help="count-data denoising comparison",
        description="Draw Poisson counts from a synthetic intensity (or "
                    "take user counts), remove a fraction of points, and "
                    "write the complete-data and missing-data "
                    "reconstructions side by side.")
    sp.add_argument("--counts", metavar="FILE",
                    help="fully observed counts CSV (index,y,observed); "
                         "default: synthetic intensity")
    sp.add_argument("--n", type=int, default=256,
                    help="length of the synthetic series (default 256)")
    sp.add_argument("--missing", type=float, default=0.05, metavar="FRAC",
                    help="fraction of points removed (default 0.05)")
    sp.add_argument("--kind", choices=("random", "clustered"),
                    default="random", help="missingness pattern")
    sp.add_argument("--threshold", default="universal", metavar="SEL",
                    help="universal, adjusted, or fixed=<c> "
                         "(default universal)")
    sp.add_argument("--operator", choices=("hard", "soft"), default="hard",
                    help="thresholding operator (default hard)")
    sp.add_argument("--wavelet", default="db5", metavar="NAME",
                    help="haar or db<v> (default db5)")
    sp.add_argument("--primary-level", type=int, default=3, metavar="P",
                    help="coarsest decomposition level (default 3)")
    sp.add_argument("--epsilon", type=float, default=1e-4,
                    help="convergence tolerance (default 1e-4)")
    sp.add_argument("--max-iter", type=int, default=100, metavar="T",
                    help="iteration cap (default 100)")
    sp.add_argument("--M", type=int, default=100,
                    help="stochastic completions per iteration "
                         "(default 100)")
    sp.add_argument("--seed", type=int, default=None,
                    help="RNG seed (default: WAVESC_SEED env var, else 0)")
    _add_out(sp)
    sp.set_defaults(func=cmd_poisson_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, FileFormatError, OverwriteRefused) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
