"""File formats shared by the command-line tools.

CSV for 1D series, PGM (P2 or P5) for 2D images, JSON for reports,
summaries, and run manifests.  Floats are written with ``repr`` so a rerun
with the same seed reproduces every output byte for byte.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from . import __version__

SERIES_HEADER = ["index", "y", "observed"]
FHAT_HEADER = ["index", "x", "f_hat"]
TRUTH_HEADER = ["index", "x", "f"]
CURVES_HEADER = ["index", "x", "intensity", "counts", "observed",
                 "f_complete", "f_missing"]
RANKS_HEADER = ["metric", "algorithm", "rank", "median"]
MANIFEST_NAME = "manifest.json"


class FileFormatError(ValueError):
    """An input file does not match its documented format."""


class OverwriteRefused(RuntimeError):
    """The output directory already holds results and --force was not given."""


def _fmt(v) -> str:
    return repr(float(v))


# ---------------------------------------------------------------------------
# 1D series CSV
# ---------------------------------------------------------------------------

def read_series_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a ``index,y,observed`` series file.

    Returns ``(y, observed)`` where ``y`` is a float array (0.0 at
    unobserved rows, whose y cell may be empty or nan) and ``observed`` is a
    boolean array.  Rows must carry indices 0..N-1 in ascending order.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise FileFormatError(f"{path}: empty file") from None
    if [h.strip() for h in header] != SERIES_HEADER:
        raise FileFormatError(
            f"{path}: header must be {','.join(SERIES_HEADER)!r}, "
            f"got {','.join(header)!r}")
    y: list[float] = []
    observed: list[bool] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise FileFormatError(f"{path}:{lineno}: expected 3 fields, "
                                  f"got {len(row)}")
        idx_s, y_s, obs_s = (f.strip() for f in row)
        try:
            idx = int(idx_s)
        except ValueError:
            raise FileFormatError(
                f"{path}:{lineno}: index {idx_s!r} is not an integer") from None
        if idx != len(y):
            raise FileFormatError(
                f"{path}:{lineno}: index {idx} out of order "
                f"(expected {len(y)})")
        if obs_s not in ("0", "1"):
            raise FileFormatError(
                f"{path}:{lineno}: observed flag must be 0 or 1, "
                f"got {obs_s!r}")
        flag = obs_s == "1"
        if flag:
            try:
                value = float(y_s)
            except ValueError:
                raise FileFormatError(
                    f"{path}:{lineno}: y value {y_s!r} is not a number"
                ) from None
            if not np.isfinite(value):
                raise FileFormatError(
                    f"{path}:{lineno}: observed y must be finite, got {y_s!r}")
        else:
            if y_s and y_s.lower() != "nan":
                try:
                    float(y_s)
                except ValueError:
                    raise FileFormatError(
                        f"{path}:{lineno}: y value {y_s!r} is not a number"
                    ) from None
            value = 0.0
        y.append(value)
        observed.append(flag)
    if not y:
        raise FileFormatError(f"{path}: no data rows")
    return np.asarray(y, dtype=float), np.asarray(observed, dtype=bool)


def write_series_csv(path, y, observed) -> None:
    """Write a ``index,y,observed`` file; unobserved rows get an empty y."""
    y = np.asarray(y, dtype=float)
    observed = np.asarray(observed, dtype=bool)
    lines = [",".join(SERIES_HEADER)]
    for i in range(y.size):
        if observed[i]:
            lines.append(f"{i},{_fmt(y[i])},1")
        else:
            lines.append(f"{i},,0")
    Path(path).write_text("\n".join(lines) + "\n")


def write_fhat_csv(path, f_hat) -> None:
    """Write the fitted curve as ``index,x,f_hat`` with x = i/N."""
    f_hat = np.asarray(f_hat, dtype=float)
    n = f_hat.size
    lines = [",".join(FHAT_HEADER)]
    for i in range(n):
        lines.append(f"{i},{_fmt(i / n)},{_fmt(f_hat[i])}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_truth_csv(path, f) -> None:
    """Write the noise-free curve as ``index,x,f``."""
    f = np.asarray(f, dtype=float)
    n = f.size
    lines = [",".join(TRUTH_HEADER)]
    for i in range(n):
        lines.append(f"{i},{_fmt(i / n)},{_fmt(f[i])}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_curves_csv(path, counts, observed, f_complete, f_missing,
                     intensity=None) -> None:
    """Side-by-side reconstruction table for the count-data demo.

    One row per grid point: the raw count, whether it was kept, the
    complete-data reconstruction, and the missing-data reconstruction.  The
    intensity column is empty when no ground truth is known.
    """
    counts = np.asarray(counts, dtype=float)
    observed = np.asarray(observed, dtype=bool)
    n = counts.size
    lines = [",".join(CURVES_HEADER)]
    for i in range(n):
        cell = "" if intensity is None else _fmt(intensity[i])
        lines.append(f"{i},{_fmt(i / n)},{cell},{_fmt(counts[i])},"
                     f"{int(observed[i])},{_fmt(f_complete[i])},"
                     f"{_fmt(f_missing[i])}")
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# PGM images
# ---------------------------------------------------------------------------

def read_pgm(path) -> tuple[np.ndarray, int, str]:
    """Read a P2 (ASCII) or P5 (binary) grayscale image.

    Returns ``(values, maxval, magic)`` with values as a float array of
    shape (height, width).  Only maxval 255 and 65535 are accepted; P5
    16-bit samples are big-endian.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc}") from exc

    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(raw):
            ch = raw[pos:pos + 1]
            if ch == b"#":
                while pos < len(raw) and raw[pos:pos + 1] not in (b"\n", b"\r"):
                    pos += 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(raw) and not raw[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FileFormatError(f"{path}: truncated header")
        return raw[start:pos]

    magic = next_token().decode("ascii", "replace")
    if magic not in ("P2", "P5"):
        raise FileFormatError(f"{path}: not a P2/P5 PGM (magic {magic!r})")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError:
        raise FileFormatError(f"{path}: non-numeric header field") from None
    if width < 1 or height < 1:
        raise FileFormatError(f"{path}: bad dimensions {width}x{height}")
    if maxval not in (255, 65535):
        raise FileFormatError(f"{path}: maxval must be 255 or 65535, "
                              f"got {maxval}")

    if magic == "P5":
        pos += 1  # the single whitespace byte after maxval
        itemsize = 1 if maxval < 256 else 2
        need = width * height * itemsize
        data = raw[pos:pos + need]
        if len(data) != need:
            raise FileFormatError(f"{path}: raster has {len(data)} bytes, "
                                  f"expected {need}")
        dtype = ">u1" if itemsize == 1 else ">u2"
        values = np.frombuffer(data, dtype=dtype).astype(float)
    else:
        tokens = raw[pos:].split()
        if len(tokens) != width * height:
            raise FileFormatError(f"{path}: raster has {len(tokens)} samples, "
                                  f"expected {width * height}")
        try:
            values = np.array([int(t) for t in tokens], dtype=float)
        except ValueError:
            raise FileFormatError(f"{path}: non-numeric sample") from None
    if values.size and (values.min() < 0 or values.max() > maxval):
        raise FileFormatError(f"{path}: sample outside [0, {maxval}]")
    return values.reshape(height, width), maxval, magic


def write_pgm(path, values, maxval: int, magic: str = "P5") -> None:
    """Write a grayscale image, clamping and rounding to [0, maxval]."""
    if maxval not in (255, 65535):
        raise ValueError(f"maxval must be 255 or 65535, got {maxval}")
    if magic not in ("P2", "P5"):
        raise ValueError(f"magic must be P2 or P5, got {magic!r}")
    values = np.asarray(values, dtype=float)
    if values.ndim != 2:
        raise ValueError("image must be 2D")
    quantized = np.rint(np.clip(values, 0, maxval)).astype(np.uint32)
    height, width = quantized.shape
    header = f"{magic}\n{width} {height}\n{maxval}\n".encode("ascii")
    if magic == "P5":
        dtype = ">u1" if maxval < 256 else ">u2"
        Path(path).write_bytes(header + quantized.astype(dtype).tobytes())
        return
    lines = []
    line = ""
    for v in quantized.reshape(-1):
        tok = str(int(v))
        if line and len(line) + 1 + len(tok) > 70:
            lines.append(line)
            line = tok
        else:
            line = tok if not line else line + " " + tok
    if line:
        lines.append(line)
    Path(path).write_bytes(header + ("\n".join(lines) + "\n").encode("ascii"))


# ---------------------------------------------------------------------------
# benchmark tables
# ---------------------------------------------------------------------------

def write_metrics_csv(path, rows) -> None:
    lines = [rows[0].CSV_HEADER if rows else
             "algorithm,replicate,mse_com,mse_obs,mse_mis,mrss_obs,"
             "runtime_ms,iterations"]
    lines.extend(row.csv_line() for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def write_ranks_csv(path, ranks, medians) -> None:
    """Long-format rank table: one row per (metric, algorithm).

    ``ranks`` maps metric name -> {algorithm: rank}; ``medians`` maps
    algorithm -> {metric: median value}.  An empty table (replicates too few
    to rank) writes the header only.
    """
    lines = [",".join(RANKS_HEADER)]
    if ranks:
        for metric in ranks:
            entries = sorted(ranks[metric].items(),
                             key=lambda kv: (kv[1], kv[0]))
            for alg, rank in entries:
                med = medians.get(alg, {}).get(metric)
                cell = "" if med is None else _fmt(med)
                lines.append(f"{metric},{alg},{_fmt(rank)},{cell}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


# ---------------------------------------------------------------------------
# run manifests and output directories
# ---------------------------------------------------------------------------

def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir, command: str, config: dict, inputs: dict,
                   seed: int, wall_clock_seconds: float) -> Path:
    """Record how a run was produced; one manifest per output directory.

    ``inputs`` maps a label to an input file path; the manifest stores its
    sha256.  Everything except wall_clock_seconds is reproducible from the
    command line and the seed.
    """
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "config": config,
        "inputs": {label: sha256_file(p) for label, p in inputs.items()},
        "wall_clock_seconds": wall_clock_seconds,
    }
    target = Path(out_dir) / MANIFEST_NAME
    write_json(target, manifest)
    return target


def prepare_out_dir(path, force: bool = False) -> Path:
    """Create the output directory, refusing to reuse a non-empty one.

    Passing ``force=True`` allows writing into a directory that already
    holds files (they are overwritten by name).
    """
    out = Path(path)
    if out.exists():
        if not out.is_dir():
            raise OverwriteRefused(f"{out} exists and is not a directory")
        if any(out.iterdir()) and not force:
            raise OverwriteRefused(
                f"{out} is not empty; pass --force to overwrite")
    else:
        out.mkdir(parents=True)
    return out


# ---------------------------------------------------------------------------
# key = value scenario configs
# ---------------------------------------------------------------------------

def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment, blanks are skipped.

    Values are returned as raw strings; later duplicates win.
    """
    out: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FileFormatError(
                f"config line {lineno}: expected key = value, got {raw_line!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise FileFormatError(f"config line {lineno}: empty key")
        out[key] = value
    return out
