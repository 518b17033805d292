"""Self-consistent wavelet regression for incomplete and irregular data.

A numpy/scipy library providing orthogonal wavelet transforms, shrinkage
building blocks, and the self-consistent estimation engines (single and
multiple imputation, and the closed-form conditional-mean refinement) for
denoising signals and images observed on an incomplete dyadic grid, plus a
benchmark harness and a small CLI.
"""

__version__ = "0.1.0"

from .wavelets import (
    WaveletSpec,
    CoefficientArray,
    ResponseIndicator,
    IrregularityMap,
    daubechies_filter,
    dwt_1d,
    idwt_1d,
    dwt_2d,
    idwt_2d,
    transform,
    inverse_transform,
    irregularity_map,
    eta_to_csv,
)
from .shrinkage import (
    NoiseScale,
    ThresholdPolicy,
    WaveletShrinker,
    AnscombePoissonShrinker,
    hard_threshold,
    soft_threshold,
    mad_sigma,
    universal_threshold,
    adjusted_threshold,
    inflate_variance,
    residual_sigma,
)
from .imputation import NoiseModel, draw_missing, substream
from .selfcon import (
    ObservationSet,
    SelfConConfig,
    EstimateReport,
    conditional_mean_hard,
    conditional_mean_soft,
    initial_estimate,
    interpolate_hybrid,
    run_sim,
    run_ref,
    run_misc,
    ls_fixed_point_oracle,
)
from .bench import (
    ALGORITHMS,
    Scenario,
    MetricRow,
    test_function,
    synthetic_image,
    synthetic_intensity,
    apply_snr,
    make_missing,
    metrics,
    mse_ratio,
    rank_sum_test,
    rank_by_significance,
    wilcoxon_rank,
    run_scenario,
    run_algorithm,
)
from .fileio import (
    FileFormatError,
    OverwriteRefused,
    read_series_csv,
    write_series_csv,
    write_fhat_csv,
    write_truth_csv,
    write_curves_csv,
    read_pgm,
    write_pgm,
    write_metrics_csv,
    write_ranks_csv,
    write_json,
    write_manifest,
    prepare_out_dir,
    parse_config_text,
    sha256_file,
)

__all__ = [name for name in dir() if not name.startswith("_")]
