"""Recovery of gappy, noisy multichannel time series.

Channels are transformed into stacked Page (or Hankel) matrices, denoised by
optimal hard singular value thresholding, and either imputed offline window
by window or extrapolated online one sample ahead through a linear
regression on the denoised matrix rows.
"""

from .core import (
    ChannelKind,
    ChannelSeries,
    CsvSchema,
    Dataset,
    FillPolicy,
    ScalingPolicy,
    ScalingTransform,
    fill_dataset,
    fill_missing,
    ingest_csv,
    locf_fill,
    scale_dataset,
    unwrap_angles,
    unwrap_degrees,
    write_csv,
)
from .errors import (
    AllMissingChannel,
    ConfigError,
    FormatError,
    MapeUndefined,
    NumericError,
    PagerecError,
    ShapeError,
)
from .harness import (
    ChannelSpec,
    ConstantSignal,
    DegradeSpec,
    LinearRecurrence,
    Scenario,
    ScenarioResult,
    SinusoidSum,
    StepEvent,
    Synthetic,
    SyntheticSpec,
    benchmark_corpus,
    degrade,
    gen_synthetic,
    locf_baseline,
    mape,
    mape_detail,
    persistence_baseline,
    rank_profile,
    results_to_csv_rows,
    results_to_dict,
    run_benchmark,
)
from .matrices import (
    BlockLayout,
    MatrixVariant,
    StackedMatrix,
    hankel_matrix,
    page_matrix,
    reshape_back,
    stack,
)
from .recovery import (
    ForecastModel,
    RecoveryConfig,
    RecoveryReport,
    impute_offline,
    learn_forecast,
    predict_next,
    predict_stream,
)
from .svt import OsvtOutcome, optimal_threshold, osvt_estimate, scale_to_unit

__version__ = "0.1.0"
