"""
greenstat: SPSS-style statistics for building weather, PV generation and
load time series.

Ingestion and cleaning live in :mod:`greenstat.timeseries`, tail
probabilities in :mod:`greenstat.specfun`, summaries in
:mod:`greenstat.descriptive`, correlation / Levene / ANOVA in
:mod:`greenstat.inference` and OLS with forward stepwise selection in
:mod:`greenstat.regression`.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .specfun import PValue, f_upper_p, format_p, ln_gamma, reg_inc_beta, t_two_tailed_p  # noqa: E402
from .timeseries import (  # noqa: E402
    DEFAULT_RANGES,
    DEFAULT_SCHEMA,
    CleaningReport,
    Dataset,
    OutlierRule,
    RangeSpec,
    Variable,
    clean,
    filter_rows,
    load_csv,
    read_csv,
    validate_ranges,
    write_csv,
)
from .descriptive import (  # noqa: E402
    boxplot_stats,
    histogram,
    mode,
    quantile,
    se_mean,
    se_skewness,
    summarize,
    trimmed_mean,
)
from .inference import (  # noqa: E402
    ByColumn,
    EqualCountBins,
    GroupedSeries,
    anova_oneway,
    correlation_matrix,
    levene,
    make_groups,
    pearson,
)
from .regression import (  # noqa: E402
    PublishedModel,
    adjusted_r2,
    f_change,
    get_published_model,
    ols,
    ols_fit,
    predict,
    published_models,
    residual_statistics,
    stepwise_forward,
)
