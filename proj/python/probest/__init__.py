"""Compartmental model calibration with survey-resampled confidence bands."""

from ._core import (
    BandCurves,
    BandSelection,
    FitEnsemble,
    FitResult,
    PipelineConfig,
    SimplexConfig,
    PredictionTable,
    QuantileSeries,
    SurveyData,
    SurveyRecord,
    chi_square_pvalue,
    chi_square_statistic,
    data_quantiles,
    derivative,
    empirical_quantile,
    estimation_band,
    fit_dataset,
    integrate,
    load_surveys,
    predict,
    run_ensemble,
    sample_multinomial,
    sample_replicate,
    select_band,
)

__all__ = [
    "BandCurves",
    "BandSelection",
    "FitEnsemble",
    "FitResult",
    "PipelineConfig",
    "SimplexConfig",
    "PredictionTable",
    "QuantileSeries",
    "SurveyData",
    "SurveyRecord",
    "chi_square_pvalue",
    "chi_square_statistic",
    "data_quantiles",
    "derivative",
    "empirical_quantile",
    "estimation_band",
    "fit_dataset",
    "integrate",
    "load_surveys",
    "predict",
    "run_ensemble",
    "sample_multinomial",
    "sample_replicate",
    "select_band",
]
