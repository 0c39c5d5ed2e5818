"""Spatial-temporal identity forecasting model (C++ core)."""

from ._core import (
    ConfigError,
    CorruptFileError,
    DataError,
    Error,
    IoError,
    NumericError,
    Params,
    Series,
    ShapeError,
    StidConfig,
    count_parameters,
    gen_synthetic,
    hi_baseline,
    horizon_report,
    init_params,
    load_csv,
    load_params,
    metrics,
    predict,
    save_csv,
    save_params,
    window_origins,
)
from ._core import train as _train

__all__ = [
    "ConfigError", "CorruptFileError", "DataError", "Error", "IoError", "NumericError",
    "Params", "Series", "ShapeError", "StidConfig", "count_parameters", "gen_synthetic",
    "hi_baseline", "horizon_report", "init_params", "load_csv", "load_params", "metrics",
    "predict", "save_csv", "save_params", "train", "window_origins",
]


def _text(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return str(value)


def train(series, **settings):
    """Train on ``series``. Keyword arguments use the run-config keys (d, layers, lr, epochs, ...).

    Returns a dict with ``config``, ``params``, ``epochs``, ``best_epoch`` and ``test_report``.
    """
    return _train(series, {k: _text(v) for k, v in settings.items()})
