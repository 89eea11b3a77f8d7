"""Random-forest screening pipeline: synthetic cohorts, forests, metrics and full runs."""

import json
import os

from ._core import (
    AdscreenError,
    RandomForest,
    __version__,
    confusion_matrix,
    emit_reports,
    generate_cohort,
    gini_impurity,
    roc_auc,
    scores,
)
from . import _core


def default_config():
    return json.loads(_core.default_config_json())


def _config_json(config):
    merged = default_config()
    for key, value in (config or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key].update(value)
        else:
            merged[key] = value
    return _core.normalize_config_json(json.dumps(merged))


def stage_order(config=None):
    return _core.stage_order(_config_json(config))


def run_stage(stage, out_dir, config=None):
    _core.run_stage(stage, _config_json(config), os.fspath(out_dir))


def run_pipeline(out_dir, config=None):
    """Runs every stage into out_dir and returns its path."""
    return _core.run_pipeline(_config_json(config), os.fspath(out_dir))


__all__ = [
    "AdscreenError",
    "RandomForest",
    "__version__",
    "confusion_matrix",
    "default_config",
    "emit_reports",
    "generate_cohort",
    "gini_impurity",
    "roc_auc",
    "run_pipeline",
    "run_stage",
    "scores",
    "stage_order",
]
