"""Alignment of correlated Gaussian databases.

Thin wrapper over the C++ core. Matrices are numpy arrays with one row per
user; correlation models are given as lists of canonical correlations.
"""

import csv
import io
import json

from ._dbalign import (
    CorrelationModel,
    DbalignError,
    apply_transform,
    bhattacharyya_r,
    bht_align,
    bht_converse_bound,
    brute_force_align,
    canonicalize,
    cycle_type,
    log_likelihood_ratio,
    map_achievability_margin,
    map_align,
    map_converse_predicate,
    mutual_information,
    mutual_information_general,
    sample_instance,
    score_assignment,
    score_matrix,
    score_threshold,
    select_threshold,
    shifted_laplacian_det,
    sigma,
    sigma_general,
    validate_covariance,
)
from ._dbalign import run_sweep as _run_sweep

__all__ = [
    "CorrelationModel",
    "DbalignError",
    "apply_transform",
    "bhattacharyya_r",
    "bht_align",
    "bht_converse_bound",
    "brute_force_align",
    "canonicalize",
    "cycle_type",
    "log_likelihood_ratio",
    "map_achievability_margin",
    "map_align",
    "map_converse_predicate",
    "mutual_information",
    "mutual_information_general",
    "sample_instance",
    "score_assignment",
    "score_matrix",
    "score_threshold",
    "select_threshold",
    "shifted_laplacian_det",
    "sigma",
    "sigma_general",
    "sweep",
    "validate_covariance",
]


def sweep(config):
    """Run a sweep described by a config dict; returns the cells as dicts.

    Keys follow the sweep config file (n, rho, d, algorithm, trials, ...).
    Artifacts are written only when output_dir is given.
    """
    text = _run_sweep(json.dumps(config))
    return list(csv.DictReader(io.StringIO(text)))
