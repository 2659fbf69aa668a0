# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains log-domain arithmetic shared by the lattice, mixture
and training code. All probabilities are natural-log values; negative
infinity encodes probability zero.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import logsumexp

from hmm2_speaker.common.errors import (
    UsageError, DegenerateDistributionError
)


PROB_FLOOR = 1e-10

_logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]



def log_sum_exp(xs: ArrayLike) -> float:
    """
    Compute log(sum(exp(xs))) with max-subtraction.

    Args:
        xs: non-empty sequence of log-probabilities.

    Returns:
        float: the log of the summed probabilities; exactly -inf when
            every input is -inf.

    Raises:
        UsageError: If xs is empty or holds NaN.
    """
    arr = np.asarray(xs, dtype=float).ravel()
    if arr.size == 0:
        raise UsageError("log_sum_exp(): Input must not be empty!")
    if np.isnan(arr).any():
        raise UsageError("log_sum_exp(): Input holds NaN!")
    return float(log_sum_exp_axis(arr, axis=0))


def log_sum_exp_axis(a: np.ndarray, axis=None) -> np.ndarray:
    """
    Reduce an array of log-values along an axis; slices that are entirely
    -inf reduce to -inf without emitting floating point warnings.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return logsumexp(a, axis=axis)


def normalize_log(xs: ArrayLike) -> np.ndarray:
    """
    Shift log-weights so that they exp-sum to one.

    Raises:
        UsageError: If xs is empty.
        DegenerateDistributionError: If every entry is -inf.
    """
    arr = np.asarray(xs, dtype=float).ravel()
    if arr.size == 0:
        raise UsageError("normalize_log(): Input must not be empty!")
    if not np.isfinite(arr).any():
        raise DegenerateDistributionError(
            "normalize_log(): Every entry is -inf, nothing to normalize!"
        )
    return arr - log_sum_exp(arr)


def safe_log(p: ArrayLike) -> np.ndarray:
    """Elementwise log that maps exact zeros to -inf silently."""
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(p, dtype=float))


def floor_and_normalize(
    counts: np.ndarray,
    mask: Optional[np.ndarray] = None,
    floor: float = PROB_FLOOR
) -> np.ndarray:
    """
    Turn non-negative expected counts into probability rows along the last
    axis. Allowed entries are normalized, lifted to at least ``floor`` and
    normalized again; masked entries are exactly zero. Rows without any
    allowed entry stay all-zero.

    Args:
        counts: array of expected counts, last axis is the distribution.
        mask: boolean array of allowed entries, same shape as counts.
        floor: minimum probability of an allowed entry.

    Returns:
        np.ndarray: probabilities with the shape of counts.
    """
    counts = np.asarray(counts, dtype=float)
    if mask is None:
        mask = np.ones(counts.shape, dtype=bool)
    probs = np.where(mask, np.maximum(counts, 0.0), 0.0)
    total = probs.sum(axis=-1, keepdims=True)
    n_allowed = mask.sum(axis=-1, keepdims=True)
    # rows with allowed entries but no mass fall back to uniform
    uniform = np.where(mask, 1.0, 0.0) / np.maximum(n_allowed, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        probs = np.where(total > 0, probs / np.where(total > 0, total, 1.0),
                         uniform)
    probs = np.where(mask, np.maximum(probs, floor), 0.0)
    total = probs.sum(axis=-1, keepdims=True)
    return np.where(total > 0, probs / np.where(total > 0, total, 1.0), 0.0)
