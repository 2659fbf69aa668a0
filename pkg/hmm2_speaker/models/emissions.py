# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains the diagonal-covariance Gaussian mixture output
densities b_i(O_t) and their EM statistics.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
import warnings
from typing import Dict, Optional, Union

import numpy as np
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from hmm2_speaker.common import (
    UsageError, InvariantViolationError, StarvedComponentError,
    PROB_FLOOR, log_sum_exp_axis, safe_log
)


LOG_2PI = float(np.log(2.0 * np.pi))
DEF_VAR_FLOOR = 1e-4

_logger = logging.getLogger(__name__)



class GaussianMixture:
    """
    This class represents one state's output density
    b(o) = sum_m c_m N(o; mu_m, diag(var_m)).

    Instances are immutable: the parameter arrays are read-only.

        >>> gm = GaussianMixture([1.0], [[0.0]], [[1.0]])
        >>> round(gm.log_density([0.0]), 7)
        -0.9189385
    """

    _logger = logging.getLogger(__name__)

    def __init__(self, weights, means, variances):
        w = np.array(weights, dtype=float).ravel()
        mu = np.array(means, dtype=float)
        var = np.array(variances, dtype=float)
        if mu.ndim == 1:
            mu = mu.reshape(w.size, -1)
        if var.ndim == 1:
            var = var.reshape(w.size, -1)
        if w.size < 1 or mu.shape[0] != w.size or var.shape != mu.shape:
            raise InvariantViolationError(
                f"GaussianMixture.init(): Inconsistent shapes - weights "\
                f"{w.shape}, means {mu.shape}, variances {var.shape}!"
            )
        if (w < 0).any() or abs(w.sum() - 1.0) > 1e-9:
            raise InvariantViolationError(
                f"GaussianMixture.init(): Weights must be non-negative and "\
                f"sum to 1, got sum [{w.sum()!r}]!"
            )
        if not np.isfinite(mu).all():
            raise InvariantViolationError(
                "GaussianMixture.init(): Means must be finite!"
            )
        if not np.isfinite(var).all() or (var <= 0).any():
            raise InvariantViolationError(
                "GaussianMixture.init(): Variances must be finite and > 0!"
            )
        for a in (w, mu, var):
            a.flags.writeable = False
        self.weights = w
        self.means = mu
        self.variances = var
        self._log_weights = safe_log(w)
        # per-component normalizer -0.5 * (d log 2pi + sum log var)
        self._log_norm = -0.5 * (mu.shape[1] * LOG_2PI +
                                 np.log(var).sum(axis=1))


    @property
    def n_components(self) -> int:
        return self.weights.size


    @property
    def n_features(self) -> int:
        return self.means.shape[1]


    def _check_frames(self, frames) -> np.ndarray:
        x = np.asarray(frames, dtype=float)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        if x.shape[-1] != self.n_features:
            raise UsageError(
                f"GaussianMixture: Observation dimension [{x.shape[-1]}] "\
                f"does not match mixture dimension [{self.n_features}]!"
            )
        return x


    def log_component_densities(self, frames) -> np.ndarray:
        """
        Weighted component log-densities log c_m + log N(o_t; mu_m, var_m).

        Args:
            frames: array of shape (T, d) or a single vector (d,)

        Returns:
            np.ndarray: shape (T, M)
        """
        x = self._check_frames(frames)
        diff = x[:, None, :] - self.means[None, :, :]
        maha = (diff * diff / self.variances[None, :, :]).sum(axis=2)
        return self._log_weights[None, :] + self._log_norm[None, :] \
            - 0.5 * maha


    def log_densities(self, frames) -> np.ndarray:
        """log b(o_t) for every row of frames, shape (T,)."""
        return log_sum_exp_axis(self.log_component_densities(frames), axis=1)


    def log_density(self, o) -> float:
        """
        Log of the mixture density at one feature vector.

        Raises:
            UsageError: If dim(o) differs from the mixture dimension.
        """
        o = np.asarray(o, dtype=float)
        if o.ndim != 1:
            raise UsageError(
                "GaussianMixture.log_density(): Expected one vector, got "\
                f"shape {o.shape}!"
            )
        return float(self.log_densities(o)[0])


    def responsibilities(self, frames) -> np.ndarray:
        """Posterior component probabilities per frame, shape (T, M)."""
        lc = self.log_component_densities(frames)
        norm = log_sum_exp_axis(lc, axis=1)
        return np.exp(lc - norm[:, None])


    def accumulate_responsibilities(self, o) -> np.ndarray:
        """
        Posterior probability of each component having produced o,
        proportional to c_m N(o; mu_m, var_m) and summing to one.
        """
        o = np.asarray(o, dtype=float)
        if o.ndim != 1:
            raise UsageError(
                "GaussianMixture.accumulate_responsibilities(): Expected one "\
                f"vector, got shape {o.shape}!"
            )
        return self.responsibilities(o)[0]


    def sample(self, rng: np.random.Generator, n: int = 1) -> np.ndarray:
        """Draw n vectors, shape (n, d)."""
        comps = rng.choice(self.n_components, size=n, p=self.weights)
        noise = rng.standard_normal((n, self.n_features))
        return self.means[comps] + noise * np.sqrt(self.variances[comps])


    def to_dict(self) -> Dict:
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
        }


    @staticmethod
    def from_dict(d: Dict) -> "GaussianMixture":
        return GaussianMixture(d["weights"], d["means"], d["variances"])


    def __repr__(self) -> str:
        return f"GaussianMixture(M={self.n_components}, d={self.n_features})"



class MixtureStats:
    """
    Sufficient statistics of one mixture: per component the weighted
    frame count, the weighted sum and the weighted sum of squares.
    Single-writer; instances from parallel workers are merged with
    ``merge`` in a fixed order.
    """

    def __init__(self, n_components: int, n_features: int):
        self.n_components = n_components
        self.n_features = n_features
        self.mass = np.zeros(n_components)
        self.first = np.zeros((n_components, n_features))
        self.second = np.zeros((n_components, n_features))


    def add(self, frames: np.ndarray, weights: np.ndarray) -> "MixtureStats":
        """Accumulate (n, d) frames with an (n, M) matrix of weights."""
        frames = np.asarray(frames, dtype=float).reshape(-1, self.n_features)
        weights = np.asarray(weights, dtype=float).reshape(
                -1, self.n_components)
        if frames.shape[0] != weights.shape[0]:
            raise UsageError(
                f"MixtureStats.add(): [{frames.shape[0]}] frames but "\
                f"[{weights.shape[0]}] weight rows!"
            )
        self.mass += weights.sum(axis=0)
        self.first += weights.T @ frames
        self.second += weights.T @ (frames * frames)
        return self


    def add_occupancy(
        self,
        gm: GaussianMixture,
        frames: np.ndarray,
        occupancy: np.ndarray
    ) -> "MixtureStats":
        """Add frames weighted by state occupancy times responsibilities."""
        return self.add(frames, gm.responsibilities(frames) *
                        np.asarray(occupancy, dtype=float)[:, None])


    def merge(self, other: "MixtureStats") -> "MixtureStats":
        self.mass += other.mass
        self.first += other.first
        self.second += other.second
        return self


    @property
    def total(self) -> float:
        return float(self.mass.sum())



def reestimate_mixture(
    stats: MixtureStats,
    previous: Optional[GaussianMixture] = None,
    variance_floor: Union[float, np.ndarray] = DEF_VAR_FLOOR,
    weight_floor: float = PROB_FLOOR
) -> GaussianMixture:
    """
    EM M-step of one mixture from its sufficient statistics.

    Weights are normalized component masses, means weighted averages and
    variances weighted second central moments lifted to variance_floor.
    A component without mass keeps its previous mean and variance and gets
    weight_floor before renormalization.

    Args:
        stats: accumulated statistics
        previous: mixture of the previous iteration, used for starved
            components
        variance_floor: scalar or per-dimension (d,) minimum variance
        weight_floor: minimum mixture weight

    Returns:
        GaussianMixture: the re-estimated mixture

    Raises:
        StarvedComponentError: If the total weight is zero, or a component
            is starved and there is no previous mixture to fall back on.
    """
    mass = stats.mass
    if not mass.sum() > 0:
        raise StarvedComponentError(
            "reestimate_mixture(): Total weight over components is zero!"
        )

    n_comp, d = stats.n_components, stats.n_features
    floor = np.broadcast_to(np.asarray(variance_floor, dtype=float), (d,))
    means = np.empty((n_comp, d))
    variances = np.empty((n_comp, d))
    for m in range(n_comp):
        if mass[m] > 0:
            mu = stats.first[m] / mass[m]
            means[m] = mu
            # E[x^2] - mu^2 can dip below zero by rounding
            variances[m] = np.maximum(stats.second[m] / mass[m] - mu * mu,
                                      0.0)
        elif previous is not None:
            _logger.warning(
                f"reestimate_mixture(): Component [{m}] starved, keeping "\
                "previous parameters."
            )
            means[m] = previous.means[m]
            variances[m] = previous.variances[m]
        else:
            raise StarvedComponentError(
                f"reestimate_mixture(): Component [{m}] has zero weight "\
                "and no previous parameters!"
            )
    variances = np.maximum(variances, floor)
    weights = np.maximum(mass / mass.sum(), weight_floor)
    weights /= weights.sum()
    return GaussianMixture(weights, means, variances)


def kmeans_mixture(
    frames: np.ndarray,
    n_components: int,
    variance_floor: Union[float, np.ndarray] = DEF_VAR_FLOOR,
    max_iter: int = 20,
    seed: int = 0
) -> GaussianMixture:
    """
    Initialize a mixture by seeded k-means on the frames of one state.

    When there are fewer distinct frames than components, the found
    centers are reused with a small deterministic offset so that all
    n_components components exist and differ.
    """
    x = np.asarray(frames, dtype=float)
    if x.ndim != 2 or x.shape[0] < 1:
        raise UsageError(
            "kmeans_mixture(): Need at least one frame to initialize!"
        )
    d = x.shape[1]
    floor = np.broadcast_to(np.asarray(variance_floor, dtype=float), (d,))
    n_distinct = np.unique(x, axis=0).shape[0]
    k = max(1, min(n_components, n_distinct))

    if k == 1:
        labels = np.zeros(x.shape[0], dtype=int)
        centers = x.mean(axis=0, keepdims=True)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=ConvergenceWarning)
            km = KMeans(n_clusters=k, n_init=1, max_iter=max_iter,
                        random_state=seed).fit(x)
        labels = km.labels_
        centers = km.cluster_centers_

    global_var = np.maximum(x.var(axis=0), floor)
    means = np.empty((n_components, d))
    variances = np.empty((n_components, d))
    counts = np.empty(n_components)
    for m in range(n_components):
        c = m % k
        members = x[labels == c]
        var = members.var(axis=0) if members.shape[0] > 1 else global_var
        copy_idx = m // k
        means[m] = centers[c] + 0.01 * copy_idx * np.sqrt(global_var)
        variances[m] = np.maximum(var, floor)
        counts[m] = max(members.shape[0], 1) / (
            (n_components - c - 1) // k + 1)
    return GaussianMixture(counts / counts.sum(), means, variances)
