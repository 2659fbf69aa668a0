# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains BaseHmm class holding what first- and second-order
models share: the prior, the per-state mixtures and the topology.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from enum import Enum
from typing import List, Sequence, Union

import numpy as np

from hmm2_speaker.common import (
    UsageError, InvariantViolationError, safe_log
)
from hmm2_speaker.models.observation import ObservationSequence
from hmm2_speaker.models.topology import Topology
from hmm2_speaker.models.emissions import GaussianMixture


SUM_TOL = 1e-9



class ModelKind(Enum):
    Hmm1 = "hmm1"
    Hmm2 = "hmm2"



class BaseHmm:
    """
    This class validates and stores the parameters common to HMM1 and
    HMM2. Parameter arrays are read-only once the model is built.
    """

    kind: ModelKind = None
    _logger = logging.getLogger(__name__)

    def __init__(
        self,
        pi,
        states: Sequence[GaussianMixture],
        topology: Topology
    ):
        self.logger = BaseHmm._logger
        n = topology.n_states
        pi = np.array(pi, dtype=float)
        if pi.shape != (n,):
            raise InvariantViolationError(
                f"{type(self).__name__}.init(): Prior shape {pi.shape} does "\
                f"not match [{n}] states!"
            )
        if len(states) != n:
            raise InvariantViolationError(
                f"{type(self).__name__}.init(): [{len(states)}] mixtures for "\
                f"[{n}] states!"
            )
        dims = {gm.n_features for gm in states}
        if len(dims) != 1:
            raise InvariantViolationError(
                f"{type(self).__name__}.init(): States disagree on feature "\
                f"dimension {sorted(dims)}!"
            )
        BaseHmm.check_distribution(pi, topology.prior_mask, "pi", ())
        pi.flags.writeable = False
        self.pi = pi
        self.states: List[GaussianMixture] = list(states)
        self.topology = topology


    @staticmethod
    def check_distribution(
        row: np.ndarray,
        mask: np.ndarray,
        name: str,
        location: tuple
    ) -> None:
        """
        Raise InvariantViolationError unless row is a distribution that
        puts exactly zero on masked entries.
        """
        if not np.isfinite(row).all() or (row < 0).any():
            raise InvariantViolationError(
                f"{name}{list(location)}: entries must be finite and "\
                "non-negative!", location
            )
        if (row[~mask] != 0).any():
            raise InvariantViolationError(
                f"{name}{list(location)}: disallowed transition has non-zero "\
                "probability!", location
            )
        total = row.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise InvariantViolationError(
                f"{name}{list(location)}: row sums to [{total!r}], "\
                "expected 1!", location
            )


    @property
    def n_states(self) -> int:
        return self.topology.n_states


    @property
    def n_mixtures(self) -> int:
        return max(gm.n_components for gm in self.states)


    @property
    def n_features(self) -> int:
        return self.states[0].n_features


    @property
    def log_pi(self) -> np.ndarray:
        return safe_log(self.pi)


    def observations(
        self,
        o: Union[ObservationSequence, np.ndarray]
    ) -> ObservationSequence:
        """Wrap raw frames and check the feature dimension."""
        if not isinstance(o, ObservationSequence):
            o = ObservationSequence(o)
        if o.n_features != self.n_features:
            raise UsageError(
                f"{type(self).__name__}: Observation dimension "\
                f"[{o.n_features}] of [{o.source_id}] does not match model "\
                f"dimension [{self.n_features}]!"
            )
        return o


    def log_emissions(
        self,
        o: Union[ObservationSequence, np.ndarray]
    ) -> np.ndarray:
        """log b_i(O_t) for every frame and state, shape (T, N)."""
        o = self.observations(o)
        return np.stack([gm.log_densities(o.frames) for gm in self.states],
                        axis=1)


    def check_states(self, q: Sequence[int]) -> np.ndarray:
        q = np.asarray(q, dtype=int).ravel()
        if q.size < 1:
            raise UsageError(
                f"{type(self).__name__}: State sequence must not be empty!"
            )
        if (q < 0).any() or (q >= self.n_states).any():
            raise UsageError(
                f"{type(self).__name__}: State index out of range "\
                f"[0, {self.n_states}) in {q.tolist()}!"
            )
        return q
