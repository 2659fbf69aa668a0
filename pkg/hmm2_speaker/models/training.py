# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains TrainConfig and ConvergenceMonitor classes shared by
the first- and second-order Baum-Welch trainers, plus the helper that runs
per-sequence E-steps on a thread pool.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np

from hmm2_speaker.common import UsageError, PROB_FLOOR
from hmm2_speaker.models.topology import Topology, TopologyType
from hmm2_speaker.models.emissions import DEF_VAR_FLOOR


# expected frames below which a state or context counts as unvisited
MIN_OCCUPANCY = 1e-6



class TrainConfig:
    """
    Training setup of one model, read from a [train_setups.<g>.<item>]
    section.

    Defaults: 5 states, 5 mixtures per state, left-to-right topology.
    """

    DEFAULTS: Dict[str, Any] = {
        "n_states": 5,
        "n_mixtures": 5,
        "topology": TopologyType.LeftToRight.value,
        "max_jump": 2,
        "max_iter": 40,
        "tol": 1e-5,
        "var_floor_factor": DEF_VAR_FLOOR,
        "prob_floor": PROB_FLOOR,
        "kmeans_max_iter": 20,
        "seed": 0,
        "n_jobs": 1,
    }

    _logger = logging.getLogger(__name__)

    def __init__(self, **kwargs):
        self.logger = TrainConfig._logger
        unknown = set(kwargs) - set(TrainConfig.DEFAULTS)
        if unknown:
            s = f"TrainConfig.init(): Unknown keys {sorted(unknown)}!"
            self.logger.error(s)
            raise UsageError(s)
        params = dict(TrainConfig.DEFAULTS)
        params.update({k: v for k, v in kwargs.items() if v is not None})
        self.n_states = int(params["n_states"])
        self.n_mixtures = int(params["n_mixtures"])
        self.topology_kind = str(params["topology"])
        self.max_jump = int(params["max_jump"])
        self.max_iter = int(params["max_iter"])
        self.tol = float(params["tol"])
        self.var_floor_factor = float(params["var_floor_factor"])
        self.prob_floor = float(params["prob_floor"])
        self.kmeans_max_iter = int(params["kmeans_max_iter"])
        self.seed = int(params["seed"])
        self.n_jobs = int(params["n_jobs"])
        if self.n_states < 1 or self.n_mixtures < 1:
            s = f"TrainConfig.init(): n_states [{self.n_states}] and "\
                f"n_mixtures [{self.n_mixtures}] must be >= 1!"
            self.logger.error(s)
            raise UsageError(s)
        if self.max_iter < 0 or self.tol < 0:
            s = "TrainConfig.init(): max_iter and tol must be >= 0!"
            self.logger.error(s)
            raise UsageError(s)


    @staticmethod
    def from_dict(d: Dict, **overrides) -> "TrainConfig":
        params = {k: v for k, v in d.items() if k in TrainConfig.DEFAULTS}
        params.update(overrides)
        return TrainConfig(**params)


    def to_dict(self) -> Dict:
        return {
            "n_states": self.n_states,
            "n_mixtures": self.n_mixtures,
            "topology": self.topology_kind,
            "max_jump": self.max_jump,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "var_floor_factor": self.var_floor_factor,
            "prob_floor": self.prob_floor,
            "kmeans_max_iter": self.kmeans_max_iter,
            "seed": self.seed,
            "n_jobs": self.n_jobs,
        }


    def make_topology(self) -> Topology:
        return Topology(self.n_states, self.topology_kind, self.max_jump)


    def variance_floor(self, frames: np.ndarray) -> np.ndarray:
        """Per-dimension floor: factor x global data variance."""
        var = np.asarray(frames, dtype=float).var(axis=0)
        # constant dimensions still need a positive floor
        var = np.where(var > 0, var, 1.0)
        return self.var_floor_factor * var



class ConvergenceMonitor:
    """
    This class tracks the corpus log-likelihood of each EM iteration and
    decides when training stops: at max_iter iterations, or when the
    relative improvement falls below tol.

    history[i] is the log-likelihood of the model after i M-steps, so a
    run of n iterations leaves n + 1 entries.
    """

    _logger = logging.getLogger(__name__)

    def __init__(self, tol: float = 1e-5, max_iter: int = 40):
        self.logger = ConvergenceMonitor._logger
        self.tol = tol
        self.max_iter = max_iter
        self.history: List[float] = []
        self.flagged: List[Tuple] = []
        self.iterations = 0
        self.converged = False


    def report(self, log_likelihood: float) -> bool:
        """
        Record the log-likelihood of the current model.

        Returns:
            bool: True once the relative improvement over the previous
                entry is below tol.
        """
        self.history.append(float(log_likelihood))
        self.logger.debug(
            f"ConvergenceMonitor.report(): Iteration [{self.iterations}]; "\
            f"Log_likelihood [{log_likelihood}]."
        )
        if len(self.history) >= 2:
            prev, curr = self.history[-2], self.history[-1]
            if (curr - prev) / max(abs(prev), 1e-300) < self.tol:
                self.converged = True
        return self.converged


    def flag(self, item: Tuple) -> None:
        if item not in self.flagged:
            self.flagged.append(item)



def map_sequences(
    func: Callable,
    items: Sequence,
    n_jobs: int = 1
) -> List:
    """
    Apply func to every item, optionally on a thread pool. Results keep
    the input order so downstream merges are reproducible.
    """
    if n_jobs is None or n_jobs <= 1 or len(items) <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=n_jobs) as executor:
        return list(executor.map(func, items))
