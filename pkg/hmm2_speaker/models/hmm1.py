# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains the first-order baseline: Hmm1Model and its forward,
backward, Viterbi, sampling and Baum-Welch routines.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from hmm2_speaker.common import (
    UsageError, InvariantViolationError, StarvedStateError,
    NoValidPathError, log_sum_exp_axis, safe_log, floor_and_normalize
)
from hmm2_speaker.models.observation import ObservationSequence
from hmm2_speaker.models.topology import Topology
from hmm2_speaker.models.emissions import (
    GaussianMixture, MixtureStats, reestimate_mixture
)
from hmm2_speaker.models.base_hmm import BaseHmm, ModelKind
from hmm2_speaker.models.training import (
    TrainConfig, ConvergenceMonitor, map_sequences, MIN_OCCUPANCY
)


_logger = logging.getLogger(__name__)

Observations = Union[ObservationSequence, np.ndarray]



class Hmm1Model(BaseHmm):
    """
    First-order HMM with Gaussian mixture emissions.

    Attributes:
        pi: (N,) initial state probabilities
        a: (N, N) transition matrix a[i, j] = P(q_t = j | q_{t-1} = i)
        states: N GaussianMixture emissions
        topology: allowed transitions
    """

    kind = ModelKind.Hmm1

    def __init__(
        self,
        pi,
        a,
        states: Sequence[GaussianMixture],
        topology: Topology
    ):
        super().__init__(pi, states, topology)
        n = self.n_states
        a = np.array(a, dtype=float)
        if a.shape != (n, n):
            raise InvariantViolationError(
                f"Hmm1Model.init(): Transition shape {a.shape} does not "\
                f"match [{n}] states!"
            )
        for i in range(n):
            BaseHmm.check_distribution(a[i], topology.mask[i], "a", (i,))
        a.flags.writeable = False
        self.a = a


    @property
    def log_a(self) -> np.ndarray:
        return safe_log(self.a)


    def __repr__(self) -> str:
        return f"Hmm1Model(N={self.n_states}, M={self.n_mixtures}, "\
            f"d={self.n_features}, {self.topology.kind})"



def _forward_table(
    log_pi: np.ndarray,
    log_a: np.ndarray,
    log_b: np.ndarray
) -> np.ndarray:
    n_frames, n = log_b.shape
    alpha = np.empty((n_frames, n))
    alpha[0] = log_pi + log_b[0]
    for t in range(1, n_frames):
        alpha[t] = log_sum_exp_axis(alpha[t - 1][:, None] + log_a, axis=0) \
            + log_b[t]
    return alpha


def _backward_table(log_a: np.ndarray, log_b: np.ndarray) -> np.ndarray:
    n_frames, n = log_b.shape
    beta = np.zeros((n_frames, n))
    for t in range(n_frames - 2, -1, -1):
        beta[t] = log_sum_exp_axis(
            log_a + (log_b[t + 1] + beta[t + 1])[None, :], axis=1)
    return beta


def forward1(m: Hmm1Model, o: Observations) -> Tuple[float, np.ndarray]:
    """
    First-order forward pass.

    Returns:
        Tuple[float, np.ndarray]: log P(O | model) and the (T, N) log alpha
            lattice.

    Raises:
        UsageError: If the feature dimension differs from the model's.
    """
    alpha = _forward_table(m.log_pi, m.log_a, m.log_emissions(o))
    return float(log_sum_exp_axis(alpha[-1], axis=0)), alpha


def backward1(m: Hmm1Model, o: Observations) -> np.ndarray:
    """(T, N) log beta lattice with beta_T = 0."""
    return _backward_table(m.log_a, m.log_emissions(o))


def viterbi1(m: Hmm1Model, o: Observations) -> Tuple[List[int], float]:
    """
    Most likely state sequence and its joint log-probability. Ties go to
    the lowest state index.

    Raises:
        NoValidPathError: If every path has probability zero.
    """
    log_b = m.log_emissions(o)
    log_a = m.log_a
    n_frames, n = log_b.shape
    delta = m.log_pi + log_b[0]
    backptr = np.zeros((n_frames, n), dtype=int)
    for t in range(1, n_frames):
        scores = delta[:, None] + log_a
        backptr[t] = np.argmax(scores, axis=0)
        delta = scores[backptr[t], np.arange(n)] + log_b[t]

    last = int(np.argmax(delta))
    score = float(delta[last])
    if score == -np.inf:
        raise NoValidPathError(
            f"viterbi1(): No path of length [{n_frames}] has non-zero "\
            "probability!"
        )
    path = [last]
    for t in range(n_frames - 1, 0, -1):
        path.append(int(backptr[t, path[-1]]))
    return path[::-1], score


def sample1(
    m: Hmm1Model,
    n_frames: int,
    seed: Optional[int] = None
) -> Tuple[List[int], ObservationSequence]:
    """Draw a state path and frames of length n_frames; deterministic per seed."""
    if n_frames < 1:
        raise UsageError(f"sample1(): Length [{n_frames}] must be >= 1!")
    rng = np.random.default_rng(seed)
    q = [int(rng.choice(m.n_states, p=m.pi))]
    for _ in range(1, n_frames):
        q.append(int(rng.choice(m.n_states, p=m.a[q[-1]])))
    frames = np.vstack([m.states[s].sample(rng, 1) for s in q])
    return q, ObservationSequence(frames, f"sample1/seed={seed}")



class _Hmm1Stats:
    """Expected counts of one sequence; merged in corpus order."""

    def __init__(self, n: int, n_mix: int, n_feat: int):
        self.log_likelihood = 0.0
        self.n_used = 0
        self.pi = np.zeros(n)
        self.trans = np.zeros((n, n))
        self.occupancy = np.zeros(n)
        self.mixtures = [MixtureStats(n_mix, n_feat) for _ in range(n)]


    def merge(self, other: "_Hmm1Stats") -> "_Hmm1Stats":
        if other.n_used:
            self.log_likelihood += other.log_likelihood
            self.n_used += other.n_used
        self.pi += other.pi
        self.trans += other.trans
        self.occupancy += other.occupancy
        for mine, theirs in zip(self.mixtures, other.mixtures):
            mine.merge(theirs)
        return self



def _e_step1(m: Hmm1Model, o: ObservationSequence) -> _Hmm1Stats:
    log_b = m.log_emissions(o)
    log_a = m.log_a
    alpha = _forward_table(m.log_pi, log_a, log_b)
    beta = _backward_table(log_a, log_b)
    ll = float(log_sum_exp_axis(alpha[-1], axis=0))
    stats = _Hmm1Stats(m.n_states, m.n_mixtures, m.n_features)
    if not np.isfinite(ll):
        _logger.warning(
            f"baum_welch1(): Sequence [{o.source_id}] has zero likelihood, "\
            "skipped."
        )
        stats.log_likelihood = ll
        return stats

    gamma = np.exp(alpha + beta - ll)
    stats.log_likelihood = ll
    stats.n_used = 1
    stats.pi = gamma[0]
    stats.occupancy = gamma.sum(axis=0)
    if o.n_frames > 1:
        xi = alpha[:-1, :, None] + log_a[None, :, :] \
            + (log_b[1:] + beta[1:])[:, None, :] - ll
        stats.trans = np.exp(xi).sum(axis=0)
    for i, gm in enumerate(m.states):
        stats.mixtures[i].add_occupancy(gm, o.frames, gamma[:, i])
    return stats


def _corpus_stats(
    m: Hmm1Model,
    corpus: Sequence[ObservationSequence],
    n_jobs: int
) -> _Hmm1Stats:
    total = _Hmm1Stats(m.n_states, m.n_mixtures, m.n_features)
    for s in map_sequences(lambda o: _e_step1(m, o), corpus, n_jobs):
        total.merge(s)
    if not total.n_used:
        raise UsageError(
            "baum_welch1(): Every sequence has zero likelihood under the "\
            "current model!"
        )
    return total


def _m_step1(
    m: Hmm1Model,
    stats: _Hmm1Stats,
    config: TrainConfig,
    variance_floor: np.ndarray
) -> Hmm1Model:
    topo = m.topology
    pi = floor_and_normalize(stats.pi, topo.prior_mask, config.prob_floor)
    a = floor_and_normalize(stats.trans, topo.mask, config.prob_floor)
    states = []
    for i, gm in enumerate(m.states):
        if not stats.occupancy[i] >= MIN_OCCUPANCY:
            s = f"baum_welch1(): No observation reaches state [{i}]; "\
                f"Occupancy [{stats.occupancy[i]:.3g}]!"
            _logger.error(s)
            raise StarvedStateError(s, i)
        states.append(reestimate_mixture(
            stats.mixtures[i], gm, variance_floor, config.prob_floor))
    return Hmm1Model(pi, a, states, topo)


def check_corpus(
    corpus: Sequence[ObservationSequence],
    n_features: int,
    caller: str
) -> List[ObservationSequence]:
    if not corpus:
        raise UsageError(f"{caller}(): Training corpus is empty!")
    seqs = [o if isinstance(o, ObservationSequence)
            else ObservationSequence(o) for o in corpus]
    for o in seqs:
        if o.n_features != n_features:
            raise UsageError(
                f"{caller}(): Sequence [{o.source_id}] has dimension "\
                f"[{o.n_features}], model expects [{n_features}]!"
            )
    return seqs


def baum_welch1(
    m: Hmm1Model,
    corpus: Sequence[ObservationSequence],
    config: Optional[TrainConfig] = None,
    monitor: Optional[ConvergenceMonitor] = None
) -> Hmm1Model:
    """
    Re-estimate a first-order model on a corpus by EM. Statistics of all
    sequences are summed before each M-step.

    Args:
        m: starting model
        corpus: training sequences
        config: iteration cap, tolerance and floors
        monitor: receives the corpus log-likelihood of every iteration

    Returns:
        Hmm1Model: the trained model

    Raises:
        StarvedStateError: If no observation ever reaches a state.
    """
    config = config or TrainConfig()
    monitor = monitor or ConvergenceMonitor(config.tol, config.max_iter)
    corpus = check_corpus(corpus, m.n_features, "baum_welch1")
    floor = config.variance_floor(np.vstack([o.frames for o in corpus]))

    for _ in range(config.max_iter):
        stats = _corpus_stats(m, corpus, config.n_jobs)
        if monitor.report(stats.log_likelihood):
            break
        m = _m_step1(m, stats, config, floor)
        monitor.iterations += 1
    else:
        monitor.report(_corpus_stats(m, corpus, config.n_jobs).log_likelihood)

    _logger.info(
        f"baum_welch1(): Done after [{monitor.iterations}] iterations; "\
        f"Log_likelihood [{monitor.history[-1]}]; "\
        f"Converged [{monitor.converged}]."
    )
    return m
