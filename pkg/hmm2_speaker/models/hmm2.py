# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains the second-order model Hmm2Model, where the next state
depends on the two previous states through a_ijk, together with its
pair-state forward, backward and Viterbi lattices and EM training.

The lattices are indexed by the pair (q_{t-1}, q_t); a sequence of T frames
costs O(N^3 T) operations.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from hmm2_speaker.common import (
    UsageError, InvariantViolationError, NoValidPathError, SamplingError,
    log_sum_exp_axis, safe_log, floor_and_normalize
)
from hmm2_speaker.models.observation import ObservationSequence
from hmm2_speaker.models.topology import Topology
from hmm2_speaker.models.emissions import (
    GaussianMixture, MixtureStats, reestimate_mixture
)
from hmm2_speaker.models.lattice import PairLattice
from hmm2_speaker.models.base_hmm import BaseHmm, ModelKind
from hmm2_speaker.models.hmm1 import Hmm1Model, check_corpus
from hmm2_speaker.models.training import (
    TrainConfig, ConvergenceMonitor, map_sequences, MIN_OCCUPANCY
)


_logger = logging.getLogger(__name__)

Observations = Union[ObservationSequence, np.ndarray]



class Hmm2Model(BaseHmm):
    """
    Second-order HMM with Gaussian mixture emissions.

    P(q) = pi[q1] a2[q1, q2] prod_{t>=3} a3[q_{t-2}, q_{t-1}, q_t]

    Rows a3[i, j] of contexts the topology never produces (j not reachable
    from i) are stored all-zero and are exempt from the sum-to-one check.

    Attributes:
        pi: (N,) initial state probabilities
        a2: (N, N) transitions out of the first state
        a3: (N, N, N) second-order transitions
        states: N GaussianMixture emissions
        topology: allowed transitions
    """

    kind = ModelKind.Hmm2

    def __init__(
        self,
        pi,
        a2,
        a3,
        states: Sequence[GaussianMixture],
        topology: Topology
    ):
        super().__init__(pi, states, topology)
        n = self.n_states
        a2 = np.array(a2, dtype=float)
        a3 = np.array(a3, dtype=float)
        if a2.shape != (n, n) or a3.shape != (n, n, n):
            raise InvariantViolationError(
                f"Hmm2Model.init(): Transition shapes {a2.shape} and "\
                f"{a3.shape} do not match [{n}] states!"
            )
        for i in range(n):
            BaseHmm.check_distribution(a2[i], topology.mask[i], "a2", (i,))
            for j in range(n):
                if topology.mask[i, j]:
                    BaseHmm.check_distribution(
                        a3[i, j], topology.mask3[i, j], "a3", (i, j))
                elif (a3[i, j] != 0).any():
                    raise InvariantViolationError(
                        f"a3[{i}, {j}]: unreachable context must be "\
                        "all-zero!", (i, j)
                    )
        a2.flags.writeable = False
        a3.flags.writeable = False
        self.a2 = a2
        self.a3 = a3


    @property
    def log_a2(self) -> np.ndarray:
        return safe_log(self.a2)


    @property
    def log_a3(self) -> np.ndarray:
        return safe_log(self.a3)


    def __repr__(self) -> str:
        return f"Hmm2Model(N={self.n_states}, M={self.n_mixtures}, "\
            f"d={self.n_features}, {self.topology.kind})"



def sequence_prob(m: Hmm2Model, q: Sequence[int]) -> float:
    """
    Log-probability of a state sequence under the second-order chain.

        >>> sequence_prob(m, [0])  # log pi[0]

    Raises:
        UsageError: If q is empty or holds an index outside [0, N).
    """
    q = m.check_states(q)
    lp = float(m.log_pi[q[0]])
    if q.size >= 2:
        lp += float(m.log_a2[q[0], q[1]])
    if q.size >= 3:
        lp += float(m.log_a3[q[:-2], q[1:-1], q[2:]].sum())
    return lp


def joint_prob(m: Hmm2Model, q: Sequence[int], o: Observations) -> float:
    """log P(q, O | model): sequence_prob plus the emission log-densities."""
    o = m.observations(o)
    q = m.check_states(q)
    if q.size != o.n_frames:
        raise UsageError(
            f"joint_prob(): State sequence length [{q.size}] differs from "\
            f"[{o.n_frames}] frames!"
        )
    log_b = m.log_emissions(o)
    return sequence_prob(m, q) + float(log_b[np.arange(q.size), q].sum())


def _forward_table(
    m: Hmm2Model,
    log_b: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    n_frames, n = log_b.shape
    initial = m.log_pi + log_b[0]
    table = np.full((n_frames, n, n), -np.inf)
    if n_frames >= 2:
        table[1] = initial[:, None] + m.log_a2 + log_b[1][None, :]
        log_a3 = m.log_a3
        for t in range(2, n_frames):
            table[t] = log_sum_exp_axis(
                table[t - 1][:, :, None] + log_a3, axis=0) + log_b[t][None, :]
    return initial, table


def _backward_table(m: Hmm2Model, log_b: np.ndarray) -> np.ndarray:
    n_frames, n = log_b.shape
    table = np.full((n_frames, n, n), -np.inf)
    table[-1] = 0.0
    log_a3 = m.log_a3
    for t in range(n_frames - 1, 1, -1):
        table[t - 1] = log_sum_exp_axis(
            log_a3 + (log_b[t][None, :] + table[t])[None, :, :], axis=2)
    return table


def _likelihood(initial: np.ndarray, table: np.ndarray) -> float:
    if table.shape[0] == 1:
        return float(log_sum_exp_axis(initial, axis=0))
    return float(log_sum_exp_axis(table[-1], axis=None))


def forward2(m: Hmm2Model, o: Observations) -> Tuple[float, PairLattice]:
    """
    Second-order forward pass over state pairs.

    alpha_2(j, k) = pi_j b_j(O_1) a2_jk b_k(O_2)
    alpha_t(j, k) = [sum_i alpha_{t-1}(i, j) a3_ijk] b_k(O_t)

    Args:
        m: the model
        o: observation sequence, T >= 1

    Returns:
        Tuple[float, PairLattice]: log P(O | model) and the alpha lattice;
            for T = 1 the likelihood comes from the lattice's initial term.

    Raises:
        UsageError: If the feature dimension differs from the model's.
    """
    initial, table = _forward_table(m, m.log_emissions(o))
    return _likelihood(initial, table), PairLattice(table, initial=initial)


def backward2(m: Hmm2Model, o: Observations) -> PairLattice:
    """
    Second-order backward pass; beta_T is 0 (log of 1) for every pair and
    beta_{t-1}(i, j) = sum_k a3_ijk b_k(O_t) beta_t(j, k).

    Raises:
        UsageError: If T < 2.
    """
    o = m.observations(o)
    if o.n_frames < 2:
        raise UsageError(
            f"backward2(): Pair lattice needs T >= 2, got [{o.n_frames}]!"
        )
    return PairLattice(_backward_table(m, m.log_emissions(o)))


def viterbi2(
    m: Hmm2Model,
    o: Observations
) -> Tuple[List[int], float, PairLattice]:
    """
    Best state sequence under the second-order model.

    The predecessor of each pair is the lowest index i among the maxima,
    and the final pair is the lowest (j, k) in row-major order.

    Returns:
        Tuple[List[int], float, PairLattice]: path, joint log-probability
            and the delta lattice with backpointers.

    Raises:
        NoValidPathError: If every terminal entry is -inf.
    """
    log_b = m.log_emissions(o)
    n_frames, n = log_b.shape
    initial = m.log_pi + log_b[0]
    table = np.full((n_frames, n, n), -np.inf)
    backptr = np.full((n_frames, n, n), -1, dtype=int)

    if n_frames == 1:
        last = int(np.argmax(initial))
        score = float(initial[last])
        path = [last]
    else:
        table[1] = initial[:, None] + m.log_a2 + log_b[1][None, :]
        log_a3 = m.log_a3
        kk, jj = np.meshgrid(np.arange(n), np.arange(n))
        for t in range(2, n_frames):
            scores = table[t - 1][:, :, None] + log_a3
            best = np.argmax(scores, axis=0)
            table[t] = scores[best, jj, kk] + log_b[t][None, :]
            backptr[t] = np.where(np.isfinite(table[t]), best, -1)
        j, k = np.unravel_index(int(np.argmax(table[-1])), (n, n))
        score = float(table[-1][j, k])
        path = [int(k), int(j)]
        for t in range(n_frames - 1, 1, -1):
            i = int(backptr[t][j, k])
            path.append(i)
            j, k = i, j
        path = path[::-1]

    if score == -np.inf:
        raise NoValidPathError(
            f"viterbi2(): No path of length [{n_frames}] has non-zero "\
            "probability!"
        )
    return path, score, PairLattice(table, backptr, initial)


def lift_hmm1(m1: Hmm1Model) -> Hmm2Model:
    """
    Embed a first-order model as a second-order one: a3[i, j, :] = a[j, :]
    for every reachable context, so likelihoods and Viterbi paths are
    unchanged.
    """
    mask3 = m1.topology.mask3
    a3 = np.where(mask3, np.broadcast_to(m1.a[None, :, :], mask3.shape), 0.0)
    return Hmm2Model(m1.pi, m1.a, a3, m1.states, m1.topology)


def sample(
    m: Hmm2Model,
    n_frames: int,
    seed: Optional[int] = None
) -> Tuple[List[int], ObservationSequence]:
    """
    Draw a state path and its frames; deterministic for a given seed.

    Raises:
        SamplingError: If the path enters a context without an a3 row.
    """
    if n_frames < 1:
        raise UsageError(f"sample(): Length [{n_frames}] must be >= 1!")
    rng = np.random.default_rng(seed)
    n = m.n_states
    q = [int(rng.choice(n, p=m.pi))]
    if n_frames >= 2:
        q.append(int(rng.choice(n, p=m.a2[q[0]])))
    for _ in range(2, n_frames):
        row = m.a3[q[-2], q[-1]]
        if not row.sum() > 0:
            raise SamplingError(
                f"sample(): Context ({q[-2]}, {q[-1]}) has no successor!"
            )
        q.append(int(rng.choice(n, p=row)))
    frames = np.vstack([m.states[s].sample(rng, 1) for s in q])
    return q, ObservationSequence(frames, f"sample/seed={seed}")



class _Hmm2Stats:
    """Expected counts of one sequence; merged in corpus order."""

    def __init__(self, n: int, n_mix: int, n_feat: int):
        self.log_likelihood = 0.0
        self.n_used = 0
        self.pi = np.zeros(n)
        self.a2 = np.zeros((n, n))
        self.a3 = np.zeros((n, n, n))
        self.occupancy = np.zeros(n)
        self.mixtures = [MixtureStats(n_mix, n_feat) for _ in range(n)]


    def merge(self, other: "_Hmm2Stats") -> "_Hmm2Stats":
        if other.n_used:
            self.log_likelihood += other.log_likelihood
            self.n_used += other.n_used
        self.pi += other.pi
        self.a2 += other.a2
        self.a3 += other.a3
        self.occupancy += other.occupancy
        for mine, theirs in zip(self.mixtures, other.mixtures):
            mine.merge(theirs)
        return self



def _e_step2(m: Hmm2Model, o: ObservationSequence) -> _Hmm2Stats:
    log_b = m.log_emissions(o)
    initial, alpha = _forward_table(m, log_b)
    ll = _likelihood(initial, alpha)
    stats = _Hmm2Stats(m.n_states, m.n_mixtures, m.n_features)
    stats.log_likelihood = ll
    if not np.isfinite(ll):
        _logger.warning(
            f"baum_welch2(): Sequence [{o.source_id}] has zero likelihood, "\
            "skipped."
        )
        return stats

    stats.n_used = 1
    if o.n_frames == 1:
        gamma = np.exp(initial - ll)[None, :]
        stats.pi = gamma[0]
    else:
        beta = _backward_table(m, log_b)
        # pair posteriors over (q_{t-1}, q_t); index 0 is unused
        post = np.exp(alpha[1:] + beta[1:] - ll)
        stats.pi = post[0].sum(axis=1)
        stats.a2 = post[0]
        gamma = np.vstack([post[0].sum(axis=1)[None, :],
                           post.sum(axis=1)])
        if o.n_frames >= 3:
            eta = alpha[1:-1, :, :, None] + m.log_a3[None] \
                + (log_b[2:, None, :] + beta[2:])[:, None, :, :] - ll
            stats.a3 = np.exp(eta).sum(axis=0)
    stats.occupancy = gamma.sum(axis=0)
    for i, gm in enumerate(m.states):
        stats.mixtures[i].add_occupancy(gm, o.frames, gamma[:, i])
    return stats


def _corpus_stats(
    m: Hmm2Model,
    corpus: Sequence[ObservationSequence],
    n_jobs: int
) -> _Hmm2Stats:
    total = _Hmm2Stats(m.n_states, m.n_mixtures, m.n_features)
    for s in map_sequences(lambda o: _e_step2(m, o), corpus, n_jobs):
        total.merge(s)
    if not total.n_used:
        raise UsageError(
            "baum_welch2(): Every sequence has zero likelihood under the "\
            "current model!"
        )
    return total


def _m_step2(
    m: Hmm2Model,
    stats: _Hmm2Stats,
    config: TrainConfig,
    variance_floor: np.ndarray,
    monitor: ConvergenceMonitor
) -> Hmm2Model:
    topo = m.topology
    pi = floor_and_normalize(stats.pi, topo.prior_mask, config.prob_floor)
    a2 = floor_and_normalize(stats.a2, topo.mask, config.prob_floor)
    a3 = floor_and_normalize(stats.a3, topo.mask3, config.prob_floor)
    context_mass = stats.a3.sum(axis=2)
    starved = topo.mask & ~(context_mass >= MIN_OCCUPANCY)
    for i, j in zip(*np.nonzero(starved)):
        i, j = int(i), int(j)
        # a context never visited keeps its previous row
        a3[i, j] = m.a3[i, j]
        monitor.flag(("context", i, j))
        _logger.debug(f"baum_welch2(): Context ({i}, {j}) starved.")

    states = []
    for i, gm in enumerate(m.states):
        if stats.occupancy[i] >= MIN_OCCUPANCY:
            states.append(reestimate_mixture(
                stats.mixtures[i], gm, variance_floor, config.prob_floor))
        else:
            _logger.warning(
                f"baum_welch2(): State [{i}] starved, keeping its mixture."
            )
            monitor.flag(("state", i))
            states.append(gm)
    return Hmm2Model(pi, a2, a3, states, topo)


def baum_welch2(
    m: Hmm2Model,
    corpus: Sequence[ObservationSequence],
    config: Optional[TrainConfig] = None,
    monitor: Optional[ConvergenceMonitor] = None
) -> Hmm2Model:
    """
    Second-order Baum-Welch by pair-state reduction.

    The arc posterior
        eta_t(i, j, k) = alpha_t(i, j) a3_ijk b_k(O_{t+1}) beta_{t+1}(j, k) / P
    re-estimates a3; the boundary pair posterior at t = 2 re-estimates pi
    and a2; the state occupancy gamma_t(k) = sum_j alpha_t(j, k)
    beta_t(j, k) / P drives the mixture updates. Sequences with T = 1
    contribute to pi and the mixtures only.

    Starved states and contexts keep their previous parameters and are
    recorded with ``monitor.flag``.

    Args:
        m: starting model
        corpus: training sequences
        config: iteration cap, tolerance and floors
        monitor: receives the corpus log-likelihood of every iteration

    Returns:
        Hmm2Model: the trained model
    """
    config = config or TrainConfig()
    monitor = monitor or ConvergenceMonitor(config.tol, config.max_iter)
    corpus = check_corpus(corpus, m.n_features, "baum_welch2")
    floor = config.variance_floor(np.vstack([o.frames for o in corpus]))

    for _ in range(config.max_iter):
        stats = _corpus_stats(m, corpus, config.n_jobs)
        if monitor.report(stats.log_likelihood):
            break
        m = _m_step2(m, stats, config, floor, monitor)
        monitor.iterations += 1
    else:
        monitor.report(_corpus_stats(m, corpus, config.n_jobs).log_likelihood)

    if monitor.flagged:
        _logger.warning(
            f"baum_welch2(): Starved entries kept from previous "\
            f"iterations {monitor.flagged}."
        )
    _logger.info(
        f"baum_welch2(): Done after [{monitor.iterations}] iterations; "\
        f"Log_likelihood [{monitor.history[-1]}]; "\
        f"Converged [{monitor.converged}]."
    )
    return m
