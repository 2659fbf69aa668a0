# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains the deterministic starting points for Baum-Welch:
uniform segmentation of each utterance across the states, seeded k-means
per state and transitions uniform over the allowed arcs.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from typing import List, Optional, Sequence

import numpy as np

from hmm2_speaker.models.observation import ObservationSequence
from hmm2_speaker.models.emissions import kmeans_mixture
from hmm2_speaker.models.hmm1 import Hmm1Model, check_corpus
from hmm2_speaker.models.hmm2 import Hmm2Model, lift_hmm1
from hmm2_speaker.models.training import TrainConfig


_logger = logging.getLogger(__name__)



def segment_uniformly(
    corpus: Sequence[ObservationSequence],
    n_states: int
) -> List[np.ndarray]:
    """Split every sequence into n_states equal runs; frames pooled per state."""
    pooled: List[List[np.ndarray]] = [[] for _ in range(n_states)]
    for o in corpus:
        labels = np.arange(o.n_frames) * n_states // o.n_frames
        for i in range(n_states):
            pooled[i].append(o.frames[labels == i])
    return [np.concatenate(p, axis=0) for p in pooled]


def initialize_hmm1(
    corpus: Sequence[ObservationSequence],
    config: Optional[TrainConfig] = None
) -> Hmm1Model:
    """
    Build the starting first-order model of a training corpus.

    Raises:
        UsageError: If the corpus is empty.
    """
    config = config or TrainConfig()
    if not corpus:
        check_corpus(corpus, 0, "initialize_hmm1")
    n_features = corpus[0].n_features
    corpus = check_corpus(corpus, n_features, "initialize_hmm1")
    topo = config.make_topology()
    all_frames = np.vstack([o.frames for o in corpus])
    floor = config.variance_floor(all_frames)

    states = []
    for i, frames in enumerate(segment_uniformly(corpus, config.n_states)):
        if frames.shape[0] == 0:
            _logger.warning(
                f"initialize_hmm1(): No frame segmented to state [{i}], "\
                "using the whole corpus."
            )
            frames = all_frames
        states.append(kmeans_mixture(
            frames, config.n_mixtures, floor, config.kmeans_max_iter,
            config.seed + i))

    pi = topo.prior_mask / topo.prior_mask.sum()
    a = topo.mask / topo.mask.sum(axis=1, keepdims=True)
    return Hmm1Model(pi, a, states, topo)


def initialize_hmm2(
    corpus: Sequence[ObservationSequence],
    config: Optional[TrainConfig] = None
) -> Hmm2Model:
    """Starting second-order model; a3 is uniform over allowed successors."""
    return lift_hmm1(initialize_hmm1(corpus, config))
