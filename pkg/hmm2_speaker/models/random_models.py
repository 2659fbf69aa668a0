# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains seeded generators of random valid models, used by the
synthetic corpus and as ground truth in generate-and-refit checks.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


from typing import Optional

import numpy as np

from hmm2_speaker.models.topology import Topology
from hmm2_speaker.models.emissions import GaussianMixture
from hmm2_speaker.models.hmm1 import Hmm1Model
from hmm2_speaker.models.hmm2 import Hmm2Model



def dirichlet_rows(
    rng: np.random.Generator,
    mask: np.ndarray,
    concentration: float = 1.0
) -> np.ndarray:
    """
    Draw a distribution over the allowed entries of every row of mask
    (last axis). Rows without allowed entries stay zero.
    """
    out = np.zeros(mask.shape)
    for idx in np.ndindex(*mask.shape[:-1]):
        allowed = np.flatnonzero(mask[idx])
        if allowed.size:
            out[idx][allowed] = rng.dirichlet(
                np.full(allowed.size, concentration))
    return out


def random_mixture(
    rng: np.random.Generator,
    n_mixtures: int,
    n_features: int,
    mean_scale: float = 1.0
) -> GaussianMixture:
    weights = rng.dirichlet(np.full(n_mixtures, 2.0))
    means = rng.normal(0.0, mean_scale, (n_mixtures, n_features))
    variances = rng.uniform(0.5, 1.5, (n_mixtures, n_features))
    return GaussianMixture(weights, means, variances)


def random_hmm1(
    n_states: int,
    n_mixtures: int = 1,
    n_features: int = 1,
    topology: Optional[Topology] = None,
    concentration: float = 1.0,
    mean_scale: float = 1.0,
    seed: Optional[int] = None
) -> Hmm1Model:
    rng = np.random.default_rng(seed)
    topo = topology or Topology(n_states)
    pi = dirichlet_rows(rng, topo.prior_mask, concentration)
    a = dirichlet_rows(rng, topo.mask, concentration)
    states = [random_mixture(rng, n_mixtures, n_features, mean_scale)
              for _ in range(n_states)]
    return Hmm1Model(pi, a, states, topo)


def random_hmm2(
    n_states: int,
    n_mixtures: int = 1,
    n_features: int = 1,
    topology: Optional[Topology] = None,
    concentration: float = 1.0,
    mean_scale: float = 1.0,
    seed: Optional[int] = None
) -> Hmm2Model:
    """
    Random second-order model. A small concentration makes the a3 rows of
    different contexts (i, j) and (i', j) differ strongly.
    """
    rng = np.random.default_rng(seed)
    topo = topology or Topology(n_states)
    pi = dirichlet_rows(rng, topo.prior_mask, concentration)
    a2 = dirichlet_rows(rng, topo.mask, concentration)
    a3 = dirichlet_rows(rng, topo.mask3, concentration)
    states = [random_mixture(rng, n_mixtures, n_features, mean_scale)
              for _ in range(n_states)]
    return Hmm2Model(pi, a2, a3, states, topo)
