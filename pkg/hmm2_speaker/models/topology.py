# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains Topology class describing which transitions a model
may use.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


from enum import Enum
from typing import Dict, Optional

import numpy as np

from hmm2_speaker.common import UsageError



class TopologyType(Enum):
    LeftToRight = "left_to_right"
    Ergodic = "ergodic"



class Topology:
    """
    Transition masks of a model with n_states states.

    Left-to-right (Bakis): a_ij allowed iff i <= j <= i + max_jump, the
    chain enters at state 0 and the last state only loops on itself.
    Ergodic: every transition and every initial state allowed.

    The second-order mask allows a_ijk iff both (i, j) and (j, k) are
    allowed first-order arcs; contexts (i, j) that are not allowed arcs
    are unreachable and their rows stay all-zero.
    """

    def __init__(
        self,
        n_states: int,
        kind: str = TopologyType.LeftToRight.value,
        max_jump: Optional[int] = 2
    ):
        if n_states < 1:
            raise UsageError(
                f"Topology.init(): n_states [{n_states}] must be >= 1!"
            )
        try:
            self.type = TopologyType(kind)
        except ValueError:
            raise UsageError(
                f"Topology.init(): Unknown topology kind [{kind}]!"
            )
        if self.type == TopologyType.LeftToRight and \
                (max_jump is None or max_jump < 0):
            raise UsageError(
                f"Topology.init(): max_jump [{max_jump}] must be >= 0 "\
                "for a left-to-right topology!"
            )
        self.n_states = n_states
        self.kind = self.type.value
        self.max_jump = max_jump if self.type == TopologyType.LeftToRight \
            else None

        idx = np.arange(n_states)
        if self.type == TopologyType.LeftToRight:
            diff = idx[None, :] - idx[:, None]
            mask = (diff >= 0) & (diff <= self.max_jump)
            prior = idx == 0
        else:
            mask = np.ones((n_states, n_states), dtype=bool)
            prior = np.ones(n_states, dtype=bool)
        mask.flags.writeable = False
        prior.flags.writeable = False
        self.mask = mask
        self.prior_mask = prior
        mask3 = mask[:, :, None] & mask[None, :, :]
        mask3.flags.writeable = False
        self.mask3 = mask3


    @property
    def reachable_contexts(self) -> np.ndarray:
        """Boolean (N, N) array of contexts (i, j) with an a3 row."""
        return self.mask


    def to_dict(self) -> Dict:
        return {"kind": self.kind, "n_states": self.n_states,
                "max_jump": self.max_jump}


    @staticmethod
    def from_dict(d: Dict) -> "Topology":
        return Topology(int(d["n_states"]), d["kind"], d.get("max_jump"))


    def __eq__(self, other) -> bool:
        return isinstance(other, Topology) and \
            self.to_dict() == other.to_dict()


    def __repr__(self) -> str:
        return f"Topology({self.kind!r}, n_states={self.n_states}, "\
            f"max_jump={self.max_jump})"
