# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains PairLattice class, the log-domain (T, N, N) table
produced by the second-order forward, backward and Viterbi passes.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


from typing import Optional

import numpy as np

from hmm2_speaker.common import UsageError



class PairLattice:
    """
    Log-domain values over state pairs.

    table[t, j, k] belongs to time t + 1 (0-based frames) with q_t = j and
    q_{t+1} = k, so table[0] is unused and holds -inf. The single-state
    term of the first frame lives in ``initial``.

    backptr[t, j, k] is the predecessor state i of the pair (j, k) at
    time t, or -1 where no predecessor exists.
    """

    def __init__(
        self,
        table: np.ndarray,
        backptr: Optional[np.ndarray] = None,
        initial: Optional[np.ndarray] = None
    ):
        table = np.asarray(table, dtype=float)
        if table.ndim != 3 or table.shape[1] != table.shape[2]:
            raise UsageError(
                f"PairLattice.init(): Expected (T, N, N) table, got "\
                f"{table.shape}!"
            )
        if backptr is not None and backptr.shape != table.shape:
            raise UsageError(
                f"PairLattice.init(): Backpointer shape {backptr.shape} "\
                f"differs from table shape {table.shape}!"
            )
        self.table = table
        self.backptr = backptr
        self.initial = initial


    @property
    def n_frames(self) -> int:
        return self.table.shape[0]


    @property
    def n_states(self) -> int:
        return self.table.shape[1]


    def __getitem__(self, t: int) -> np.ndarray:
        return self.table[t]


    def __repr__(self) -> str:
        return f"PairLattice(T={self.n_frames}, N={self.n_states})"
