# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains ObservationSequence class, the T x d block of feature
vectors O_1..O_T scored by every model.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


from typing import Optional

import numpy as np

from hmm2_speaker.common import UsageError



class ObservationSequence:
    """
    This class holds the frames of one utterance.

        >>> o = ObservationSequence(np.zeros((98, 12)), "spk01/w03/r2")
        >>> o.n_frames, o.n_features
        (98, 12)

    Attributes:
        frames: read-only float array of shape (T, d)
        source_id: label of the utterance the frames came from
        word: optional word (utterance) label for text-dependent protocols
    """

    def __init__(
        self,
        frames,
        source_id: str = "",
        word: Optional[str] = None
    ):
        arr = np.array(frames, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise UsageError(
                f"ObservationSequence.init(): Frames of [{source_id}] must "\
                f"be a non-empty T x d array, got shape {arr.shape}!"
            )
        if not np.isfinite(arr).all():
            raise UsageError(
                f"ObservationSequence.init(): Frames of [{source_id}] hold "\
                "non-finite values!"
            )
        arr.flags.writeable = False
        self.frames = arr
        self.source_id = source_id
        self.word = word


    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]


    @property
    def n_features(self) -> int:
        return self.frames.shape[1]


    def __len__(self) -> int:
        return self.n_frames


    def __repr__(self) -> str:
        return f"ObservationSequence(source_id={self.source_id!r}, "\
            f"T={self.n_frames}, d={self.n_features})"
