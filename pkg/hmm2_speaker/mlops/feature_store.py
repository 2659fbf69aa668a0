# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains the feature file format: one CSV per utterance with
columns c1..cd and one row per frame.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from pathlib import Path
from typing import Optional, Union

import pandas as pd

from hmm2_speaker.common import ModelFormatError, UsageError
from hmm2_speaker.models import ObservationSequence
from hmm2_speaker.features import FeatureConfig, extract_file


FLOAT_FORMAT = "%.17g"
WAV_SUFFIXES = (".wav", ".wave")

_logger = logging.getLogger(__name__)

PathLike = Union[str, Path]



def feature_columns(n_features: int):
    return [f"c{i + 1}" for i in range(n_features)]


def save_features(o: ObservationSequence, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame(o.frames, columns=feature_columns(o.n_features))
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def load_features(
    path: PathLike,
    source_id: Optional[str] = None,
    word: Optional[str] = None
) -> ObservationSequence:
    """
    Read a feature CSV back into an ObservationSequence, bit-exact.

    Raises:
        ModelFormatError: If the file is unreadable or its columns are not
            c1..cd with finite numbers.
    """
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except (OSError, ValueError, pd.errors.ParserError) as e:
        raise ModelFormatError(
            f"load_features(): Cannot read [{path}]: {e}"
        ) from e
    if list(df.columns) != feature_columns(df.shape[1]) or df.empty:
        raise ModelFormatError(
            f"load_features(): [{path}] needs columns c1..cd and at least "\
            "one row!"
        )
    try:
        return ObservationSequence(df.to_numpy(dtype=float),
                                   source_id or str(path), word)
    except (UsageError, ValueError) as e:
        raise ModelFormatError(
            f"load_features(): [{path}] holds invalid frames: {e}"
        ) from e


def load_utterance(
    path: PathLike,
    feature_config: Optional[FeatureConfig] = None,
    source_id: Optional[str] = None,
    word: Optional[str] = None
) -> ObservationSequence:
    """WAV files go through the LPC front end, anything else is a feature CSV."""
    if Path(path).suffix.lower() in WAV_SUFFIXES:
        o = extract_file(feature_config or FeatureConfig(), path, word)
        if source_id:
            o = ObservationSequence(o.frames, source_id, word)
        return o
    return load_features(path, source_id, word)
