# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains WAV ingestion: mono 16-bit PCM at a fixed rate, no
resampling.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from pathlib import Path
from typing import Union

import numpy as np
from scipy.io import wavfile

from hmm2_speaker.common import IngestionError


PCM_SCALE = 32768.0

_logger = logging.getLogger(__name__)



def load_wav(path: Union[str, Path], sample_rate: int = 8000) -> np.ndarray:
    """
    Read a PCM WAV file into floats in [-1, 1).

        >>> x = load_wav("spk01_w03_r2.wav")   # 1 s at 8 kHz
        >>> x.shape
        (8000,)

    Raises:
        IngestionError: If the file is unreadable, not 16-bit, not mono or
            not at sample_rate.
    """
    try:
        rate, data = wavfile.read(str(path))
    except (OSError, ValueError, EOFError) as e:
        _logger.error(f"load_wav(): Cannot read [{path}]: {e}")
        raise IngestionError(f"load_wav(): Cannot read [{path}]: {e}")
    if data.dtype != np.int16:
        raise IngestionError(
            f"load_wav(): [{path}] holds [{data.dtype}] samples, expected "\
            "16-bit PCM!"
        )
    if data.ndim != 1:
        raise IngestionError(
            f"load_wav(): [{path}] has [{data.shape[1]}] channels, expected "\
            "mono!"
        )
    if rate != sample_rate:
        raise IngestionError(
            f"load_wav(): [{path}] is sampled at [{rate}] Hz, expected "\
            f"[{sample_rate}] Hz!"
        )
    return data.astype(float) / PCM_SCALE


def write_wav(
    path: Union[str, Path],
    samples: np.ndarray,
    sample_rate: int = 8000
) -> Path:
    """Write floats in [-1, 1) as mono 16-bit PCM; out-of-range values clip."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pcm = np.clip(np.round(np.asarray(samples, dtype=float) * PCM_SCALE),
                  -32768, 32767).astype(np.int16)
    wavfile.write(str(path), sample_rate, pcm)
    return path
