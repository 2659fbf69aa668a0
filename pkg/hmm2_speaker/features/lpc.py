# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains FeatureConfig and the LPC cepstral front end:
pre-emphasis, framing, Hamming window, autocorrelation, Levinson-Durbin
and the LPC-to-cepstrum recursion.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import get_window, lfilter

from hmm2_speaker.common import UsageError, SilentFrameError
from hmm2_speaker.models.observation import ObservationSequence
from hmm2_speaker.features.audio import load_wav


_logger = logging.getLogger(__name__)



class FeatureConfig:
    """
    Front-end parameters, read from a [feature_setups.<g>.<item>] section.

    Defaults: 8 kHz, 30 ms frames every 10 ms, pre-emphasis 0.97, LPC
    order 12, 12 cepstra, Hamming window.
    """

    DEFAULTS: Dict[str, Any] = {
        "sample_rate": 8000,
        "frame_length": 240,
        "frame_shift": 80,
        "pre_emphasis": 0.97,
        "lpc_order": 12,
        "n_cepstra": 12,
        "window": "hamming",
        "silence_threshold": 1e-12,
    }

    _logger = logging.getLogger(__name__)

    def __init__(self, **kwargs):
        self.logger = FeatureConfig._logger
        unknown = set(kwargs) - set(FeatureConfig.DEFAULTS)
        if unknown:
            raise UsageError(
                f"FeatureConfig.init(): Unknown keys {sorted(unknown)}!"
            )
        params = dict(FeatureConfig.DEFAULTS)
        params.update({k: v for k, v in kwargs.items() if v is not None})
        self.sample_rate = int(params["sample_rate"])
        self.frame_length = int(params["frame_length"])
        self.frame_shift = int(params["frame_shift"])
        self.pre_emphasis = float(params["pre_emphasis"])
        self.lpc_order = int(params["lpc_order"])
        self.n_cepstra = int(params["n_cepstra"])
        self.window = str(params["window"])
        self.silence_threshold = float(params["silence_threshold"])

        if not 0 < self.frame_shift <= self.frame_length:
            raise UsageError(
                f"FeatureConfig.init(): Need 0 < frame_shift "\
                f"[{self.frame_shift}] <= frame_length "\
                f"[{self.frame_length}]!"
            )
        if self.lpc_order < 1 or self.n_cepstra < 1:
            raise UsageError(
                f"FeatureConfig.init(): lpc_order [{self.lpc_order}] and "\
                f"n_cepstra [{self.n_cepstra}] must be >= 1!"
            )
        if self.frame_length <= self.lpc_order:
            raise UsageError(
                f"FeatureConfig.init(): frame_length [{self.frame_length}] "\
                f"must exceed lpc_order [{self.lpc_order}]!"
            )
        if not 0 <= self.pre_emphasis < 1:
            raise UsageError(
                f"FeatureConfig.init(): pre_emphasis [{self.pre_emphasis}] "\
                "must be in [0, 1)!"
            )


    @staticmethod
    def from_dict(d: Dict, **overrides) -> "FeatureConfig":
        params = {k: v for k, v in d.items() if k in FeatureConfig.DEFAULTS}
        params.update(overrides)
        return FeatureConfig(**params)


    def to_dict(self) -> Dict:
        return {k: getattr(self, k) for k in FeatureConfig.DEFAULTS}


    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON form; equal configs, equal prints."""
        s = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(s.encode("utf-8")).hexdigest()


    def n_frames(self, n_samples: int) -> int:
        if n_samples < self.frame_length:
            return 0
        return (n_samples - self.frame_length) // self.frame_shift + 1


    def __eq__(self, other) -> bool:
        return isinstance(other, FeatureConfig) and \
            self.to_dict() == other.to_dict()



def pre_emphasize(samples: np.ndarray, coef: float = 0.97) -> np.ndarray:
    """y[n] = x[n] - coef * x[n-1], with y[0] = x[0]."""
    return lfilter([1.0, -coef], [1.0], np.asarray(samples, dtype=float))


def autocorrelate(frame: np.ndarray, p: int) -> np.ndarray:
    """
    r_k = sum_n x_n x_{n+k} for k = 0..p.

    Raises:
        UsageError: If the frame is not longer than p.
    """
    x = np.asarray(frame, dtype=float).ravel()
    if x.size <= p:
        raise UsageError(
            f"autocorrelate(): Frame length [{x.size}] must exceed order "\
            f"[{p}]!"
        )
    n = x.size
    return np.array([x[:n - k] @ x[k:] for k in range(p + 1)])


def levinson_durbin(
    r: np.ndarray,
    p: Optional[int] = None
) -> Tuple[np.ndarray, float]:
    """
    Solve the Toeplitz normal equations for the predictor
    x_n ~ sum_i a_i x_{n-i}.

    Args:
        r: autocorrelation r_0..r_p
        p: predictor order, defaults to len(r) - 1

    Returns:
        Tuple[np.ndarray, float]: coefficients a_1..a_p and the final
            prediction error E_p >= 0.

    Raises:
        SilentFrameError: If r_0 <= 0.
    """
    r = np.asarray(r, dtype=float).ravel()
    p = r.size - 1 if p is None else p
    if r.size < p + 1:
        raise UsageError(
            f"levinson_durbin(): Need [{p + 1}] lags, got [{r.size}]!"
        )
    if not r[0] > 0:
        raise SilentFrameError(
            f"levinson_durbin(): r_0 [{r[0]}] must be positive!"
        )
    a = np.zeros(p)
    err = r[0]
    for i in range(p):
        k = (r[i + 1] - a[:i] @ r[i:0:-1]) / err
        prev = a[:i].copy()
        a[i] = k
        a[:i] = prev - k * prev[::-1]
        err *= 1.0 - k * k
        if err <= 0:
            # singular autocorrelation, higher orders stay zero
            err = 0.0
            break
    return a, float(err)


def lpc_to_cepstrum(a: np.ndarray, n_ceps: int) -> np.ndarray:
    """
    Cepstrum of the all-pole model 1 / (1 - sum a_k z^-k):
    c_n = a_n + sum_{k=1}^{n-1} (k/n) c_k a_{n-k}, with a_n = 0 for n > p.
    """
    a = np.asarray(a, dtype=float).ravel()
    p = a.size
    c = np.zeros(n_ceps)
    for n in range(1, n_ceps + 1):
        acc = a[n - 1] if n <= p else 0.0
        for k in range(max(1, n - p), n):
            acc += (k / n) * c[k - 1] * a[n - k - 1]
        c[n - 1] = acc
    return c


def extract(
    config: FeatureConfig,
    samples: np.ndarray,
    source_id: str = "",
    word: Optional[str] = None
) -> ObservationSequence:
    """
    Turn samples into LPC cepstral frames, one per analysis window.

    Frames whose energy r_0 is at or below the silence threshold give a
    zero cepstral vector.

    Raises:
        UsageError: If there is not a single full frame of samples.
    """
    x = np.asarray(samples, dtype=float).ravel()
    n_frames = config.n_frames(x.size)
    if n_frames < 1:
        raise UsageError(
            f"extract(): [{x.size}] samples of [{source_id}] are shorter "\
            f"than one frame [{config.frame_length}]!"
        )
    y = pre_emphasize(x, config.pre_emphasis) if config.pre_emphasis else x
    frames = sliding_window_view(y, config.frame_length)[::config.frame_shift]
    window = get_window(config.window, config.frame_length, fftbins=False)

    feats = np.zeros((n_frames, config.n_cepstra))
    n_silent = 0
    for t, frame in enumerate(frames):
        r = autocorrelate(frame * window, config.lpc_order)
        if r[0] <= config.silence_threshold:
            n_silent += 1
            continue
        a, _ = levinson_durbin(r, config.lpc_order)
        feats[t] = lpc_to_cepstrum(a, config.n_cepstra)
    if n_silent:
        _logger.warning(
            f"extract(): [{n_silent}] of [{n_frames}] frames of "\
            f"[{source_id}] are silent, zero cepstra emitted."
        )
    return ObservationSequence(feats, source_id, word)


def extract_file(
    config: FeatureConfig,
    path: Union[str, Path],
    word: Optional[str] = None
) -> ObservationSequence:
    return extract(config, load_wav(path, config.sample_rate),
                   str(path), word)
