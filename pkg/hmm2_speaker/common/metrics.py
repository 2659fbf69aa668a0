# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"

import logging
from typing import Sequence

import numpy as np

from hmm2_speaker.common.errors import UsageError



class Metrics:

    _logger = logging.getLogger(__name__)

    @staticmethod
    def accuracy(y_true: Sequence, y_pred: Sequence) -> float:
        """Percentage of equal labels, in [0, 100]."""
        y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
        if y_true.size == 0 or y_true.shape != y_pred.shape:
            raise UsageError(
                "Metrics.accuracy(): Need equally long, non-empty labels!"
            )
        return 100.0 * int(np.count_nonzero(y_true == y_pred)) / y_true.size


    @staticmethod
    def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
        """Least-squares exponent b of y ~ c * x**b."""
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        if x.size < 2 or (x <= 0).any() or (y <= 0).any():
            raise UsageError(
                "Metrics.loglog_slope(): Need >= 2 positive points!"
            )
        return float(np.polyfit(np.log(x), np.log(y), 1)[0])
