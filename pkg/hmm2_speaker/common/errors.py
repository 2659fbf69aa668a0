# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains the exception classes raised across hmm2_speaker.
Each error derives from the built-in ValueError or RuntimeError so callers
catching those keep working.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


from typing import Optional, Tuple



class Hmm2SpeakerError(Exception):
    """Base class of every error raised by this library."""



class UsageError(Hmm2SpeakerError, ValueError):
    """Caller violated a documented precondition."""



class DegenerateDistributionError(Hmm2SpeakerError, ValueError):
    """A distribution has no finite mass left to normalize."""



class InvariantViolationError(Hmm2SpeakerError, ValueError):
    """
    A model parameter table breaks a sum-to-one or topology invariant.

    Attributes:
        location: index tuple of the offending row, e.g. (i, j) of a3.
    """

    def __init__(self, message: str, location: Optional[Tuple] = None):
        super().__init__(message)
        self.location = location



class ModelFormatError(Hmm2SpeakerError, ValueError):
    """Serialized file is truncated, unparsable or of another version."""



class IngestionError(Hmm2SpeakerError, ValueError):
    """Audio file cannot be ingested as configured."""



class SilentFrameError(Hmm2SpeakerError, ValueError):
    """Frame has no energy (r_0 <= 0) so no predictor exists."""



class StarvedComponentError(Hmm2SpeakerError, RuntimeError):
    """Mixture re-estimation received zero total weight."""



class StarvedStateError(Hmm2SpeakerError, RuntimeError):
    """
    No training frame was ever assigned to a state.

    Attributes:
        state: zero-based index of the starved state.
    """

    def __init__(self, message: str, state: int):
        super().__init__(message)
        self.state = state



class NoValidPathError(Hmm2SpeakerError, RuntimeError):
    """Every decoding path has probability zero."""



class SamplingError(Hmm2SpeakerError, RuntimeError):
    """Sampler entered a context without outgoing probability mass."""



class TrainingError(Hmm2SpeakerError, RuntimeError):
    """
    Enrollment of one speaker failed.

    Attributes:
        speaker: id of the speaker whose model could not be trained.
    """

    def __init__(self, message: str, speaker: str):
        super().__init__(message)
        self.speaker = speaker
