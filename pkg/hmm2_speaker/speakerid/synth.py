# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains the synthetic speaker population: every speaker is a
seeded random second-order model, every word a small shift of its means,
and every utterance a sample of that word model.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from hmm2_speaker.common import UsageError
from hmm2_speaker.models import (
    ObservationSequence, Topology, GaussianMixture, Hmm2Model,
    random_hmm2, sample
)


_logger = logging.getLogger(__name__)



class SynthConfig:
    """
    Population parameters, read from a [synth_setups.<g>.<item>] section.
    Defaults: 20 speakers, 10 words, 9 repetitions, 40 to 120 frames.
    """

    DEFAULTS: Dict[str, Any] = {
        "n_speakers": 20,
        "n_words": 10,
        "n_repetitions": 9,
        "min_length": 40,
        "max_length": 120,
        "n_states": 5,
        "n_mixtures": 2,
        "n_features": 12,
        "concentration": 0.3,
        "speaker_spread": 1.0,
        "word_spread": 0.1,
        "seed": 0,
    }

    _logger = logging.getLogger(__name__)

    def __init__(self, **kwargs):
        self.logger = SynthConfig._logger
        unknown = set(kwargs) - set(SynthConfig.DEFAULTS)
        if unknown:
            s = f"SynthConfig.init(): Unknown keys {sorted(unknown)}!"
            self.logger.error(s)
            raise UsageError(s)
        params = dict(SynthConfig.DEFAULTS)
        params.update({k: v for k, v in kwargs.items() if v is not None})
        for k in ("n_speakers", "n_words", "n_repetitions", "min_length",
                  "max_length", "n_states", "n_mixtures", "n_features",
                  "seed"):
            setattr(self, k, int(params[k]))
        for k in ("concentration", "speaker_spread", "word_spread"):
            setattr(self, k, float(params[k]))
        if min(self.n_speakers, self.n_words, self.n_repetitions,
               self.min_length) < 1 or self.max_length < self.min_length:
            s = "SynthConfig.init(): Counts must be >= 1 and "\
                "min_length <= max_length!"
            self.logger.error(s)
            raise UsageError(s)


    @staticmethod
    def from_dict(d: Dict, **overrides) -> "SynthConfig":
        params = {k: v for k, v in d.items() if k in SynthConfig.DEFAULTS}
        params.update(overrides)
        return SynthConfig(**params)


    def to_dict(self) -> Dict:
        return {k: getattr(self, k) for k in SynthConfig.DEFAULTS}



class Utterance:
    """One generated recording and its labels."""

    def __init__(
        self,
        speaker: str,
        word: str,
        repetition: int,
        states: List[int],
        observations: ObservationSequence
    ):
        self.speaker = speaker
        self.word = word
        self.repetition = repetition
        self.states = states
        self.observations = observations


    @property
    def utterance_id(self) -> str:
        return f"{self.speaker}_{self.word}_r{self.repetition}"



class SyntheticCorpus:
    """
    Generated utterances plus the generating speaker models.

    Attributes:
        config: the SynthConfig used
        speaker_models: speaker id -> generating Hmm2Model (word shift 0)
        word_offsets: word id -> (d,) mean shift shared by every speaker
        utterances: all utterances ordered by speaker, word, repetition
    """

    def __init__(
        self,
        config: SynthConfig,
        speaker_models: Dict[str, Hmm2Model],
        word_offsets: Dict[str, np.ndarray],
        utterances: List[Utterance]
    ):
        self.config = config
        self.speaker_models = speaker_models
        self.word_offsets = word_offsets
        self.utterances = utterances


    def split(
        self,
        train_repetitions: int
    ) -> Tuple[Dict[str, List[ObservationSequence]],
               List[Tuple[str, ObservationSequence]]]:
        """
        Repetitions below train_repetitions train, the rest test.

        Returns:
            Tuple: speaker -> training sequences, and (speaker, sequence)
                test pairs
        """
        train: Dict[str, List[ObservationSequence]] = {}
        test: List[Tuple[str, ObservationSequence]] = []
        for u in self.utterances:
            if u.repetition < train_repetitions:
                train.setdefault(u.speaker, []).append(u.observations)
            else:
                test.append((u.speaker, u.observations))
        return train, test



def shift_means(m: Hmm2Model, offset: np.ndarray) -> Hmm2Model:
    states = [GaussianMixture(gm.weights, gm.means + offset[None, :],
                              gm.variances) for gm in m.states]
    return Hmm2Model(m.pi, m.a2, m.a3, states, m.topology)


def generate_corpus(config: Optional[SynthConfig] = None) -> SyntheticCorpus:
    """
    Build a synthetic population deterministically from config.seed.
    Speaker ids are spk01.., word ids w01.., repetitions 0-based.
    """
    config = config or SynthConfig()
    root = np.random.SeedSequence(config.seed)
    spk_seq, word_seq, utt_seq = root.spawn(3)
    topo = Topology(config.n_states)

    speaker_models: Dict[str, Hmm2Model] = {}
    for s, child in enumerate(spk_seq.spawn(config.n_speakers)):
        speaker_models[f"spk{s + 1:02d}"] = random_hmm2(
            config.n_states, config.n_mixtures, config.n_features, topo,
            config.concentration, config.speaker_spread,
            seed=int(child.generate_state(1)[0]))

    word_rng = np.random.default_rng(word_seq)
    word_offsets = {
        f"w{w + 1:02d}": word_rng.normal(0.0, config.word_spread,
                                         config.n_features)
        for w in range(config.n_words)
    }

    utt_rng = np.random.default_rng(utt_seq)
    utterances: List[Utterance] = []
    for speaker, model in speaker_models.items():
        for word, offset in word_offsets.items():
            word_model = shift_means(model, offset)
            for r in range(config.n_repetitions):
                length = int(utt_rng.integers(config.min_length,
                                              config.max_length + 1))
                seed = int(utt_rng.integers(0, 2**31 - 1))
                q, o = sample(word_model, length, seed)
                uid = f"{speaker}_{word}_r{r}"
                utterances.append(Utterance(
                    speaker, word, r, q,
                    ObservationSequence(o.frames, uid, word)))

    _logger.info(
        f"generate_corpus(): [{len(speaker_models)}] speakers; "\
        f"[{len(utterances)}] utterances; Seed [{config.seed}]."
    )
    return SyntheticCorpus(config, speaker_models, word_offsets, utterances)
