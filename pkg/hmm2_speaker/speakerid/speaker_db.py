# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains SpeakerDb, the enrolled population of a closed-set,
text-dependent speaker identification task, with enrollment and
maximum-likelihood identification.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from typing import (
    Any, Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple
)

from hmm2_speaker.common import (
    Hmm2SpeakerError, UsageError, InvariantViolationError, TrainingError
)
from hmm2_speaker.models import (
    ObservationSequence, BaseHmm, ModelKind, TrainConfig,
    ConvergenceMonitor, forward1, forward2,
    baum_welch1, baum_welch2, initialize_hmm1, initialize_hmm2
)


ModelKey = Tuple[str, Optional[str]]

_logger = logging.getLogger(__name__)



class ProtocolConfig:
    """
    Protocol flags, read from a [speaker_setups.<g>.<item>] section.

    Attributes:
        per_word_models: one model per (speaker, word) instead of one per
            speaker trained on all words
        train_repetitions: repetitions with index below this value train,
            the remaining ones test
    """

    DEFAULTS: Dict[str, Any] = {
        "per_word_models": False,
        "train_repetitions": 6,
    }

    _logger = logging.getLogger(__name__)

    def __init__(self, **kwargs):
        self.logger = ProtocolConfig._logger
        unknown = set(kwargs) - set(ProtocolConfig.DEFAULTS)
        if unknown:
            s = f"ProtocolConfig.init(): Unknown keys {sorted(unknown)}!"
            self.logger.error(s)
            raise UsageError(s)
        params = dict(ProtocolConfig.DEFAULTS)
        params.update({k: v for k, v in kwargs.items() if v is not None})
        self.per_word_models = bool(params["per_word_models"])
        self.train_repetitions = int(params["train_repetitions"])


    @staticmethod
    def from_dict(d: Dict, **overrides) -> "ProtocolConfig":
        params = {k: v for k, v in d.items() if k in ProtocolConfig.DEFAULTS}
        params.update(overrides)
        return ProtocolConfig(**params)


    def to_dict(self) -> Dict:
        return {"per_word_models": self.per_word_models,
                "train_repetitions": self.train_repetitions}



class SpeakerDb:
    """
    This class holds one trained model per speaker, or per (speaker, word)
    when word models are enrolled. All models share kind, N, M and d.

        >>> db = enroll({"spk01": seqs1, "spk02": seqs2}, ModelKind.Hmm2)
        >>> identify(db, o).speaker
        'spk01'

    Attributes:
        models: map (speaker, word or None) -> model
        feature_config: dict of the FeatureConfig used at enrollment, if known
        train_config: dict of the TrainConfig used at enrollment, if known
    """

    _logger = logging.getLogger(__name__)

    def __init__(
        self,
        models: Mapping[ModelKey, BaseHmm],
        feature_config: Optional[Dict] = None,
        train_config: Optional[Dict] = None
    ):
        self.logger = SpeakerDb._logger
        if not models:
            raise UsageError("SpeakerDb.init(): Needs at least one speaker!")
        self.models: Dict[ModelKey, BaseHmm] = dict(sorted(
            models.items(), key=lambda kv: (kv[0][0], kv[0][1] or "")))
        first = next(iter(self.models.values()))
        shape = SpeakerDb._shape(first)
        words = {w is None for _, w in self.models}
        if len(words) != 1:
            raise InvariantViolationError(
                "SpeakerDb.init(): Cannot mix speaker and word models!"
            )
        for key, m in self.models.items():
            if SpeakerDb._shape(m) != shape:
                raise InvariantViolationError(
                    f"SpeakerDb.init(): Model {key} has (kind, N, M, d) "\
                    f"{SpeakerDb._shape(m)}, expected {shape}!", key
                )
        self.kind: ModelKind = first.kind
        self.feature_config = feature_config
        self.train_config = train_config


    @staticmethod
    def _shape(m: BaseHmm) -> Tuple:
        return (m.kind.value, m.n_states, m.n_mixtures, m.n_features)


    @property
    def per_word(self) -> bool:
        return next(iter(self.models))[1] is not None


    @property
    def speakers(self) -> List[str]:
        return sorted({s for s, _ in self.models})


    @property
    def words(self) -> List[str]:
        return sorted({w for _, w in self.models if w is not None})


    @property
    def n_features(self) -> int:
        return next(iter(self.models.values())).n_features


    def model_for(self, speaker: str, word: Optional[str] = None) -> BaseHmm:
        key = (speaker, word if self.per_word else None)
        if key not in self.models:
            raise UsageError(
                f"SpeakerDb.model_for(): No model for {key}!"
            )
        return self.models[key]


    def __len__(self) -> int:
        return len(self.speakers)


    def __repr__(self) -> str:
        return f"SpeakerDb(kind={self.kind.value}, "\
            f"speakers={len(self)}, per_word={self.per_word})"



class Identification(NamedTuple):
    """Outcome of identify: best speaker plus the full ranking."""

    speaker: str
    ranking: List[Tuple[str, float]]
    n_frames: int

    @property
    def score(self) -> float:
        return self.ranking[0][1]


    @property
    def margin(self) -> float:
        """Best minus runner-up log-likelihood; inf with one speaker."""
        if len(self.ranking) < 2:
            return float("inf")
        return self.ranking[0][1] - self.ranking[1][1]


    @property
    def per_frame(self) -> Dict[str, float]:
        return {s: v / self.n_frames for s, v in self.ranking}


    def score_of(self, speaker: str) -> float:
        return dict(self.ranking)[speaker]



def score_model(m: BaseHmm, o: ObservationSequence) -> float:
    """log P(O | model) with the forward pass of the model's order."""
    if m.kind == ModelKind.Hmm2:
        return forward2(m, o)[0]
    return forward1(m, o)[0]


def rank_scores(scores: Mapping[str, float]) -> List[Tuple[str, float]]:
    """Sort by descending score; equal scores by speaker id."""
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


def train_model(
    corpus: Sequence[ObservationSequence],
    kind: ModelKind,
    config: TrainConfig,
    monitor: Optional[ConvergenceMonitor] = None
) -> BaseHmm:
    """Initialize and run Baum-Welch of the given order on one corpus."""
    if kind == ModelKind.Hmm2:
        return baum_welch2(initialize_hmm2(corpus, config), corpus,
                           config, monitor)
    return baum_welch1(initialize_hmm1(corpus, config), corpus,
                       config, monitor)


def _group_by_word(
    speaker: str,
    seqs: Iterable[ObservationSequence]
) -> Dict[str, List[ObservationSequence]]:
    groups: Dict[str, List[ObservationSequence]] = {}
    for o in seqs:
        if o.word is None:
            raise UsageError(
                f"enroll(): Utterance [{o.source_id}] of [{speaker}] has no "\
                "word label, required for word models!"
            )
        groups.setdefault(o.word, []).append(o)
    return groups


def enroll(
    corpus: Mapping[str, Sequence[ObservationSequence]],
    kind: ModelKind = ModelKind.Hmm2,
    config: Optional[TrainConfig] = None,
    protocol: Optional[ProtocolConfig] = None,
    feature_config: Optional[Dict] = None
) -> SpeakerDb:
    """
    Train one model per speaker (or per speaker and word).

    Args:
        corpus: speaker id -> training utterances
        kind: ModelKind.Hmm1 or ModelKind.Hmm2
        config: training setup shared by every model
        protocol: word-model flag
        feature_config: front-end settings stored with the db

    Returns:
        SpeakerDb: the enrolled population

    Raises:
        UsageError: If the corpus is empty or a speaker has no utterance.
        TrainingError: If training fails for a speaker; names the speaker.
    """
    config = config or TrainConfig()
    protocol = protocol or ProtocolConfig()
    if not corpus:
        raise UsageError("enroll(): No speaker to enroll!")

    models: Dict[ModelKey, BaseHmm] = {}
    for speaker in sorted(corpus):
        seqs = list(corpus[speaker])
        if not seqs:
            raise UsageError(
                f"enroll(): Speaker [{speaker}] has no training utterance!"
            )
        if protocol.per_word_models:
            jobs = {(speaker, w): g for w, g in
                    sorted(_group_by_word(speaker, seqs).items())}
        else:
            jobs = {(speaker, None): seqs}
        for key, group in jobs.items():
            try:
                models[key] = train_model(group, kind, config)
            except Hmm2SpeakerError as e:
                _logger.error(f"enroll(): Training {key} failed: {e}")
                raise TrainingError(
                    f"enroll(): Training of speaker [{speaker}] failed: {e}",
                    speaker
                ) from e
        SpeakerDb._logger.info(
            f"enroll(): Speaker [{speaker}] enrolled with [{len(seqs)}] "\
            f"utterances; Kind [{kind.value}]."
        )
    return SpeakerDb(models, feature_config, config.to_dict())


def identify(
    db: SpeakerDb,
    o: ObservationSequence,
    word: Optional[str] = None
) -> Identification:
    """
    Closed-set identification by maximum log-likelihood over the db.

    With word models the utterance is scored against each speaker's model
    of its word, taken from ``word`` or else ``o.word``.

    Raises:
        UsageError: If the db is empty, the dimension differs, or no model
            of the word exists.
    """
    if db is None or len(db) == 0:
        raise UsageError("identify(): Speaker db is empty!")
    if not isinstance(o, ObservationSequence):
        o = ObservationSequence(o)
    if o.n_features != db.n_features:
        raise UsageError(
            f"identify(): Utterance dimension [{o.n_features}] differs from "\
            f"db dimension [{db.n_features}]!"
        )
    word = word if word is not None else o.word
    if db.per_word:
        if word is None:
            raise UsageError(
                "identify(): Word models need the utterance's word!"
            )
        candidates = {s: m for (s, w), m in db.models.items() if w == word}
        if not candidates:
            raise UsageError(f"identify(): No speaker has word [{word}]!")
    else:
        candidates = {s: m for (s, _), m in db.models.items()}

    ranking = rank_scores({s: score_model(m, o)
                           for s, m in candidates.items()})
    return Identification(ranking[0][0], ranking, o.n_frames)

