# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains EvalReport and evaluate for scoring a SpeakerDb on
labeled test utterances.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import json
import logging
import math
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple, Union

import pandas as pd

from hmm2_speaker.common import UsageError, ModelFormatError, Metrics
from hmm2_speaker.models import ObservationSequence, map_sequences
from hmm2_speaker.speakerid.speaker_db import SpeakerDb, identify


REPORT_VERSION = 1
PERF_COLUMN = "Recognition performance"

_logger = logging.getLogger(__name__)


def _json_float(v):
    # JSON has no infinity; float() reads "inf" and "-inf" back
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v



class TrialRecord:
    """One identification trial."""

    FIELDS = ("source_id", "true_speaker", "predicted_speaker",
              "true_score", "best_score", "margin", "per_frame_score",
              "n_frames")

    def __init__(
        self,
        source_id: str,
        true_speaker: str,
        predicted_speaker: str,
        true_score: float,
        best_score: float,
        margin: float,
        per_frame_score: float,
        n_frames: int
    ):
        self.source_id = source_id
        self.true_speaker = true_speaker
        self.predicted_speaker = predicted_speaker
        self.true_score = float(true_score)
        self.best_score = float(best_score)
        self.margin = float(margin)
        self.per_frame_score = float(per_frame_score)
        self.n_frames = int(n_frames)


    @property
    def correct(self) -> bool:
        return self.true_speaker == self.predicted_speaker


    def to_dict(self) -> Dict:
        return {k: getattr(self, k) for k in TrialRecord.FIELDS}


    @staticmethod
    def from_dict(d: Dict) -> "TrialRecord":
        return TrialRecord(**{k: d[k] for k in TrialRecord.FIELDS})


    def __eq__(self, other) -> bool:
        return isinstance(other, TrialRecord) and \
            self.to_dict() == other.to_dict()



class EvalReport:
    """
    Per-trial outcomes of one model kind with accuracy and confusion
    counts derived from them.

        >>> report.accuracy      # 18 of 20 correct
        90.0
    """

    _logger = logging.getLogger(__name__)

    def __init__(self, kind: str, trials: Sequence[TrialRecord]):
        self.logger = EvalReport._logger
        if not trials:
            raise UsageError("EvalReport.init(): Needs at least one trial!")
        self.kind = kind
        self.trials: List[TrialRecord] = list(trials)


    @property
    def total(self) -> int:
        return len(self.trials)


    @property
    def n_correct(self) -> int:
        return sum(t.correct for t in self.trials)


    @property
    def accuracy(self) -> float:
        """Percentage of correctly identified trials, in [0, 100]."""
        return Metrics.accuracy([t.true_speaker for t in self.trials],
                                [t.predicted_speaker for t in self.trials])


    @property
    def mean_per_frame_score(self) -> float:
        """Mean per-frame log-likelihood of the true speakers' models."""
        return sum(t.true_score / t.n_frames for t in self.trials) / self.total


    def confusion(self) -> pd.DataFrame:
        """Counts indexed by true speaker, columns by predicted speaker."""
        df = self.to_frame()
        labels = sorted(set(df["true_speaker"]) | set(df["predicted_speaker"]))
        return pd.crosstab(df["true_speaker"], df["predicted_speaker"]) \
            .reindex(index=labels, columns=labels, fill_value=0)


    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([t.to_dict() for t in self.trials],
                            columns=list(TrialRecord.FIELDS))


    def to_table(self) -> pd.DataFrame:
        return EvalReport.paired_table({self.kind: self})


    def to_dict(self) -> Dict:
        return {
            "format_version": REPORT_VERSION,
            "kind": self.kind,
            "accuracy": self.accuracy,
            "total": self.total,
            "correct": self.n_correct,
            "trials": [{k: _json_float(v) for k, v in t.to_dict().items()}
                       for t in self.trials],
        }


    @staticmethod
    def from_dict(d: Dict) -> "EvalReport":
        try:
            if d.get("format_version") != REPORT_VERSION:
                raise ModelFormatError(
                    f"EvalReport.from_dict(): Unsupported version "\
                    f"[{d.get('format_version')}]!"
                )
            return EvalReport(
                d["kind"], [TrialRecord.from_dict(t) for t in d["trials"]])
        except (KeyError, TypeError) as e:
            raise ModelFormatError(
                f"EvalReport.from_dict(): Malformed report: {e}"
            ) from e


    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, allow_nan=False))
        self.logger.info(f"EvalReport.save(): Report written to [{path}].")
        return path


    @staticmethod
    def load(path: Union[str, Path]) -> "EvalReport":
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, ValueError) as e:
            raise ModelFormatError(
                f"EvalReport.load(): Cannot read [{path}]: {e}"
            ) from e
        return EvalReport.from_dict(d)


    @staticmethod
    def paired_table(reports: Mapping[str, "EvalReport"]) -> pd.DataFrame:
        """
        One row per model kind ("HMM1", "HMM2") with accuracy in percent
        and the mean per-frame log-likelihood of the true speakers.
        """
        rows = [{"Models": k.upper(),
                 PERF_COLUMN: round(r.accuracy, 2),
                 "Per-frame log-likelihood": r.mean_per_frame_score,
                 "Trials": r.total}
                for k, r in reports.items()]
        return pd.DataFrame(rows).set_index("Models")


    def __eq__(self, other) -> bool:
        return isinstance(other, EvalReport) and \
            self.kind == other.kind and self.trials == other.trials



def evaluate(
    db: SpeakerDb,
    test_set: Sequence[Tuple[str, ObservationSequence]],
    n_jobs: int = 1
) -> EvalReport:
    """
    Identify every labeled test utterance and collect an EvalReport.

    Args:
        db: enrolled speakers
        test_set: (true speaker, utterance) pairs
        n_jobs: trials scored in parallel

    Raises:
        UsageError: If the test set is empty or holds a speaker not in db.
    """
    if not test_set:
        raise UsageError("evaluate(): Test set is empty!")
    known = set(db.speakers)
    for speaker, o in test_set:
        if speaker not in known:
            raise UsageError(
                f"evaluate(): Test utterance [{o.source_id}] labeled with "\
                f"unknown speaker [{speaker}]!"
            )

    def _trial(item: Tuple[str, ObservationSequence]) -> TrialRecord:
        speaker, o = item
        res = identify(db, o)
        true_score = res.score_of(speaker)
        return TrialRecord(o.source_id, speaker, res.speaker, true_score,
                           res.score, res.margin, true_score / o.n_frames,
                           o.n_frames)

    trials = map_sequences(_trial, list(test_set), n_jobs)
    report = EvalReport(db.kind.value, trials)
    _logger.info(
        f"evaluate(): Kind [{report.kind}]; Accuracy [{report.accuracy}]% "\
        f"over [{report.total}] trials."
    )
    return report
