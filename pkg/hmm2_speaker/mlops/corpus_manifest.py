# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains CorpusManifest class, the CSV listing of a speaker
corpus: one row per recording with its speaker, utterance (word),
repetition, role and path.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import pandas as pd

from hmm2_speaker.common import UsageError
from hmm2_speaker.models import ObservationSequence, map_sequences
from hmm2_speaker.features import FeatureConfig
from hmm2_speaker.mlops.feature_store import load_utterance


PathLike = Union[str, Path]



class CorpusManifest:
    """
    This class holds the manifest records as a pandas DataFrame with
    columns speaker, utterance, repetition, role and path. Relative paths
    are resolved against the manifest's directory.

        >>> mf = CorpusManifest.load("corpus/manifest.csv")
        >>> mf.select("train").shape[0]
        120
    """

    COLUMNS = ["speaker", "utterance", "repetition", "role", "path"]
    KEY = ["speaker", "utterance", "repetition"]
    ROLES = ("train", "test")

    _logger = logging.getLogger(__name__)

    def __init__(
        self,
        records: pd.DataFrame,
        base_dir: Optional[PathLike] = None,
        check_paths: bool = True
    ):
        self.logger = CorpusManifest._logger
        missing = [c for c in CorpusManifest.COLUMNS
                   if c not in records.columns]
        if missing:
            raise UsageError(
                f"CorpusManifest.init(): Missing columns {missing}!"
            )
        if records.empty:
            raise UsageError("CorpusManifest.init(): Manifest has no rows!")
        df = records[CorpusManifest.COLUMNS].copy()
        df["speaker"] = df["speaker"].astype(str)
        df["utterance"] = df["utterance"].astype(str)
        df["path"] = df["path"].astype(str)
        df["role"] = df["role"].astype(str).str.strip().str.lower()
        try:
            df["repetition"] = df["repetition"].astype(int)
        except (TypeError, ValueError) as e:
            raise UsageError(
                f"CorpusManifest.init(): Repetition must be integer: {e}"
            ) from e

        bad_roles = sorted(set(df["role"]) - set(CorpusManifest.ROLES))
        if bad_roles:
            raise UsageError(
                f"CorpusManifest.init(): Unknown roles {bad_roles}!"
            )
        dups = df[df.duplicated(CorpusManifest.KEY, keep=False)]
        if not dups.empty:
            keys = sorted(set(map(tuple, dups[CorpusManifest.KEY].values)))
            raise UsageError(
                f"CorpusManifest.init(): Duplicate (speaker, utterance, "\
                f"repetition) keys {keys}!"
            )

        self.base_dir = Path(base_dir) if base_dir is not None else Path(".")
        df["path"] = [str(self.resolve(p)) for p in df["path"]]
        if check_paths:
            absent = [p for p in df["path"] if not Path(p).exists()]
            if absent:
                raise UsageError(
                    f"CorpusManifest.init(): [{len(absent)}] files do not "\
                    f"exist, first [{absent[0]}]!"
                )
        self.records = df.reset_index(drop=True)


    @staticmethod
    def load(path: PathLike, check_paths: bool = True) -> "CorpusManifest":
        path = Path(path)
        try:
            df = pd.read_csv(path, dtype={"speaker": str, "utterance": str,
                                          "role": str, "path": str})
        except (OSError, ValueError, pd.errors.ParserError) as e:
            raise UsageError(
                f"CorpusManifest.load(): Cannot read manifest [{path}]: {e}"
            ) from e
        return CorpusManifest(df, path.parent, check_paths)


    def save(self, path: PathLike, relative: bool = True) -> Path:
        """Write the manifest; paths are made relative to its directory."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        df = self.records.copy()
        if relative:
            root = path.parent.resolve()
            df["path"] = [CorpusManifest._relative(p, root)
                          for p in df["path"]]
        df.to_csv(path, index=False)
        return path


    @staticmethod
    def _relative(p: str, root: Path) -> str:
        try:
            return Path(p).resolve().relative_to(root).as_posix()
        except ValueError:
            return str(p)


    def resolve(self, p: PathLike) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p


    def select(self, role: Optional[str] = None) -> pd.DataFrame:
        if role is None:
            return self.records
        return self.records[self.records["role"] == role]


    @property
    def speakers(self) -> List[str]:
        return sorted(self.records["speaker"].unique())


    @staticmethod
    def source_id(row) -> str:
        return f"{row['speaker']}_{row['utterance']}_r{row['repetition']}"


    def read(
        self,
        role: Optional[str] = None,
        feature_config: Optional[FeatureConfig] = None,
        n_jobs: int = 1
    ) -> List[Tuple[str, ObservationSequence]]:
        """
        Load the utterances of a role as (speaker, sequence) pairs in
        manifest order. WAV paths are run through the front end.
        """
        rows = [r for _, r in self.select(role).iterrows()]

        def _load(row) -> Tuple[str, ObservationSequence]:
            return row["speaker"], load_utterance(
                row["path"], feature_config, CorpusManifest.source_id(row),
                row["utterance"])

        return map_sequences(_load, rows, n_jobs)


    def read_by_speaker(
        self,
        role: Optional[str] = None,
        feature_config: Optional[FeatureConfig] = None,
        n_jobs: int = 1
    ) -> Dict[str, List[ObservationSequence]]:
        groups: Dict[str, List[ObservationSequence]] = {}
        for speaker, o in self.read(role, feature_config, n_jobs):
            groups.setdefault(speaker, []).append(o)
        return groups


    def __len__(self) -> int:
        return self.records.shape[0]
