# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains ModelRegistry for saving and loading models and
speaker dbs as versioned JSON files.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from hmm2_speaker.common import (
    ModelFormatError, InvariantViolationError, UsageError
)
from hmm2_speaker.models import (
    BaseHmm, ModelKind, Topology, GaussianMixture, Hmm1Model, Hmm2Model
)
from hmm2_speaker.speakerid import SpeakerDb


FORMAT_VERSION = 1
DB_INDEX_FILE = "index.json"
DB_MODEL_DIR = "models"

PathLike = Union[str, Path]



class ModelRegistry:
    """
    This class maps models to and from the model file layout:

        {"format_version": 1, "kind": "hmm2", "n_states": N,
         "n_mixtures": M, "n_features": d, "topology": {...},
         "pi": [...], "a2": [[...]], "a3": [[[...]]], "states": [...]}

    First-order files carry "a" instead of "a2"/"a3". Probabilities are
    linear-domain floats written with the shortest repr that parses back
    to the same double.
    """

    _logger = logging.getLogger(__name__)


    @staticmethod
    def to_model_id(model_ref_id: str) -> str:
        return hashlib.sha256(model_ref_id.encode("utf-8")).hexdigest()


    @staticmethod
    def model_to_dict(m: BaseHmm) -> Dict[str, Any]:
        d: Dict[str, Any] = {
            "format_version": FORMAT_VERSION,
            "kind": m.kind.value,
            "n_states": m.n_states,
            "n_mixtures": m.n_mixtures,
            "n_features": m.n_features,
            "topology": m.topology.to_dict(),
            "pi": m.pi.tolist(),
        }
        if m.kind == ModelKind.Hmm2:
            d["a2"] = m.a2.tolist()
            d["a3"] = m.a3.tolist()
        else:
            d["a"] = m.a.tolist()
        d["states"] = [gm.to_dict() for gm in m.states]
        return d


    @staticmethod
    def model_from_dict(d: Dict[str, Any]) -> BaseHmm:
        """
        Rebuild a model and revalidate every invariant.

        Raises:
            ModelFormatError: If the version, kind or layout is wrong.
            InvariantViolationError: If a table breaks an invariant.
        """
        if not isinstance(d, dict):
            raise ModelFormatError(
                "ModelRegistry.model_from_dict(): Expected a JSON object!"
            )
        version = d.get("format_version")
        if version != FORMAT_VERSION:
            raise ModelFormatError(
                f"ModelRegistry.model_from_dict(): Unsupported "\
                f"format_version [{version}], expected [{FORMAT_VERSION}]!"
            )
        try:
            kind = ModelKind(d["kind"])
            topo = Topology.from_dict(d["topology"])
            if int(d["n_states"]) != topo.n_states:
                raise ModelFormatError(
                    f"ModelRegistry.model_from_dict(): n_states "\
                    f"[{d['n_states']}] differs from topology "\
                    f"[{topo.n_states}]!"
                )
            states = [GaussianMixture.from_dict(s) for s in d["states"]]
            if kind == ModelKind.Hmm2:
                m: BaseHmm = Hmm2Model(d["pi"], d["a2"], d["a3"], states,
                                       topo)
            else:
                m = Hmm1Model(d["pi"], d["a"], states, topo)
        except InvariantViolationError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            if isinstance(e, ModelFormatError):
                raise
            raise ModelFormatError(
                f"ModelRegistry.model_from_dict(): Malformed model: "\
                f"{type(e).__name__} {e}"
            ) from e
        if m.n_features != int(d["n_features"]) or \
                m.n_mixtures != int(d["n_mixtures"]):
            raise ModelFormatError(
                "ModelRegistry.model_from_dict(): Header dimensions do not "\
                "match the stored mixtures!"
            )
        return m


    @staticmethod
    def read_json(path: PathLike) -> Any:
        try:
            return json.loads(Path(path).read_text())
        except OSError as e:
            raise ModelFormatError(
                f"ModelRegistry.read_json(): Cannot read [{path}]: {e}"
            ) from e
        except ValueError as e:
            raise ModelFormatError(
                f"ModelRegistry.read_json(): [{path}] is truncated or not "\
                f"JSON: {e}"
            ) from e


    @staticmethod
    def write_json(path: PathLike, d: Any) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(d, indent=1))
        return path



def save_model(m: BaseHmm, path: PathLike) -> Path:
    path = ModelRegistry.write_json(path, ModelRegistry.model_to_dict(m))
    ModelRegistry._logger.debug(
        f"save_model(): Saved [{m!r}] to [{path}]."
    )
    return path


def load_model(path: PathLike) -> BaseHmm:
    """
    Load a model file; nothing is returned unless the whole file parses
    and validates.

    Raises:
        ModelFormatError: If the file is truncated, unparsable or of another
            version.
        InvariantViolationError: If a stored table breaks an invariant.
    """
    return ModelRegistry.model_from_dict(ModelRegistry.read_json(path))


def save_speaker_db(db: SpeakerDb, db_dir: PathLike) -> Path:
    """
    Write db as <db_dir>/index.json plus one model file per entry under
    <db_dir>/models/<model_id>.json.
    """
    db_dir = Path(db_dir)
    entries = []
    for (speaker, word), m in db.models.items():
        ref_id = speaker if word is None else f"{speaker}/{word}"
        model_id = ModelRegistry.to_model_id(ref_id)
        rel = f"{DB_MODEL_DIR}/{model_id}.json"
        save_model(m, db_dir / rel)
        entries.append({"speaker": speaker, "word": word,
                        "model_id": model_id, "file": rel})
    index = {
        "format_version": FORMAT_VERSION,
        "kind": db.kind.value,
        "per_word": db.per_word,
        "feature_config": db.feature_config,
        "train_config": db.train_config,
        "entries": entries,
    }
    path = ModelRegistry.write_json(db_dir / DB_INDEX_FILE, index)
    ModelRegistry._logger.info(
        f"save_speaker_db(): Saved [{len(entries)}] models to [{db_dir}]."
    )
    return path


def load_speaker_db(db_dir: PathLike) -> SpeakerDb:
    """
    Raises:
        UsageError: If db_dir has no index file.
        ModelFormatError: If the index or a model file is malformed.
    """
    db_dir = Path(db_dir)
    index_path = db_dir / DB_INDEX_FILE
    if not index_path.is_file():
        raise UsageError(
            f"load_speaker_db(): [{db_dir}] is not a speaker db, missing "\
            f"[{DB_INDEX_FILE}]!"
        )
    index = ModelRegistry.read_json(index_path)
    if not isinstance(index, dict) or \
            index.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"load_speaker_db(): Unsupported index in [{index_path}]!"
        )
    models: Dict = {}
    try:
        for e in index["entries"]:
            m = load_model(db_dir / e["file"])
            if m.kind.value != index["kind"]:
                raise ModelFormatError(
                    f"load_speaker_db(): Model [{e['file']}] is "\
                    f"[{m.kind.value}], index says [{index['kind']}]!"
                )
            models[(e["speaker"], e.get("word"))] = m
    except (KeyError, TypeError) as e:
        raise ModelFormatError(
            f"load_speaker_db(): Malformed index [{index_path}]: {e}"
        ) from e
    return SpeakerDb(models, index.get("feature_config"),
                     index.get("train_config"))
