# Copyright (c) 2023, Illuminairy AI
#
# Licensed under the Apache License, Version 2.0 (the "License");
# Use, reproduction and distribution of this software in source and
# binary forms, with or without modification, are permitted provided that
# the License terms and conditions are met; you may not use this file
# except in compliance with the License. See the LICENSE file for details.

"""
This module contains the console application: the hmm2-speaker command
line with the features, train, identify, eval, synth and bench
subcommands, each run as a Pipeline of typed steps.
"""

__author__ = "Illuminairy AI"
__license__ = "Apache License 2.0"
__version__ = "0.1.0"


import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

from hmm2_speaker.common import (
    AppConfig, ConfigManager, ConfigType, Hmm2SpeakerError, UsageError
)
from hmm2_speaker.models import ModelKind, TrainConfig
from hmm2_speaker.features import FeatureConfig
from hmm2_speaker.speakerid import (
    ProtocolConfig, SynthConfig, EvalReport, enroll, identify, evaluate,
    generate_corpus
)
from hmm2_speaker.mlops import (
    FlowContext, Pipeline, TaskType, CorpusManifest, BenchConfig,
    save_features, load_utterance, save_model, save_speaker_db,
    load_speaker_db, run_bench, bench_slopes, BENCH_COLUMNS
)


EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

LOG_FORMAT = '%(asctime)s [%(levelname)s]  %(message)s'
LOG_LEVELS = ["debug", "info", "warning", "error", "critical"]

FEATURE_DIR = "features"
MANIFEST_FILE = "manifest.csv"
GENERATOR_DIR = "generators"



class ConsoleApp:
    """
    This class represents the console application: one AppConfig item
    (by default group_def.speaker_id) and the setups it references, with
    one run_<command> method per subcommand.

        >>> app = ConsoleApp("group_def.speaker_id")
        >>> app.train_config(n_states=3).n_states
        3
    """

    _logger = logging.getLogger(__name__)

    def __init__(
        self,
        app_key: str = AppConfig.DEF_APP_KEY,
        config_dir: Optional[str] = None,
        config_file: Optional[str] = None
    ):
        self.logger = ConsoleApp._logger
        self.appconf: AppConfig = ConfigManager.get_app_config(
                app_key, config_dir, config_file)
        self.app_key = self.appconf.app_key
        self.log_level = self.appconf.log_level
        self.logger.debug(
            f"ConsoleApp.init(): App_key [{self.app_key}]; Config_path "\
            f"[{self.appconf.config_path}]."
        )


    def feature_config(self, **overrides) -> FeatureConfig:
        return FeatureConfig.from_dict(
            self.appconf.get_setup(ConfigType.FeatureSetups), **overrides)


    def train_config(self, **overrides) -> TrainConfig:
        return TrainConfig.from_dict(
            self.appconf.get_setup(ConfigType.TrainSetups), **overrides)


    def protocol_config(self, **overrides) -> ProtocolConfig:
        return ProtocolConfig.from_dict(
            self.appconf.get_setup(ConfigType.SpeakerSetups), **overrides)


    def synth_config(self, **overrides) -> SynthConfig:
        return SynthConfig.from_dict(
            self.appconf.get_setup(ConfigType.SynthSetups), **overrides)


    def bench_config(self, **overrides) -> BenchConfig:
        return BenchConfig.from_dict(
            self.appconf.get_setup(ConfigType.BenchSetups), **overrides)


    def new_pipeline(
        self,
        name: str,
        args: argparse.Namespace
    ) -> Pipeline:
        ctx = FlowContext(self.appconf)
        ctx.direct_inputs.update(vars(args))
        return Pipeline(name, ctx)


    def run_features(self, args: argparse.Namespace) -> FlowContext:
        """Map a manifest to feature CSVs plus a mirrored manifest."""
        pp = self.new_pipeline("features", args)
        out_dir = Path(args.out)

        @pp.step(TaskType.Ingest)
        def load_manifest(ctx: FlowContext):
            ctx.data["manifest"] = CorpusManifest.load(args.manifest)

        @pp.step(TaskType.PreProcess)
        def extract_features(ctx: FlowContext):
            mf: CorpusManifest = ctx.data["manifest"]
            pairs = mf.read(None, self.feature_config(), args.workers)
            records = mf.records.copy()
            paths = []
            for (_, o), (_, row) in zip(pairs, records.iterrows()):
                dest = out_dir / FEATURE_DIR / \
                    f"{CorpusManifest.source_id(row)}.csv"
                paths.append(str(save_features(o, dest).resolve()))
            records["path"] = paths
            out_mf = CorpusManifest(records, out_dir)
            ctx.record("extract_features",
                       {"manifest": str(out_mf.save(out_dir / MANIFEST_FILE)),
                        "n_files": len(paths)})
            self.logger.info(
                f"ConsoleApp.run_features(): Wrote [{len(paths)}] feature "\
                f"files under [{out_dir}]."
            )

        return pp.execute()


    def run_train(self, args: argparse.Namespace) -> FlowContext:
        """Enroll every speaker of the manifest's train role into a db."""
        pp = self.new_pipeline("train", args)
        fc = self.feature_config()

        @pp.step(TaskType.Ingest)
        def load_train_set(ctx: FlowContext):
            mf = CorpusManifest.load(args.manifest)
            ctx.data["train"] = mf.read_by_speaker("train", fc, args.workers)
            if not ctx.data["train"]:
                raise UsageError(
                    f"ConsoleApp.run_train(): Manifest [{args.manifest}] "\
                    "has no train rows!"
                )

        @pp.step(TaskType.Train)
        def enroll_speakers(ctx: FlowContext):
            config = self.train_config(
                n_states=args.states, n_mixtures=args.mixtures,
                seed=args.seed, max_iter=args.iterations,
                n_jobs=args.workers)
            protocol = self.protocol_config(
                per_word_models=True if args.per_word else None)
            kind = ModelKind.Hmm2 if args.order == 2 else ModelKind.Hmm1
            ctx.params.update(config.to_dict())
            ctx.models["db"] = enroll(ctx.data["train"], kind, config,
                                      protocol, fc.to_dict())

        @pp.step(TaskType.Serve)
        def save_db(ctx: FlowContext):
            ctx.record("save_db",
                       {"db": str(save_speaker_db(ctx.models["db"],
                                                  args.out))})

        return pp.execute()


    def run_identify(self, args: argparse.Namespace) -> FlowContext:
        """Rank the db's speakers for one utterance (WAV or feature CSV)."""
        pp = self.new_pipeline("identify", args)

        @pp.step(TaskType.Ingest)
        def load_inputs(ctx: FlowContext):
            db = load_speaker_db(args.db)
            ctx.models["db"] = db
            # extraction must match the enrollment front end
            fc = FeatureConfig.from_dict(db.feature_config or {})
            ctx.data["utterance"] = load_utterance(
                args.utterance, fc, Path(args.utterance).stem, args.word)

        @pp.step(TaskType.Serve)
        def rank_speakers(ctx: FlowContext):
            res = identify(ctx.models["db"], ctx.data["utterance"],
                           args.word)
            ctx.metrics["identification"] = res
            per_frame = res.per_frame
            df = pd.DataFrame(
                [(s, score, per_frame[s]) for s, score in res.ranking],
                columns=["speaker", "log_likelihood", "per_frame"])
            df.index = range(1, len(df) + 1)
            df.index.name = "rank"
            print(df.to_string())

        return pp.execute()


    def run_eval(self, args: argparse.Namespace) -> FlowContext:
        """
        Score the manifest's test role against a saved db, or with
        --paired train both orders on the train role and compare.
        """
        pp = self.new_pipeline("eval", args)

        @pp.step(TaskType.Ingest)
        def load_sets(ctx: FlowContext):
            mf = CorpusManifest.load(args.manifest)
            if args.db:
                db = load_speaker_db(args.db)
                ctx.models["db"] = db
                fc = FeatureConfig.from_dict(db.feature_config or {})
            else:
                fc = self.feature_config()
                ctx.data["train"] = mf.read_by_speaker("train", fc)
            ctx.data["test"] = mf.read("test", fc)

        @pp.step(TaskType.Train)
        def train_models(ctx: FlowContext):
            if args.db:
                return
            config = self.train_config(
                n_states=args.states, n_mixtures=args.mixtures,
                seed=args.seed, max_iter=args.iterations)
            protocol = self.protocol_config()
            for kind in (ModelKind.Hmm1, ModelKind.Hmm2):
                ctx.models[kind.value] = enroll(
                    ctx.data["train"], kind, config, protocol,
                    self.feature_config().to_dict())

        @pp.step(TaskType.Evaluate)
        def evaluate_models(ctx: FlowContext):
            reports: Dict[str, EvalReport] = {}
            if args.db:
                db = ctx.models["db"]
                reports[db.kind.value] = evaluate(db, ctx.data["test"])
            else:
                for kind in (ModelKind.Hmm1, ModelKind.Hmm2):
                    reports[kind.value] = evaluate(ctx.models[kind.value],
                                                   ctx.data["test"])
            ctx.metrics["reports"] = reports

        @pp.step(TaskType.Serve)
        def write_reports(ctx: FlowContext):
            reports: Dict[str, EvalReport] = ctx.metrics["reports"]
            if len(reports) > 1:
                print(EvalReport.paired_table(reports).to_string())
            else:
                print(next(iter(reports.values())).to_table().to_string())
            if args.report:
                report = Path(args.report)
                for kind, r in reports.items():
                    path = report if len(reports) == 1 else \
                        report.with_name(f"{report.stem}.{kind}"\
                                         f"{report.suffix}")
                    r.save(path)
                    ctx.record("write_reports", {kind: str(path)})

        return pp.execute()


    def run_synth(self, args: argparse.Namespace) -> FlowContext:
        """Write a synthetic speaker corpus as feature files + manifest."""
        pp = self.new_pipeline("synth", args)
        out_dir = Path(args.out)

        @pp.step(TaskType.Ingest)
        def generate(ctx: FlowContext):
            config = self.synth_config(
                n_speakers=args.speakers, n_words=args.words,
                n_repetitions=args.repetitions, seed=args.seed,
                n_features=args.features)
            ctx.params.update(config.to_dict())
            ctx.data["corpus"] = generate_corpus(config)

        @pp.step(TaskType.Serve)
        def write_corpus(ctx: FlowContext):
            corpus = ctx.data["corpus"]
            n_train = self.protocol_config(
                train_repetitions=args.train_repetitions).train_repetitions
            rows = []
            for u in corpus.utterances:
                path = save_features(
                    u.observations,
                    out_dir / FEATURE_DIR / f"{u.utterance_id}.csv")
                rows.append({
                    "speaker": u.speaker, "utterance": u.word,
                    "repetition": u.repetition,
                    "role": "train" if u.repetition < n_train else "test",
                    "path": str(path.resolve())})
            for speaker, m in corpus.speaker_models.items():
                save_model(m, out_dir / GENERATOR_DIR / f"{speaker}.json")
            mf = CorpusManifest(pd.DataFrame(rows), out_dir)
            ctx.record("write_corpus",
                       {"manifest": str(mf.save(out_dir / MANIFEST_FILE))})
            self.logger.info(
                f"ConsoleApp.run_synth(): Wrote [{len(rows)}] utterances "\
                f"of [{len(corpus.speaker_models)}] speakers to [{out_dir}]."
            )

        return pp.execute()


    def run_bench(self, args: argparse.Namespace) -> FlowContext:
        """Time both lattice orders over N and emit the CSV."""
        pp = self.new_pipeline("bench", args)

        @pp.step(TaskType.Evaluate)
        def time_lattices(ctx: FlowContext):
            config = self.bench_config(states=args.states,
                                       length=args.length,
                                       repeats=args.repeats,
                                       impl=args.impl)
            df = run_bench(config)
            ctx.data["bench"] = df
            if len(config.states) < 2:
                return
            if not (df["seconds"] > 0).all():
                self.logger.warning(
                    "ConsoleApp.run_bench(): Timings too short to fit "\
                    "slopes; raise --length or --repeats."
                )
                return
            ctx.metrics["slopes"] = bench_slopes(df)
            self.logger.info(
                f"ConsoleApp.run_bench(): Log-log slopes "\
                f"{ctx.metrics['slopes']}."
            )

        @pp.step(TaskType.Serve)
        def write_csv(ctx: FlowContext):
            df: pd.DataFrame = ctx.data["bench"][BENCH_COLUMNS]
            if args.out:
                Path(args.out).parent.mkdir(parents=True, exist_ok=True)
                df.to_csv(args.out, index=False)
                ctx.record("write_csv", {"bench": args.out})
            else:
                df.to_csv(sys.stdout, index=False)

        return pp.execute()


    def run(self, args: argparse.Namespace) -> FlowContext:
        return getattr(self, f"run_{args.command}")(args)



def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hmm2-speaker",
        description="Second-order HMM speaker identification.")
    parser.add_argument("--config-dir", default=None)
    parser.add_argument("--config-file", default=None)
    parser.add_argument("--app-key", default=AppConfig.DEF_APP_KEY)
    parser.add_argument("--log-level", choices=LOG_LEVELS, default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="manifest -> feature files")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("train", help="manifest -> speaker db")
    p.add_argument("manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, choices=[1, 2], default=2)
    p.add_argument("--states", type=int)
    p.add_argument("--mixtures", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--per-word", action="store_true")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("identify", help="rank speakers for one utterance")
    p.add_argument("db")
    p.add_argument("utterance")
    p.add_argument("--word")

    p = sub.add_parser("eval", help="identification accuracy report")
    p.add_argument("manifest")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--db")
    src.add_argument("--paired", action="store_true")
    p.add_argument("--report")
    p.add_argument("--states", type=int)
    p.add_argument("--mixtures", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--iterations", type=int)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--speakers", type=int)
    p.add_argument("--words", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--features", type=int)
    p.add_argument("--train-repetitions", type=int)

    p = sub.add_parser("bench", help="lattice timing sweep")
    p.add_argument("--states")
    p.add_argument("--length", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--impl", choices=["naive", "vectorized"])
    p.add_argument("--out")
    return parser


def configure_logging(level: str) -> None:
    logging.basicConfig(stream=sys.stderr, format=LOG_FORMAT, force=True,
                        level=getattr(logging, level.upper()))


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Console entry point.

    Returns:
        int: 0 on success, 2 on usage errors, 1 on runtime errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    configure_logging(args.log_level or AppConfig.DEF_LOG_LEVEL)
    logger = ConsoleApp._logger
    try:
        app = ConsoleApp(args.app_key, args.config_dir, args.config_file)
        if args.log_level is None:
            logging.getLogger().setLevel(app.log_level.upper())
        app.run(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        logger.error(f"main(): {e}")
        return EXIT_USAGE
    except (Hmm2SpeakerError, OSError, ValueError, RuntimeError) as e:
        logger.error(f"main(): {type(e).__name__}: {e}")
        return EXIT_RUNTIME
    return EXIT_OK
