"""
MeetSense command line
Generates simulated datasets, detects meeting groups and compares methods.

Usage:
    python cli.py gen S3 --out data/s3 --seed 7
    python cli.py detect data/s3 --out runs/s3
    python cli.py detect --audio-dir rec/audio --scans rec/scans.csv --out runs/rec
    python cli.py compare data/s1 data/s3 --out runs/table --xlsx --pdf
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from config import settings
from constants import Method
from errors import MeetSenseError
from models import PipelineConfig
from services import (
    replay,
    resolve_config,
    resolve_dataset,
    run_bench,
    run_compare,
    run_detect,
    run_eval,
    run_features,
    run_gen,
    run_separation,
    run_sweep,
)
from sim import scenario_library

logger = logging.getLogger("meetsense")


def _methods(names: Optional[List[str]]) -> List[Method]:
    return [Method(n) for n in names] if names else list(Method)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=settings.APP_NAME, description=settings.DESCRIPTION)
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")

    # Global options are shared by every subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help=f"random seed (default: ${settings.SEED_ENV_VAR})")
    common.add_argument("--config", type=Path, default=None, help=f"pipeline config JSON (default: ${settings.CONFIG_ENV_VAR})")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--log-level", default=None, choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    method_choices = [m.value for m in Method]
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="render a scenario into a dataset directory")
    gen.add_argument("scenario", help="library name (S1..S7, G6G7) or scenario JSON file")

    detect = sub.add_parser("detect", parents=[common], help="detect meeting groups in a dataset")
    detect.add_argument("dataset", type=Path, nargs="?", help="dataset directory (or use --audio-dir)")
    detect.add_argument("--audio-dir", type=Path, default=None, help="directory of per-subject WAV files")
    detect.add_argument("--scans", type=Path, default=None, help="scan CSV (subject_id,timestamp_s,bssid,rssi_dbm)")
    detect.add_argument("--method", choices=method_choices, default=Method.MEETSENSE.value)
    detect.add_argument("--manifest", type=Path, default=None, help="replay the seed and config of a prior run")

    comp = sub.add_parser("compare", parents=[common], help="score every method on datasets with ground truth")
    comp.add_argument("datasets", type=Path, nargs="+")
    comp.add_argument("--methods", nargs="+", choices=method_choices)
    comp.add_argument("--manifest", type=Path, default=None, help="replay the seed and config of a prior run")
    comp.add_argument("--xlsx", action="store_true", help="also write compare.xlsx")
    comp.add_argument("--pdf", action="store_true", help="also write report.pdf")

    ev = sub.add_parser("eval", parents=[common], help="compare methods on simulated library scenarios")
    ev.add_argument("scenarios", nargs="*", help="library names (default: all)")
    ev.add_argument("--methods", nargs="+", choices=method_choices)

    sweep = sub.add_parser("sweep", parents=[common], help="F1 and similarity against SNR")
    sweep.add_argument("scenario", help="library name")
    sweep.add_argument("--snr", type=float, nargs="+", default=None, help="SNR grid in dB")
    sweep.add_argument("--methods", nargs="+", choices=method_choices)
    sweep.add_argument("--xlsx", action="store_true", help="also write sweep.xlsx")

    feats = sub.add_parser("features", parents=[common], help="write refined pairwise features")
    feats.add_argument("dataset", type=Path)

    sep = sub.add_parser("separation", parents=[common], help="same- vs cross-group similarity report")
    sep.add_argument("dataset", type=Path)
    sep.add_argument("--methods", nargs="+", choices=method_choices)

    bench = sub.add_parser("bench", parents=[common], help="acoustic-feature cost per method")
    bench.add_argument("dataset", type=Path)
    bench.add_argument("--repeats", type=int, default=3)
    bench.add_argument("--methods", nargs="+", choices=method_choices)

    sub.add_parser("config", parents=[common], help="write the default pipeline config document")
    sub.add_parser("scenarios", parents=[common], help="list the scenario library")
    return parser


def _configure_logging(level_name: Optional[str]) -> None:
    level = getattr(logging, level_name) if level_name else settings.get_log_level()
    logging.basicConfig(format=settings.LOG_FORMAT, level=level)


def _config_and_seed(args) -> tuple:
    manifest = getattr(args, "manifest", None)
    if manifest is not None:
        config, seed = replay(manifest)
        return config, args.seed if args.seed is not None else seed
    return resolve_config(args.config), args.seed


def run(args) -> None:
    """Dispatch one parsed command"""
    if args.command == "scenarios":
        for name, scenario in scenario_library().items():
            print(f"{name:6s} {len(scenario.subjects)} subjects  {scenario.description}")
        return
    if args.command == "config":
        args.out.mkdir(parents=True, exist_ok=True)
        path = args.out / "config.json"
        PipelineConfig().dump(path)
        print(path)
        return
    if args.command == "gen":
        run_gen(args.scenario, args.out, args.seed)
        print(args.out)
        return

    config, seed = _config_and_seed(args)
    if args.command == "detect":
        dataset = resolve_dataset(args.dataset, args.audio_dir, args.scans)
        result = run_detect(dataset, config, args.out, seed, Method(args.method))
        for group in result.groups:
            print(" ".join(group))
        print(f"decision path: {result.decision_path.value}")
    elif args.command == "compare":
        report = run_compare(args.datasets, config, args.out, seed, _methods(args.methods), args.xlsx, args.pdf)
        for row in report.aggregate():
            print(f"{row.method:12s} F1={row.f1:.4f}")
    elif args.command == "eval":
        names = args.scenarios or list(scenario_library())
        report = run_eval(names, config, args.out, seed, _methods(args.methods))
        for row in report.aggregate():
            print(f"{row.method:12s} F1={row.f1:.4f}")
    elif args.command == "sweep":
        run_sweep(args.scenario, config, args.out, seed, args.snr, _methods(args.methods), args.xlsx)
    elif args.command == "features":
        run_features(args.dataset, config, args.out)
    elif args.command == "separation":
        for stats in run_separation(args.dataset, config, args.out, _methods(args.methods)):
            gap = stats.gap()
            print(f"{stats.method:12s} gap={'n/a' if gap is None else f'{gap:.4f}'}")
    elif args.command == "bench":
        for row in run_bench(args.dataset, config, args.out, args.repeats, _methods(args.methods)):
            print(f"{row.method:12s} {row.wall_s:.3f} s  {row.peak_kib:.0f} KiB")


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point.

    Returns:
        0 on a completed run (rejections included), 1 on a pipeline, input or
        filesystem error; argparse exits with 2 on usage errors
    """
    args = build_parser().parse_args(argv)
    _configure_logging(args.log_level)
    try:
        run(args)
    except (MeetSenseError, ValidationError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        if settings.DEBUG:
            logger.exception("Traceback")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
