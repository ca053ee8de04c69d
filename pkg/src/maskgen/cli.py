"""Command-line front end.

Exit codes: 0 success, 1 I/O or decode failure, 2 size mismatch (single
pair), 3 some batch pair failed to decode/read, 64 usage error.

Every pipeline parameter can come from a flag, from a ``key = value``
config file (``--config`` or the MASKGEN_CONFIG environment variable,
keys spelled like the flags), or from the built-in default, in that order
of precedence.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import Counter
from dataclasses import replace
from pathlib import Path

from . import imgcore
from .dataset import DECODE_ERROR, IO_ERROR, MANIFEST_NAME, STATUS_ORDER, run_batch
from .mser import POLARITIES, write_jsonl
from .pipeline import PipelineConfig, dump_intermediates, generate_mask_with_stages

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_MISMATCH = 2
EXIT_PAIR_ERRORS = 3
EXIT_USAGE = 64

CONFIG_ENV = "MASKGEN_CONFIG"

# flag name -> (location inside PipelineConfig, value parser)
TUNABLES = {
    "mser-delta": (("mser", "delta"), int),
    "mser-min-area": (("mser", "min_area"), int),
    "mser-max-area-fraction": (("mser", "max_area_fraction"), float),
    "mser-max-variation": (("mser", "max_variation"), float),
    "mser-polarity": (("mser", "polarity"), str),
    "nms-iou-threshold": (("nms_iou_threshold",), float),
    "tv-iterations": (("denoise", "iterations"), int),
    "tv-step": (("denoise", "step"), float),
    "tv-fidelity-weight": (("denoise", "fidelity_weight"), float),
    "tv-epsilon": (("denoise", "epsilon"), float),
    "pre-binarize-erosions": (("pre_binarize_erosions",), int),
    "binarize-threshold": (("binarize_threshold",), int),
    "post-binarize-erosions": (("post_binarize_erosions",), int),
    "post-dilations": (("post_dilations",), int),
    "post-union-erosions": (("post_union_erosions",), int),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def default_value(flag: str):
    obj = PipelineConfig()
    for attr in TUNABLES[flag][0]:
        obj = getattr(obj, attr)
    return obj


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("_", "-")
        if not sep or not key:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        value = value.strip()
        try:
            if key == "dump-intermediates":
                values[key] = _parse_bool(value)
            elif key in TUNABLES:
                values[key] = TUNABLES[key][1](value)
            else:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def build_config(overrides: dict) -> PipelineConfig:
    config = PipelineConfig()
    nested = {"mser": {}, "denoise": {}}
    top = {}
    for flag, value in overrides.items():
        if flag == "dump-intermediates":
            top["dump_intermediates"] = value
            continue
        location = TUNABLES[flag][0]
        if len(location) == 2:
            nested[location[0]][location[1]] = value
        else:
            top[location[0]] = value
    try:
        return replace(
            config,
            mser=replace(config.mser, **nested["mser"]),
            denoise=replace(config.denoise, **nested["denoise"]),
            **top,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def resolve_config(args) -> PipelineConfig:
    """Flags beat the config file, which beats the defaults."""
    config_path = args.config or os.environ.get(CONFIG_ENV)
    values = read_config_file(config_path) if config_path else {}
    for flag in TUNABLES:
        given = getattr(args, flag.replace("-", "_"))
        if given is not None:
            values[flag] = given
    if args.dump_intermediates:
        values["dump-intermediates"] = True
    return build_config(values)


def _add_tunables(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("pipeline parameters")
    for flag, (_, kind) in TUNABLES.items():
        extra = {"choices": POLARITIES} if flag == "mser-polarity" else {}
        group.add_argument(
            f"--{flag}", type=kind, default=None, metavar=kind.__name__.upper(),
            help=f"(default: {default_value(flag)})", **extra,
        )
    parser.add_argument("--config", metavar="FILE",
                        help=f"key = value parameter file (fallback: ${CONFIG_ENV})")
    parser.add_argument("--dump-intermediates", action="store_true",
                        help="also write diff/text/tv/binary/mask PNGs (default: False)")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="maskgen", description="Manipulation masks from (original, tampered) image pairs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    single = sub.add_parser("single", help="process one pair")
    single.add_argument("--original", required=True, type=Path)
    single.add_argument("--tampered", required=True, type=Path)
    single.add_argument("--out", required=True, type=Path, help="mask PNG to write")
    single.add_argument("--report", type=Path, metavar="PNG", help="render a stage-by-stage figure")
    single.add_argument("--boxes-jsonl", type=Path, metavar="FILE",
                        help="dump raw MSER detections as JSON Lines")
    _add_tunables(single)
    single.set_defaults(func=run_single)

    batch = sub.add_parser("batch", help="process a corpus directory")
    batch.add_argument("--corpus", required=True, type=Path)
    batch.add_argument("--out", required=True, type=Path, help="output directory")
    batch.add_argument("--jobs", type=_positive_int, default=1, help="worker processes (default: 1)")
    batch.add_argument("--report", action="store_true", help="render report.png next to the manifest")
    _add_tunables(batch)
    batch.set_defaults(func=run_batch_cmd)
    return parser


def run_single(args) -> int:
    config = resolve_config(args)
    try:
        original = imgcore.load_image(args.original)
        tampered = imgcore.load_image(args.tampered)
        mask, stats, stages = generate_mask_with_stages(original, tampered, config)
    except imgcore.DimensionMismatch as exc:
        print(f"maskgen: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (imgcore.DecodeError, OSError) as exc:
        print(f"maskgen: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    try:
        imgcore.save_mask(mask, args.out)
        if config.dump_intermediates:
            dump_intermediates(stages, args.out.parent / f"{args.out.stem}_intermediates")
        if args.boxes_jsonl:
            write_jsonl(stages.detections, args.boxes_jsonl)
        if args.report:
            from .report import render_pair_report
            render_pair_report(stages, args.report)
    except OSError as exc:
        print(f"maskgen: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(json.dumps(stats.to_dict()))
    return EXIT_OK


def run_batch_cmd(args) -> int:
    config = resolve_config(args)
    try:
        records = run_batch(args.corpus, args.out, config, workers=args.jobs)
    except OSError as exc:
        print(f"maskgen: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    counts = Counter(r.status for r in records)
    summary = " ".join(f"{status}={counts.get(status, 0)}" for status in STATUS_ORDER)
    print(f"maskgen: {len(records)} pairs: {summary} (manifest: {args.out / MANIFEST_NAME})",
          file=sys.stderr)
    if args.report:
        from .report import render_batch_report
        render_batch_report(records, args.out / "report.png")
    if counts.get(DECODE_ERROR) or counts.get(IO_ERROR):
        return EXIT_PAIR_ERRORS
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"maskgen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
