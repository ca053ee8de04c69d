"""Corpus ingestion and batch execution.

A corpus is a directory of post groups::

    root/<group_id>/<image files>

Within a group the byte-lexicographically first image is the original and
every other image is a tampered candidate.  Results land in
``out_dir/<group_id>/<tampered stem>_mask.png`` plus one JSON line per pair
in ``out_dir/manifest.jsonl``.  Paths inside the manifest are relative
(inputs to the corpus root, masks to ``out_dir``) so that the manifest does
not depend on where the run happened.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import imgcore
from .pipeline import PairStats, PipelineConfig, dump_intermediates, generate_mask_with_stages

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}
MANIFEST_NAME = "manifest.jsonl"
MANIFEST_FIELDS = (
    "group_id", "original_path", "tampered_path", "status", "mask_path",
    "boxes_before_nms", "boxes_after_nms", "tv_energy_before", "tv_energy_after",
    "white_fraction", "elapsed_ms",
)

OK = "ok"
SKIPPED_SIZE_MISMATCH = "skipped_size_mismatch"
DECODE_ERROR = "decode_error"
IO_ERROR = "io_error"
STATUS_ORDER = (OK, SKIPPED_SIZE_MISMATCH, DECODE_ERROR, IO_ERROR)


@dataclass(frozen=True)
class PostGroup:
    group_id: str
    original: Path
    tampered: tuple[Path, ...]


@dataclass(frozen=True)
class PairRecord:
    group_id: str
    original_path: str
    tampered_path: str
    status: str
    mask_path: str | None = None
    stats: PairStats | None = None
    message: str | None = None

    def to_manifest(self) -> dict:
        row = {
            "group_id": self.group_id,
            "original_path": self.original_path,
            "tampered_path": self.tampered_path,
            "status": self.status,
            "mask_path": self.mask_path,
        }
        stats = self.stats.to_dict() if self.stats else {}
        for name in MANIFEST_FIELDS[5:]:
            row[name] = stats.get(name)
        return row


def _byte_key(path: Path) -> bytes:
    return path.name.encode("utf-8", "surrogateescape")


def scan_corpus(root) -> list[PostGroup]:
    root = Path(root)
    try:
        subdirs = sorted((p for p in root.iterdir() if p.is_dir()), key=_byte_key)
    except OSError as exc:
        raise imgcore.ImageIOError(f"cannot read corpus root {root}: {exc}") from exc

    groups = []
    for sub in subdirs:
        images = sorted(
            (p for p in sub.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES),
            key=_byte_key,
        )
        if len(images) < 2:
            log.info("skipping %s: %d image(s), need at least 2", sub, len(images))
            continue
        groups.append(PostGroup(sub.name, images[0], tuple(images[1:])))
    return groups


@dataclass(frozen=True)
class _Job:
    group_id: str
    original: Path
    tampered: Path
    root: Path
    out_dir: Path
    config: PipelineConfig


def _relative(path: Path, base: Path) -> str:
    try:
        return path.relative_to(base).as_posix()
    except ValueError:
        return path.as_posix()


def process_pair(job: _Job) -> PairRecord:
    """Run one pair; failures come back as records, never as exceptions."""
    base = dict(
        group_id=job.group_id,
        original_path=_relative(job.original, job.root),
        tampered_path=_relative(job.tampered, job.root),
    )
    try:
        original = imgcore.load_image(job.original)
        tampered = imgcore.load_image(job.tampered)
        if original.shape != tampered.shape:
            return PairRecord(status=SKIPPED_SIZE_MISMATCH, **base)
        mask, stats, stages = generate_mask_with_stages(original, tampered, job.config)
        group_dir = job.out_dir / job.group_id
        group_dir.mkdir(parents=True, exist_ok=True)
        mask_path = group_dir / f"{job.tampered.stem}_mask.png"
        imgcore.save_mask(mask, mask_path)
        if job.config.dump_intermediates:
            dump_intermediates(stages, group_dir / f"{job.tampered.stem}_intermediates")
    except imgcore.DimensionMismatch as exc:
        return PairRecord(status=SKIPPED_SIZE_MISMATCH, message=str(exc), **base)
    except imgcore.DecodeError as exc:
        return PairRecord(status=DECODE_ERROR, message=str(exc), **base)
    except OSError as exc:
        return PairRecord(status=IO_ERROR, message=str(exc), **base)
    return PairRecord(status=OK, mask_path=_relative(mask_path, job.out_dir), stats=stats, **base)


def write_manifest(records, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_manifest()) + "\n")


def read_manifest(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def run_batch(root, out_dir, config: PipelineConfig | None = None, workers: int = 1) -> list[PairRecord]:
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    config = config or PipelineConfig()
    root = Path(root)
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise imgcore.ImageIOError(f"cannot create output directory {out_dir}: {exc}") from exc

    jobs = [
        _Job(group.group_id, group.original, tampered, root, out_dir, config)
        for group in scan_corpus(root)
        for tampered in group.tampered
    ]
    if workers == 1 or len(jobs) <= 1:
        records = [process_pair(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(process_pair, jobs))

    records.sort(key=lambda r: (r.group_id.encode("utf-8", "surrogateescape"),
                                r.tampered_path.encode("utf-8", "surrogateescape")))
    for rec in records:
        if rec.status != OK:
            log.warning("%s/%s: %s %s", rec.group_id, rec.tampered_path, rec.status, rec.message or "")
    try:
        write_manifest(records, out_dir / MANIFEST_NAME)
    except OSError as exc:
        raise imgcore.ImageIOError(f"cannot write manifest in {out_dir}: {exc}") from exc
    return records
