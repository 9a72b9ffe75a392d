"""Benchmark harness: noise contamination, F1 scoring, corpus runs.

A run contaminates each corpus image at each requested noise level, then
segments the identical noisy input twice: once with the full layered model
and once with the plain unary argmax baseline. Both predictions are scored
against the clean ground truth. Per-entry failures are recorded in the
report instead of aborting the run.
"""

from __future__ import annotations

import csv
import io
import json
import time
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .core import DfrfConfig, ImageObservation, LabelField, SeedMask, validate_inputs
from .errors import CorpusError, DfrfError, DimensionMismatch
from .inference import run_dfrf
from .mixture import seed_unary

DYNAMIC_RANGE = 255.0


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    image: ImageObservation
    gt: LabelField
    seeds: SeedMask

    def __post_init__(self):
        dims = {
            (self.image.height, self.image.width),
            (self.gt.height, self.gt.width),
            (self.seeds.height, self.seeds.width),
        }
        if len(dims) != 1:
            raise DimensionMismatch(f"entry {self.id}: image/gt/seeds dimensions differ")


@dataclass
class BenchReport:
    config: dict
    rng_seed: int
    noise_fractions: list[float]
    results: list[dict] = field(default_factory=list)  # {id, noise, method, f1}
    timings: list[dict] = field(default_factory=list)  # {id, noise, method, seconds}
    errors: list[dict] = field(default_factory=list)  # {id, noise, error}

    def mean_f1(self, method: str, noise: float) -> float:
        vals = [
            r["f1"]
            for r in self.results
            if r["method"] == method and r["noise"] == noise
        ]
        if not vals:
            raise ValueError(f"no results for method={method} noise={noise}")
        return float(np.mean(vals))

    def to_json(self) -> str:
        payload = {
            "config": self.config,
            "rng_seed": self.rng_seed,
            "noise_fractions": self.noise_fractions,
            "entries": self.results,
            "errors": self.errors,
            "timings": self.timings,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["id", "noise", "method", "f1"])
        writer.writeheader()
        for row in self.results:
            writer.writerow(row)
        return buf.getvalue()


def f1_score(pred: LabelField, gt: LabelField) -> float:
    """2TP / (2TP + FN + FP) with foreground as the positive class.

    Defined as 1.0 when prediction and reference are both all-background.
    """
    if (pred.height, pred.width) != (gt.height, gt.width):
        raise DimensionMismatch("prediction and ground truth dimensions differ")
    p = pred.flat.astype(bool)
    g = gt.flat.astype(bool)
    tp = int((p & g).sum())
    fp = int((p & ~g).sum())
    fn = int((~p & g).sum())
    if tp == fp == fn == 0:
        return 1.0
    return 2.0 * tp / (2.0 * tp + fn + fp)


def noise_field(shape: tuple, fraction: float, rng_seed: int) -> np.ndarray:
    """The additive Gaussian noise used by add_noise, in 8-bit units
    (sigma = fraction * 255), before any clipping."""
    rng = np.random.default_rng(rng_seed)
    return rng.normal(0.0, fraction * DYNAMIC_RANGE, shape)


def add_noise(image: ImageObservation, fraction: float, rng_seed: int) -> ImageObservation:
    """Contaminate each channel independently with white Gaussian noise of
    standard deviation fraction * 255, clipped back to the valid range."""
    if fraction < 0:
        raise ValueError("fraction must be >= 0")
    if fraction == 0.0:
        return image
    noisy = image.pixels * DYNAMIC_RANGE + noise_field(image.pixels.shape, fraction, rng_seed)
    return ImageObservation(np.clip(noisy, 0.0, DYNAMIC_RANGE) / DYNAMIC_RANGE)


def load_corpus(root_path: str | Path) -> list[CorpusEntry]:
    """Load a corpus directory (images/, gt/, seeds/ with shared basenames).

    Entries come back sorted by id. Any incomplete or undecodable entry
    aborts the load with a CorpusError naming every broken id.
    """
    root = Path(root_path)
    image_dir = root / "images"
    if not image_dir.is_dir():
        return []
    entries = []
    problems = []
    for image_path in sorted(image_dir.glob("*.png")):
        entry_id = image_path.stem
        gt_path = root / "gt" / image_path.name
        seeds_path = root / "seeds" / image_path.name
        missing = [p.parent.name for p in (gt_path, seeds_path) if not p.is_file()]
        if missing:
            problems.append(f"{entry_id}: missing {', '.join(missing)} file")
            continue
        try:
            entries.append(
                CorpusEntry(
                    id=entry_id,
                    image=ImageObservation.from_png(image_path.read_bytes()),
                    gt=LabelField.from_png(gt_path.read_bytes()),
                    seeds=SeedMask.from_png(seeds_path.read_bytes()),
                )
            )
        except DfrfError as exc:
            problems.append(f"{entry_id}: {exc}")
    if problems:
        raise CorpusError(problems)
    return entries


def _entry_seed(rng_seed: int, entry_id: str, fraction: float) -> int:
    digest = zlib.crc32(f"{entry_id}:{fraction!r}".encode())
    key = np.random.SeedSequence(entropy=rng_seed, spawn_key=(digest,))
    return int(key.generate_state(1)[0])


def _run_cell(entry: CorpusEntry, config: DfrfConfig, fraction: float, rng_seed: int):
    """All methods for one (entry, noise) cell; returns (results, timings)."""
    noisy = add_noise(entry.image, fraction, _entry_seed(rng_seed, entry.id, fraction))
    validate_inputs(noisy, entry.seeds)
    results, timings = [], []

    t0 = time.perf_counter()
    _, baseline = seed_unary(noisy, entry.seeds, rng_seed=config.rng_seed)
    timings.append(
        {"id": entry.id, "noise": fraction, "method": "unary", "seconds": time.perf_counter() - t0}
    )
    results.append(
        {"id": entry.id, "noise": fraction, "method": "unary", "f1": f1_score(baseline, entry.gt)}
    )

    t0 = time.perf_counter()
    labels, _ = run_dfrf(noisy, entry.seeds, config)
    timings.append(
        {"id": entry.id, "noise": fraction, "method": "dfrf", "seconds": time.perf_counter() - t0}
    )
    results.append(
        {"id": entry.id, "noise": fraction, "method": "dfrf", "f1": f1_score(labels, entry.gt)}
    )
    return results, timings


def _run_cell_safe(args):
    entry, config, fraction, rng_seed = args
    try:
        return _run_cell(entry, config, fraction, rng_seed), None
    except DfrfError as exc:
        return None, {"id": entry.id, "noise": fraction, "error": str(exc)}


def run_bench(
    corpus: list[CorpusEntry],
    config: DfrfConfig,
    noise_fractions: list[float],
    rng_seed: int = 0,
    jobs: int = 1,
) -> BenchReport:
    """Score the layered model and the unary baseline over the corpus."""
    if not corpus:
        raise ValueError("corpus is empty")
    report = BenchReport(
        config=asdict(config),
        rng_seed=rng_seed,
        noise_fractions=[float(f) for f in noise_fractions],
    )
    cells = [
        (entry, config, float(fraction), rng_seed)
        for entry in corpus
        for fraction in noise_fractions
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_cell_safe, cells))
    else:
        outcomes = [_run_cell_safe(cell) for cell in cells]
    for ok, err in outcomes:
        if err is not None:
            report.errors.append(err)
        else:
            results, timings = ok
            report.results.extend(results)
            report.timings.extend(timings)
    return report
