"""Synthetic two-region corpus generator.

Produces small RGB images of a smooth random blob (foreground) over a
background, with distinct per-region color distributions, mild texture
jitter and an illumination gradient, plus matching ground-truth masks and
scribble seed masks. The generated corpus is what the benchmark and the
acceptance run use, so everything is reproducible from a single seed and
no external data is required.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import BG, FG, ImageObservation, LabelField, SeedMask


@dataclass(frozen=True)
class SyntheticEntry:
    id: str
    image: ImageObservation
    gt: LabelField
    seeds: SeedMask


def _blob_mask(width, height, rng):
    """Closed star-shaped region: radius modulated by a few harmonics."""
    cx = width * (0.38 + 0.24 * rng.random())
    cy = height * (0.38 + 0.24 * rng.random())
    r0 = 0.30 * min(width, height) * (0.75 + 0.5 * rng.random())
    amps = rng.random(4) * 0.13
    phases = rng.random(4) * 2 * np.pi
    ys, xs = np.mgrid[0:height, 0:width]
    dx, dy = xs - cx, ys - cy
    theta = np.arctan2(dy, dx)
    radius = r0 * (
        1.0 + sum(a * np.cos((k + 2) * theta + p) for k, (a, p) in enumerate(zip(amps, phases)))
    )
    return (dx * dx + dy * dy) <= radius * radius


def _erode(mask, rounds):
    """Binary erosion with the 4-neighborhood, via array shifts."""
    m = mask.copy()
    for _ in range(rounds):
        inner = m.copy()
        inner[1:, :] &= m[:-1, :]
        inner[:-1, :] &= m[1:, :]
        inner[:, 1:] &= m[:, :-1]
        inner[:, :-1] &= m[:, 1:]
        inner[0, :] = inner[-1, :] = False
        inner[:, 0] = inner[:, -1] = False
        m = inner
    return m

def _stamp_discs(region, rng, n_discs, radius, out):
    """Mark a few discs whose centers are drawn from the allowed region."""
    ys, xs = np.nonzero(region)
    if ys.size == 0:
        return
    h, w = region.shape
    gy, gx = np.mgrid[0:h, 0:w]
    for _ in range(n_discs):
        i = rng.integers(ys.size)
        cy, cx = ys[i], xs[i]
        disc = (gx - cx) ** 2 + (gy - cy) ** 2 <= radius * radius
        out |= disc & region


def make_entry(entry_id, width, height, rng) -> SyntheticEntry:
    gt = _blob_mask(width, height, rng)
    # Guard against degenerate blobs touching too little or too much area.
    while not 0.12 < gt.mean() < 0.55:
        gt = _blob_mask(width, height, rng)

    # Two color distributions separated in at least two channels, plus
    # jitter and a gentle illumination ramp.
    while True:
        fg_color = 0.12 + 0.76 * rng.random(3)
        bg_color = 0.12 + 0.76 * rng.random(3)
        gaps = np.sort(np.abs(fg_color - bg_color))
        if gaps[-1] >= 0.5 and gaps[-2] >= 0.25:
            break
    jitter = 0.02 + 0.03 * rng.random()
    img = np.where(gt[:, :, None], fg_color, bg_color)
    img = img + rng.normal(0.0, jitter, img.shape)
    ramp_dir = rng.random(2) - 0.5
    ys, xs = np.mgrid[0:height, 0:width]
    ramp = (ramp_dir[0] * xs / width + ramp_dir[1] * ys / height) * 0.08
    img = np.clip(img + ramp[:, :, None], 0.0, 1.0)

    fg_core = _erode(gt, 3)
    bg_core = _erode(~gt, 3)
    if fg_core.sum() < 30:
        fg_core = _erode(gt, 1)
    seed_fg = np.zeros_like(gt)
    seed_bg = np.zeros_like(gt)
    _stamp_discs(fg_core, rng, 3, 2.5, seed_fg)
    _stamp_discs(bg_core, rng, 4, 2.5, seed_bg)
    seed_fg &= fg_core
    seed_bg &= bg_core

    states = np.zeros(gt.shape, dtype=np.uint8)
    states[seed_fg] = FG
    states[seed_bg] = BG
    image = ImageObservation.from_uint8(np.rint(img * 255).astype(np.uint8))
    return SyntheticEntry(
        id=entry_id,
        image=image,
        gt=LabelField(gt.astype(np.uint8)),
        seeds=SeedMask(states),
    )


def generate_corpus(
    out_dir: str | Path,
    n_images: int = 20,
    width: int = 96,
    height: int = 96,
    rng_seed: int = 0,
) -> list[str]:
    """Write a corpus (images/, gt/, seeds/) and return the entry ids."""
    out = Path(out_dir)
    for sub in ("images", "gt", "seeds"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(rng_seed)
    ids = []
    for i in range(n_images):
        entry_id = f"synth_{i:03d}"
        entry = make_entry(entry_id, width, height, rng)
        while entry.seeds.fg_count < 5 or entry.seeds.bg_count < 5:
            entry = make_entry(entry_id, width, height, rng)
        (out / "images" / f"{entry_id}.png").write_bytes(entry.image.to_png())
        (out / "gt" / f"{entry_id}.png").write_bytes(entry.gt.to_png())
        (out / "seeds" / f"{entry_id}.png").write_bytes(entry.seeds.to_png())
        ids.append(entry_id)
    return ids
