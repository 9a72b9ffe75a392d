"""Core domain types: images, seed masks, label fields, and run configuration.

Conventions used everywhere in the package:

* pixel grids are stored row-major as (height, width, ...) numpy arrays;
  the flat pixel index of (x, y) is ``y * width + x``;
* 8-bit sources are normalized to [0, 1] by division by 255;
* seed masks use the scribble color convention pure red (255, 0, 0) for
  foreground and pure blue (0, 0, 255) for background, anything else is
  unlabeled;
* label fields are binary, 1 = foreground, 0 = background, rendered to
  PNG as white on black.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, DimensionMismatch, MissingSeedClass

UNLABELED = 0
FG = 1
BG = 2


def _read_only(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ImageObservation:
    """RGB image with channels normalized to [0, 1]."""

    pixels: np.ndarray  # (H, W, 3) float64

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3:
            raise DimensionMismatch(f"expected (H, W, 3) pixels, got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise DimensionMismatch("image must be at least 1x1")
        if not np.isfinite(px).all() or px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("channel values must be finite and in [0, 1]")
        object.__setattr__(self, "pixels", _read_only(px))

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def n_pixels(self) -> int:
        return self.height * self.width

    @classmethod
    def from_uint8(cls, values: np.ndarray) -> "ImageObservation":
        values = np.asarray(values)
        if values.dtype != np.uint8:
            raise ValueError("expected uint8 source values")
        return cls(values.astype(np.float64) / 255.0)

    def to_uint8(self) -> np.ndarray:
        return np.rint(self.pixels * 255.0).astype(np.uint8)

    @classmethod
    def from_png(cls, data: bytes) -> "ImageObservation":
        return cls.from_uint8(decode_png_rgb(data))

    def to_png(self) -> bytes:
        return encode_png(self.to_uint8())


@dataclass(frozen=True)
class SeedMask:
    """Per-pixel annotation state: UNLABELED, FG or BG."""

    states: np.ndarray  # (H, W) uint8

    def __post_init__(self):
        st = np.asarray(self.states, dtype=np.uint8)
        if st.ndim != 2:
            raise DimensionMismatch(f"expected (H, W) states, got {st.shape}")
        if not np.isin(st, (UNLABELED, FG, BG)).all():
            raise ValueError("seed states must be UNLABELED, FG or BG")
        object.__setattr__(self, "states", _read_only(st))

    @property
    def height(self) -> int:
        return self.states.shape[0]

    @property
    def width(self) -> int:
        return self.states.shape[1]

    @property
    def fg_count(self) -> int:
        return int((self.states == FG).sum())

    @property
    def bg_count(self) -> int:
        return int((self.states == BG).sum())

    @classmethod
    def from_png(cls, data: bytes) -> "SeedMask":
        rgb = decode_png_rgb(data)
        states = np.zeros(rgb.shape[:2], dtype=np.uint8)
        states[(rgb == (255, 0, 0)).all(axis=2)] = FG
        states[(rgb == (0, 0, 255)).all(axis=2)] = BG
        return cls(states)

    def to_png(self) -> bytes:
        rgb = np.zeros((self.height, self.width, 3), dtype=np.uint8)
        rgb[self.states == FG] = (255, 0, 0)
        rgb[self.states == BG] = (0, 0, 255)
        return encode_png(rgb)


@dataclass(frozen=True)
class LabelField:
    """Binary per-pixel labeling, 1 = foreground."""

    labels: np.ndarray  # (H, W) uint8

    def __post_init__(self):
        lb = np.asarray(self.labels, dtype=np.uint8)
        if lb.ndim != 2:
            raise DimensionMismatch(f"expected (H, W) labels, got {lb.shape}")
        if lb.size and lb.max() > 1:
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "labels", _read_only(lb))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def flat(self) -> np.ndarray:
        return self.labels.reshape(-1)

    @classmethod
    def from_png(cls, data: bytes) -> "LabelField":
        rgb = decode_png_rgb(data)
        return cls((rgb.mean(axis=2) >= 128).astype(np.uint8))

    def to_png(self) -> bytes:
        gray = (self.labels * np.uint8(255)).astype(np.uint8)
        return encode_png(np.repeat(gray[:, :, None], 3, axis=2))


@dataclass(frozen=True)
class DfrfConfig:
    """Run configuration for the layered segmentation stack.

    The defaults are the full-scale schedule: 15 layers with the encoding
    node count growing 450 -> 660 in steps of 15. ``desk()`` gives a
    scaled-down schedule for interactive use. alpha blends the observation
    unary against agreement with the previous layer; beta scales the
    encoding-mediated pairwise term; spatial_scale weights position against
    color in the encoding features (larger keeps encoding nodes spatially
    compact under heavy color noise).
    """

    n_layers: int = 15
    nev_start: int = 450
    nev_step: int = 15
    alpha: float = 0.5
    beta: float = 2.0
    top_k: int = 8
    spatial_scale: float = 4.0
    icm_sweeps: int = 5
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_layers < 0:
            raise ValueError("n_layers must be >= 0")
        if self.nev_start < 1:
            raise ValueError("nev_start must be >= 1")
        if self.nev_step < 0:
            raise ValueError("nev_step must be >= 0")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.beta < 0.0:
            raise ValueError("beta must be >= 0")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.spatial_scale < 0.0:
            raise ValueError("spatial_scale must be >= 0")
        if self.icm_sweeps < 1:
            raise ValueError("icm_sweeps must be >= 1")

    @classmethod
    def full_scale(cls, **overrides) -> "DfrfConfig":
        return cls(**overrides)

    @classmethod
    def desk(cls, **overrides) -> "DfrfConfig":
        """Interactive schedule: 5 layers, 60 -> 140 encoding nodes."""
        args = dict(n_layers=5, nev_start=60, nev_step=20)
        args.update(overrides)
        return cls(**args)

    def layer_nodes(self) -> list[int]:
        return [self.nev_start + i * self.nev_step for i in range(self.n_layers)]


def validate_inputs(image: ImageObservation, seeds: SeedMask) -> None:
    """Check that the image and seed mask form a usable problem instance."""
    if (image.height, image.width) != (seeds.height, seeds.width):
        raise DimensionMismatch(
            f"image is {image.width}x{image.height} but seed mask is "
            f"{seeds.width}x{seeds.height}"
        )
    if seeds.fg_count == 0:
        raise MissingSeedClass("FG")
    if seeds.bg_count == 0:
        raise MissingSeedClass("BG")


def decode_png_rgb(data: bytes) -> np.ndarray:
    """Decode PNG (or other PIL-readable) bytes to an (H, W, 3) uint8 array."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            return np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, ValueError) as exc:
        raise DecodeError(f"could not decode image: {exc}") from exc


def encode_png(rgb: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
