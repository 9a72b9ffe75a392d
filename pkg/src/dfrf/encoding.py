"""Encoding layers: a small mixture over pixel features whose per-pixel
responsibilities wire every pixel to a handful of shared latent nodes.

A layer with n_ev nodes clusters the (color, scaled position) features of
the image; each pixel keeps only its top_k strongest node memberships,
renormalized. Node m then carries total membership mass R_m. Because any
two pixels sharing a node interact through it, the bipartite structure
mediates dense pixel-to-pixel coupling at O(n_pixels * top_k) cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ImageObservation
from .errors import DimensionMismatch
from .mixture import MixtureModel, component_log_densities, fit_fmm

FIT_SUBSAMPLE_CAP = 20_000
ENCODER_EM_ITERS = 8
ENCODER_EM_TOL = 1e-4


@dataclass(frozen=True)
class EncodingLayer:
    """Row-sparse pixel-to-node membership for one layer.

    ``indices[j]`` lists the node ids pixel j is attached to and
    ``values[j]`` the matching membership weights (each row sums to 1).
    Rows may contain padding entries with weight 0 when a pixel has fewer
    than top_k usable nodes; padding reuses a valid node id.
    """

    n_ev: int
    model: MixtureModel | None
    indices: np.ndarray  # (n_pixels, kk) int32
    values: np.ndarray  # (n_pixels, kk) float64
    node_mass: np.ndarray  # (n_ev,) float64

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int32)
        val = np.ascontiguousarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 2:
            raise DimensionMismatch("indices and values must share (n, kk) shape")
        if idx.size and (idx.min() < 0 or idx.max() >= self.n_ev):
            raise ValueError("node index out of range")
        if (val < 0).any():
            raise ValueError("membership weights must be non-negative")
        err = np.abs(val.sum(axis=1) - 1.0)
        if err.size and err.max() > 1e-9:
            raise ValueError("membership rows must sum to 1")
        mass = np.asarray(self.node_mass, dtype=np.float64)
        if mass.shape != (self.n_ev,):
            raise DimensionMismatch("node_mass must have one entry per node")
        if abs(mass.sum() - idx.shape[0]) > 1e-6:
            raise ValueError("node masses must add up to the pixel count")
        for arr in (idx, val, mass):
            arr.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "node_mass", mass)

    @property
    def n_pixels(self) -> int:
        return self.indices.shape[0]

    @property
    def row_width(self) -> int:
        return self.indices.shape[1]

    def dense(self) -> np.ndarray:
        """Dense (n_pixels, n_ev) membership matrix; for small instances."""
        out = np.zeros((self.n_pixels, self.n_ev))
        np.add.at(out, (np.arange(self.n_pixels)[:, None], self.indices), self.values)
        return out

    @classmethod
    def from_dense(cls, resp: np.ndarray, model: MixtureModel | None = None) -> "EncodingLayer":
        """Build a layer from a dense responsibility matrix (rows sum to 1)."""
        resp = np.asarray(resp, dtype=np.float64)
        n, k = resp.shape
        indices = np.tile(np.arange(k, dtype=np.int32), (n, 1))
        return cls(
            n_ev=k,
            model=model,
            indices=indices,
            values=resp,
            node_mass=resp.sum(axis=0),
        )


def pixel_features(image: ImageObservation, spatial_scale: float) -> np.ndarray:
    """Per-pixel feature rows (r, g, b, scale*x/W, scale*y/H), row-major."""
    if spatial_scale < 0:
        raise ValueError("spatial_scale must be >= 0")
    h, w = image.height, image.width
    feats = np.empty((h * w, 5))
    feats[:, :3] = image.pixels.reshape(-1, 3)
    xs = np.tile(np.arange(w, dtype=np.float64), h)
    ys = np.repeat(np.arange(h, dtype=np.float64), w)
    feats[:, 3] = spatial_scale * xs / w
    feats[:, 4] = spatial_scale * ys / h
    return feats


def sparsify(resp_row: np.ndarray, top_k: int) -> np.ndarray:
    """Keep the top_k largest entries of a probability vector, renormalized.

    Ties are broken toward the lower node index. Returns a dense row of the
    original length with the dropped entries zeroed.
    """
    row = np.asarray(resp_row, dtype=np.float64)
    if top_k >= row.shape[0]:
        return row.copy()
    order = np.argsort(-row, kind="stable")[:top_k]
    out = np.zeros_like(row)
    out[order] = row[order]
    total = out.sum()
    if total > 0:
        out /= total
    return out


def _topk_rows(scores: np.ndarray, top_k: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-row top_k selection on a score matrix, canonically ordered.

    Returns (indices, gathered scores); within each row the selected columns
    are sorted by descending score with index as tie-break.
    """
    n, k = scores.shape
    kk = min(top_k, k)
    if kk == k:
        idx = np.tile(np.arange(k, dtype=np.int64), (n, 1))
    else:
        idx = np.argpartition(-scores, kk - 1, axis=1)[:, :kk]
    picked = np.take_along_axis(scores, idx, axis=1)
    # Canonical order inside the row; stable sort on -score keeps the lower
    # original index first only after a secondary sort on the index.
    reorder = np.lexsort((idx, -picked), axis=1)
    idx = np.take_along_axis(idx, reorder, axis=1)
    picked = np.take_along_axis(picked, reorder, axis=1)
    return idx.astype(np.int32), picked


def build_encoding_layer(
    image: ImageObservation,
    n_ev: int,
    top_k: int,
    spatial_scale: float,
    rng_seed: int,
) -> EncodingLayer:
    """Cluster pixel features into n_ev nodes and sparsify the memberships.

    Fitting subsamples at most FIT_SUBSAMPLE_CAP pixels (uniformly, seeded);
    every pixel is then scored against the fitted mixture. Large fits run in
    single precision with a capped EM schedule; the kept memberships are
    renormalized in double precision.
    """
    n_pixels = image.n_pixels
    if not 1 <= n_ev < n_pixels:
        raise ValueError(f"n_ev must be in [1, {n_pixels - 1}], got {n_ev}")
    if top_k < 1:
        raise ValueError("top_k must be >= 1")

    feats = pixel_features(image, spatial_scale)
    rng = np.random.default_rng(rng_seed)
    if n_pixels > FIT_SUBSAMPLE_CAP:
        pick = rng.choice(n_pixels, size=FIT_SUBSAMPLE_CAP, replace=False)
        pick.sort()
        fit_feats = feats[pick]
    else:
        fit_feats = feats

    big = fit_feats.shape[0] * n_ev > 500_000
    model = fit_fmm(
        fit_feats,
        n_ev,
        rng_seed=int(rng.integers(2**63)),
        max_iter=ENCODER_EM_ITERS if big else 50,
        tol=ENCODER_EM_TOL if big else 1e-5,
        dtype=np.float32 if big else np.float64,
    )

    log_p = component_log_densities(
        model, feats.astype(np.float32) if big else feats
    )
    indices, top_log = _topk_rows(log_p, top_k)
    top_log = top_log.astype(np.float64)
    top_log -= top_log.max(axis=1, keepdims=True)
    values = np.exp(top_log)
    values /= values.sum(axis=1, keepdims=True)

    node_mass = np.bincount(
        indices.reshape(-1), weights=values.reshape(-1), minlength=n_ev
    )
    return EncodingLayer(
        n_ev=n_ev, model=model, indices=indices, values=values, node_mass=node_mass
    )
