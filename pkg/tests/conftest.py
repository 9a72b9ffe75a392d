import numpy as np
import pytest

from dfrf.core import BG, FG, ImageObservation, SeedMask
from dfrf.encoding import EncodingLayer


def flat_two_color_image(width=8, height=8, left=(0.9, 0.1, 0.1), right=(0.1, 0.1, 0.9)):
    """Image whose left half is one flat color and right half another."""
    px = np.empty((height, width, 3))
    px[:, : width // 2] = left
    px[:, width // 2 :] = right
    return ImageObservation(px)


def two_color_seeds(width=8, height=8, count=6):
    """Seed mask sampling both halves of flat_two_color_image."""
    states = np.zeros((height, width), dtype=np.uint8)
    ys = np.arange(count) % height
    states[ys, np.zeros(count, dtype=int)] = FG
    states[ys, np.full(count, width - 1)] = BG
    return SeedMask(states)


def random_instance(rng, n_pixels=None, n_nodes=None, peaky=False):
    """A small free-standing energy instance: memberships, unary, prev.

    ``peaky`` draws rows dominated by one node, mirroring sparsified
    mixture posteriors; otherwise rows are uniform random probability
    vectors. The unary is a pair of negative log posteriors.
    """
    n = int(n_pixels if n_pixels is not None else rng.integers(2, 13))
    k = int(n_nodes if n_nodes is not None else rng.integers(2, 4))
    if peaky:
        primary = rng.integers(0, k, n)
        dom = 0.6 + rng.random(n) * 0.37
        rest = rng.random((n, k))
        rest[np.arange(n), primary] = 0.0
        rest /= np.maximum(rest.sum(axis=1, keepdims=True), 1e-12)
        resp = rest * (1 - dom)[:, None]
        resp[np.arange(n), primary] = dom
    else:
        resp = rng.random((n, k)) + 1e-9
        resp /= resp.sum(axis=1, keepdims=True)
    enc = EncodingLayer.from_dense(resp)
    p = rng.beta(0.25, 0.25, n).clip(1e-4, 1 - 1e-4)
    unary = np.stack([-np.log(1 - p), -np.log(p)], axis=1)
    prev = (unary[:, 1] < unary[:, 0]).astype(np.int8)
    return enc, unary, prev


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
