"""Layer-wise MAP inference over encoding-mediated label fields.

Energy of one layer, for labels y, encoding memberships resp (row-sparse),
unary costs U, previous-layer labels p, and weights alpha, beta:

    E(y) = sum_j [ alpha * U_j(y_j) + (1 - alpha) * 1[y_j != p_j] ]
         + beta * sum_j sum_m resp[j,m] * (Rx_m - Sx_m(y_j)) / max(Rx_m, eps)

where R_m is the total membership mass of node m, S_m(c) the mass of node m
currently labeled c, and Rx/Sx exclude pixel j's own contribution
(Rx_m = R_m - resp[j,m], Sx_m(c) = S_m(c) - resp[j,m] * 1[y_j = c]). The
second sum charges each pixel the membership-weighted fraction of its nodes'
mass that disagrees with it, which expands to an explicit sum over ordered
pixel pairs

    beta * sum_{j != k} w_jk * 1[y_j != y_k],
    w_jk = sum_m resp[j,m] * resp[k,m] / max(R_m - resp[j,m], eps)

so the factorized form is a dense pairwise Potts model evaluated in
O(n_pixels * top_k). ``explicit_pairwise_energy`` computes the pair sum
directly and is the quadratic-cost oracle for the factorized path.

Minimization is exact ICM: pixels are visited in row-major order and
flipped only on a strictly negative energy delta, with the per-node label
statistics updated incrementally, so per-layer energy never increases.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from .core import DfrfConfig, ImageObservation, LabelField, SeedMask, validate_inputs
from .encoding import EncodingLayer, build_encoding_layer
from .errors import DimensionMismatch, InstanceTooLarge
from .mixture import UnaryField, seed_unary

EPS_NODE = 1e-12
EXPLICIT_PIXEL_LIMIT = 200


@dataclass(frozen=True)
class LayerEnergyParams:
    """Energy weights: alpha blends unary vs previous-layer agreement,
    beta scales the encoding-mediated pairwise term."""

    alpha: float = 0.5
    beta: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if self.beta < 0.0:
            raise ValueError("beta must be >= 0")


class NodeLabelStats:
    """Per-node, per-class running sums used by the incremental sweeps.

    mass[m, c]   = sum_j resp[j, m] * 1[y_j = c]
    inv_mass[m, c] = sum_j q[j, m] * 1[y_j = c]  with
    q[j, m] = resp[j, m] / max(R_m - resp[j, m], eps), the coefficient a
    flip of pixel k feels from pixel j's side of the pair (k, j).
    """

    __slots__ = ("mass", "inv_mass")

    def __init__(self, mass: np.ndarray, inv_mass: np.ndarray):
        self.mass = mass
        self.inv_mass = inv_mass

    @classmethod
    def from_labels(cls, enc: EncodingLayer, labels: np.ndarray) -> "NodeLabelStats":
        q = membership_inverse_weights(enc)
        lab = labels.reshape(-1)
        mass = np.zeros((enc.n_ev, 2))
        inv_mass = np.zeros((enc.n_ev, 2))
        flat_idx = enc.indices.reshape(-1)
        lab_rep = np.repeat(lab, enc.row_width)
        for c in (0, 1):
            sel = lab_rep == c
            mass[:, c] = np.bincount(
                flat_idx[sel], weights=enc.values.reshape(-1)[sel], minlength=enc.n_ev
            )
            inv_mass[:, c] = np.bincount(
                flat_idx[sel], weights=q.reshape(-1)[sel], minlength=enc.n_ev
            )
        return cls(mass, inv_mass)

    def copy(self) -> "NodeLabelStats":
        return NodeLabelStats(self.mass.copy(), self.inv_mass.copy())

    def check_consistent(self, enc: EncodingLayer, atol: float = 1e-9) -> None:
        if not np.allclose(self.mass.sum(axis=1), enc.node_mass, atol=atol):
            raise ValueError("node label stats inconsistent with node masses")


class SweepResult(NamedTuple):
    labels: np.ndarray
    stats: NodeLabelStats
    flips: int
    energy_delta: float


@dataclass
class LayerRecord:
    layer: int
    n_ev: int
    energy_before: float
    energy_after: float
    flips: int
    seconds: float


@dataclass
class LayerTrace:
    records: list[LayerRecord] = field(default_factory=list)

    def to_jsonable(self) -> list[dict]:
        return [vars(r) for r in self.records]


def membership_inverse_weights(enc: EncodingLayer) -> np.ndarray:
    """q[j, t] = resp[j, t] / max(R_m - resp[j, t], eps) per stored entry."""
    rest = enc.node_mass[enc.indices] - enc.values
    return enc.values / np.maximum(rest, EPS_NODE)


def _flat_labels(labels) -> np.ndarray:
    arr = labels.labels if isinstance(labels, LabelField) else np.asarray(labels)
    return arr.reshape(-1).astype(np.int8)


def _flat_unary(unary) -> np.ndarray:
    if isinstance(unary, UnaryField):
        return unary.flat
    arr = np.asarray(unary, dtype=np.float64)
    return arr.reshape(-1, 2)


def _check_instance(n, enc, unary, prev):
    if enc.n_pixels != n or unary.shape[0] != n or prev.shape[0] != n:
        raise DimensionMismatch(
            f"inconsistent instance: labels={n}, enc={enc.n_pixels}, "
            f"unary={unary.shape[0]}, prev={prev.shape[0]}"
        )


def unary_energy(labels, unary, prev, params: LayerEnergyParams) -> float:
    y = _flat_labels(labels)
    u = _flat_unary(unary)
    p = _flat_labels(prev)
    obs = u[np.arange(y.shape[0]), y].sum()
    disagree = float((y != p).sum())
    return params.alpha * float(obs) + (1.0 - params.alpha) * disagree


def layer_energy(labels, enc: EncodingLayer, unary, prev, params: LayerEnergyParams) -> float:
    """Total layer energy in factorized O(n_pixels * top_k) form."""
    y = _flat_labels(labels)
    u = _flat_unary(unary)
    p = _flat_labels(prev)
    _check_instance(y.shape[0], enc, u, p)

    stats = NodeLabelStats.from_labels(enc, y)
    rest = enc.node_mass[enc.indices] - enc.values
    same = stats.mass[enc.indices, y[:, None].astype(np.int64)] - enc.values
    pair = (enc.values * (rest - same) / np.maximum(rest, EPS_NODE)).sum()
    return unary_energy(y, u, p, params) + params.beta * float(pair)


def explicit_pairwise_energy(
    labels, enc: EncodingLayer, unary, prev, params: LayerEnergyParams
) -> float:
    """Quadratic-cost oracle: same energy via explicit ordered pixel pairs."""
    y = _flat_labels(labels)
    u = _flat_unary(unary)
    p = _flat_labels(prev)
    n = y.shape[0]
    if n > EXPLICIT_PIXEL_LIMIT:
        raise InstanceTooLarge(
            f"explicit pairwise evaluation is limited to {EXPLICIT_PIXEL_LIMIT} pixels"
        )
    _check_instance(n, enc, u, p)

    resp = enc.dense()
    rest = enc.node_mass[None, :] - resp
    w = (resp / np.maximum(rest, EPS_NODE)) @ resp.T
    np.fill_diagonal(w, 0.0)
    disagree = y[:, None] != y[None, :]
    return unary_energy(y, u, p, params) + params.beta * float(w[disagree].sum())


@njit(cache=True)
def _icm_kernel(indices, values, q, node_mass, inv_total, mass, inv_mass,
                unary, prev, labels, alpha, beta, eps):
    n, kk = indices.shape
    flips = 0
    delta_sum = 0.0
    for j in range(n):
        a = labels[j]
        b = 1 - a
        d = alpha * (unary[j, b] - unary[j, a])
        if prev[j] == a:
            d += 1.0 - alpha
        elif prev[j] == b:
            d -= 1.0 - alpha
        if beta > 0.0:
            pair = 0.0
            for t in range(kk):
                m = indices[j, t]
                v = values[j, t]
                qv = q[j, t]
                rest = node_mass[m] - v
                denom = rest if rest > eps else eps
                # Source side: mass of m (minus self) labeled unlike j.
                same_a = mass[m, a] - v
                same_b = mass[m, b]
                pair += v * ((rest - same_b) - (rest - same_a)) / denom
                # Target side: other pixels of m charged through their own
                # denominators, with pixel j's entry removed.
                inv_a = inv_mass[m, a] - qv
                inv_b = inv_mass[m, b]
                rest_inv = inv_total[m] - qv
                pair += v * ((rest_inv - inv_b) - (rest_inv - inv_a))
            d += beta * pair
        if d < 0.0:
            labels[j] = b
            flips += 1
            delta_sum += d
            for t in range(kk):
                m = indices[j, t]
                v = values[j, t]
                qv = q[j, t]
                mass[m, a] -= v
                mass[m, b] += v
                inv_mass[m, a] -= qv
                inv_mass[m, b] += qv
    return flips, delta_sum


def icm_sweep(
    labels,
    enc: EncodingLayer,
    unary,
    prev,
    params: LayerEnergyParams,
    stats: NodeLabelStats,
) -> SweepResult:
    """One row-major ICM pass; flips only on strictly negative exact deltas.

    Returns the new labels, updated stats, the flip count and the summed
    energy change (always <= 0).
    """
    y = _flat_labels(labels).copy()
    u = np.ascontiguousarray(_flat_unary(unary))
    p = _flat_labels(prev)
    _check_instance(y.shape[0], enc, u, p)
    q = membership_inverse_weights(enc)
    new_stats = stats.copy()
    flips, delta = _icm_kernel(
        enc.indices,
        enc.values,
        q,
        enc.node_mass,
        _node_inverse_totals(enc, q),
        new_stats.mass,
        new_stats.inv_mass,
        u,
        p,
        y,
        float(params.alpha),
        float(params.beta),
        EPS_NODE,
    )
    return SweepResult(y, new_stats, int(flips), float(delta))


def _node_inverse_totals(enc: EncodingLayer, q: np.ndarray) -> np.ndarray:
    return np.bincount(enc.indices.reshape(-1), weights=q.reshape(-1), minlength=enc.n_ev)


def map_inference(
    unary,
    enc: EncodingLayer,
    prev,
    params: LayerEnergyParams,
    max_sweeps: int = 5,
) -> tuple[np.ndarray, float]:
    """Run ICM from the previous layer's labels until a fixed point.

    Returns the final flat labels and their exact energy. Stops early when
    a sweep makes no flips; energy never rises above the starting point.
    """
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    y = _flat_labels(prev).copy()
    p = _flat_labels(prev)
    stats = NodeLabelStats.from_labels(enc, y)
    for _ in range(max_sweeps):
        y, stats, flips, _ = icm_sweep(y, enc, unary, prev, params, stats)
        if flips == 0:
            break
    return y, layer_energy(y, enc, unary, p, params)


def run_dfrf(
    image: ImageObservation, seeds: SeedMask, config: DfrfConfig
) -> tuple[LabelField, LayerTrace]:
    """Full coarse-to-fine stack: seed unaries, then one refinement pass per
    encoding layer with the node count growing along the schedule."""
    validate_inputs(image, seeds)
    shape = (image.height, image.width)
    params = LayerEnergyParams(alpha=config.alpha, beta=config.beta)
    seed_seq = np.random.SeedSequence(config.rng_seed)
    layer_seeds = [int(s.generate_state(1)[0]) for s in seed_seq.spawn(config.n_layers + 1)]

    unary, labels = seed_unary(image, seeds, rng_seed=layer_seeds[0])
    y = labels.flat.astype(np.int8)
    trace = LayerTrace()
    for i, n_ev in enumerate(config.layer_nodes(), start=1):
        t0 = time.perf_counter()
        enc = build_encoding_layer(
            image, n_ev, config.top_k, config.spatial_scale, layer_seeds[i]
        )
        prev = y
        e_before = layer_energy(prev, enc, unary, prev, params)
        y, e_after = map_inference(unary, enc, prev, params, config.icm_sweeps)
        flips = int((y != prev).sum())
        trace.records.append(
            LayerRecord(
                layer=i,
                n_ev=n_ev,
                energy_before=e_before,
                energy_after=e_after,
                flips=flips,
                seconds=time.perf_counter() - t0,
            )
        )
    return LabelField(y.reshape(shape).astype(np.uint8)), trace
