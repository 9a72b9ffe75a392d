"""Finite mixture models with diagonal covariances, fit by EM.

The same machinery serves two purposes: the pair of seed-trained color
mixtures that produce the per-pixel unary potentials, and the larger
feature mixtures that define the encoding layers. Fitting uses k-means++
initialization followed by EM with a variance floor; all randomness flows
through an explicit seed so fits are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import BG, FG, ImageObservation, LabelField, SeedMask, validate_inputs
from .errors import DimensionMismatch, InsufficientSamples, NonFiniteInput

VARIANCE_FLOOR = 1e-6
LOG_2PI = float(np.log(2.0 * np.pi))
# Exponent clamp: keeps exp() off the subnormal slow path; anything this far
# below the row maximum carries no posterior mass at the tolerances used here.
EXP_CLAMP = {np.dtype(np.float32): np.float32(-80.0), np.dtype(np.float64): -700.0}


@dataclass(frozen=True)
class MixtureModel:
    """Weighted Gaussian mixture with diagonal covariances."""

    weights: np.ndarray  # (k,)
    means: np.ndarray  # (k, d)
    variances: np.ndarray  # (k, d), >= VARIANCE_FLOOR
    train_log_likelihoods: tuple = ()  # per-EM-iteration, diagnostic only

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        mu = np.asarray(self.means, dtype=np.float64)
        var = np.asarray(self.variances, dtype=np.float64)
        if w.ndim != 1 or mu.ndim != 2 or var.shape != mu.shape or w.shape[0] != mu.shape[0]:
            raise DimensionMismatch("inconsistent mixture parameter shapes")
        if w.shape[0] < 1:
            raise ValueError("mixture needs at least one component")
        if abs(w.sum() - 1.0) > 1e-9 or (w < 0).any():
            raise ValueError("weights must be a probability vector")
        if (var < VARIANCE_FLOOR * (1 - 1e-12)).any():
            raise ValueError("variances below floor")
        for name, arr in (("weights", w), ("means", mu), ("variances", var)):
            if not np.isfinite(arr).all():
                raise NonFiniteInput(f"non-finite {name}")
            arr.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", var)

    @property
    def k(self) -> int:
        return self.weights.shape[0]

    @property
    def d(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class UnaryField:
    """Per-pixel negative log posterior for background (0) and foreground (1)."""

    neg_log: np.ndarray  # (H, W, 2) float64, finite

    def __post_init__(self):
        nl = np.asarray(self.neg_log, dtype=np.float64)
        if nl.ndim != 3 or nl.shape[2] != 2:
            raise DimensionMismatch(f"expected (H, W, 2) costs, got {nl.shape}")
        if not np.isfinite(nl).all():
            raise NonFiniteInput("unary costs must be finite")
        nl.setflags(write=False)
        object.__setattr__(self, "neg_log", nl)

    @property
    def height(self) -> int:
        return self.neg_log.shape[0]

    @property
    def width(self) -> int:
        return self.neg_log.shape[1]

    @property
    def flat(self) -> np.ndarray:
        return self.neg_log.reshape(-1, 2)


def _check_samples(samples: np.ndarray) -> np.ndarray:
    x = np.asarray(samples)
    if x.ndim != 2:
        raise DimensionMismatch(f"expected (n, d) samples, got {x.shape}")
    if not np.isfinite(x).all():
        raise NonFiniteInput("samples contain non-finite values")
    return x


def _log_density(means, variances, weights, x, out=None, scratch=None):
    """Componentwise log(w_c * N(x; mu_c, diag var_c)), shape (n, k).

    Expanded as a pair of matrix products so large evaluations stay in BLAS:
    (x - mu)^2 / var = x^2 * (1/var) - 2 x * (mu/var) + mu^2/var. ``out`` and
    ``scratch`` let hot callers reuse (n, k) buffers; the combining steps run
    in place, which matters at tens of millions of entries.
    """
    inv = 1.0 / variances
    dt = x.dtype
    quad = np.matmul(x * x, (0.5 * inv).T.astype(dt, copy=False), out=out)
    cross = np.matmul(x, (means * inv).T.astype(dt, copy=False), out=scratch)
    const = 0.5 * (
        (means * means * inv).sum(axis=1)
        + np.log(variances).sum(axis=1)
        + means.shape[1] * LOG_2PI
    ) - np.log(weights)
    np.subtract(cross, quad, out=quad)
    quad -= const.astype(dt, copy=False)
    return quad


def _exp_normalize_rows(log_p):
    """In place: log_p becomes row-normalized exp(log_p - rowmax).

    Returns (responsibilities alias, per-row log-sum-exp). The shifted
    exponent is clamped to dodge subnormal arithmetic; the discarded mass is
    far below every tolerance in this package.
    """
    shift = log_p.max(axis=1, keepdims=True)
    np.subtract(log_p, shift, out=log_p)
    np.maximum(log_p, EXP_CLAMP[log_p.dtype], out=log_p)
    np.exp(log_p, out=log_p)
    row_sum = log_p.sum(axis=1, keepdims=True)
    lse = np.log(row_sum[:, 0], dtype=np.float64) + shift[:, 0]
    log_p /= row_sum
    return log_p, lse


def _logsumexp_rows(log_p):
    m = log_p.max(axis=1, keepdims=True)
    return m[:, 0] + np.log(np.exp(log_p - m).sum(axis=1))


@njit(cache=True)
def _kmeanspp_kernel(x, first, draws, centers):
    n, d = x.shape
    k = centers.shape[0]
    for j in range(d):
        centers[0, j] = x[first, j]
    d2 = np.empty(n, dtype=x.dtype)
    for i in range(n):
        s = 0.0
        for j in range(d):
            diff = x[i, j] - centers[0, j]
            s += diff * diff
        d2[i] = s
    for c in range(1, k):
        total = 0.0
        for i in range(n):
            total += d2[i]
        idx = n - 1
        if total <= 0.0:
            idx = min(int(draws[c - 1] * n), n - 1)
        else:
            target = draws[c - 1] * total
            acc = 0.0
            for i in range(n):
                acc += d2[i]
                if acc >= target:
                    idx = i
                    break
        for j in range(d):
            centers[c, j] = x[idx, j]
        for i in range(n):
            s = 0.0
            for j in range(d):
                diff = x[i, j] - centers[c, j]
                s += diff * diff
            if s < d2[i]:
                d2[i] = s
    return centers


def _kmeanspp_centers(x, k, rng):
    """k-means++ seeding: distance-squared sampling of successive centers."""
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]), dtype=x.dtype)
    first = int(rng.integers(n))
    draws = rng.random(max(k - 1, 1))
    return _kmeanspp_kernel(x, first, draws, centers)


def fit_fmm(
    samples: np.ndarray,
    k: int,
    rng_seed: int,
    max_iter: int = 50,
    tol: float = 1e-5,
    dtype=np.float64,
) -> MixtureModel:
    """Fit a k-component diagonal Gaussian mixture by EM.

    k-means++ picks the initial means; variances start at the per-dimension
    sample variance. EM stops when the relative log-likelihood improvement
    drops below ``tol`` or after ``max_iter`` iterations. A component whose
    posterior mass collapses to zero is re-seeded at the sample the current
    mixture explains worst.
    """
    x64 = _check_samples(samples).astype(np.float64)
    n, d = x64.shape
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < k:
        raise InsufficientSamples(f"need at least {k} samples for k={k}, got {n}")

    x = x64.astype(dtype, copy=False)
    rng = np.random.default_rng(rng_seed)
    means = _kmeanspp_centers(x, k, rng).astype(dtype)
    # Isotropic starting variance keeps the relative scaling of the feature
    # dimensions meaningful during the first assignments; EM then learns the
    # per-dimension spread within each basin.
    base_var = np.full(d, max(float(x64.var(axis=0).mean()), VARIANCE_FLOOR))
    variances = np.tile(base_var, (k, 1)).astype(dtype)
    weights = np.full(k, 1.0 / k, dtype=dtype)

    history = []
    prev_ll = -np.inf
    buf = np.empty((n, k), dtype=dtype)
    scratch = np.empty((n, k), dtype=dtype)
    xx = x * x
    for _ in range(max_iter):
        log_p = _log_density(means, variances, weights, x, out=buf, scratch=scratch)
        resp, lse = _exp_normalize_rows(log_p)
        ll = float(lse.sum())
        history.append(ll)

        mass = resp.sum(axis=0, dtype=np.float64)
        empty = mass <= n * 1e-12
        if empty.any():
            # Re-seed dead components at the worst-explained samples.
            worst = np.argsort(lse)
            for j, comp in enumerate(np.flatnonzero(empty)):
                means[comp] = x[worst[j % n]]
                variances[comp] = base_var
                mass[comp] = 1.0
            weights = (mass / mass.sum()).astype(dtype)
            prev_ll = -np.inf
            continue

        weights = (mass / n).astype(dtype)
        mass = mass.astype(dtype)
        means = (resp.T @ x) / mass[:, None]
        second = (resp.T @ xx) / mass[:, None]
        variances = np.maximum(second - means * means, VARIANCE_FLOOR).astype(dtype)

        if np.isfinite(prev_ll) and ll - prev_ll <= tol * abs(prev_ll):
            break
        prev_ll = ll

    w64 = np.asarray(weights, dtype=np.float64)
    return MixtureModel(
        weights=w64 / w64.sum(),
        means=np.asarray(means, dtype=np.float64),
        variances=np.maximum(np.asarray(variances, dtype=np.float64), VARIANCE_FLOOR),
        train_log_likelihoods=tuple(history),
    )


def component_log_densities(model: MixtureModel, features: np.ndarray) -> np.ndarray:
    x = _check_samples(features)
    if x.shape[1] != model.d:
        raise DimensionMismatch(
            f"features have dimension {x.shape[1]}, model expects {model.d}"
        )
    return _log_density(model.means, model.variances, model.weights, x)


def responsibilities(model: MixtureModel, features: np.ndarray) -> np.ndarray:
    """Posterior component probabilities per row, computed in log space."""
    log_p = component_log_densities(model, features).astype(np.float64, copy=False)
    resp, _ = _exp_normalize_rows(log_p)
    return resp


def log_likelihood(model: MixtureModel, samples: np.ndarray) -> float:
    """Total log density of the samples under the mixture."""
    return float(_logsumexp_rows(component_log_densities(model, samples)).sum())


def class_posterior_costs(
    log_fg: np.ndarray, log_bg: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Negative log posteriors (cost0, cost1) from per-class log likelihoods.

    Equal class priors; the log-likelihood gap is clamped so both costs stay
    finite. Adding any common constant to both inputs leaves the result
    unchanged, so only the likelihood ratio matters.
    """
    gap = np.clip(log_bg - log_fg, -500.0, 500.0)
    cost1 = np.logaddexp(0.0, gap)  # -log P(fg)
    cost0 = np.logaddexp(0.0, -gap)  # -log P(bg)
    return cost0, cost1


def seed_unary(
    image: ImageObservation,
    seeds: SeedMask,
    n_components: int = 5,
    rng_seed: int = 0,
) -> tuple[UnaryField, LabelField]:
    """Train per-class color mixtures on the scribbles and score every pixel.

    Returns the unary field of negative log posteriors plus its argmax
    labeling, with ties going to background. Both class models are fit with
    the same derived seed, so identical scribble color sets give identical
    models and an exactly symmetric posterior.
    """
    validate_inputs(image, seeds)
    colors = image.pixels.reshape(-1, 3)
    states = seeds.states.reshape(-1)
    fg_colors = colors[states == FG]
    bg_colors = colors[states == BG]
    for name, data in (("FG", fg_colors), ("BG", bg_colors)):
        if data.shape[0] < n_components:
            raise InsufficientSamples(
                f"{name} needs at least {n_components} seed pixels, got {data.shape[0]}"
            )

    fit_seed = int(np.random.SeedSequence(rng_seed).generate_state(1)[0])
    fg_model = fit_fmm(fg_colors, n_components, fit_seed)
    bg_model = fit_fmm(bg_colors, n_components, fit_seed)

    log_fg = _logsumexp_rows(component_log_densities(fg_model, colors))
    log_bg = _logsumexp_rows(component_log_densities(bg_model, colors))
    cost0, cost1 = class_posterior_costs(log_fg, log_bg)

    shape = (image.height, image.width)
    unary = UnaryField(np.stack([cost0, cost1], axis=-1).reshape(shape + (2,)))
    labels = LabelField((cost1 < cost0).astype(np.uint8).reshape(shape))
    return unary, labels
