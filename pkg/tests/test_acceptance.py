"""Acceptance suite: every release criterion at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.
"""

import itertools
import os
import time
from contextlib import contextmanager

import numpy as np
import pytest

from dfrf.bench import f1_score, load_corpus, noise_field, run_bench
from dfrf.cli import main as cli_main
from dfrf.core import DfrfConfig, LabelField
from dfrf.inference import (
    LayerEnergyParams,
    NodeLabelStats,
    explicit_pairwise_energy,
    icm_sweep,
    layer_energy,
    map_inference,
    run_dfrf,
)
from dfrf.synth import generate_corpus, make_entry
from conftest import random_instance


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {name}: FAIL")
        raise
    print(f"\nACCEPTANCE {name}: PASS")


@pytest.fixture(scope="module", autouse=True)
def warm_kernels():
    """Compile the jitted kernels once so timed criteria measure the
    algorithms, not the first-call JIT cost (cached on disk afterwards)."""
    rng = np.random.default_rng(0)
    entry = make_entry("warm", 24, 24, rng)
    run_dfrf(entry.image, entry.seeds, DfrfConfig(n_layers=1, nev_start=6, nev_step=0))


def test_energy_factorization_equivalence():
    with criterion("energy-factorization-equivalence"):
        rng = np.random.default_rng(77)
        t0 = time.perf_counter()
        for _ in range(100):
            enc, unary, prev = random_instance(rng)  # <=12 pixels, 2-3 nodes
            y = rng.integers(0, 2, enc.n_pixels).astype(np.int8)
            params = LayerEnergyParams(
                alpha=float(rng.random()), beta=float(rng.random() * 3)
            )
            e_fact = layer_energy(y, enc, unary, prev, params)
            e_expl = explicit_pairwise_energy(y, enc, unary, prev, params)
            assert abs(e_fact - e_expl) <= 1e-9 * (1 + abs(e_fact)), (e_fact, e_expl)
        elapsed = time.perf_counter() - t0
        assert elapsed < 5.0, f"took {elapsed:.2f}s"


def test_icm_monotonicity_and_delta_tracking():
    with criterion("icm-monotonicity"):
        rng = np.random.default_rng(88)
        for trial in range(50):
            enc, unary, prev = random_instance(
                rng, n_pixels=int(rng.integers(4, 30)), peaky=bool(trial % 2)
            )
            params = LayerEnergyParams(
                alpha=float(rng.random()), beta=float(rng.random() * 2)
            )
            y = prev.copy()
            stats = NodeLabelStats.from_labels(enc, y)
            energy = layer_energy(y, enc, unary, prev, params)
            tracked = energy
            for _ in range(8):
                y, stats, flips, delta = icm_sweep(y, enc, unary, prev, params, stats)
                assert delta <= 0.0  # exact: strict-improvement flips only
                tracked += delta
                recomputed = layer_energy(y, enc, unary, prev, params)
                assert recomputed <= energy + 1e-12  # never increases
                assert abs(recomputed - tracked) <= 1e-8 * (1 + abs(recomputed))
                energy = recomputed
                if flips == 0:
                    break


def _all_labelings(n):
    return np.array(list(itertools.product((0, 1), repeat=n)), dtype=np.int8)


def _exhaustive_minimum(enc, unary, prev, params, labelings):
    """Global minimum by brute force over every labeling.

    Uses the explicit pair-weight expansion, vectorized over labelings;
    spot-checked against explicit_pairwise_energy per instance.
    """
    resp = enc.dense()
    rest = enc.node_mass[None, :] - resp
    w = (resp / np.maximum(rest, 1e-12)) @ resp.T
    np.fill_diagonal(w, 0.0)
    n = resp.shape[0]
    un = params.alpha * unary[np.arange(n), labelings].sum(axis=1)
    un += (1 - params.alpha) * (labelings != prev).sum(axis=1)
    neq = labelings[:, :, None] != labelings[:, None, :]
    pair = params.beta * (neq * w).sum(axis=(1, 2))
    return un + pair


def test_tiny_instance_optimality():
    with criterion("tiny-instance-optimality"):
        rng = np.random.default_rng(123)
        labelings = _all_labelings(10)
        t0 = time.perf_counter()
        within = 0
        for trial in range(100):
            enc, unary, prev = random_instance(rng, n_pixels=10, peaky=True)
            params = LayerEnergyParams(
                alpha=0.4 + 0.5 * float(rng.random()), beta=float(rng.random() * 2)
            )
            energies = _exhaustive_minimum(enc, unary, prev, params, labelings)
            # keep the enumeration honest against the reference oracle
            probe = int(rng.integers(len(labelings)))
            direct = explicit_pairwise_energy(labelings[probe], enc, unary, prev, params)
            assert abs(energies[probe] - direct) <= 1e-9 * (1 + abs(direct))
            best = float(energies.min())
            _, energy = map_inference(unary, enc, prev, params, max_sweeps=10)
            assert energy >= best - 1e-9, "below the global minimum"
            if energy <= best * 1.05 + 1e-12:
                within += 1
        elapsed = time.perf_counter() - t0
        assert within >= 90, f"only {within}/100 within 5% of the optimum"
        assert elapsed < 30.0, f"took {elapsed:.2f}s"
        print(f"\n  ({within}/100 within 5%, {elapsed:.1f}s)")


def test_noise_robustness_trend(tmp_path):
    with criterion("noise-robustness-trend"):
        t0 = time.perf_counter()
        generate_corpus(tmp_path, n_images=20, width=96, height=96, rng_seed=0)
        corpus = load_corpus(tmp_path)
        assert len(corpus) == 20
        report = run_bench(corpus, DfrfConfig.desk(), [0.0, 0.25, 0.5], rng_seed=7)
        assert not report.errors, report.errors
        clean = report.mean_f1("dfrf", 0.0)
        gain25 = report.mean_f1("dfrf", 0.25) - report.mean_f1("unary", 0.25)
        gain50 = report.mean_f1("dfrf", 0.5) - report.mean_f1("unary", 0.5)
        elapsed = time.perf_counter() - t0
        assert clean >= 0.95, f"noise-free mean F1 {clean:.4f}"
        assert gain25 >= 0.05, f"25% noise gain {gain25:+.4f}"
        assert gain50 >= 0.08, f"50% noise gain {gain50:+.4f}"
        assert elapsed < 300.0, f"took {elapsed:.1f}s"
        print(
            f"\n  (clean {clean:.4f}, gain@25% {gain25:+.4f}, "
            f"gain@50% {gain50:+.4f}, {elapsed:.0f}s)"
        )


def test_noise_generator_calibration():
    with criterion("noise-generator-calibration"):
        field = noise_field((1_000_000,), 0.25, rng_seed=42)
        sigma = float(field.std())
        target = 0.25 * 255.0
        assert abs(sigma - target) <= 0.02 * target, f"sigma {sigma:.3f}"


def test_full_scale_run_completes_deterministically():
    with criterion("full-scale-run"):
        rng = np.random.default_rng(3)
        entry = make_entry("full_scale", 300, 200, rng)
        config = DfrfConfig()  # 15 layers, 450 -> 660 nodes, step 15
        assert config.layer_nodes() == list(range(450, 661, 15))

        t0 = time.perf_counter()
        first, trace = run_dfrf(entry.image, entry.seeds, config)
        first_s = time.perf_counter() - t0
        t0 = time.perf_counter()
        second, _ = run_dfrf(entry.image, entry.seeds, config)
        second_s = time.perf_counter() - t0

        assert len(trace.records) == 15
        assert first_s <= 60.0, f"first run took {first_s:.1f}s"
        assert second_s <= 60.0, f"second run took {second_s:.1f}s"
        np.testing.assert_array_equal(first.labels, second.labels)
        print(f"\n  (runs: {first_s:.1f}s / {second_s:.1f}s, identical labels)")


def test_weizmann_best_effort():
    """Non-blocking dataset check; needs user-downloaded images and seeds.

    Point DFRF_WEIZMANN_DIR at a corpus directory (images/, gt/, seeds/)
    built from the Weizmann single-object dataset with self-drawn scribbles.
    """
    root = os.environ.get("DFRF_WEIZMANN_DIR")
    if not root:
        pytest.skip("DFRF_WEIZMANN_DIR not set; skipping the best-effort dataset check")
    with criterion("weizmann-best-effort"):
        corpus = load_corpus(root)[:10]
        assert corpus, "corpus directory is empty"
        report = run_bench(corpus, DfrfConfig(), [0.0], rng_seed=0)
        assert not report.errors, report.errors
        mean_f1 = report.mean_f1("dfrf", 0.0)
        assert mean_f1 >= 0.80, f"mean F1 {mean_f1:.4f}"
        print(f"\n  (mean F1 {mean_f1:.4f} over {len(corpus)} images)")


def test_cmd_segment_determinism(tmp_path):
    with criterion("cmd-segment-determinism"):
        rng = np.random.default_rng(31)
        entry = make_entry("t", 48, 48, rng)
        image_path = tmp_path / "image.png"
        seeds_path = tmp_path / "seeds.png"
        image_path.write_bytes(entry.image.to_png())
        seeds_path.write_bytes(entry.seeds.to_png())
        masks = []
        for name in ("a.png", "b.png"):
            out = tmp_path / name
            code = cli_main([
                "segment", "--image", str(image_path), "--seeds", str(seeds_path),
                "--out", str(out), "--preset", "desk", "--rng-seed", "5",
            ])
            assert code == 0
            masks.append(out.read_bytes())
        assert masks[0] == masks[1], "masks differ between identical invocations"
        mask = LabelField.from_png(masks[0])
        assert (mask.height, mask.width) == (48, 48)
