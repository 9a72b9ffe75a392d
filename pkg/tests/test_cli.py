import json

import numpy as np
import pytest

from dfrf.cli import main
from dfrf.core import LabelField
from dfrf.synth import make_entry


@pytest.fixture()
def synthetic_pair(tmp_path):
    rng = np.random.default_rng(23)
    entry = make_entry("t", 32, 32, rng)
    image_path = tmp_path / "image.png"
    seeds_path = tmp_path / "seeds.png"
    image_path.write_bytes(entry.image.to_png())
    seeds_path.write_bytes(entry.seeds.to_png())
    return entry, image_path, seeds_path


def test_segment_writes_mask_and_trace(synthetic_pair, tmp_path):
    entry, image_path, seeds_path = synthetic_pair
    out = tmp_path / "mask.png"
    code = main([
        "segment", "--image", str(image_path), "--seeds", str(seeds_path),
        "--out", str(out), "--n-layers", "2", "--nev-start", "10",
        "--nev-step", "5", "--rng-seed", "0",
    ])
    assert code == 0
    mask = LabelField.from_png(out.read_bytes())
    assert (mask.height, mask.width) == (32, 32)
    trace = json.loads(out.with_suffix(".trace.json").read_text())
    assert len(trace["layers"]) == 2
    assert trace["config"]["n_layers"] == 2
    assert all("seconds" not in rec for rec in trace["layers"])


def test_segment_missing_seeds_exits_one(synthetic_pair, tmp_path, capsys):
    entry, image_path, _ = synthetic_pair
    missing = tmp_path / "nope.png"
    code = main([
        "segment", "--image", str(image_path), "--seeds", str(missing),
        "--out", str(tmp_path / "mask.png"),
    ])
    assert code == 1
    assert str(missing) in capsys.readouterr().err


def test_segment_zero_layers_is_unary_argmax(synthetic_pair, tmp_path):
    entry, image_path, seeds_path = synthetic_pair
    out = tmp_path / "mask0.png"
    code = main([
        "segment", "--image", str(image_path), "--seeds", str(seeds_path),
        "--out", str(out), "--layers", "0", "--rng-seed", "4",
    ])
    assert code == 0
    from dfrf.mixture import seed_unary
    child = np.random.SeedSequence(4).spawn(1)[0]
    _, want = seed_unary(entry.image, entry.seeds, rng_seed=int(child.generate_state(1)[0]))
    got = LabelField.from_png(out.read_bytes())
    np.testing.assert_array_equal(got.labels, want.labels)


def test_segment_deterministic_byte_identical(synthetic_pair, tmp_path):
    entry, image_path, seeds_path = synthetic_pair
    out_a = tmp_path / "a.png"
    out_b = tmp_path / "b.png"
    flags = ["--preset", "desk", "--n-layers", "2", "--nev-start", "12",
             "--nev-step", "4", "--rng-seed", "9"]
    assert main(["segment", "--image", str(image_path), "--seeds", str(seeds_path),
                 "--out", str(out_a), *flags]) == 0
    assert main(["segment", "--image", str(image_path), "--seeds", str(seeds_path),
                 "--out", str(out_b), *flags]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_synth_then_bench_round_trip(tmp_path, capsys):
    corpus_dir = tmp_path / "corpus"
    assert main(["synth", "--out", str(corpus_dir), "--count", "2",
                 "--width", "32", "--height", "32", "--rng-seed", "1"]) == 0
    report_path = tmp_path / "report.json"
    code = main([
        "bench", "--corpus", str(corpus_dir), "--noise", "0",
        "--report", str(report_path), "--n-layers", "1",
        "--nev-start", "8", "--nev-step", "0",
    ])
    assert code == 0
    payload = json.loads(report_path.read_text())
    assert len(payload["entries"]) == 4  # 2 entries x 1 noise x 2 methods
    assert report_path.with_suffix(".csv").is_file()


def test_bench_empty_noise_means_noise_free(tmp_path):
    corpus_dir = tmp_path / "corpus"
    main(["synth", "--out", str(corpus_dir), "--count", "1",
          "--width", "32", "--height", "32"])
    report_path = tmp_path / "report.json"
    code = main([
        "bench", "--corpus", str(corpus_dir), "--noise", "",
        "--report", str(report_path), "--n-layers", "1",
        "--nev-start", "8", "--nev-step", "0",
    ])
    assert code == 0
    payload = json.loads(report_path.read_text())
    assert payload["noise_fractions"] == [0.0]


def test_bench_missing_corpus_exits_one(tmp_path, capsys):
    code = main(["bench", "--corpus", str(tmp_path / "missing"),
                 "--report", str(tmp_path / "r.json")])
    assert code == 1


def test_unknown_flag_rejected(synthetic_pair, tmp_path):
    entry, image_path, seeds_path = synthetic_pair
    with pytest.raises(SystemExit) as info:
        main(["segment", "--image", str(image_path), "--seeds", str(seeds_path),
              "--out", str(tmp_path / "m.png"), "--bogus", "1"])
    assert info.value.code == 2
