"""Command line entry point: segment, bench, synth, serve."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields, replace
from pathlib import Path

from .core import DfrfConfig, ImageObservation, SeedMask
from .errors import DfrfError


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    defaults = DfrfConfig()
    parser.add_argument("--preset", choices=["full", "desk"], default=None,
                        help="full: 15 layers 450-660 nodes; desk: 5 layers 60-140 nodes")
    parser.add_argument("--n-layers", "--layers", dest="n_layers", type=int, default=None,
                        help=f"number of refinement layers (default {defaults.n_layers})")
    parser.add_argument("--nev-start", type=int, default=None,
                        help=f"encoding nodes in the first layer (default {defaults.nev_start})")
    parser.add_argument("--nev-step", type=int, default=None,
                        help=f"node count increase per layer (default {defaults.nev_step})")
    parser.add_argument("--alpha", type=float, default=None,
                        help=f"unary vs previous-layer blend (default {defaults.alpha})")
    parser.add_argument("--beta", type=float, default=None,
                        help=f"pairwise strength (default {defaults.beta})")
    parser.add_argument("--top-k", type=int, default=None,
                        help=f"kept node memberships per pixel (default {defaults.top_k})")
    parser.add_argument("--spatial-scale", type=float, default=None,
                        help=f"position weight in encoding features (default {defaults.spatial_scale})")
    parser.add_argument("--icm-sweeps", type=int, default=None,
                        help=f"max label sweeps per layer (default {defaults.icm_sweeps})")
    parser.add_argument("--rng-seed", type=int, default=None,
                        help=f"seed for all randomized steps (default {defaults.rng_seed})")


def _config_from_args(args: argparse.Namespace) -> DfrfConfig:
    config = DfrfConfig.desk() if args.preset == "desk" else DfrfConfig()
    overrides = {
        f.name: getattr(args, f.name)
        for f in fields(DfrfConfig)
        if getattr(args, f.name, None) is not None
    }
    return replace(config, **overrides)


def cmd_segment(args) -> int:
    for path in (args.image, args.seeds):
        if not Path(path).is_file():
            print(f"error: file not found: {path}", file=sys.stderr)
            return 1
    config = _config_from_args(args)
    from .inference import run_dfrf

    image = ImageObservation.from_png(Path(args.image).read_bytes())
    seeds = SeedMask.from_png(Path(args.seeds).read_bytes())
    labels, trace = run_dfrf(image, seeds, config)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(labels.to_png())
    trace_path = Path(args.trace) if args.trace else out.with_suffix(".trace.json")
    from dataclasses import asdict

    trace_payload = {
        "config": asdict(config),
        "layers": [
            {k: v for k, v in rec.items() if k != "seconds"}
            for rec in trace.to_jsonable()
        ],
        "timings": [
            {"layer": rec["layer"], "seconds": rec["seconds"]}
            for rec in trace.to_jsonable()
        ],
    }
    trace_path.write_text(json.dumps(trace_payload, indent=2, sort_keys=True))
    print(f"wrote {out} and {trace_path}")
    return 0


def cmd_bench(args) -> int:
    from .bench import load_corpus, run_bench

    if not Path(args.corpus).is_dir():
        print(f"error: corpus directory not found: {args.corpus}", file=sys.stderr)
        return 1
    config = _config_from_args(args)
    noise = [float(x) for x in args.noise.split(",") if x.strip() != ""] if args.noise else [0.0]
    corpus = load_corpus(args.corpus)
    if not corpus:
        print(f"error: corpus at {args.corpus} is empty", file=sys.stderr)
        return 1
    report = run_bench(corpus, config, noise, rng_seed=args.bench_seed, jobs=args.jobs)
    report_path = Path(args.report)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(report.to_json())
    csv_path = report_path.with_suffix(".csv")
    csv_path.write_text(report.to_csv())
    for fraction in noise:
        try:
            unary = report.mean_f1("unary", fraction)
            dfrf = report.mean_f1("dfrf", fraction)
            print(f"noise={fraction:g}: mean F1 unary={unary:.4f} dfrf={dfrf:.4f}")
        except ValueError:
            print(f"noise={fraction:g}: no successful entries")
    if report.errors:
        print(f"{len(report.errors)} entries failed; see report", file=sys.stderr)
    print(f"wrote {report_path} and {csv_path}")
    return 0


def cmd_synth(args) -> int:
    from .synth import generate_corpus

    ids = generate_corpus(
        args.out,
        n_images=args.count,
        width=args.width,
        height=args.height,
        rng_seed=args.rng_seed if args.rng_seed is not None else 0,
    )
    print(f"wrote {len(ids)} entries under {args.out}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve_forever

    serve_forever(
        port=args.port,
        max_pixels=args.max_pixels,
        state_dir=args.state_dir,
        ui_dir=args.ui_dir,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dfrf",
        description="Interactive image segmentation with layered fully-connected random fields",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("segment", help="segment one image from a seed mask")
    p.add_argument("--image", required=True, help="input RGB PNG")
    p.add_argument("--seeds", required=True, help="seed PNG (red=foreground, blue=background)")
    p.add_argument("--out", required=True, help="output mask PNG (white=foreground)")
    p.add_argument("--trace", default=None, help="trace JSON path (default: <out>.trace.json)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("bench", help="run the noise-robustness benchmark over a corpus")
    p.add_argument("--corpus", required=True, help="directory with images/, gt/, seeds/")
    p.add_argument("--noise", default="0,0.25,0.5",
                   help="comma-separated noise fractions of the dynamic range")
    p.add_argument("--report", required=True, help="output report JSON path (CSV written alongside)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--bench-seed", type=int, default=0, help="seed for noise generation")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="generate the synthetic two-region corpus")
    p.add_argument("--out", required=True, help="output corpus directory")
    p.add_argument("--count", type=int, default=20, help="number of images")
    p.add_argument("--width", type=int, default=96)
    p.add_argument("--height", type=int, default=96)
    p.add_argument("--rng-seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="start the interactive segmentation service")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--state-dir", default=None, help="spill sessions to this directory")
    p.add_argument("--max-pixels", type=int, default=4_000_000)
    p.add_argument("--ui-dir", default=None, help="serve a static annotator UI from this directory")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DfrfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
