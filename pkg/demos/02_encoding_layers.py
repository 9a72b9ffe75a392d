"""What an encoding layer looks like at different node counts.

Each layer clusters (color, scaled position) pixel features into a small
set of nodes; every pixel keeps its top-k node memberships. The node id
images written here show the coarse-to-fine effect: few nodes give large
structure-aligned regions, more nodes refine them.

Run:  python3 demos/02_encoding_layers.py
"""

from pathlib import Path

import numpy as np

from dfrf import build_encoding_layer
from dfrf.core import ImageObservation
from dfrf.synth import make_entry

out_dir = Path(__file__).parent / "out" / "02_encoding_layers"
out_dir.mkdir(parents=True, exist_ok=True)

rng = np.random.default_rng(11)
entry = make_entry("demo", 128, 128, rng)
(out_dir / "image.png").write_bytes(entry.image.to_png())

palette = np.random.default_rng(0).random((512, 3))
for n_ev in (8, 32, 128):
    enc = build_encoding_layer(entry.image, n_ev, top_k=8, spatial_scale=4.0, rng_seed=1)
    owner = enc.indices[np.arange(enc.n_pixels), enc.values.argmax(axis=1)]
    tint = palette[owner % len(palette)].reshape(128, 128, 3)
    png = ImageObservation(tint).to_png()
    (out_dir / f"nodes_{n_ev:03d}.png").write_bytes(png)
    spread = enc.values.max(axis=1).mean()
    print(
        f"n_ev={n_ev:3d}: mean node mass {enc.node_mass.mean():7.1f} px, "
        f"mean strongest membership {spread:.3f}"
    )
print(f"outputs in {out_dir}")
