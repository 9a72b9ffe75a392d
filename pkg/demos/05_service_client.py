"""Driving the HTTP service end to end as a client.

Starts the service in-process on a free port, uploads an image, posts
scribbles, triggers a run and polls for the mask, exactly as the browser
annotator does.

Run:  python3 demos/05_service_client.py
"""

import base64
import json
import threading
import time
import urllib.request

import numpy as np

from dfrf.service import make_server
from dfrf.synth import make_entry

server = make_server(port=0)
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{server.server_address[1]}"
print(f"service up at {base}")


def call(method, path, payload=None):
    data = json.dumps(payload).encode() if payload is not None else None
    req = urllib.request.Request(
        base + path, data=data, method=method,
        headers={"Content-Type": "application/json"},
    )
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


rng = np.random.default_rng(4)
entry = make_entry("demo", 64, 64, rng)
session = call("POST", "/sessions", {
    "image_png": base64.b64encode(entry.image.to_png()).decode(),
})
sid = session["id"]
print(f"session {sid}: {session['width']}x{session['height']}")

ys, xs = np.nonzero(entry.seeds.states == 1)
fg_points = [[int(x), int(y)] for x, y in zip(xs, ys)]
ys, xs = np.nonzero(entry.seeds.states == 2)
bg_points = [[int(x), int(y)] for x, y in zip(xs, ys)]
counts = call("POST", f"/sessions/{sid}/scribbles", {
    "strokes": [
        {"label": "fg", "points": fg_points, "radius": 0.5},
        {"label": "bg", "points": bg_points, "radius": 0.5},
    ]
})
print(f"scribbles: {counts}")

call("POST", f"/sessions/{sid}/segment", {"n_layers": 3, "nev_start": 20, "nev_step": 10})
while True:
    result = call("GET", f"/sessions/{sid}/result")
    if result["status"] in ("DONE", "ERROR"):
        break
    time.sleep(0.2)

print(f"status: {result['status']}")
if result["status"] == "DONE":
    mask = base64.b64decode(result["mask_png"])
    print(f"mask: {len(mask)} PNG bytes; per-layer energies:")
    for rec in result["trace"]:
        print(f"  layer {rec['layer']}: {rec['energy_before']:.1f} -> {rec['energy_after']:.1f}")
server.shutdown()
