/** DOM binding: canvas painting, toolbar, polling UI. */

import { ApiClient } from "./api.js";
import { AnnotatorController } from "./controller.js";
import { renderOverlay } from "./overlay.js";
import { base64ToBytes, bytesToBase64 } from "./png.js";
import { rasterizeStroke, StrokeLabel } from "./strokes.js";

const api = new ApiClient("");
const controller = new AnnotatorController(api, { pollIntervalMs: 1000 });

const el = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;
const canvas = el<HTMLCanvasElement>("paint");
const ctx = canvas.getContext("2d")!;
const banner = el<HTMLDivElement>("banner");
const traceBody = el<HTMLTableSectionElement>("trace-body");
const runButton = el<HTMLButtonElement>("run");
const statusLabel = el<HTMLSpanElement>("status");
const seedCountsLabel = el<HTMLSpanElement>("seed-counts");

let baseImage: ImageData | null = null;
let maskGrid: Uint8Array | null = null;
let drawing = false;

const SEED_COLORS: Record<number, [number, number, number]> = {
  1: [255, 0, 0],
  2: [0, 0, 255],
};

function redraw() {
  if (!baseImage) return;
  const { width, height } = baseImage;
  let pixels: Uint8ClampedArray = new Uint8ClampedArray(baseImage.data);
  if (maskGrid && controller.status === "done") {
    pixels = renderOverlay(
      pixels, maskGrid, width, height,
      controller.overlay.opacity, controller.overlay.mode,
    );
  }
  // scribbles always on top, in the seed color convention
  const grid = controller.seedGrid();
  for (let i = 0; i < grid.length; i++) {
    const color = SEED_COLORS[grid[i]];
    if (color) {
      const o = i * 4;
      pixels[o] = color[0];
      pixels[o + 1] = color[1];
      pixels[o + 2] = color[2];
    }
  }
  ctx.putImageData(new ImageData(new Uint8ClampedArray(pixels), width, height), 0, 0);
}

function renderState() {
  statusLabel.textContent = controller.status;
  runButton.disabled = controller.status === "running" || !controller.imageLoaded;
  const counts = controller.imageLoaded ? controller.seedCounts() : { fg: 0, bg: 0 };
  seedCountsLabel.textContent = `fg ${counts.fg} / bg ${counts.bg}`;
  if (controller.banner) {
    banner.textContent = controller.banner.message;
    banner.className = `banner ${controller.banner.kind}`;
  } else {
    banner.textContent = "";
    banner.className = "banner hidden";
  }
  traceBody.innerHTML = "";
  for (const rec of controller.trace) {
    const row = document.createElement("tr");
    row.innerHTML =
      `<td>${rec.layer}</td><td>${rec.n_ev}</td>` +
      `<td>${rec.energy_before.toFixed(1)}</td>` +
      `<td>${rec.energy_after.toFixed(1)}</td><td>${rec.flips}</td>`;
    traceBody.appendChild(row);
  }
  redraw();
}
controller.onChange = renderState;

async function decodeMaskToGrid(maskBase64: string): Promise<Uint8Array> {
  const blob = new Blob([base64ToBytes(maskBase64) as BlobPart], { type: "image/png" });
  const bitmap = await createImageBitmap(blob);
  const scratch = document.createElement("canvas");
  scratch.width = bitmap.width;
  scratch.height = bitmap.height;
  const sctx = scratch.getContext("2d")!;
  sctx.drawImage(bitmap, 0, 0);
  const data = sctx.getImageData(0, 0, bitmap.width, bitmap.height).data;
  const grid = new Uint8Array(bitmap.width * bitmap.height);
  for (let i = 0; i < grid.length; i++) {
    grid[i] = data[i * 4] >= 128 ? 1 : 0;
  }
  return grid;
}

el<HTMLInputElement>("file").addEventListener("change", async (event) => {
  const file = (event.target as HTMLInputElement).files?.[0];
  if (!file) return;
  const bytes = new Uint8Array(await file.arrayBuffer());
  try {
    await controller.loadImage(bytesToBase64(bytes));
  } catch {
    return; // banner already set
  }
  const bitmap = await createImageBitmap(new Blob([bytes as BlobPart]));
  canvas.width = bitmap.width;
  canvas.height = bitmap.height;
  const scratch = document.createElement("canvas");
  scratch.width = bitmap.width;
  scratch.height = bitmap.height;
  const sctx = scratch.getContext("2d")!;
  sctx.drawImage(bitmap, 0, 0);
  baseImage = sctx.getImageData(0, 0, bitmap.width, bitmap.height);
  maskGrid = null;
  renderState();
});

function canvasPoint(event: PointerEvent): [number, number] {
  const rect = canvas.getBoundingClientRect();
  const x = ((event.clientX - rect.left) / rect.width) * canvas.width;
  const y = ((event.clientY - rect.top) / rect.height) * canvas.height;
  return [x, y];
}

canvas.addEventListener("pointerdown", (event) => {
  if (!controller.imageLoaded) return;
  drawing = true;
  canvas.setPointerCapture(event.pointerId);
  const [x, y] = canvasPoint(event);
  controller.beginStroke(x, y);
});
canvas.addEventListener("pointermove", (event) => {
  if (!drawing) return;
  const [x, y] = canvasPoint(event);
  controller.extendStroke(x, y);
});
canvas.addEventListener("pointerup", () => {
  drawing = false;
  controller.endStroke();
});

for (const label of ["fg", "bg", "erase"] as StrokeLabel[]) {
  el<HTMLButtonElement>(`brush-${label}`).addEventListener("click", () => {
    controller.setBrush({ label });
    document.querySelectorAll(".brush").forEach((b) => b.classList.remove("active"));
    el(`brush-${label}`).classList.add("active");
  });
}
el<HTMLInputElement>("radius").addEventListener("input", (event) => {
  controller.setBrush({ radius: Number((event.target as HTMLInputElement).value) });
});
el<HTMLInputElement>("opacity").addEventListener("input", (event) => {
  controller.setOverlayOpacity(Number((event.target as HTMLInputElement).value) / 100);
});
el<HTMLSelectElement>("view-mode").addEventListener("change", (event) => {
  controller.setOverlayMode((event.target as HTMLSelectElement).value as "mask" | "boundary");
});
el<HTMLButtonElement>("clear").addEventListener("click", () => controller.clearStrokes());

runButton.addEventListener("click", async () => {
  const preset = el<HTMLSelectElement>("preset").value as "desk" | "full";
  const ok = await controller.submitAndRun({ preset });
  if (ok && controller.overlay.maskBase64) {
    maskGrid = await decodeMaskToGrid(controller.overlay.maskBase64);
    renderState();
  }
});

// quick sanity on load: surface an unreachable server immediately
api.health().then((ok) => {
  if (!ok) {
    controller.onChange();
    banner.textContent = "segmentation service unreachable; start it with: dfrf serve";
    banner.className = "banner error";
  }
});

// debugging hook
(window as any).annotator = { controller, rasterizeStroke };
