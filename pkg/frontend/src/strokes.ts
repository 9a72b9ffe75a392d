/**
 * Stroke model and rasterization.
 *
 * The rasterization rule is shared verbatim with the server: sample each
 * polyline segment at steps of at most half a pixel, stamp a filled disc
 * of the brush radius at every sample (pixel (px, py) is covered when
 * (px-cx)^2 + (py-cy)^2 <= r^2), clip to image bounds. Keeping the rule
 * identical on both sides means the pixels previewed locally are exactly
 * the pixels the server labels.
 */

export type StrokeLabel = "fg" | "bg" | "erase";

export interface Stroke {
  label: StrokeLabel;
  points: [number, number][];
  radius: number;
}

/** Clamp a pointer position to valid image coordinates. */
export function clipPoint(
  x: number,
  y: number,
  width: number,
  height: number,
): [number, number] {
  const cx = Math.min(Math.max(x, 0), width - 1);
  const cy = Math.min(Math.max(y, 0), height - 1);
  return [cx, cy];
}

/** Unique (x, y) pixels covered by a disc brush dragged along the points. */
export function rasterizeStroke(
  points: [number, number][],
  radius: number,
  width: number,
  height: number,
): [number, number][] {
  if (points.length === 0) return [];
  const centers: [number, number][] = [];
  if (points.length === 1) {
    centers.push(points[0]);
  } else {
    for (let i = 0; i + 1 < points.length; i++) {
      const [x0, y0] = points[i];
      const [x1, y1] = points[i + 1];
      const dist = Math.max(Math.abs(x1 - x0), Math.abs(y1 - y0));
      const steps = Math.max(1, Math.ceil(dist * 2));
      for (let s = 0; s <= steps; s++) {
        const t = s / steps;
        centers.push([x0 + (x1 - x0) * t, y0 + (y1 - y0) * t]);
      }
    }
  }
  const covered = new Set<number>();
  for (const [cx, cy] of centers) {
    const xLo = Math.max(0, Math.floor(cx - radius));
    const xHi = Math.min(width - 1, Math.ceil(cx + radius));
    const yLo = Math.max(0, Math.floor(cy - radius));
    const yHi = Math.min(height - 1, Math.ceil(cy + radius));
    for (let py = yLo; py <= yHi; py++) {
      for (let px = xLo; px <= xHi; px++) {
        const dx = px - cx;
        const dy = py - cy;
        if (dx * dx + dy * dy <= radius * radius) {
          covered.add(py * width + px);
        }
      }
    }
  }
  const pixels: [number, number][] = [];
  for (const key of covered) {
    pixels.push([key % width, Math.floor(key / width)]);
  }
  pixels.sort((a, b) => (a[0] - b[0]) || (a[1] - b[1]));
  return pixels;
}

/**
 * Replay an ordered stroke history onto a label grid (0 = unlabeled,
 * 1 = fg, 2 = bg). This is the client-side preview of what the server's
 * seed mask will hold after the same strokes are posted.
 */
export function replayStrokes(
  strokes: Stroke[],
  width: number,
  height: number,
): Uint8Array {
  const grid = new Uint8Array(width * height);
  const value: Record<StrokeLabel, number> = { erase: 0, fg: 1, bg: 2 };
  for (const stroke of strokes) {
    for (const [x, y] of rasterizeStroke(stroke.points, stroke.radius, width, height)) {
      grid[y * width + x] = value[stroke.label];
    }
  }
  return grid;
}

export function countLabels(grid: Uint8Array): { fg: number; bg: number } {
  let fg = 0;
  let bg = 0;
  for (const v of grid) {
    if (v === 1) fg++;
    else if (v === 2) bg++;
  }
  return { fg, bg };
}
