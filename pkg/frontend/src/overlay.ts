/**
 * Mask overlay compositing on raw RGBA buffers.
 *
 * Pure functions over typed arrays so the logic is testable without a
 * canvas; the DOM layer wraps the result in ImageData.
 */

export type OverlayMode = "mask" | "boundary";

export const FG_TINT: [number, number, number] = [255, 64, 64];

/**
 * Tint foreground pixels of the base image. opacity 0 returns the image
 * unchanged; opacity 1 paints the tint solidly over the foreground.
 */
export function compositeMask(
  base: Uint8ClampedArray,
  mask: Uint8Array,
  opacity: number,
  tint: [number, number, number] = FG_TINT,
): Uint8ClampedArray {
  if (base.length !== mask.length * 4) {
    throw new Error(
      `mask size ${mask.length} does not match image buffer ${base.length / 4}`,
    );
  }
  const out = new Uint8ClampedArray(base);
  if (opacity <= 0) return out;
  const a = Math.min(opacity, 1);
  for (let i = 0; i < mask.length; i++) {
    if (mask[i]) {
      const o = i * 4;
      out[o] = base[o] * (1 - a) + tint[0] * a;
      out[o + 1] = base[o + 1] * (1 - a) + tint[1] * a;
      out[o + 2] = base[o + 2] * (1 - a) + tint[2] * a;
    }
  }
  return out;
}

/**
 * One-pixel contour of the mask: foreground pixels with a background
 * 4-neighbor (image border counts as background).
 */
export function maskBoundary(mask: Uint8Array, width: number, height: number): Uint8Array {
  if (mask.length !== width * height) {
    throw new Error("mask size does not match dimensions");
  }
  const edge = new Uint8Array(mask.length);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const i = y * width + x;
      if (!mask[i]) continue;
      const bgNeighbor =
        x === 0 || !mask[i - 1] ||
        x === width - 1 || !mask[i + 1] ||
        y === 0 || !mask[i - width] ||
        y === height - 1 || !mask[i + width];
      if (bgNeighbor) edge[i] = 1;
    }
  }
  return edge;
}

/** Composite according to the selected view mode. */
export function renderOverlay(
  base: Uint8ClampedArray,
  mask: Uint8Array,
  width: number,
  height: number,
  opacity: number,
  mode: OverlayMode,
): Uint8ClampedArray {
  if (mode === "boundary") {
    return compositeMask(base, maskBoundary(mask, width, height), 1.0);
  }
  return compositeMask(base, mask, opacity);
}
