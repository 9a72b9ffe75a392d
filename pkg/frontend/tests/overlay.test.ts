import { describe, expect, it } from "vitest";

import { compositeMask, maskBoundary, renderOverlay } from "../src/overlay.js";

function flatImage(n: number, value = 100): Uint8ClampedArray {
  const out = new Uint8ClampedArray(n * 4);
  for (let i = 0; i < n; i++) {
    out[i * 4] = value;
    out[i * 4 + 1] = value;
    out[i * 4 + 2] = value;
    out[i * 4 + 3] = 255;
  }
  return out;
}

describe("compositeMask", () => {
  it("opacity 0 returns the original image", () => {
    const base = flatImage(4);
    const mask = Uint8Array.from([1, 1, 0, 0]);
    expect([...compositeMask(base, mask, 0)]).toEqual([...base]);
  });

  it("opacity 1 paints the tint solidly over foreground", () => {
    const base = flatImage(2);
    const mask = Uint8Array.from([1, 0]);
    const out = compositeMask(base, mask, 1, [255, 0, 0]);
    expect([...out.slice(0, 4)]).toEqual([255, 0, 0, 255]);
    expect([...out.slice(4, 8)]).toEqual([100, 100, 100, 255]);
  });

  it("blends linearly at intermediate opacity", () => {
    const base = flatImage(1, 100);
    const out = compositeMask(base, Uint8Array.from([1]), 0.5, [200, 0, 100]);
    expect(out[0]).toBe(150);
    expect(out[1]).toBe(50);
    expect(out[2]).toBe(100);
  });

  it("rejects mismatched buffer sizes", () => {
    expect(() => compositeMask(flatImage(4), Uint8Array.from([1]), 1)).toThrow();
  });
});

describe("maskBoundary", () => {
  it("extracts a one-pixel contour", () => {
    // 4x4 with a filled 3x3 block: interior pixel (1..3 x 1..3 center) drops out
    const mask = Uint8Array.from([
      0, 0, 0, 0,
      0, 1, 1, 1,
      0, 1, 1, 1,
      0, 1, 1, 1,
    ]);
    const edge = maskBoundary(mask, 4, 4);
    expect(edge[2 * 4 + 2]).toBe(0); // interior
    expect(edge[1 * 4 + 1]).toBe(1);
    expect(edge[1 * 4 + 3]).toBe(1); // touches the image border
    expect(edge[3 * 4 + 2]).toBe(1);
  });

  it("single pixel is its own boundary", () => {
    const mask = Uint8Array.from([0, 0, 0, 1]);
    expect([...maskBoundary(mask, 2, 2)]).toEqual([0, 0, 0, 1]);
  });
});

describe("renderOverlay", () => {
  it("boundary mode tints only the contour", () => {
    const mask = Uint8Array.from([
      1, 1, 1,
      1, 1, 1,
      1, 1, 1,
    ]);
    const base = flatImage(9);
    const out = renderOverlay(base, mask, 3, 3, 0.5, "boundary");
    // center pixel is interior: untouched even though the mask covers it
    expect(out[4 * 4]).toBe(100);
    // corner is contour: fully tinted
    expect(out[0]).toBe(255);
  });

  it("mask mode honors the opacity", () => {
    const base = flatImage(1);
    const out = renderOverlay(base, Uint8Array.from([1]), 1, 1, 0, "mask");
    expect(out[0]).toBe(100);
  });
});
