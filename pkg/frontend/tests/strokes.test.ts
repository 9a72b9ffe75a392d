import { describe, expect, it } from "vitest";

import { clipPoint, countLabels, rasterizeStroke, replayStrokes } from "../src/strokes.js";

const asSet = (pixels: [number, number][]) => new Set(pixels.map(([x, y]) => `${x},${y}`));

describe("rasterizeStroke", () => {
  // Frozen vectors shared with the server test suite; both sides must
  // produce exactly these pixels for the same strokes.
  it("stamps a radius-1 disc", () => {
    const got = rasterizeStroke([[2, 2]], 1, 8, 8);
    expect(asSet(got)).toEqual(new Set(["1,2", "2,1", "2,2", "2,3", "3,2"]));
  });

  it("covers a horizontal segment with a thin brush", () => {
    const got = rasterizeStroke([[0, 0], [3, 0]], 0.5, 8, 8);
    expect(asSet(got)).toEqual(new Set(["0,0", "1,0", "2,0", "3,0"]));
  });

  it("matches the radius-2 disc reference", () => {
    const got = rasterizeStroke([[1, 1]], 2, 4, 4);
    expect(asSet(got)).toEqual(
      new Set([
        "0,0", "1,0", "2,0",
        "0,1", "1,1", "2,1", "3,1",
        "0,2", "1,2", "2,2",
        "1,3",
      ]),
    );
  });

  it("clips to the image bounds", () => {
    const got = rasterizeStroke([[0, 0]], 3, 4, 4);
    for (const [x, y] of got) {
      expect(x).toBeGreaterThanOrEqual(0);
      expect(y).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThanOrEqual(3);
      expect(y).toBeLessThanOrEqual(3);
    }
  });

  it("returns sorted unique pixels", () => {
    const got = rasterizeStroke([[1, 1], [1.2, 1.1], [1, 1]], 1.5, 8, 8);
    const keys = got.map(([x, y]) => `${x},${y}`);
    expect(new Set(keys).size).toBe(keys.length);
    const resorted = [...got].sort((a, b) => (a[0] - b[0]) || (a[1] - b[1]));
    expect(got).toEqual(resorted);
  });
});

describe("clipPoint", () => {
  it("clamps out-of-range coordinates", () => {
    expect(clipPoint(-3, 99, 10, 8)).toEqual([0, 7]);
    expect(clipPoint(4.5, 2.25, 10, 8)).toEqual([4.5, 2.25]);
  });
});

describe("replayStrokes", () => {
  it("later strokes overwrite earlier ones, erase returns to unlabeled", () => {
    const grid = replayStrokes(
      [
        { label: "fg", points: [[2, 2]], radius: 1 },
        { label: "bg", points: [[2, 2]], radius: 0.5 },
        { label: "erase", points: [[2, 3]], radius: 0.5 },
      ],
      6,
      6,
    );
    expect(grid[2 * 6 + 2]).toBe(2); // bg overwrote the fg center
    expect(grid[2 * 6 + 1]).toBe(1); // fg disc edge survives
    expect(grid[3 * 6 + 2]).toBe(0); // erased
    const counts = countLabels(grid);
    expect(counts.fg).toBe(3);
    expect(counts.bg).toBe(1);
  });
});
