import { describe, expect, it } from "vitest";

import {
  ViewTransform,
  canvasToGridCell,
  canvasToGridContinuous,
  gridToCanvas,
} from "../src/transform";

function view(overrides: Partial<ViewTransform> = {}): ViewTransform {
  return {
    rows: 256,
    cols: 256,
    canvasWidth: 512,
    canvasHeight: 512,
    zoom: 1,
    panX: 0,
    panY: 0,
    ...overrides,
  };
}

describe("coordinate round trip", () => {
  const zooms = [0.5, 1, 2, 4];

  it("forward(inverse(p)) stays within 1 display pixel at all zoom levels", () => {
    for (const zoom of zooms) {
      const t = view({ zoom, panX: 13.5, panY: -27 });
      for (const [x, y] of [
        [256, 256],
        [10.25, 499.75],
        [301.5, 77.125],
      ]) {
        const g = canvasToGridContinuous(t, x, y);
        const back = gridToCanvas(t, g.row, g.col);
        expect(Math.hypot(back.x - x, back.y - y)).toBeLessThanOrEqual(1);
      }
    }
  });

  it("cell centers are fixed points of the round trip", () => {
    for (const zoom of zooms) {
      const t = view({ zoom, panX: -40, panY: 8 });
      for (const cell of [
        { row: 0, col: 0 },
        { row: 128, col: 37 },
        { row: 255, col: 255 },
      ]) {
        const c = gridToCanvas(t, cell.row, cell.col);
        expect(canvasToGridCell(t, c.x, c.y)).toEqual(cell);
      }
    }
  });
});

describe("hand-computed cases", () => {
  it("canvas center of a 256-square image in a 512-square canvas is grid (128,128)", () => {
    // base scale 2: canvas 256,256 lies at the corner of cells 127/128;
    // a hair past center lands in (128,128)
    expect(canvasToGridCell(view(), 257, 257)).toEqual({ row: 128, col: 128 });
    const c = gridToCanvas(view(), 128, 128);
    expect(c).toEqual({ x: 257, y: 257 });
  });

  it("zoom 2 with pan matches the affine inverse", () => {
    const t = view({ zoom: 2, panX: -100, panY: 60 });
    // scale 4, offsets (512 - 256*4)/2 = -256
    // canvasX = (col + 0.5) * 4 - 256 - 100
    expect(gridToCanvas(t, 0, 100)).toEqual({ x: 46, y: -194 });
    expect(canvasToGridCell(t, 46, -194)).toEqual({ row: 0, col: 100 });
  });

  it("zoom 2 inverse recovers the clicked cell", () => {
    const t = view({ zoom: 2, panX: -100, panY: 60 });
    const c = gridToCanvas(t, 200, 100);
    expect(canvasToGridCell(t, c.x, c.y)).toEqual({ row: 200, col: 100 });
  });
});

describe("letterbox behavior", () => {
  it("clicks in the letterbox margin map to no cell", () => {
    // wide image: 128 rows x 256 cols in a square canvas -> bands top/bottom
    const t = view({ rows: 128, cols: 256 });
    expect(canvasToGridCell(t, 256, 10)).toBeNull();
    expect(canvasToGridCell(t, 256, 502)).toBeNull();
    expect(canvasToGridCell(t, 256, 256)).not.toBeNull();
  });

  it("zoomed-out clicks outside the image are ignored", () => {
    const t = view({ zoom: 0.5 });
    expect(canvasToGridCell(t, 5, 5)).toBeNull();
    expect(canvasToGridCell(t, 256, 256)).not.toBeNull();
  });
});
