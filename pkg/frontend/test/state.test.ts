import { describe, expect, it } from "vitest";

import type { SessionMeta } from "../src/api";
import { ViewState } from "../src/state";

function meta(overrides: Partial<SessionMeta> = {}): SessionMeta {
  return {
    id: "abc",
    status: "awaiting_points",
    rank: 2,
    dims: [64, 64],
    spacing: [1, 1],
    rounds: 0,
    bbox: null,
    ...overrides,
  };
}

describe("pending clicks", () => {
  it("labels follow the mode and repeats replace", () => {
    const s = new ViewState();
    s.reset(meta());
    s.addPending(3, 4);
    expect(s.pending).toEqual([{ row: 3, col: 4, label: "fg" }]);
    s.mode = "bg_refine";
    s.addPending(3, 4);
    expect(s.pending).toEqual([{ row: 3, col: 4, label: "bg" }]);
  });

  it("cleared after a successful points submit, mode auto-switches", () => {
    const s = new ViewState();
    s.reset(meta());
    s.addPending(1, 1);
    s.afterPoints(meta({ status: "segmented" }));
    expect(s.pending).toEqual([]);
    expect(s.mode).toBe("fg_refine");
  });

  it("3D clicks carry the current slice", () => {
    const s = new ViewState();
    s.reset(meta({ rank: 3, dims: [16, 64, 64] }));
    expect(s.slice).toBe(8); // middle slice by default
    s.setSlice(12);
    expect(s.clickCoords({ row: 5, col: 6, label: "fg" })).toEqual([12, 5, 6]);
    s.setSlice(99);
    expect(s.slice).toBe(15); // clamped to depth - 1
  });
});

describe("overlay cache and undo", () => {
  it("undo restores the previous overlay bit-exactly", () => {
    const s = new ViewState();
    s.reset(meta({ status: "segmented" }));
    const round0 = new Uint8Array([1, 2, 3, 4]);
    const round1 = new Uint8Array([9, 9, 9, 9]);
    s.storeOverlay(0, 0, round0);
    s.afterClicks(meta({ status: "segmented", rounds: 1 }));
    s.storeOverlay(1, 0, round1);
    expect(s.currentOverlay()).toBe(round1);

    s.afterUndo(meta({ status: "segmented", rounds: 0 }));
    const restored = s.currentOverlay();
    expect(restored).toBe(round0); // same object: byte-identical by construction
    expect(Array.from(restored!)).toEqual([1, 2, 3, 4]);
  });

  it("overlays are cached per slice", () => {
    const s = new ViewState();
    s.reset(meta({ rank: 3, dims: [4, 8, 8], status: "segmented" }));
    s.storeOverlay(0, 1, new Uint8Array([1]));
    s.storeOverlay(0, 2, new Uint8Array([2]));
    s.setSlice(1);
    expect(Array.from(s.currentOverlay()!)).toEqual([1]);
    s.setSlice(2);
    expect(Array.from(s.currentOverlay()!)).toEqual([2]);
    s.setSlice(3);
    expect(s.currentOverlay()).toBeUndefined();
  });

  it("session reset clears overlays and pending state", () => {
    const s = new ViewState();
    s.reset(meta({ status: "segmented" }));
    s.storeOverlay(0, 0, new Uint8Array([7]));
    s.addPending(1, 2);
    s.reset(meta());
    expect(s.currentOverlay()).toBeUndefined();
    expect(s.pending).toEqual([]);
    expect(s.mode).toBe("margin");
  });
});
