/**
 * Client-side view state: click mode, pending clicks, slice position, and a
 * byte-exact overlay cache keyed by (round, slice). The UI never mutates
 * masks locally — every overlay displayed comes verbatim from this cache,
 * which only ever stores service responses.
 */

import type { SessionMeta } from "./api";

export type ClickMode = "margin" | "fg_refine" | "bg_refine";

export interface PendingClick {
  row: number;
  col: number;
  label: "fg" | "bg";
}

export class ViewState {
  mode: ClickMode = "margin";
  pending: PendingClick[] = [];
  meta: SessionMeta | null = null;
  slice = 0;
  overlayOpacity = 0.5;
  private overlays = new Map<string, Uint8Array>();

  get rounds(): number {
    return this.meta?.rounds ?? 0;
  }

  get depth(): number {
    return this.meta?.rank === 3 ? this.meta.dims[0] : 1;
  }

  reset(meta: SessionMeta): void {
    this.meta = meta;
    this.mode = "margin";
    this.pending = [];
    this.slice = meta.rank === 3 ? Math.floor(meta.dims[0] / 2) : 0;
    this.overlays.clear();
  }

  /** Append a click in the current mode; repeated cells replace the older entry. */
  addPending(row: number, col: number): void {
    const label = this.mode === "bg_refine" ? "bg" : "fg";
    this.pending = this.pending.filter((p) => p.row !== row || p.col !== col);
    this.pending.push({ row, col, label });
  }

  clickCoords(p: PendingClick): number[] {
    return this.meta?.rank === 3 ? [this.slice, p.row, p.col] : [p.row, p.col];
  }

  /** Successful points submit: clear pending, auto-switch to fg refinement. */
  afterPoints(meta: SessionMeta): void {
    this.meta = meta;
    this.pending = [];
    this.mode = "fg_refine";
  }

  afterClicks(meta: SessionMeta): void {
    this.meta = meta;
    this.pending = [];
  }

  afterUndo(meta: SessionMeta): void {
    this.meta = meta;
    this.pending = [];
  }

  setSlice(index: number): void {
    this.slice = Math.min(Math.max(index, 0), this.depth - 1);
  }

  private overlayKey(round: number, slice: number): string {
    return `${round}/${slice}`;
  }

  storeOverlay(round: number, slice: number, bytes: Uint8Array): void {
    this.overlays.set(this.overlayKey(round, slice), bytes);
  }

  getOverlay(round: number, slice: number): Uint8Array | undefined {
    return this.overlays.get(this.overlayKey(round, slice));
  }

  /** Overlay for the current round/slice, if cached. */
  currentOverlay(): Uint8Array | undefined {
    return this.getOverlay(this.rounds, this.slice);
  }
}
