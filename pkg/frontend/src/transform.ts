/**
 * View transform between canvas (display) coordinates and image grid
 * coordinates. The image is letterboxed into the canvas at a base scale,
 * then user zoom and pan apply on top:
 *
 *   canvasX = (col + 0.5) * scale + offsetX + panX
 *   canvasY = (row + 0.5) * scale + offsetY + panY
 *
 * where scale = baseScale * zoom and the offsets center the image.
 * Grid coordinates are (row, col), matching the service's JSON order.
 */

export interface ViewTransform {
  readonly cols: number;
  readonly rows: number;
  readonly canvasWidth: number;
  readonly canvasHeight: number;
  readonly zoom: number;
  readonly panX: number;
  readonly panY: number;
}

export function baseScale(t: ViewTransform): number {
  return Math.min(t.canvasWidth / t.cols, t.canvasHeight / t.rows);
}

export function scale(t: ViewTransform): number {
  return baseScale(t) * t.zoom;
}

function offsets(t: ViewTransform): { x: number; y: number } {
  const s = scale(t);
  return {
    x: (t.canvasWidth - t.cols * s) / 2,
    y: (t.canvasHeight - t.rows * s) / 2,
  };
}

/** Continuous grid position of a canvas point (col/row may be fractional). */
export function canvasToGridContinuous(
  t: ViewTransform,
  canvasX: number,
  canvasY: number,
): { row: number; col: number } {
  const s = scale(t);
  const o = offsets(t);
  return {
    col: (canvasX - o.x - t.panX) / s - 0.5,
    row: (canvasY - o.y - t.panY) / s - 0.5,
  };
}

/** Exact inverse of canvasToGridContinuous. */
export function gridToCanvas(
  t: ViewTransform,
  row: number,
  col: number,
): { x: number; y: number } {
  const s = scale(t);
  const o = offsets(t);
  return {
    x: (col + 0.5) * s + o.x + t.panX,
    y: (row + 0.5) * s + o.y + t.panY,
  };
}

/**
 * Integer grid cell under a canvas point, or null when the point falls in
 * the letterbox margin / outside the image.
 */
export function canvasToGridCell(
  t: ViewTransform,
  canvasX: number,
  canvasY: number,
): { row: number; col: number } | null {
  const p = canvasToGridContinuous(t, canvasX, canvasY);
  const row = Math.round(p.row);
  const col = Math.round(p.col);
  if (row < 0 || row >= t.rows || col < 0 || col >= t.cols) return null;
  return { row, col };
}
