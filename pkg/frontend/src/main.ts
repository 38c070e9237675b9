/** DOM wiring: canvas rendering, click capture, and service calls. */

import { ApiError, Client } from "./api";
import { ViewState } from "./state";
import { ViewTransform, canvasToGridCell, gridToCanvas } from "./transform";

declare global {
  interface Window {
    INTERSEG_BASE_URL?: string;
  }
}

const baseUrl =
  window.INTERSEG_BASE_URL ??
  localStorage.getItem("interseg-base-url") ??
  "http://127.0.0.1:8008";

const client = new Client(baseUrl);
const state = new ViewState();

const canvas = document.getElementById("view") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const statusPanel = document.getElementById("status")!;
const fileInput = document.getElementById("file") as HTMLInputElement;
const submitBtn = document.getElementById("submit") as HTMLButtonElement;
const undoBtn = document.getElementById("undo") as HTMLButtonElement;
const acceptBtn = document.getElementById("accept") as HTMLButtonElement;
const modeSelect = document.getElementById("mode") as HTMLSelectElement;
const opacitySlider = document.getElementById("opacity") as HTMLInputElement;
const sliceSlider = document.getElementById("slice") as HTMLInputElement;
const sliceRow = document.getElementById("slice-row")!;
const roundLabel = document.getElementById("round")!;

let zoom = 1;
let panX = 0;
let panY = 0;
let baseImage: ImageBitmap | null = null;
let overlayImage: ImageBitmap | null = null;
let inFlight = false;

function transform(): ViewTransform {
  const dims = state.meta?.dims ?? [1, 1];
  const rank = state.meta?.rank ?? 2;
  return {
    rows: rank === 3 ? dims[1] : dims[0],
    cols: rank === 3 ? dims[2] : dims[1],
    canvasWidth: canvas.width,
    canvasHeight: canvas.height,
    zoom,
    panX,
    panY,
  };
}

function setStatus(text: string, isError = false): void {
  statusPanel.textContent = text;
  statusPanel.className = isError ? "error" : "";
}

function setBusy(busy: boolean): void {
  inFlight = busy;
  submitBtn.disabled = busy;
  undoBtn.disabled = busy;
  acceptBtn.disabled = busy;
}

const MODE_COLORS = { margin: "#ffd700", fg_refine: "#00e05a", bg_refine: "#ff4040" };

function draw(): void {
  ctx.fillStyle = "#181818";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  const t = transform();
  if (baseImage) {
    const tl = gridToCanvas(t, -0.5, -0.5);
    const br = gridToCanvas(t, t.rows - 0.5, t.cols - 0.5);
    ctx.imageSmoothingEnabled = zoom < 2;
    ctx.drawImage(baseImage, tl.x, tl.y, br.x - tl.x, br.y - tl.y);
    if (overlayImage) {
      ctx.globalAlpha = state.overlayOpacity;
      ctx.drawImage(overlayImage, tl.x, tl.y, br.x - tl.x, br.y - tl.y);
      ctx.globalAlpha = 1;
    }
  }
  for (const p of state.pending) {
    const c = gridToCanvas(t, p.row, p.col);
    ctx.strokeStyle = p.label === "bg" ? MODE_COLORS.bg_refine
      : state.mode === "margin" ? MODE_COLORS.margin : MODE_COLORS.fg_refine;
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(c.x, c.y, 5, 0, 2 * Math.PI);
    ctx.stroke();
  }
}

async function tintMask(blob: Blob): Promise<ImageBitmap> {
  // mask PNG is grayscale (255 = foreground); recolor to red, transparent bg
  const raw = await createImageBitmap(blob);
  const off = new OffscreenCanvas(raw.width, raw.height);
  const octx = off.getContext("2d")!;
  octx.drawImage(raw, 0, 0);
  const img = octx.getImageData(0, 0, raw.width, raw.height);
  for (let i = 0; i < img.data.length; i += 4) {
    const on = img.data[i] > 127;
    img.data[i] = 255;
    img.data[i + 1] = 48;
    img.data[i + 2] = 48;
    img.data[i + 3] = on ? 255 : 0;
  }
  octx.putImageData(img, 0, 0);
  return createImageBitmap(off);
}

async function refreshView(): Promise<void> {
  if (!state.meta) return;
  const id = state.meta.id;
  const slice = state.meta.rank === 3 ? state.slice : undefined;
  baseImage = await createImageBitmap(await client.imagePng(id, slice));
  if (state.meta.status !== "awaiting_points") {
    const cached = state.currentOverlay();
    let bytes: Uint8Array;
    if (cached) {
      bytes = cached;
    } else {
      const blob = await client.maskPng(id, state.rounds, slice);
      bytes = new Uint8Array(await blob.arrayBuffer());
      state.storeOverlay(state.rounds, state.slice, bytes);
    }
    const copy = new Uint8Array(bytes).buffer as ArrayBuffer;
    overlayImage = await tintMask(new Blob([copy], { type: "image/png" }));
  } else {
    overlayImage = null;
  }
  roundLabel.textContent = `round ${state.rounds} · ${state.meta.status}`;
  draw();
}

async function guard(action: () => Promise<void>): Promise<void> {
  if (inFlight) return;
  setBusy(true);
  try {
    await action();
    setStatus("ok");
  } catch (err) {
    setStatus(err instanceof ApiError ? `${err.status}: ${err.message}` : String(err), true);
  } finally {
    setBusy(false);
  }
}

fileInput.addEventListener("change", () =>
  guard(async () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    const meta = await client.createSession(file);
    state.reset(meta);
    zoom = 1;
    panX = 0;
    panY = 0;
    modeSelect.value = "margin";
    sliceRow.style.display = meta.rank === 3 ? "" : "none";
    sliceSlider.max = String(state.depth - 1);
    sliceSlider.value = String(state.slice);
    await refreshView();
  }),
);

canvas.addEventListener("click", (ev) => {
  if (!state.meta || inFlight) return;
  const rect = canvas.getBoundingClientRect();
  const cell = canvasToGridCell(transform(), ev.clientX - rect.left, ev.clientY - rect.top);
  if (!cell) {
    setStatus("click outside the image ignored");
    return; // letterbox margin: no-op
  }
  state.addPending(cell.row, cell.col);
  draw();
});

submitBtn.addEventListener("click", () =>
  guard(async () => {
    if (!state.meta || state.pending.length === 0) return;
    const entries = state.pending.map((p) => ({
      coords: state.clickCoords(p),
      label: p.label,
    }));
    if (state.mode === "margin") {
      const meta = await client.submitPoints(state.meta.id, entries);
      state.afterPoints(meta);
      modeSelect.value = "fg_refine";
    } else {
      state.afterClicks(await client.submitClicks(state.meta.id, entries));
    }
    await refreshView();
  }),
);

undoBtn.addEventListener("click", () =>
  guard(async () => {
    if (!state.meta) return;
    state.afterUndo(await client.undo(state.meta.id));
    await refreshView();
  }),
);

acceptBtn.addEventListener("click", () =>
  guard(async () => {
    if (!state.meta) return;
    state.meta = await client.accept(state.meta.id);
    await refreshView();
  }),
);

modeSelect.addEventListener("change", () => {
  state.mode = modeSelect.value as ViewState["mode"];
  state.pending = [];
  draw();
});

opacitySlider.addEventListener("input", () => {
  state.overlayOpacity = Number(opacitySlider.value) / 100;
  draw();
});

sliceSlider.addEventListener("input", () =>
  guard(async () => {
    state.setSlice(Number(sliceSlider.value));
    await refreshView();
  }),
);

canvas.addEventListener("wheel", (ev) => {
  ev.preventDefault();
  const factor = ev.deltaY < 0 ? 1.25 : 0.8;
  zoom = Math.min(Math.max(zoom * factor, 0.25), 16);
  draw();
});

let dragging: { x: number; y: number } | null = null;
canvas.addEventListener("mousedown", (ev) => {
  if (ev.button === 1 || ev.shiftKey) dragging = { x: ev.clientX, y: ev.clientY };
});
window.addEventListener("mousemove", (ev) => {
  if (!dragging) return;
  panX += ev.clientX - dragging.x;
  panY += ev.clientY - dragging.y;
  dragging = { x: ev.clientX, y: ev.clientY };
  draw();
});
window.addEventListener("mouseup", () => {
  dragging = null;
});

setStatus(`service: ${baseUrl}`);
draw();
