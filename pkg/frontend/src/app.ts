/**
 * Browser entry point: scan browser, rect-view mask editor with a fan
 * preview, and the compare panel. Pure DOM wiring; all logic lives in the
 * sibling modules so it stays testable without a browser.
 */

import { ApiClient, MetricReport, ScanSummary } from "./api.js";
import { compareRows } from "./compare.js";
import { fanLayout, rangeRingsM, rectToFan, ScanGeometry } from "./geometry.js";
import { EditorSession } from "./state.js";

const api = new ApiClient("");
const annotator = new URLSearchParams(location.search).get("annotator")
  ?? "annotator";
const session = new EditorSession(api, annotator);

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const scanList = el<HTMLUListElement>("scan-list");
const statusBar = el<HTMLDivElement>("status");
const rectCanvas = el<HTMLCanvasElement>("rect-canvas");
const maskCanvas = el<HTMLCanvasElement>("mask-canvas");
const fanCanvas = el<HTMLCanvasElement>("fan-canvas");
const metricsBody = el<HTMLTableSectionElement>("metrics-body");

let rasterBitmap: ImageBitmap | null = null;
let fanBitmap: ImageBitmap | null = null;
let geometry: ScanGeometry | null = null;
let dragging = false;
let lastPoint: { row: number; col: number } | null = null;

function status(message: string, isError = false): void {
  statusBar.textContent = message;
  statusBar.className = isError ? "status error" : "status";
}

/* ------------------------------------------------------------ scan list */

async function refreshScans(): Promise<void> {
  try {
    const scans = await api.listScans();
    renderScanList(scans);
  } catch (err) {
    status(`could not list scans: ${err}`, true);
  }
}

function renderScanList(scans: ScanSummary[]): void {
  scanList.replaceChildren();
  if (!scans.length) {
    const empty = document.createElement("li");
    empty.className = "empty";
    empty.textContent = "no scans yet — simulate one below";
    scanList.appendChild(empty);
    return;
  }
  for (const scan of scans) {
    const item = document.createElement("li");
    const label = document.createElement("span");
    label.textContent = `${scan.scan_id} (${scan.scene ?? "?"}, `
      + `${scan.lines}x${scan.samples})`;
    item.appendChild(label);
    for (const badge of scan.annotators) {
      const b = document.createElement("span");
      b.className = "badge";
      b.textContent = badge;
      item.appendChild(b);
    }
    if (scan.scan_id === session.view.scanId) item.classList.add("active");
    item.addEventListener("click", () => { void openScan(scan.scan_id); });
    scanList.appendChild(item);
  }
}

/* ---------------------------------------------------------------- editor */

async function openScan(scanId: string): Promise<void> {
  try {
    await session.open(scanId);
    const detail = session.detail!;
    geometry = {
      sectorStartGrad: detail.config.sector_start_grad,
      sectorEndGrad: detail.config.sector_end_grad,
      angularStepGrad: detail.config.angular_step_grad,
      sampleCount: detail.config.sample_count,
      sampleDistanceM: detail.config.sample_distance_m,
      maxRangeM: detail.config.max_range_m,
    };
    await reloadRasters();
    status(`opened ${scanId} as ${annotator}`);
    await refreshScans();
  } catch (err) {
    status(`open failed: ${err}`, true);
  }
}

async function reloadRasters(): Promise<void> {
  const scanId = session.view.scanId;
  if (!scanId) return;
  const processed = session.view.processed && session.detail?.has_processed;
  const rect = await api.getRaster(scanId, "rect", !!processed);
  rasterBitmap = await createImageBitmap(
    new Blob([rect as BlobPart], { type: "image/png" }));
  const fan = await api.getRaster(scanId, "fan", !!processed, fanPpm());
  fanBitmap = await createImageBitmap(
    new Blob([fan as BlobPart], { type: "image/png" }));
  drawAll();
}

function fanPpm(): number {
  if (!geometry) return 60;
  return Math.max(10, Math.floor(320 / geometry.maxRangeM));
}

function drawAll(): void {
  drawRect();
  drawFan();
}

function drawRect(): void {
  if (!rasterBitmap || !session.mask) return;
  rectCanvas.width = rasterBitmap.width;
  rectCanvas.height = rasterBitmap.height;
  const ctx = rectCanvas.getContext("2d")!;
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(rasterBitmap, 0, 0);

  maskCanvas.width = rasterBitmap.width;
  maskCanvas.height = rasterBitmap.height;
  const mctx = maskCanvas.getContext("2d")!;
  const overlay = mctx.createImageData(maskCanvas.width, maskCanvas.height);
  const mask = session.mask;
  for (let i = 0; i < mask.data.length; i++) {
    if (mask.data[i]) {
      overlay.data[i * 4] = 255;      // object pixels in translucent red
      overlay.data[i * 4 + 1] = 64;
      overlay.data[i * 4 + 3] = 140;
    }
  }
  mctx.putImageData(overlay, 0, 0);

  if (session.view.roiOverlay && geometry && session.detail) {
    const roi = session.detail.roi_defaults;
    const sd = geometry.sampleDistanceM;
    ctx.fillStyle = "rgba(40, 120, 255, 0.18)";
    const minCol = Math.floor(roi.min_range_m / sd);
    const maxCol = Math.ceil(roi.max_range_m / sd);
    ctx.fillRect(0, 0, minCol, rectCanvas.height);
    ctx.fillRect(maxCol, 0, rectCanvas.width - maxCol, rectCanvas.height);
  }
}

function drawFan(): void {
  if (!fanBitmap || !geometry || !session.mask || !session.detail) return;
  const ppm = fanPpm();
  const layout = fanLayout(geometry, ppm);
  fanCanvas.width = layout.side;
  fanCanvas.height = layout.side;
  const ctx = fanCanvas.getContext("2d")!;
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(fanBitmap, 0, 0);

  // Mask projection: paint each labeled (line, bin) into the fan.
  ctx.fillStyle = "rgba(255, 64, 64, 0.55)";
  const mask = session.mask;
  for (let line = 0; line < mask.height; line++) {
    for (let bin = 0; bin < mask.width; bin++) {
      if (mask.get(line, bin)) {
        const { x, y } = rectToFan(geometry, layout, line, bin);
        ctx.fillRect(x, y, 1, 1);
      }
    }
  }

  // Range rings every meter, radii from the served config.
  ctx.strokeStyle = "rgba(80, 200, 255, 0.5)";
  ctx.fillStyle = "rgba(80, 200, 255, 0.8)";
  for (const ringM of rangeRingsM(geometry)) {
    ctx.beginPath();
    ctx.arc(layout.originX, layout.originY, ringM * ppm, Math.PI, 2 * Math.PI);
    ctx.stroke();
    ctx.fillText(`${ringM} m`, layout.originX + ringM * ppm - 14,
                 layout.originY - 4);
  }
  // ROI shading from served defaults.
  const roi = session.detail.roi_defaults;
  ctx.strokeStyle = "rgba(255, 170, 40, 0.9)";
  ctx.setLineDash([4, 3]);
  for (const radiusM of [roi.min_range_m, roi.max_range_m]) {
    ctx.beginPath();
    ctx.arc(layout.originX, layout.originY, radiusM * ppm,
            Math.PI, 2 * Math.PI);
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

function canvasPoint(event: MouseEvent): { row: number; col: number } {
  const bounds = rectCanvas.getBoundingClientRect();
  const col = ((event.clientX - bounds.left) / bounds.width)
    * rectCanvas.width;
  const row = ((event.clientY - bounds.top) / bounds.height)
    * rectCanvas.height;
  return { row, col };
}

maskCanvas.addEventListener("mousedown", (event) => {
  if (!session.mask) return;
  const point = canvasPoint(event);
  if (session.view.tool === "polygon") {
    session.addPolygonVertex(point);
    status(`polygon: ${session.polygonVertices.length} vertices `
      + "(double-click to close)");
    return;
  }
  dragging = true;
  lastPoint = point;
  session.stroke(point, point);
  drawAll();
});

maskCanvas.addEventListener("mousemove", (event) => {
  if (!dragging || !lastPoint) return;
  const point = canvasPoint(event);
  session.stroke(lastPoint, point);
  lastPoint = point;
  drawRect();
});

window.addEventListener("mouseup", () => {
  if (dragging) {
    dragging = false;
    lastPoint = null;
    drawAll();
  }
});

maskCanvas.addEventListener("dblclick", () => {
  if (session.view.tool === "polygon") {
    session.closePolygon();
    drawAll();
  }
});

/* --------------------------------------------------------------- compare */

async function runCompare(): Promise<void> {
  const scanId = session.view.scanId;
  if (!scanId) return;
  const against = el<HTMLInputElement>("compare-against").value || "simulator";
  try {
    const report: MetricReport = await api.evaluate(scanId, annotator, against);
    metricsBody.replaceChildren();
    for (const row of compareRows(report)) {
      const tr = document.createElement("tr");
      const name = document.createElement("td");
      name.textContent = row.label;
      const value = document.createElement("td");
      value.textContent = row.display;
      tr.append(name, value);
      metricsBody.appendChild(tr);
    }
    status(`metrics vs ${against} (server-computed)`);
  } catch (err) {
    status(`eval failed: ${err}`, true);
  }
}

/* --------------------------------------------------------------- wiring */

el<HTMLButtonElement>("btn-refresh").addEventListener("click", () => {
  void refreshScans();
});

el<HTMLButtonElement>("btn-simulate").addEventListener("click", async () => {
  const experiment = Number(el<HTMLInputElement>("sim-experiment").value);
  const seed = Number(el<HTMLInputElement>("sim-seed").value);
  try {
    const scanId = await api.simulate({ experiment, seed });
    status(`simulated ${scanId}`);
    await refreshScans();
    await openScan(scanId);
  } catch (err) {
    status(`simulate failed: ${err}`, true);
  }
});

el<HTMLButtonElement>("btn-preprocess").addEventListener("click", async () => {
  if (!session.view.scanId) return;
  try {
    await api.preprocess(session.view.scanId);
    session.detail = await api.scanDetail(session.view.scanId);
    status("preprocessed; toggle the processed view to see it");
  } catch (err) {
    status(`preprocess failed: ${err}`, true);
  }
});

el<HTMLInputElement>("toggle-processed").addEventListener("change", (ev) => {
  session.setProcessed((ev.target as HTMLInputElement).checked);
  void reloadRasters();
});

el<HTMLInputElement>("toggle-roi").addEventListener("change", (ev) => {
  session.view.roiOverlay = (ev.target as HTMLInputElement).checked;
  drawAll();
});

el<HTMLSelectElement>("tool-select").addEventListener("change", (ev) => {
  session.view.tool =
    (ev.target as HTMLSelectElement).value as typeof session.view.tool;
});

el<HTMLInputElement>("brush-size").addEventListener("input", (ev) => {
  session.view.brushSize = Number((ev.target as HTMLInputElement).value);
});

el<HTMLButtonElement>("btn-clear").addEventListener("click", () => {
  session.clearMask();
  drawAll();
});

el<HTMLButtonElement>("btn-save").addEventListener("click", async () => {
  try {
    const outcome = await session.save();
    if (outcome.staleOverwrite) {
      status("saved, but overwrote someone else's newer revision "
        + `(rev ${outcome.etag})`, true);
    } else {
      status(`mask saved (rev ${outcome.etag})`);
    }
    await refreshScans();
  } catch (err) {
    status(`save failed: ${err}`, true);
  }
});

el<HTMLButtonElement>("btn-compare").addEventListener("click", () => {
  void runCompare();
});

void refreshScans();
status(`ready — annotating as ${annotator}`);
