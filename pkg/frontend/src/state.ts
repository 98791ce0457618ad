/**
 * Editor session state: which scan is loaded, how it is viewed, and the
 * in-progress mask with its server revision. View toggles never touch the
 * mask; the mask changes only through explicit edit or load operations.
 */

import { ApiClient, ApiError, MaskPutResult, ScanDetail } from "./api.js";
import { Mask, Point } from "./mask.js";

export type ViewMode = "rect" | "fan";
export type Tool = "brush" | "eraser" | "polygon";

export interface ViewState {
  scanId: string | null;
  mode: ViewMode;
  processed: boolean;
  roiOverlay: boolean;
  brushSize: number;
  zoom: number;
  panX: number;
  panY: number;
  tool: Tool;
}

export function initialViewState(): ViewState {
  return {
    scanId: null,
    mode: "rect",
    processed: false,
    roiOverlay: true,
    brushSize: 3,
    zoom: 1,
    panX: 0,
    panY: 0,
    tool: "brush",
  };
}

export interface SaveOutcome {
  etag: string;
  /** True when the save overwrote a revision this session had not seen. */
  staleOverwrite: boolean;
}

export class EditorSession {
  readonly view: ViewState = initialViewState();
  detail: ScanDetail | null = null;
  mask: Mask | null = null;
  /** Server revision of the last load/save; null for a fresh mask. */
  revision: string | null = null;
  dirty = false;
  private polygonDraft: Point[] = [];

  constructor(private readonly api: ApiClient,
              readonly annotator: string) {}

  async open(scanId: string): Promise<void> {
    this.detail = await this.api.scanDetail(scanId);
    this.view.scanId = scanId;
    try {
      const { bytes, etag } = await this.api.getMask(scanId, this.annotator);
      this.mask = await Mask.fromPngBytes(bytes);
      this.revision = etag;
    } catch (err) {
      // Only "no mask yet" starts a blank canvas; anything else (network,
      // server error) must surface rather than risk a silent overwrite.
      if (!(err instanceof ApiError) || err.status !== 404) throw err;
      this.mask = new Mask(this.detail.samples, this.detail.lines);
      this.revision = null;
    }
    this.dirty = false;
    this.polygonDraft = [];
  }

  /** Rect/fan and raw/processed toggles keep the in-progress mask. */
  setMode(mode: ViewMode): void {
    this.view.mode = mode;
  }

  setProcessed(processed: boolean): void {
    this.view.processed = processed;
  }

  private requireMask(): Mask {
    if (!this.mask) throw new Error("no scan loaded");
    if (this.view.mode !== "rect") {
      throw new Error("mask edits are rect-view only; the fan is a preview");
    }
    return this.mask;
  }

  stroke(from: Point, to: Point): void {
    const mask = this.requireMask();
    const value = this.view.tool === "eraser" ? 0 : 1;
    mask.paintStroke(from, to, this.view.brushSize, value);
    this.dirty = true;
  }

  addPolygonVertex(p: Point): void {
    this.requireMask();
    this.polygonDraft.push(p);
  }

  get polygonVertices(): readonly Point[] {
    return this.polygonDraft;
  }

  closePolygon(): void {
    const mask = this.requireMask();
    if (this.polygonDraft.length >= 3) {
      mask.fillPolygon(this.polygonDraft,
                       this.view.tool === "eraser" ? 0 : 1);
      this.dirty = true;
    }
    this.polygonDraft = [];
  }

  clearMask(): void {
    this.requireMask().clear();
    this.dirty = true;
  }

  async save(): Promise<SaveOutcome> {
    if (!this.mask || !this.view.scanId) throw new Error("no scan loaded");
    const result: MaskPutResult = await this.api.putMask(
      this.view.scanId, this.annotator, this.mask.toPngBytes(),
      this.revision);
    this.revision = result.etag;
    this.dirty = false;
    return { etag: result.etag, staleOverwrite: result.conflict };
  }
}
