/**
 * Typed client for the annotation service API. This is the UI's only data
 * path: rasters, masks, simulation, preprocessing and every metric number
 * come from the service, nothing is computed locally.
 */

export interface ScanSummary {
  scan_id: string;
  scene: string | null;
  seed: number | null;
  lines: number;
  samples: number;
  has_processed: boolean;
  annotators: string[];
}

export interface ScanConfigDoc {
  sector_start_grad: number;
  sector_end_grad: number;
  angular_step_grad: number;
  gain: number;
  sample_count: number;
  sample_distance_m: number;
  max_range_m: number;
}

export interface ScanDetail extends ScanSummary {
  metadata: Record<string, unknown>;
  config: ScanConfigDoc;
  roi_defaults: { min_range_m: number; max_range_m: number };
  annotations: Record<string, unknown>;
}

export interface MetricReport {
  dc: number;
  iou: number;
  pa: number;
  ps: number;
  rs: number;
  f1s: number;
  mae: number;
  biou: number;
  bs: number;
}

export interface MaskPutResult {
  scan_id: string;
  annotator: string;
  etag: string;
  conflict: boolean;
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(`${status}: ${message}`);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike =
      (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const doc = await response.json();
        if (doc && typeof doc.error === "string") detail = doc.error;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  async listScans(): Promise<ScanSummary[]> {
    const response = await this.request("/api/scans");
    return (await response.json()).scans;
  }

  async scanDetail(scanId: string): Promise<ScanDetail> {
    const response = await this.request(
      `/api/scans/${encodeURIComponent(scanId)}`);
    return response.json();
  }

  rasterUrl(scanId: string, mode: "rect" | "fan",
            processed: boolean, ppm = 60): string {
    const query = `mode=${mode}&processed=${processed ? 1 : 0}&ppm=${ppm}`;
    return `${this.baseUrl}/api/scans/${encodeURIComponent(scanId)}`
      + `/raster?${query}`;
  }

  async getRaster(scanId: string, mode: "rect" | "fan",
                  processed: boolean, ppm = 60): Promise<Uint8Array> {
    const response = await this.request(
      this.rasterUrl(scanId, mode, processed, ppm).slice(this.baseUrl.length));
    return new Uint8Array(await response.arrayBuffer());
  }

  async getMask(scanId: string, annotator: string
                ): Promise<{ bytes: Uint8Array; etag: string | null }> {
    const response = await this.request(
      `/api/scans/${encodeURIComponent(scanId)}/mask`
      + `?annotator=${encodeURIComponent(annotator)}`);
    return {
      bytes: new Uint8Array(await response.arrayBuffer()),
      etag: response.headers.get("ETag"),
    };
  }

  async putMask(scanId: string, annotator: string, pngBytes: Uint8Array,
                knownEtag?: string | null): Promise<MaskPutResult> {
    const headers: Record<string, string> = {
      "Content-Type": "image/png",
    };
    if (knownEtag) headers["If-Match"] = knownEtag;
    const response = await this.request(
      `/api/scans/${encodeURIComponent(scanId)}/mask`
      + `?annotator=${encodeURIComponent(annotator)}`,
      { method: "PUT", body: pngBytes as unknown as BodyInit, headers });
    return response.json();
  }

  async simulate(body: { experiment?: number; scene?: unknown; seed?: number }
                 ): Promise<string> {
    const response = await this.request("/api/simulate", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await response.json()).scan_id;
  }

  async preprocess(scanId: string, roiMin?: number, roiMax?: number
                   ): Promise<string> {
    const body: Record<string, unknown> = { scan_id: scanId };
    if (roiMin !== undefined) body.roi_min = roiMin;
    if (roiMax !== undefined) body.roi_max = roiMax;
    const response = await this.request("/api/preprocess", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return (await response.json()).scan_id;
  }

  async evaluate(scanId: string, predAnnotator: string,
                 trueAnnotator = "simulator"): Promise<MetricReport> {
    const response = await this.request(
      `/api/eval?scan=${encodeURIComponent(scanId)}`
      + `&pred=${encodeURIComponent(predAnnotator)}`
      + `&true=${encodeURIComponent(trueAnnotator)}`);
    return response.json();
  }
}
