/**
 * Rect-to-fan projection for the read-only preview: sonar at the midpoint
 * of the bottom edge, forward range straight up, angles in gradians
 * (positive counterclockwise, i.e. to the left on screen).
 *
 * Every number here derives from the scan config served by the API; the
 * ROI radii and range rings are drawn from those values, never hardcoded.
 */

export interface ScanGeometry {
  sectorStartGrad: number;
  sectorEndGrad: number;
  angularStepGrad: number;
  sampleCount: number;
  sampleDistanceM: number;
  maxRangeM: number;
}

export interface FanLayout {
  /** Square canvas side in pixels. */
  side: number;
  originX: number;
  originY: number;
  pixelsPerMeter: number;
}

export function fanLayout(geometry: ScanGeometry,
                          pixelsPerMeter: number): FanLayout {
  const half = Math.ceil(geometry.maxRangeM * pixelsPerMeter);
  return {
    side: 2 * half + 1,
    originX: half,
    originY: 2 * half,
    pixelsPerMeter,
  };
}

export function gradToRad(grad: number): number {
  return (grad * Math.PI) / 200;
}

export function lineAngleGrad(geometry: ScanGeometry, lineIndex: number): number {
  return geometry.sectorStartGrad + lineIndex * geometry.angularStepGrad;
}

export function lineCount(geometry: ScanGeometry): number {
  return (geometry.sectorEndGrad - geometry.sectorStartGrad)
    / geometry.angularStepGrad + 1;
}

export function binRangeM(geometry: ScanGeometry, binIndex: number): number {
  return (binIndex + 1) * geometry.sampleDistanceM;
}

/** Canvas position of one (line, bin) sample in the fan view. */
export function rectToFan(geometry: ScanGeometry, layout: FanLayout,
                          lineIndex: number, binIndex: number
                          ): { x: number; y: number } {
  const theta = gradToRad(lineAngleGrad(geometry, lineIndex));
  const range = binRangeM(geometry, binIndex);
  return {
    x: layout.originX - Math.round(
      range * Math.sin(theta) * layout.pixelsPerMeter),
    y: layout.originY - Math.round(
      range * Math.cos(theta) * layout.pixelsPerMeter),
  };
}

/** Range ring radii at 1 m intervals up to the configured maximum. */
export function rangeRingsM(geometry: ScanGeometry): number[] {
  const rings: number[] = [];
  for (let r = 1; r <= Math.floor(geometry.maxRangeM); r++) {
    rings.push(r);
  }
  return rings;
}
