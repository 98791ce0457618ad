/**
 * Binary object mask in rect-scan geometry (rows = beams, cols = range
 * bins). All editing happens here; the fan view only projects the result.
 */

import { decodeGrayPng, encodeGrayPng } from "./png.js";

export interface Point {
  row: number;
  col: number;
}

export class Mask {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array; // 0 = background, 1 = object

  constructor(width: number, height: number, data?: Uint8Array) {
    if (data && data.length !== width * height) {
      throw new Error(`mask buffer is ${data.length}, want ${width * height}`);
    }
    this.width = width;
    this.height = height;
    this.data = data ?? new Uint8Array(width * height);
  }

  clone(): Mask {
    return new Mask(this.width, this.height, this.data.slice());
  }

  get(row: number, col: number): number {
    return this.data[row * this.width + col];
  }

  set(row: number, col: number, value: 0 | 1): void {
    if (row < 0 || row >= this.height || col < 0 || col >= this.width) return;
    this.data[row * this.width + col] = value;
  }

  equals(other: Mask): boolean {
    if (other.width !== this.width || other.height !== this.height) {
      return false;
    }
    return this.data.every((v, i) => v === other.data[i]);
  }

  countForeground(): number {
    let n = 0;
    for (const v of this.data) n += v;
    return n;
  }

  /** Paint a Euclidean disc; value 1 is the brush, 0 the eraser. */
  paintDisc(center: Point, radius: number, value: 0 | 1): void {
    const r = Math.max(0, radius);
    const r2 = r * r;
    const rowLo = Math.max(0, Math.floor(center.row - r));
    const rowHi = Math.min(this.height - 1, Math.ceil(center.row + r));
    const colLo = Math.max(0, Math.floor(center.col - r));
    const colHi = Math.min(this.width - 1, Math.ceil(center.col + r));
    for (let row = rowLo; row <= rowHi; row++) {
      for (let col = colLo; col <= colHi; col++) {
        const dr = row - center.row;
        const dc = col - center.col;
        if (dr * dr + dc * dc <= r2) {
          this.data[row * this.width + col] = value;
        }
      }
    }
  }

  /** Paint along a drag stroke so fast mouse moves leave no gaps. */
  paintStroke(from: Point, to: Point, radius: number, value: 0 | 1): void {
    const steps = Math.max(1, Math.ceil(Math.hypot(
      to.row - from.row, to.col - from.col)));
    for (let i = 0; i <= steps; i++) {
      const t = i / steps;
      this.paintDisc({
        row: from.row + (to.row - from.row) * t,
        col: from.col + (to.col - from.col) * t,
      }, radius, value);
    }
  }

  /** Even-odd scanline polygon fill over pixel centers. */
  fillPolygon(vertices: Point[], value: 0 | 1): void {
    if (vertices.length < 3) return;
    let rowLo = Infinity;
    let rowHi = -Infinity;
    for (const v of vertices) {
      rowLo = Math.min(rowLo, v.row);
      rowHi = Math.max(rowHi, v.row);
    }
    rowLo = Math.max(0, Math.floor(rowLo));
    rowHi = Math.min(this.height - 1, Math.ceil(rowHi));
    for (let row = rowLo; row <= rowHi; row++) {
      const y = row + 0.0; // pixel-center sampling in row units
      const crossings: number[] = [];
      for (let i = 0; i < vertices.length; i++) {
        const a = vertices[i];
        const b = vertices[(i + 1) % vertices.length];
        if ((a.row <= y && b.row > y) || (b.row <= y && a.row > y)) {
          crossings.push(a.col + ((y - a.row) / (b.row - a.row))
            * (b.col - a.col));
        }
      }
      crossings.sort((p, q) => p - q);
      for (let i = 0; i + 1 < crossings.length; i += 2) {
        const lo = Math.max(0, Math.ceil(crossings[i]));
        const hi = Math.min(this.width - 1, Math.floor(crossings[i + 1]));
        for (let col = lo; col <= hi; col++) {
          this.data[row * this.width + col] = value;
        }
      }
    }
  }

  clear(): void {
    this.data.fill(0);
  }

  /** Deterministic PNG bytes (0 background, 255 object). */
  toPngBytes(): Uint8Array {
    const pixels = new Uint8Array(this.data.length);
    for (let i = 0; i < this.data.length; i++) {
      pixels[i] = this.data[i] ? 255 : 0;
    }
    return encodeGrayPng({
      width: this.width, height: this.height, pixels,
    });
  }

  static async fromPngBytes(bytes: Uint8Array): Promise<Mask> {
    const img = await decodeGrayPng(bytes);
    const data = new Uint8Array(img.pixels.length);
    for (let i = 0; i < img.pixels.length; i++) {
      data[i] = img.pixels[i] >= 128 ? 1 : 0;
    }
    return new Mask(img.width, img.height, data);
  }
}
