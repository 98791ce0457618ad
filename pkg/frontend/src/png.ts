/**
 * Minimal 8-bit grayscale PNG codec.
 *
 * Decoding accepts any 8-bit grayscale PNG (all five scanline filters,
 * zlib-compressed IDAT, via DecompressionStream). Encoding always emits
 * filter-0 scanlines inside *stored* deflate blocks, so encoding the same
 * pixels yields the same bytes on every engine — that determinism is what
 * makes mask save/load/save byte-stable.
 */

const PNG_SIGNATURE = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major pixels, one byte per pixel. */
  pixels: Uint8Array;
}

/* ------------------------------------------------------------------ CRC32 */

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

export function crc32(data: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < data.length; i++) {
    c = CRC_TABLE[(c ^ data[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function adler32(data: Uint8Array): number {
  let a = 1;
  let b = 0;
  for (let i = 0; i < data.length; i++) {
    a = (a + data[i]) % 65521;
    b = (b + a) % 65521;
  }
  return ((b << 16) | a) >>> 0;
}

/* ------------------------------------------------------------- utilities */

function u32be(value: number): Uint8Array {
  return new Uint8Array([
    (value >>> 24) & 0xff, (value >>> 16) & 0xff,
    (value >>> 8) & 0xff, value & 0xff,
  ]);
}

function concat(parts: Uint8Array[]): Uint8Array {
  const total = parts.reduce((n, p) => n + p.length, 0);
  const out = new Uint8Array(total);
  let offset = 0;
  for (const part of parts) {
    out.set(part, offset);
    offset += part.length;
  }
  return out;
}

function chunk(type: string, body: Uint8Array): Uint8Array {
  const typeBytes = new TextEncoder().encode(type);
  const payload = concat([typeBytes, body]);
  return concat([u32be(body.length), payload, u32be(crc32(payload))]);
}

/* --------------------------------------------------------------- encoder */

/** Raw scanlines (filter byte 0 per row) wrapped in stored deflate blocks. */
function storedZlib(raw: Uint8Array): Uint8Array {
  const parts: Uint8Array[] = [new Uint8Array([0x78, 0x01])]; // zlib header
  const MAX_BLOCK = 65535;
  let offset = 0;
  do {
    const size = Math.min(MAX_BLOCK, raw.length - offset);
    const final = offset + size >= raw.length ? 1 : 0;
    parts.push(new Uint8Array([
      final, size & 0xff, size >>> 8, (size ^ 0xffff) & 0xff,
      (size ^ 0xffff) >>> 8,
    ]));
    parts.push(raw.subarray(offset, offset + size));
    offset += size;
  } while (offset < raw.length);
  parts.push(u32be(adler32(raw)));
  return concat(parts);
}

export function encodeGrayPng(image: GrayImage): Uint8Array {
  const { width, height, pixels } = image;
  if (pixels.length !== width * height) {
    throw new Error(`pixel buffer is ${pixels.length}, want ${width * height}`);
  }
  const ihdr = concat([
    u32be(width), u32be(height),
    new Uint8Array([8, 0, 0, 0, 0]), // 8-bit, grayscale, deflate, none, none
  ]);
  const raw = new Uint8Array(height * (width + 1));
  for (let row = 0; row < height; row++) {
    raw[row * (width + 1)] = 0; // filter: None
    raw.set(pixels.subarray(row * width, (row + 1) * width),
            row * (width + 1) + 1);
  }
  return concat([
    new Uint8Array(PNG_SIGNATURE),
    chunk("IHDR", ihdr),
    chunk("IDAT", storedZlib(raw)),
    chunk("IEND", new Uint8Array(0)),
  ]);
}

/* --------------------------------------------------------------- decoder */

async function inflate(data: Uint8Array): Promise<Uint8Array> {
  const stream = new Blob([data as BlobPart]).stream()
    .pipeThrough(new DecompressionStream("deflate"));
  const buffer = await new Response(stream).arrayBuffer();
  return new Uint8Array(buffer);
}

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

function unfilter(raw: Uint8Array, width: number, height: number): Uint8Array {
  const stride = width + 1;
  const out = new Uint8Array(width * height);
  for (let row = 0; row < height; row++) {
    const filter = raw[row * stride];
    const line = raw.subarray(row * stride + 1, row * stride + 1 + width);
    const prev = row > 0 ? out.subarray((row - 1) * width, row * width) : null;
    const dst = out.subarray(row * width, (row + 1) * width);
    for (let x = 0; x < width; x++) {
      const left = x > 0 ? dst[x - 1] : 0;
      const up = prev ? prev[x] : 0;
      const upLeft = prev && x > 0 ? prev[x - 1] : 0;
      let value = line[x];
      switch (filter) {
        case 0: break;
        case 1: value += left; break;
        case 2: value += up; break;
        case 3: value += (left + up) >> 1; break;
        case 4: value += paeth(left, up, upLeft); break;
        default:
          throw new Error(`unsupported PNG filter ${filter} on row ${row}`);
      }
      dst[x] = value & 0xff;
    }
  }
  return out;
}

export async function decodeGrayPng(bytes: Uint8Array): Promise<GrayImage> {
  for (let i = 0; i < PNG_SIGNATURE.length; i++) {
    if (bytes[i] !== PNG_SIGNATURE[i]) {
      throw new Error("not a PNG: bad signature");
    }
  }
  let offset = 8;
  let width = 0;
  let height = 0;
  let bitDepth = 0;
  let colorType = 0;
  let interlace = 0;
  const idat: Uint8Array[] = [];
  const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
  while (offset < bytes.length) {
    const length = view.getUint32(offset);
    const type = new TextDecoder().decode(
      bytes.subarray(offset + 4, offset + 8));
    const body = bytes.subarray(offset + 8, offset + 8 + length);
    if (type === "IHDR") {
      const hv = new DataView(bytes.buffer, bytes.byteOffset + offset + 8, 13);
      width = hv.getUint32(0);
      height = hv.getUint32(4);
      bitDepth = hv.getUint8(8);
      colorType = hv.getUint8(9);
      interlace = hv.getUint8(12);
    } else if (type === "IDAT") {
      idat.push(body);
    } else if (type === "IEND") {
      break;
    }
    offset += 12 + length; // length + type + body + crc
  }
  if (bitDepth !== 8 || colorType !== 0) {
    throw new Error(`unsupported PNG: bit depth ${bitDepth}, `
      + `color type ${colorType}; need 8-bit grayscale`);
  }
  if (interlace !== 0) {
    throw new Error("unsupported PNG: interlaced");
  }
  const raw = await inflate(concat(idat));
  if (raw.length !== height * (width + 1)) {
    throw new Error(`PNG data is ${raw.length} bytes, `
      + `want ${height * (width + 1)}`);
  }
  return { width, height, pixels: unfilter(raw, width, height) };
}
