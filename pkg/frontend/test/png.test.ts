import assert from "node:assert/strict";
import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { test } from "node:test";
import { fileURLToPath } from "node:url";

import { crc32, decodeGrayPng, encodeGrayPng } from "../src/png.js";

const here = dirname(fileURLToPath(import.meta.url));

function randomImage(width: number, height: number, seed: number) {
  // xorshift so the test corpus is reproducible without dependencies
  let state = seed || 1;
  const next = () => {
    state ^= state << 13; state ^= state >>> 17; state ^= state << 5;
    return (state >>> 0) % 256;
  };
  const pixels = new Uint8Array(width * height);
  for (let i = 0; i < pixels.length; i++) pixels[i] = next();
  return { width, height, pixels };
}

test("crc32 matches the PNG reference value", () => {
  // Standard check value for the IEEE polynomial
  const bytes = new TextEncoder().encode("123456789");
  assert.equal(crc32(bytes), 0xcbf43926);
});

test("encode-decode round trip preserves pixels", async () => {
  for (const [w, h, seed] of [[1, 1, 7], [41, 23, 9], [1200, 201, 11],
                              [256, 3, 13]] as const) {
    const image = randomImage(w, h, seed);
    const decoded = await decodeGrayPng(encodeGrayPng(image));
    assert.equal(decoded.width, w);
    assert.equal(decoded.height, h);
    assert.deepEqual(decoded.pixels, image.pixels);
  }
});

test("encoding is byte-deterministic", async () => {
  const image = randomImage(101, 57, 21);
  const first = encodeGrayPng(image);
  const second = encodeGrayPng(image);
  assert.deepEqual(first, second);
  // decode -> re-encode is byte-stable too (the save/load/save property)
  const decoded = await decodeGrayPng(first);
  assert.deepEqual(encodeGrayPng(decoded), first);
});

test("decodes a PNG written by the service-side encoder (PIL)", async () => {
  const fixture = JSON.parse(
    readFileSync(join(here, "..", "..", "test", "pil_fixture.json"), "utf8"));
  const bytes = Uint8Array.from(Buffer.from(fixture.png_b64, "base64"));
  const image = await decodeGrayPng(bytes);
  assert.equal(image.width, fixture.width);
  assert.equal(image.height, fixture.height);
  assert.deepEqual(Array.from(image.pixels), fixture.pixels);
});

test("rejects non-PNG bytes", async () => {
  await assert.rejects(decodeGrayPng(new TextEncoder().encode("not a png")),
                       /signature/);
});

test("rejects color PNGs", async () => {
  // Hand-build an IHDR declaring RGB (color type 2).
  const gray = encodeGrayPng(randomImage(4, 4, 5));
  const rgb = gray.slice();
  rgb[8 + 4 + 4 + 9] = 2;   // color type byte inside IHDR
  await assert.rejects(decodeGrayPng(rgb), /color type/);
});

test("oversized scanline data is rejected", async () => {
  const image = randomImage(4, 4, 3);
  const good = encodeGrayPng(image);
  // Truncate the final stored block by lying about height.
  const bad = good.slice();
  const view = new DataView(bad.buffer);
  view.setUint32(8 + 8 + 4, 5); // IHDR height 4 -> 5
  await assert.rejects(decodeGrayPng(bad), /bytes/);
});
