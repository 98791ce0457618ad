import assert from "node:assert/strict";
import { test } from "node:test";

import { Mask } from "../src/mask.js";

test("brush paints a disc and eraser removes it", () => {
  const mask = new Mask(20, 10);
  mask.paintDisc({ row: 5, col: 10 }, 2, 1);
  assert.equal(mask.get(5, 10), 1);
  assert.equal(mask.get(5, 12), 1);   // on the radius
  assert.equal(mask.get(5, 13), 0);   // outside
  assert.equal(mask.get(3, 10), 1);
  const painted = mask.countForeground();
  assert.ok(painted >= 9 && painted <= 16, `disc size ${painted}`);
  mask.paintDisc({ row: 5, col: 10 }, 2, 0);
  assert.equal(mask.countForeground(), 0);
});

test("zero radius paints a single pixel", () => {
  const mask = new Mask(8, 8);
  mask.paintDisc({ row: 3, col: 4 }, 0, 1);
  assert.equal(mask.countForeground(), 1);
  assert.equal(mask.get(3, 4), 1);
});

test("strokes leave no gaps on fast drags", () => {
  const mask = new Mask(64, 64);
  mask.paintStroke({ row: 2, col: 2 }, { row: 60, col: 60 }, 1, 1);
  // every point along the diagonal must be covered
  for (let i = 3; i < 60; i++) {
    assert.equal(mask.get(i, i), 1, `gap at ${i}`);
  }
});

test("painting clamps at the borders", () => {
  const mask = new Mask(10, 10);
  mask.paintDisc({ row: 0, col: 0 }, 3, 1);
  mask.paintDisc({ row: 9, col: 9 }, 3, 1);
  assert.ok(mask.countForeground() > 0);
  assert.equal(mask.get(0, 0), 1);
  assert.equal(mask.get(9, 9), 1);
});

test("polygon fill covers the interior, even-odd", () => {
  const mask = new Mask(20, 20);
  mask.fillPolygon([
    { row: 2, col: 2 }, { row: 2, col: 17 },
    { row: 17, col: 17 }, { row: 17, col: 2 },
  ], 1);
  assert.equal(mask.get(10, 10), 1);
  assert.equal(mask.get(3, 3), 1);
  assert.equal(mask.get(1, 1), 0);
  assert.equal(mask.get(18, 18), 0);
});

test("degenerate polygons are ignored", () => {
  const mask = new Mask(10, 10);
  mask.fillPolygon([{ row: 1, col: 1 }, { row: 5, col: 5 }], 1);
  assert.equal(mask.countForeground(), 0);
});

test("png round trip is identity and byte-stable", async () => {
  const mask = new Mask(41, 23);
  mask.paintDisc({ row: 10, col: 20 }, 4, 1);
  mask.fillPolygon([
    { row: 1, col: 1 }, { row: 1, col: 8 }, { row: 6, col: 4 },
  ], 1);
  const bytes = mask.toPngBytes();
  const loaded = await Mask.fromPngBytes(bytes);
  assert.ok(loaded.equals(mask));
  // save -> load -> save emits identical bytes
  assert.deepEqual(loaded.toPngBytes(), bytes);
});

test("an all-zero mask is valid and round-trips", async () => {
  const mask = new Mask(30, 12);
  const loaded = await Mask.fromPngBytes(mask.toPngBytes());
  assert.equal(loaded.countForeground(), 0);
  assert.ok(loaded.equals(mask));
});
