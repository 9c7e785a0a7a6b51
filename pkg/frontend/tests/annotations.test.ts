import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  AnnotationStore,
  deserializeAnnotations,
  polygonProblem,
  serializeAnnotations,
} from "../src/annotations";

const here = dirname(fileURLToPath(import.meta.url));

function scriptedStore(): AnnotationStore {
  const store = new AnnotationStore();
  store.beginStroke(1, 4, [10, 20]);
  store.extendStroke([14, 20]);
  store.extendStroke([18, 24]);
  store.beginStroke(0, 3, [2, 2]);
  store.extendStroke([2, 8]);
  store.addPolygonVertex([1, 1]);
  store.addPolygonVertex([30, 2]);
  store.addPolygonVertex([28, 26]);
  store.addPolygonVertex([3, 24]);
  expect(store.closePolygon()).toBeNull();
  return store;
}

describe("annotation serialization", () => {
  it("matches the committed fixture byte for byte", () => {
    const fixture = readFileSync(join(here, "fixtures", "annotations.fixture.json"), "utf-8").trim();
    expect(scriptedStore().serialize()).toBe(fixture);
  });

  it("round-trips through JSON as identity", () => {
    const store = scriptedStore();
    const json = store.serialize();
    const state = deserializeAnnotations(json);
    expect(serializeAnnotations(state.strokes, state.polygon)).toBe(json);
  });

  it("restore() reproduces the serialized state", () => {
    const store = scriptedStore();
    const json = store.serialize();
    const fresh = new AnnotationStore();
    fresh.restore(json);
    expect(fresh.serialize()).toBe(json);
  });
});

describe("undo/redo", () => {
  it("restores byte-identical snapshots", () => {
    const store = new AnnotationStore();
    store.beginStroke(0, 2, [1, 1]);
    store.extendStroke([5, 5]);
    const before = store.serialize();
    store.beginStroke(1, 3, [9, 9]);
    const after = store.serialize();
    expect(after).not.toBe(before);

    store.undo();
    expect(store.serialize()).toBe(before);
    store.redo();
    expect(store.serialize()).toBe(after);
  });

  it("undo after a stroke returns to the pre-stroke state", () => {
    const store = new AnnotationStore();
    const empty = store.serialize();
    store.beginStroke(1, 2, [3, 3]);
    store.extendStroke([8, 3]);
    store.undo();
    expect(store.serialize()).toBe(empty);
    expect(store.canUndo()).toBe(false);
    expect(store.canRedo()).toBe(true);
  });

  it("clear is undoable", () => {
    const store = scriptedStore();
    const full = store.serialize();
    store.clear();
    expect(store.getStrokes().length).toBe(0);
    store.undo();
    expect(store.serialize()).toBe(full);
  });
});

describe("stroke capture", () => {
  it("decimates points closer than the spacing threshold", () => {
    const store = new AnnotationStore();
    store.beginStroke(0, 2, [0, 0]);
    store.extendStroke([0.1, 0.1]); // dropped
    store.extendStroke([2, 0]);
    expect(store.getStrokes()[0].points).toEqual([
      [0, 0],
      [2, 0],
    ]);
  });

  it("a drag yields one stroke with at least two points", () => {
    const store = new AnnotationStore();
    store.beginStroke(1, 2, [0, 0]);
    store.extendStroke([4, 2]);
    store.extendStroke([9, 4]);
    expect(store.getStrokes().length).toBe(1);
    expect(store.getStrokes()[0].points.length).toBeGreaterThanOrEqual(2);
  });
});

describe("polygon tool", () => {
  it("three clicks and a close yield a 3-vertex polygon", () => {
    const store = new AnnotationStore();
    store.addPolygonVertex([0, 0]);
    store.addPolygonVertex([10, 0]);
    store.addPolygonVertex([5, 8]);
    expect(store.closePolygon()).toBeNull();
    expect(store.getPolygon()).toEqual([
      [0, 0],
      [10, 0],
      [5, 8],
    ]);
  });

  it("flags self-intersection before submit", () => {
    expect(
      polygonProblem([
        [0, 0],
        [10, 10],
        [10, 0],
        [0, 10],
      ]),
    ).toMatch(/self-intersecting/);
    expect(
      polygonProblem([
        [0, 0],
        [10, 0],
      ]),
    ).toMatch(/at least 3/);
    expect(
      polygonProblem([
        [0, 0],
        [10, 0],
        [10, 10],
        [0, 10],
      ]),
    ).toBeNull();
  });

  it("a failed close keeps the draft editable", () => {
    const store = new AnnotationStore();
    store.addPolygonVertex([0, 0]);
    store.addPolygonVertex([10, 10]);
    store.addPolygonVertex([10, 0]);
    store.addPolygonVertex([0, 10]);
    expect(store.closePolygon()).toMatch(/self-intersecting/);
    expect(store.getPolygon()).toBeNull();
    expect(store.getDraftPolygon().length).toBe(4);
  });
});
