// Annotation state: ordered brush strokes plus an optional cut polygon,
// with undo/redo that restores byte-identical serialized state. All
// coordinates are image-space pixels, never screen pixels.

export type Point = [number, number];

export interface Stroke {
  classIndex: number;
  brushRadius: number;
  points: Point[];
}

// Wire format accepted by PUT /api/sessions/{id}/annotations.
export interface AnnotationsWire {
  strokes: { class: number; points: Point[]; brush_radius: number }[];
  polygon: Point[] | null;
}

export type Tool =
  | { kind: "brush"; classIndex: number }
  | { kind: "polygon" }
  | { kind: "pan" };

const MIN_POINT_SPACING = 0.75; // image px; decimates jittery pointer input

export function serializeAnnotations(strokes: Stroke[], polygon: Point[] | null): string {
  const wire: AnnotationsWire = {
    strokes: strokes.map((s) => ({
      class: s.classIndex,
      points: s.points.map((p) => [p[0], p[1]] as Point),
      brush_radius: s.brushRadius,
    })),
    polygon: polygon ? polygon.map((p) => [p[0], p[1]] as Point) : null,
  };
  return JSON.stringify(wire);
}

export function deserializeAnnotations(json: string): { strokes: Stroke[]; polygon: Point[] | null } {
  const wire = JSON.parse(json) as AnnotationsWire;
  return {
    strokes: wire.strokes.map((s) => ({
      classIndex: s.class,
      brushRadius: s.brush_radius,
      points: s.points.map((p) => [p[0], p[1]] as Point),
    })),
    polygon: wire.polygon ? wire.polygon.map((p) => [p[0], p[1]] as Point) : null,
  };
}

function orient(ax: number, ay: number, bx: number, by: number, cx: number, cy: number): number {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

function onSegment(ax: number, ay: number, bx: number, by: number, px: number, py: number): boolean {
  return (
    Math.min(ax, bx) <= px && px <= Math.max(ax, bx) && Math.min(ay, by) <= py && py <= Math.max(ay, by)
  );
}

function segmentsTouch(p1: Point, p2: Point, p3: Point, p4: Point): boolean {
  const d1 = orient(...p3, ...p4, ...p1);
  const d2 = orient(...p3, ...p4, ...p2);
  const d3 = orient(...p1, ...p2, ...p3);
  const d4 = orient(...p1, ...p2, ...p4);
  if (d1 !== 0 && d2 !== 0 && d3 !== 0 && d4 !== 0 && d1 > 0 !== d2 > 0 && d3 > 0 !== d4 > 0) return true;
  if (d1 === 0 && onSegment(...p3, ...p4, ...p1)) return true;
  if (d2 === 0 && onSegment(...p3, ...p4, ...p2)) return true;
  if (d3 === 0 && onSegment(...p1, ...p2, ...p3)) return true;
  if (d4 === 0 && onSegment(...p1, ...p2, ...p4)) return true;
  return false;
}

// Mirrors the server-side validation so problems surface before submit.
export function polygonProblem(points: Point[]): string | null {
  if (points.length < 3) return "polygon needs at least 3 vertices";
  const m = points.length;
  for (let i = 0; i < m; i++) {
    const a = points[i];
    const b = points[(i + 1) % m];
    if (a[0] === b[0] && a[1] === b[1]) return "polygon has a zero-length edge";
  }
  for (let i = 0; i < m; i++) {
    for (let j = i + 1; j < m; j++) {
      const adjacent = j === i + 1 || (i === 0 && j === m - 1);
      if (adjacent) continue;
      if (segmentsTouch(points[i], points[(i + 1) % m], points[j], points[(j + 1) % m])) {
        return "polygon is self-intersecting";
      }
    }
  }
  return null;
}

export class AnnotationStore {
  private strokes: Stroke[] = [];
  private polygon: Point[] | null = null;
  private draftPolygon: Point[] = [];
  private undoStack: string[] = [];
  private redoStack: string[] = [];

  getStrokes(): readonly Stroke[] {
    return this.strokes;
  }

  getPolygon(): Point[] | null {
    return this.polygon;
  }

  getDraftPolygon(): readonly Point[] {
    return this.draftPolygon;
  }

  serialize(): string {
    return serializeAnnotations(this.strokes, this.polygon);
  }

  restore(json: string): void {
    const state = deserializeAnnotations(json);
    this.strokes = state.strokes;
    this.polygon = state.polygon;
    this.draftPolygon = [];
  }

  private checkpoint(): void {
    this.undoStack.push(this.serialize());
    this.redoStack = [];
  }

  undo(): void {
    const snapshot = this.undoStack.pop();
    if (snapshot === undefined) return;
    this.redoStack.push(this.serialize());
    this.restore(snapshot);
  }

  redo(): void {
    const snapshot = this.redoStack.pop();
    if (snapshot === undefined) return;
    this.undoStack.push(this.serialize());
    this.restore(snapshot);
  }

  canUndo(): boolean {
    return this.undoStack.length > 0;
  }

  canRedo(): boolean {
    return this.redoStack.length > 0;
  }

  clear(): void {
    if (this.strokes.length === 0 && this.polygon === null && this.draftPolygon.length === 0) return;
    this.checkpoint();
    this.strokes = [];
    this.polygon = null;
    this.draftPolygon = [];
  }

  beginStroke(classIndex: number, brushRadius: number, at: Point): void {
    this.checkpoint();
    this.strokes.push({ classIndex, brushRadius, points: [at] });
  }

  extendStroke(at: Point): void {
    const stroke = this.strokes[this.strokes.length - 1];
    if (!stroke) return;
    const last = stroke.points[stroke.points.length - 1];
    if (Math.hypot(at[0] - last[0], at[1] - last[1]) < MIN_POINT_SPACING) return;
    stroke.points.push(at);
  }

  addPolygonVertex(at: Point): void {
    if (this.draftPolygon.length === 0) this.checkpoint();
    this.draftPolygon.push(at);
  }

  // Double-click closes the polygon; returns a validation problem or null.
  closePolygon(): string | null {
    const problem = polygonProblem(this.draftPolygon);
    if (problem) return problem;
    this.polygon = this.draftPolygon;
    this.draftPolygon = [];
    return null;
  }

  cancelDraftPolygon(): void {
    this.draftPolygon = [];
  }

  classesPresent(): Set<number> {
    return new Set(this.strokes.map((s) => s.classIndex));
  }
}
