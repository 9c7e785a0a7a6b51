// Screen <-> image coordinate mapping. Strokes and polygons are stored in
// image space, so the mapping must round-trip exactly at any zoom level.

import type { Point } from "./annotations";

export interface ViewTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function identityView(): ViewTransform {
  return { scale: 1, offsetX: 0, offsetY: 0 };
}

export function screenToImage(view: ViewTransform, sx: number, sy: number): Point {
  return [(sx - view.offsetX) / view.scale, (sy - view.offsetY) / view.scale];
}

export function imageToScreen(view: ViewTransform, ix: number, iy: number): Point {
  return [ix * view.scale + view.offsetX, iy * view.scale + view.offsetY];
}

export function zoomAround(view: ViewTransform, factor: number, sx: number, sy: number): ViewTransform {
  const scale = Math.min(32, Math.max(0.125, view.scale * factor));
  const [ix, iy] = screenToImage(view, sx, sy);
  // Keep the image point under the cursor fixed on screen.
  return { scale, offsetX: sx - ix * scale, offsetY: sy - iy * scale };
}

export function panBy(view: ViewTransform, dx: number, dy: number): ViewTransform {
  return { ...view, offsetX: view.offsetX + dx, offsetY: view.offsetY + dy };
}
