/**
 * Pure plotting geometry: world-space bounds with a margin, and the
 * equal-aspect world-to-canvas transform shared by both comparison panels.
 */

export interface Bounds {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

/**
 * Axis-aligned bounds of all points, padded by `margin` (fraction of each
 * span) on every side.  Degenerate spans (a single point or a perfectly
 * horizontal/vertical path) get a unit span before padding so the transform
 * below stays invertible.
 */
export function plotBounds(
  pointSets: ReadonlyArray<ReadonlyArray<readonly [number, number]>>,
  margin = 0.1,
): Bounds {
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const points of pointSets) {
    for (const [x, y] of points) {
      xMin = Math.min(xMin, x);
      xMax = Math.max(xMax, x);
      yMin = Math.min(yMin, y);
      yMax = Math.max(yMax, y);
    }
  }
  if (xMin > xMax) {
    throw new Error("plotBounds: no points");
  }
  if (xMax - xMin === 0) {
    xMin -= 0.5;
    xMax += 0.5;
  }
  if (yMax - yMin === 0) {
    yMin -= 0.5;
    yMax += 0.5;
  }
  const padX = margin * (xMax - xMin);
  const padY = margin * (yMax - yMin);
  return { xMin: xMin - padX, xMax: xMax + padX, yMin: yMin - padY, yMax: yMax + padY };
}

export interface Transform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

/**
 * Equal-aspect transform mapping the bounds into a width x height canvas,
 * centred along the slack axis.  Canvas y grows downward, so world y is
 * flipped.
 */
export function fitTransform(bounds: Bounds, width: number, height: number): Transform {
  const spanX = bounds.xMax - bounds.xMin;
  const spanY = bounds.yMax - bounds.yMin;
  const scale = Math.min(width / spanX, height / spanY);
  const offsetX = (width - scale * spanX) / 2;
  const offsetY = (height - scale * spanY) / 2;
  return { scale, offsetX, offsetY };
}

export function toCanvas(
  bounds: Bounds,
  t: Transform,
  height: number,
  point: readonly [number, number],
): [number, number] {
  const [x, y] = point;
  return [
    t.offsetX + t.scale * (x - bounds.xMin),
    height - (t.offsetY + t.scale * (y - bounds.yMin)),
  ];
}
