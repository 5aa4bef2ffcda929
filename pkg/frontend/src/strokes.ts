/** Brush strokes and their rasterization into the seed list.
 *
 * A stroke is a polyline of pointer positions in image coordinates plus a
 * label and brush radius. Rasterization is deterministic: positions round
 * half-down to pixel centers, radius 1 stamps exactly one pixel, larger
 * radii stamp a disc around the rounded center, segments are sampled densely
 * enough that drags leave no gaps, pixels outside the image are clipped, and
 * when strokes overlap the later stroke wins per pixel.
 */

export interface Stroke {
  label: number;
  radius: number;
  points: Array<[number, number]>;
}

export interface Seed {
  x: number;
  y: number;
  label: number;
}

/** Round with halves going down: 2.5 -> 2, -0.5 -> -1. */
export function roundHalfDown(v: number): number {
  return Math.ceil(v - 0.5);
}

function stampDisc(
  cx: number,
  cy: number,
  radius: number,
  width: number,
  height: number,
  out: Map<string, Seed>,
  label: number,
): void {
  const px = roundHalfDown(cx);
  const py = roundHalfDown(cy);
  if (radius <= 1) {
    if (px >= 0 && px < width && py >= 0 && py < height) {
      out.set(`${px},${py}`, { x: px, y: py, label });
    }
    return;
  }
  const r = radius - 0.5;
  const span = Math.floor(r);
  for (let dy = -span; dy <= span; dy++) {
    for (let dx = -span; dx <= span; dx++) {
      if (dx * dx + dy * dy > r * r) continue;
      const x = px + dx;
      const y = py + dy;
      if (x >= 0 && x < width && y >= 0 && y < height) {
        out.set(`${x},${y}`, { x, y, label });
      }
    }
  }
}

function stampSegment(
  a: [number, number],
  b: [number, number],
  stroke: Stroke,
  width: number,
  height: number,
  out: Map<string, Seed>,
): void {
  const dist = Math.hypot(b[0] - a[0], b[1] - a[1]);
  const steps = Math.max(1, Math.ceil(dist * 2)); // <= half-pixel spacing
  for (let i = 0; i <= steps; i++) {
    const t = i / steps;
    stampDisc(
      a[0] + t * (b[0] - a[0]),
      a[1] + t * (b[1] - a[1]),
      stroke.radius,
      width,
      height,
      out,
      stroke.label,
    );
  }
}

/** Rasterize strokes in order into a deduplicated seed list (later wins). */
export function rasterizeStrokes(
  strokes: ReadonlyArray<Stroke>,
  width: number,
  height: number,
): Seed[] {
  const seeds = new Map<string, Seed>();
  for (const stroke of strokes) {
    if (stroke.points.length === 0) continue;
    if (stroke.points.length === 1) {
      stampDisc(
        stroke.points[0][0],
        stroke.points[0][1],
        stroke.radius,
        width,
        height,
        seeds,
        stroke.label,
      );
      continue;
    }
    for (let i = 1; i < stroke.points.length; i++) {
      stampSegment(stroke.points[i - 1], stroke.points[i], stroke, width, height, seeds);
    }
  }
  // raster order keeps the payload stable for identical stroke sets
  return [...seeds.values()].sort((p, q) => p.y - q.y || p.x - q.x);
}

/** Distinct labels present after rasterization. */
export function paintedLabels(strokes: ReadonlyArray<Stroke>, width: number, height: number): number[] {
  const labels = new Set(rasterizeStrokes(strokes, width, height).map((s) => s.label));
  return [...labels].sort((a, b) => a - b);
}
