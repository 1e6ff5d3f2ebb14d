// Immediate-mode canvas renderer for the occupancy map, named locations,
// scene objects, the drive trail and the robot itself. drawScene is a
// pure function of its arguments: same map + state in, same draw calls
// out. No retained scene graph, no tiles.

import { MapData } from "./schema";
import { Pose } from "./store";

export interface SceneInput {
  map: MapData;
  pose: Pose | null;
  trail: Array<[number, number]>;
}

export interface Transform {
  scale: number; // pixels per metre
  offsetX: number;
  offsetY: number;
  heightPx: number;
}

/** Fit the map into the canvas, preserving aspect, small margin. */
export function computeTransform(
  map: MapData,
  widthPx: number,
  heightPx: number,
): Transform {
  const rows = map.grid.length;
  const cols = rows > 0 ? map.grid[0].length : 0;
  const worldW = cols * map.resolution;
  const worldH = rows * map.resolution;
  const margin = 8;
  const scale = Math.min(
    (widthPx - 2 * margin) / Math.max(worldW, 1e-9),
    (heightPx - 2 * margin) / Math.max(worldH, 1e-9),
  );
  return {
    scale,
    offsetX: margin,
    offsetY: margin,
    heightPx,
  };
}

// world y grows north, canvas y grows down: flip.
function toPx(t: Transform, x: number, y: number): [number, number] {
  return [
    t.offsetX + x * t.scale,
    t.heightPx - t.offsetY - y * t.scale,
  ];
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  widthPx: number,
  heightPx: number,
  scene: SceneInput,
): void {
  const { map, pose, trail } = scene;
  const t = computeTransform(map, widthPx, heightPx);
  const cell = map.resolution * t.scale;

  ctx.clearRect(0, 0, widthPx, heightPx);
  ctx.fillStyle = "#f4f1ea";
  ctx.fillRect(0, 0, widthPx, heightPx);

  // occupancy grid: row 0 is the south edge
  ctx.fillStyle = "#4a4440";
  for (let r = 0; r < map.grid.length; r++) {
    const row = map.grid[r];
    for (let c = 0; c < row.length; c++) {
      if (row[c] === "1") {
        const [px, py] = toPx(t, c * map.resolution, (r + 1) * map.resolution);
        ctx.fillRect(px, py, cell + 0.5, cell + 0.5);
      }
    }
  }

  // named locations
  ctx.font = "11px sans-serif";
  for (const [name, [lx, ly]] of Object.entries(map.locations)) {
    const [px, py] = toPx(t, lx, ly);
    ctx.fillStyle = "#2e6da4";
    ctx.beginPath();
    ctx.arc(px, py, 4, 0, Math.PI * 2);
    ctx.fill();
    ctx.fillText(name, px + 6, py - 4);
  }

  // scene objects
  for (const obj of map.objects) {
    const [px, py] = toPx(t, obj.x, obj.y);
    ctx.fillStyle = "#8a6d3b";
    ctx.fillRect(px - 3, py - 3, 6, 6);
    ctx.fillText(obj.name, px + 6, py + 4);
  }

  // trail
  if (trail.length > 1) {
    ctx.strokeStyle = "#7cb47c";
    ctx.lineWidth = 2;
    ctx.beginPath();
    const [sx, sy] = toPx(t, trail[0][0], trail[0][1]);
    ctx.moveTo(sx, sy);
    for (let i = 1; i < trail.length; i++) {
      const [px, py] = toPx(t, trail[i][0], trail[i][1]);
      ctx.lineTo(px, py);
    }
    ctx.stroke();
  }

  // robot: triangle pointing along theta
  if (pose) {
    const [px, py] = toPx(t, pose.x, pose.y);
    const size = Math.max(6, 0.25 * t.scale);
    ctx.save();
    ctx.translate(px, py);
    ctx.rotate(-pose.theta); // canvas y is flipped, so rotate the other way
    ctx.fillStyle = "#c0392b";
    ctx.beginPath();
    ctx.moveTo(size, 0);
    ctx.lineTo(-size * 0.6, size * 0.5);
    ctx.lineTo(-size * 0.6, -size * 0.5);
    ctx.closePath();
    ctx.fill();
    ctx.restore();
  }
}
