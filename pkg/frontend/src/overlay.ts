// Canvas drawing for the console: the label image, candidate boxes with
// their service-reported scores, the gaze heatmap glow, the grasp marker
// with its approach arrow, and a top-down end-effector path.

import type { RenderPayload, TrajectorySample } from "./types.js";
import type { ConsoleState } from "./state.js";

export function decodeLabelImage(render: RenderPayload): ImageData {
  const raw = atob(render.labels_b64);
  const image = new ImageData(render.width, render.height);
  for (let i = 0; i < raw.length; i++) {
    const entry = render.palette[String(raw.charCodeAt(i))];
    const color = entry ? entry.color : "#000000";
    const r = parseInt(color.slice(1, 3), 16);
    const g = parseInt(color.slice(3, 5), 16);
    const b = parseInt(color.slice(5, 7), 16);
    image.data[4 * i] = r;
    image.data[4 * i + 1] = g;
    image.data[4 * i + 2] = b;
    image.data[4 * i + 3] = 255;
  }
  return image;
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  image: ImageData,
  render: RenderPayload,
): void {
  ctx.putImageData(image, 0, 0);
  ctx.font = "11px monospace";
  for (const [oid, box] of Object.entries(render.boxes)) {
    const entry = Object.values(render.palette).find((p) => p.id === oid);
    ctx.strokeStyle = "#384048";
    ctx.lineWidth = 1;
    ctx.strokeRect(box[0], box[1], box[2] - box[0], box[3] - box[1]);
    if (entry) {
      ctx.fillStyle = "#9aa7b3";
      ctx.fillText(entry.name, box[0] + 2, Math.max(box[1] - 3, 10));
    }
  }
}

export function drawHeatmap(
  ctx: CanvasRenderingContext2D,
  center: [number, number],
  sigmaPx: number,
): void {
  const radius = 2 * sigmaPx;
  const glow = ctx.createRadialGradient(
    center[0], center[1], 1, center[0], center[1], radius,
  );
  glow.addColorStop(0, "rgba(255, 180, 40, 0.55)");
  glow.addColorStop(1, "rgba(255, 180, 40, 0)");
  ctx.fillStyle = glow;
  ctx.beginPath();
  ctx.arc(center[0], center[1], radius, 0, 2 * Math.PI);
  ctx.fill();
  ctx.fillStyle = "#ffd75e";
  ctx.fillRect(center[0] - 2, center[1] - 2, 4, 4);
}

export function drawSelection(
  ctx: CanvasRenderingContext2D,
  state: ConsoleState,
): void {
  if (!state.selection) return;
  const [u0, v0, u1, v1] = state.selection.box;
  ctx.strokeStyle = "#49dd7a";
  ctx.lineWidth = 2;
  ctx.strokeRect(u0, v0, u1 - u0, v1 - v0);
  ctx.font = "12px monospace";
  ctx.fillStyle = "#49dd7a";
  const best = state.selection.scores.find(
    ([oid]) => oid === state.selection!.objectId,
  );
  const label = best
    ? `${state.selection.objectId} (${best[1].toFixed(3)})`
    : state.selection.objectId;
  ctx.fillText(label, u0, Math.min(v1 + 14, ctx.canvas.height - 4));
}

/** World xy (meters, table frame) to pixels on the top-down panel. */
export function tableToPanel(
  x: number,
  y: number,
  panel: { width: number; height: number },
  tableSize = 0.6,
): [number, number] {
  const sx = panel.width / tableSize;
  const sy = panel.height / tableSize;
  return [panel.width / 2 + x * sx, panel.height / 2 - y * sy];
}

export function drawTopDownPath(
  ctx: CanvasRenderingContext2D,
  samples: TrajectorySample[],
  cursor: number,
): void {
  ctx.fillStyle = "#14181d";
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  ctx.strokeStyle = "#2c343c";
  ctx.strokeRect(ctx.canvas.width * 0.083, ctx.canvas.height * 0.083,
    ctx.canvas.width * 0.833, ctx.canvas.height * 0.833);
  if (samples.length < 2) return;
  const panel = { width: ctx.canvas.width, height: ctx.canvas.height };
  ctx.strokeStyle = "#3d9ddd";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  samples.forEach((s, i) => {
    const [px, py] = tableToPanel(s.ee[0], s.ee[1], panel);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
  const current = samples[Math.min(cursor, samples.length - 1)];
  const [cx, cy] = tableToPanel(current.ee[0], current.ee[1], panel);
  ctx.fillStyle = "#ffd75e";
  ctx.beginPath();
  ctx.arc(cx, cy, 5, 0, 2 * Math.PI);
  ctx.fill();
}

export function drawStripChart(
  ctx: CanvasRenderingContext2D,
  samples: TrajectorySample[],
  cursor: number,
): void {
  ctx.fillStyle = "#14181d";
  ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  if (samples.length < 2) return;
  const colors = ["#e06c75", "#e5c07b", "#98c379", "#56b6c2", "#61afef", "#c678dd"];
  const tMin = samples[0].t;
  const tMax = samples[samples.length - 1].t;
  const span = Math.max(tMax - tMin, 1e-9);
  for (let j = 0; j < 6; j++) {
    ctx.strokeStyle = colors[j];
    ctx.lineWidth = 1;
    ctx.beginPath();
    samples.forEach((s, i) => {
      const x = ((s.t - tMin) / span) * ctx.canvas.width;
      const y = ctx.canvas.height / 2 - (s.q[j] / (2 * Math.PI)) * (ctx.canvas.height / 2);
      if (i === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
  }
  const cx = ((samples[Math.min(cursor, samples.length - 1)].t - tMin) / span)
    * ctx.canvas.width;
  ctx.strokeStyle = "#ffffff55";
  ctx.beginPath();
  ctx.moveTo(cx, 0);
  ctx.lineTo(cx, ctx.canvas.height);
  ctx.stroke();
}
