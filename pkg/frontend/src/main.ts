// Console wiring: scene load, cursor-as-gaze streaming, command submission,
// run kickoff, and the render loop for overlays and trajectory playback.

import { ServiceClient } from "./api.js";
import { CursorSampler } from "./gaze.js";
import { EventStream } from "./socket.js";
import { ConsoleState, initialState, reduce } from "./state.js";
import { TrajectoryPlayer } from "./trajectory.js";
import {
  decodeLabelImage,
  drawHeatmap,
  drawScene,
  drawSelection,
  drawStripChart,
  drawTopDownPath,
} from "./overlay.js";
import type { RenderPayload } from "./types.js";

const SAMPLE_HZ = 25; // cursor sampling rate, at least 20 Hz

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const client = new ServiceClient(
    (window as { SERVICE_URL?: string }).SERVICE_URL ?? "http://127.0.0.1:8732",
  );
  const sceneCanvas = el<HTMLCanvasElement>("scene");
  const topdownCanvas = el<HTMLCanvasElement>("topdown");
  const stripCanvas = el<HTMLCanvasElement>("strip");
  const statusLine = el<HTMLDivElement>("status");
  const parsedLine = el<HTMLDivElement>("parsed");
  const commandInput = el<HTMLInputElement>("command");
  const seedInput = el<HTMLInputElement>("seed");

  const ctx = sceneCanvas.getContext("2d")!;
  const topCtx = topdownCanvas.getContext("2d")!;
  const stripCtx = stripCanvas.getContext("2d")!;

  let state: ConsoleState = initialState();
  let render: RenderPayload | null = null;
  let labelImage: ImageData | null = null;
  let sessionId: string | null = null;
  let stream: EventStream | null = null;
  const player = new TrajectoryPlayer();

  const sampler = new CursorSampler(async (pixels) => {
    if (!sessionId) return;
    const body = await client.sendPixels(sessionId, pixels);
    state = reduce(state, {
      seq: -1,
      kind: "heatmap",
      center: body.heatmap_center,
      sigma_px: body.sigma_px,
    });
  });

  async function loadScene(): Promise<void> {
    const seed = parseInt(seedInput.value || "7", 10);
    const scene = await client.createScene(seed);
    render = await client.sceneRender(scene.scene_id);
    sceneCanvas.width = render.width;
    sceneCanvas.height = render.height;
    labelImage = decodeLabelImage(render);
    sessionId = await client.createSession(scene.scene_id);
    state = initialState();
    state = { ...state, connection: "live" };
    stream?.close();
    stream = new EventStream(
      client.streamUrl(sessionId),
      (event) => {
        state = reduce(state, event);
        if (event.kind === "run_complete") {
          player.load(state.trajectory);
          player.start(performance.now() / 1000, 4.0);
        }
      },
      (status) => {
        state = { ...state, connection: status === "closed" ? state.connection : status };
        statusLine.dataset.connection = status;
      },
    );
    stream.connect();
    statusLine.textContent = `session ${sessionId} on ${scene.scene_id}`;
  }

  sceneCanvas.addEventListener("mousemove", (ev) => {
    const rect = sceneCanvas.getBoundingClientRect();
    sampler.move(
      ((ev.clientX - rect.left) / rect.width) * sceneCanvas.width,
      ((ev.clientY - rect.top) / rect.height) * sceneCanvas.height,
    );
  });

  window.setInterval(() => {
    sampler.sample();
    void sampler.flush().then((ok) => {
      if (!ok) statusLine.dataset.connection = "stale";
    });
  }, 1000 / SAMPLE_HZ);

  el<HTMLButtonElement>("load").addEventListener("click", () => void loadScene());

  el<HTMLButtonElement>("submit").addEventListener("click", async () => {
    if (!sessionId) return;
    const text = commandInput.value.trim();
    if (!text) {
      parsedLine.textContent = "command is empty";
      return;
    }
    try {
      const preview = await client.sendCommand(sessionId, text);
      parsedLine.textContent =
        `object: ${preview.object_phrase} | part: ${preview.part ?? "-"} | ` +
        `holder: ${preview.holder}`;
    } catch (err) {
      parsedLine.textContent = `parse failed: ${(err as Error).message}`;
      return;
    }
    const result = await client.run(sessionId);
    statusLine.textContent = `run: ${result.status}` +
      (result.failed_stage ? ` (failed at ${result.failed_stage})` : "");
  });

  function frame(): void {
    if (render && labelImage) {
      drawScene(ctx, labelImage, render);
      if (state.heatmap) drawHeatmap(ctx, state.heatmap.center, state.heatmap.sigmaPx);
      drawSelection(ctx, state);
      if (state.grasp && render) {
        // grasp marker: project by dropping z (table plane view is the scene
        // image itself, so reuse the selection box center for the marker)
        const [u0, v0, u1, v1] = state.selection?.box ?? [0, 0, 0, 0];
        const cx = (u0 + u1) / 2;
        const cy = (v0 + v1) / 2;
        ctx.strokeStyle = "#ff6b9d";
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.arc(cx, cy, 9, 0, 2 * Math.PI);
        ctx.stroke();
        ctx.beginPath();
        ctx.moveTo(cx - 24 * state.grasp.approach[0], cy + 24 * state.grasp.approach[1]);
        ctx.lineTo(cx, cy);
        ctx.stroke();
      }
    }
    const now = performance.now() / 1000;
    const cursor = player.cursorAt(now);
    drawTopDownPath(topCtx, state.trajectory, cursor);
    drawStripChart(stripCtx, state.trajectory, cursor);
    requestAnimationFrame(frame);
  }
  requestAnimationFrame(frame);

  await loadScene();
}

window.addEventListener("load", () => {
  void boot();
});
