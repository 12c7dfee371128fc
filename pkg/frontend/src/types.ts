// Payload shapes spoken by the simulator service.

export interface SceneSummary {
  scene_id: string;
  objects: { id: string; name: string; mass_class: string }[];
}

export interface RenderPayload {
  width: number;
  height: number;
  labels_b64: string;
  palette: Record<string, { id: string | null; name: string; color: string }>;
  boxes: Record<string, [number, number, number, number]>;
  depth_range: [number, number];
}

export interface CommandPreview {
  object_phrase: string;
  part: string | null;
  holder: string;
  low_confidence: boolean;
}

export interface RunResult {
  status: string;
  failed_stage: string | null;
  failure_reason: string | null;
  timings: Record<string, number>;
}

export interface TrajectorySample {
  t: number;
  q: number[];
  ee: [number, number, number];
}

export type StreamEvent =
  | { seq: number; kind: "heatmap"; center: [number, number]; sigma_px: number }
  | { seq: number; kind: "command"; object_phrase: string; part: string | null; holder: string }
  | { seq: number; kind: "stage"; stage: string; status: "running" | "done" | "failed"; detail: string | null }
  | { seq: number; kind: "selection"; object_id: string; box: number[]; scores: [string, number][] }
  | {
      seq: number;
      kind: "grasp";
      position: number[];
      approach: number[];
      width: number;
      contacts: number[][];
    }
  | ({ seq: number; kind: "trajectory" } & TrajectorySample)
  | {
      seq: number;
      kind: "run_complete";
      status: string;
      failed_stage: string | null;
      failure_reason: string | null;
    };
