// Pure console state reducer. Every number displayed in the UI arrives
// through a service event; nothing is recomputed locally.

import type { StreamEvent, TrajectorySample } from "./types.js";

export type Connection = "idle" | "live" | "stale" | "closed";

export interface ConsoleState {
  connection: Connection;
  heatmap: { center: [number, number]; sigmaPx: number } | null;
  command: { object: string; part: string | null; holder: string } | null;
  stages: { stage: string; status: string }[];
  selection: { objectId: string; box: number[]; scores: [string, number][] } | null;
  grasp: {
    position: number[];
    approach: number[];
    width: number;
    contacts: number[][];
  } | null;
  trajectory: TrajectorySample[];
  status: string | null;
  failure: string | null;
}

export function initialState(): ConsoleState {
  return {
    connection: "idle",
    heatmap: null,
    command: null,
    stages: [],
    selection: null,
    grasp: null,
    trajectory: [],
    status: null,
    failure: null,
  };
}

/** Apply one stream event; out-of-order trajectory samples are dropped so
 * playback can never step backwards. */
export function reduce(state: ConsoleState, event: StreamEvent): ConsoleState {
  switch (event.kind) {
    case "heatmap":
      return { ...state, heatmap: { center: event.center, sigmaPx: event.sigma_px } };
    case "command":
      return {
        ...state,
        command: {
          object: event.object_phrase,
          part: event.part,
          holder: event.holder,
        },
      };
    case "stage": {
      const others = state.stages.filter((s) => s.stage !== event.stage);
      return { ...state, stages: [...others, { stage: event.stage, status: event.status }] };
    }
    case "selection":
      return {
        ...state,
        selection: {
          objectId: event.object_id,
          box: event.box,
          scores: event.scores,
        },
      };
    case "grasp":
      return {
        ...state,
        grasp: {
          position: event.position,
          approach: event.approach,
          width: event.width,
          contacts: event.contacts,
        },
      };
    case "trajectory": {
      const last = state.trajectory[state.trajectory.length - 1];
      if (last !== undefined && event.t <= last.t) {
        return state; // dropped frames never reorder playback
      }
      return {
        ...state,
        trajectory: [...state.trajectory, { t: event.t, q: event.q, ee: event.ee }],
      };
    }
    case "run_complete":
      return {
        ...state,
        status: event.status,
        failure: event.failure_reason,
      };
    default:
      return state;
  }
}

export function topScore(state: ConsoleState): [string, number] | null {
  if (!state.selection || state.selection.scores.length === 0) return null;
  return state.selection.scores.reduce((best, cur) => (cur[1] > best[1] ? cur : best));
}
