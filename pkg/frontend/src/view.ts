/** Client view model.
 *
 * Everything here is derived from fresh server responses; the client never
 * computes structural state on its own, so any view can be rebuilt from a
 * full refetch and must compare equal to the incrementally refreshed one.
 */

import type { HasseView, RecommendationView, StateView } from "./api.js";

export type NodeStatus = "visited" | "fringe" | "blocked";

export interface SessionView {
  sessionId: string;
  nodeStatus: Record<string, NodeStatus>;
  recommendations: RecommendationView | null;
  distributionTop: { state: string; p: number }[];
  relationVersion: number;
  stale: boolean;
  eventLog: string[];
}

export function buildNodeStatus(hasse: HasseView, state: StateView): Record<string, NodeStatus> {
  const visited = new Set(state.confirmed);
  const fringe = new Set(state.fringe);
  const status: Record<string, NodeStatus> = {};
  for (const item of hasse.items) {
    status[item.id] = visited.has(item.id)
      ? "visited"
      : fringe.has(item.id)
        ? "fringe"
        : "blocked";
  }
  return status;
}

export function buildSessionView(
  hasse: HasseView,
  state: StateView,
  recommendations: RecommendationView | null,
  eventLog: string[] = [],
): SessionView {
  return {
    sessionId: state.session_id,
    nodeStatus: buildNodeStatus(hasse, state),
    recommendations,
    distributionTop: state.distribution_top,
    relationVersion: state.relation_version,
    stale: hasse.relation_version !== state.relation_version,
    eventLog,
  };
}

/** Fringe nodes present now that were not fringe before (for the unlock
 * animation). */
export function newlyUnlocked(
  previous: Record<string, NodeStatus> | null,
  current: Record<string, NodeStatus>,
): string[] {
  if (!previous) return [];
  return Object.keys(current)
    .filter((id) => current[id] === "fringe" && previous[id] !== "fringe")
    .sort();
}

/** Sanity invariant: the three status classes partition the item set. */
export function isPartition(hasse: HasseView, status: Record<string, NodeStatus>): boolean {
  const ids = hasse.items.map((item) => item.id);
  return (
    ids.length === Object.keys(status).length &&
    ids.every((id) => status[id] !== undefined)
  );
}
