import { describe, expect, it } from "vitest";

import type { HasseView, StateView } from "../src/api.js";
import { buildNodeStatus, buildSessionView, isPartition, newlyUnlocked } from "../src/view.js";

const HASSE: HasseView = {
  items: [
    { id: "q1", name: "City Museum", category: ["museum"] },
    { id: "q2", name: "Latin Quarter", category: ["district"] },
    { id: "q3", name: "Medieval Library", category: ["library"] },
    { id: "q4", name: "Art Gallery", category: ["gallery"] },
    { id: "q5", name: "Rooftop Bar", category: ["bar"] },
  ],
  edges: [
    ["q1", "q4"],
    ["q2", "q3"],
    ["q4", "q5"],
  ],
  edge_texts: [],
  relation_version: 1,
};

function stateView(confirmed: string[], fringe: string[], version = 1): StateView {
  return {
    session_id: "s1",
    confirmed,
    fringe,
    distribution_top: [],
    relation_version: version,
    interactions: confirmed.length,
  };
}

describe("buildNodeStatus", () => {
  it("partitions into visited, fringe, and blocked", () => {
    const status = buildNodeStatus(HASSE, stateView(["q1"], ["q2", "q4"]));
    expect(status).toEqual({
      q1: "visited",
      q2: "fringe",
      q3: "blocked",
      q4: "fringe",
      q5: "blocked",
    });
    expect(isPartition(HASSE, status)).toBe(true);
  });

  it("marks only minimal elements actionable for a fresh session", () => {
    const status = buildNodeStatus(HASSE, stateView([], ["q1", "q2"]));
    const actionable = Object.entries(status)
      .filter(([, s]) => s === "fringe")
      .map(([id]) => id)
      .sort();
    expect(actionable).toEqual(["q1", "q2"]);
  });

  it("shows everything visited for a completed session", () => {
    const all = ["q1", "q2", "q3", "q4", "q5"];
    const status = buildNodeStatus(HASSE, stateView(all, []));
    expect(Object.values(status).every((s) => s === "visited")).toBe(true);
  });
});

describe("buildSessionView", () => {
  it("flags staleness when relation versions diverge", () => {
    const fresh = buildSessionView(HASSE, stateView(["q1"], ["q2", "q4"]), null);
    expect(fresh.stale).toBe(false);
    const stale = buildSessionView(HASSE, stateView(["q1"], ["q2", "q4"], 2), null);
    expect(stale.stale).toBe(true);
  });
});

describe("newlyUnlocked", () => {
  it("reports fringe nodes that were not fringe before", () => {
    const before = buildNodeStatus(HASSE, stateView(["q1"], ["q2", "q4"]));
    const after = buildNodeStatus(HASSE, stateView(["q1", "q4"], ["q2", "q5"]));
    expect(newlyUnlocked(before, after)).toEqual(["q5"]);
  });

  it("is empty without a previous view", () => {
    const status = buildNodeStatus(HASSE, stateView([], ["q1", "q2"]));
    expect(newlyUnlocked(null, status)).toEqual([]);
  });
});
