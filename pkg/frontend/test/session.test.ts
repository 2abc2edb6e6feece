/** Integration acceptance against the live service on the five-POI dataset. */

import { beforeAll, describe, expect, it } from "vitest";

import { ApiClient, type SignalKind } from "../src/api.js";
import { SessionController, startSession } from "../src/controller.js";
import { buildNodeStatus, buildSessionView, isPartition, type SessionView } from "../src/view.js";
import { BASE_URL } from "./global-setup.js";

const api = new ApiClient(BASE_URL);

/** The comparable part of a view: everything except the local event log. */
function snapshotOf(view: SessionView) {
  return {
    nodeStatus: view.nodeStatus,
    recommendations: view.recommendations,
    distributionTop: view.distributionTop,
    relationVersion: view.relationVersion,
    stale: view.stale,
  };
}

async function independentRefetch(controller: SessionController): Promise<SessionView> {
  const [hasse, state] = await Promise.all([
    api.getHasse(),
    api.getState(controller.sessionId),
  ]);
  const recommendations = await api.getRecommendations(controller.sessionId, "rank", 3);
  return buildSessionView(hasse, state, recommendations);
}

describe("scripted five-action session", () => {
  let controller: SessionController;

  beforeAll(async () => {
    controller = await startSession(api, { strategy: "decline" });
    controller.setMode("rank");
    await controller.refresh();
  });

  const actions: { poi: string; kind: SignalKind; expectWarning: boolean }[] = [
    { poi: "q1", kind: "long-visit", expectWarning: false },
    { poi: "q4", kind: "long-visit", expectWarning: false },
    { poi: "q2", kind: "quick-visit", expectWarning: false },
    { poi: "q3", kind: { rating: 5 }, expectWarning: true }, // blocked: q2 unconfirmed
    { poi: "q5", kind: "long-visit", expectWarning: false },
  ];

  it("keeps the rendered partition equal to the server state after each action", async () => {
    for (const action of actions) {
      const result = await controller.checkIn(action.poi, action.kind);
      const hasse = await api.getHasse();
      const serverState = await api.getState(controller.sessionId);
      const expected = buildNodeStatus(hasse, serverState);
      expect(result.view.nodeStatus).toEqual(expected);
      expect(isPartition(hasse, result.view.nodeStatus)).toBe(true);
      if (action.expectWarning) {
        expect(result.warning).toBeTruthy();
      } else {
        expect(result.warning).toBeNull();
      }
    }
    // the full script confirms q1, q4, q5; q2 stayed low-confidence, q3 blocked
    const finalState = await api.getState(controller.sessionId);
    expect(finalState.confirmed).toEqual(["q1", "q4", "q5"]);
  });
});

describe("guard rejection on a blocked node", () => {
  it("shows the warning and leaves the visited set unchanged", async () => {
    const controller = await startSession(api, { strategy: "decline" });
    await controller.refresh();
    const before = await api.getState(controller.sessionId);
    const result = await controller.checkIn("q5", { rating: 5 });
    expect(result.warning).toMatch(/non-fringe/);
    const after = await api.getState(controller.sessionId);
    expect(after.confirmed).toEqual(before.confirmed);
    expect(result.view.nodeStatus["q5"]).toBe("blocked");
  });
});

describe("view-after-action equals a full refetch", () => {
  it("matches snapshot-for-snapshot after every mutation", async () => {
    const controller = await startSession(api, { strategy: "decline" });
    controller.setMode("rank");
    await controller.refresh();
    for (const step of [
      { poi: "q2", kind: "long-visit" as SignalKind },
      { poi: "q3", kind: { rating: 4.5 } as SignalKind },
      { poi: "q1", kind: "long-visit" as SignalKind },
    ]) {
      const result = await controller.checkIn(step.poi, step.kind);
      const fresh = await independentRefetch(controller);
      expect(snapshotOf(result.view)).toEqual(snapshotOf(fresh));
    }
  });
});

describe("recommendation hygiene", () => {
  it("never marks a non-fringe node as recommended", async () => {
    const controller = await startSession(api, { strategy: "decline" });
    await controller.refresh();
    const view = controller.currentView()!;
    for (const item of view.recommendations?.items ?? []) {
      expect(view.nodeStatus[item.poi]).toBe("fringe");
    }
  });

  it("carries an explanation for every recommended item", async () => {
    const controller = await startSession(api, { strategy: "decline" });
    await controller.refresh();
    const view = controller.currentView()!;
    for (const item of view.recommendations?.items ?? []) {
      expect(item.explanation).toBeTruthy();
      expect(
        item.explanation.chain.length > 0 || item.explanation.summary,
      ).toBeTruthy();
    }
  });
});
