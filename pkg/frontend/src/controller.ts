/** Session controller: the only stateful part of the client, and the state
 * is just the session id, the latest fetched view, and a transient warning.
 * Every mutation waits for the server and then refetches everything.
 */

import { ApiClient, type RecommendationView, type SignalKind } from "./api.js";
import { buildSessionView, newlyUnlocked, type NodeStatus, type SessionView } from "./view.js";

export interface RefreshResult {
  view: SessionView;
  unlocked: string[];
  warning: string | null;
}

export class SessionController {
  private view: SessionView | null = null;
  private mode = "rank";
  private k = 3;

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
  ) {}

  currentView(): SessionView | null {
    return this.view;
  }

  setMode(mode: string): void {
    this.mode = mode;
  }

  /** Full refetch: hasse + state + recommendations, rebuilt from scratch. */
  async refresh(eventLogEntry?: string, warning: string | null = null): Promise<RefreshResult> {
    const [hasse, state] = await Promise.all([
      this.api.getHasse(),
      this.api.getState(this.sessionId),
    ]);
    const recommendations: RecommendationView = await this.api.getRecommendations(
      this.sessionId,
      this.mode,
      this.k,
    );
    const log = [...(this.view?.eventLog ?? [])];
    if (eventLogEntry) log.push(eventLogEntry);
    const previous: Record<string, NodeStatus> | null = this.view?.nodeStatus ?? null;
    const view = buildSessionView(hasse, state, recommendations, log);
    this.view = view;
    return { view, unlocked: newlyUnlocked(previous, view.nodeStatus), warning };
  }

  /** Post one check-in signal, then refetch the whole view.  Guard
   * rejections surface as a non-blocking warning string. */
  async checkIn(poi: string, kind: SignalKind): Promise<RefreshResult> {
    const record = await this.api.postEvent(this.sessionId, poi, kind);
    const label =
      kind === "quick-visit" ? "quick visit" : kind === "long-visit" ? "long visit" : `rating ${kind.rating}`;
    const warning = record.warnings.length ? record.warnings.join("; ") : null;
    const entry = `${label} at ${poi} -> guard ${record.guard}`;
    return this.refresh(entry, warning);
  }
}

export async function startSession(
  api: ApiClient,
  coldStart: Record<string, unknown> = { strategy: "decline" },
): Promise<SessionController> {
  const { session_id } = await api.createSession(coldStart);
  return new SessionController(api, session_id);
}
