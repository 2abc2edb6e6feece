/** Typed client for the recommendation service HTTP API. */

export interface HasseItem {
  id: string;
  name: string;
  category: string[];
}

export interface EdgeText {
  from: string;
  to: string;
  text: string;
}

export interface HasseView {
  items: HasseItem[];
  edges: [string, string][];
  edge_texts: EdgeText[];
  relation_version: number;
}

export interface StateView {
  session_id: string;
  confirmed: string[];
  fringe: string[];
  distribution_top: { state: string; p: number }[];
  relation_version: number;
  interactions: number;
}

export interface ExplanationView {
  target: string;
  chain: string[];
  justifications: EdgeText[];
  summary: string | null;
}

export interface RecommendedItem {
  poi: string;
  interest: number;
  explanation: ExplanationView;
  serendipitous?: boolean;
  total?: number;
  diversity?: number;
  novelty?: number;
}

export interface RecommendationView {
  mode: string;
  complete: boolean;
  notice: string | null;
  value: number | null;
  approximate: boolean;
  working_state: string[];
  items: RecommendedItem[];
}

export interface EventRecord {
  poi: string;
  engaged: number;
  high_confidence: boolean;
  guard: string;
  warnings: string[];
  confirmed: string;
  fringe: string[];
  preference?: number;
}

export type SignalKind = "quick-visit" | "long-visit" | { rating: number };

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!response.ok) {
    const body = await response.text();
    throw new ApiError(response.status, `${response.status} ${url}: ${body}`);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  createSession(payload: Record<string, unknown> = { strategy: "decline" }): Promise<{ session_id: string }> {
    return request(`${this.baseUrl}/sessions`, {
      method: "POST",
      body: JSON.stringify(payload),
    });
  }

  getHasse(): Promise<HasseView> {
    return request(`${this.baseUrl}/dataset/hasse`);
  }

  getState(sessionId: string): Promise<StateView> {
    return request(`${this.baseUrl}/sessions/${sessionId}/state`);
  }

  getRecommendations(sessionId: string, mode: string, k: number): Promise<RecommendationView> {
    return request(
      `${this.baseUrl}/sessions/${sessionId}/recommendations?mode=${mode}&k=${k}`,
    );
  }

  postEvent(sessionId: string, poi: string, kind: SignalKind): Promise<EventRecord> {
    const signal =
      kind === "quick-visit"
        ? { kind: "dwell", value: 15 }
        : kind === "long-visit"
          ? { kind: "dwell", value: 45 }
          : { kind: "rating", value: kind.rating };
    return request(`${this.baseUrl}/sessions/${sessionId}/events`, {
      method: "POST",
      body: JSON.stringify({ poi, signal, timestamp: new Date().toISOString() }),
    });
  }
}
