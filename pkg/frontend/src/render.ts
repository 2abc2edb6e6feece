/** DOM/SVG rendering of the session view.  Pure presentation: reads the
 * view model, writes vnodes; no fetches and no structural computation. */

import type { HasseView, RecommendationView } from "./api.js";
import { layoutHasse } from "./layout.js";
import type { SessionView } from "./view.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 560;
const LAYER_HEIGHT = 110;
const MARGIN = 48;

export interface RenderCallbacks {
  onCheckIn: (poi: string, kind: "quick-visit" | "long-visit" | "rating") => void;
  onModeChange: (mode: string) => void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function chainEdges(recommendations: RecommendationView | null): Set<string> {
  const highlighted = new Set<string>();
  if (!recommendations) return highlighted;
  for (const item of recommendations.items) {
    const path = [...item.explanation.chain, item.poi];
    for (let i = 0; i + 1 < path.length; i++) {
      highlighted.add(`${path[i]}->${path[i + 1]}`);
    }
  }
  return highlighted;
}

export function renderDiagram(
  container: HTMLElement,
  hasse: HasseView,
  view: SessionView,
  unlocked: string[],
): void {
  container.replaceChildren();
  const layout = layoutHasse(
    hasse.items.map((item) => item.id),
    hasse.edges,
  );
  const depth = layout.layers.length;
  const height = Math.max(1, depth) * LAYER_HEIGHT + MARGIN;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${height}`);
  svg.classList.add("diagram");

  const position = new Map(
    layout.nodes.map((node) => [
      node.id,
      {
        x: MARGIN + node.x * (WIDTH - 2 * MARGIN),
        y: height - MARGIN - node.layer * LAYER_HEIGHT,
      },
    ]),
  );
  const highlighted = chainEdges(view.recommendations);

  for (const [a, b] of hasse.edges) {
    const from = position.get(a)!;
    const to = position.get(b)!;
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(from.x));
    line.setAttribute("y1", String(from.y));
    line.setAttribute("x2", String(to.x));
    line.setAttribute("y2", String(to.y));
    line.classList.add("edge");
    if (highlighted.has(`${a}->${b}`)) line.classList.add("edge-explained");
    svg.appendChild(line);
  }

  const names = new Map(hasse.items.map((item) => [item.id, item.name]));
  const recommended = new Set(
    (view.recommendations?.items ?? []).map((item) => item.poi),
  );
  for (const node of layout.nodes) {
    const { x, y } = position.get(node.id)!;
    const group = document.createElementNS(SVG_NS, "g");
    const status = view.nodeStatus[node.id];
    group.classList.add("node", `node-${status}`);
    if (unlocked.includes(node.id)) group.classList.add("node-unlocked");
    // recommended styling only ever appears on server-confirmed fringe nodes
    if (recommended.has(node.id) && status === "fringe") {
      group.classList.add("node-recommended");
    }
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(x));
    circle.setAttribute("cy", String(y));
    circle.setAttribute("r", "17");
    group.appendChild(circle);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(x));
    label.setAttribute("y", String(y + 4));
    label.setAttribute("text-anchor", "middle");
    label.textContent = node.id;
    group.appendChild(label);
    const name = document.createElementNS(SVG_NS, "text");
    name.setAttribute("x", String(x));
    name.setAttribute("y", String(y + 34));
    name.setAttribute("text-anchor", "middle");
    name.classList.add("node-name");
    name.textContent = names.get(node.id) ?? "";
    group.appendChild(name);
    svg.appendChild(group);
  }
  container.appendChild(svg);
}

export function renderRecommendations(
  container: HTMLElement,
  view: SessionView,
  callbacks: RenderCallbacks,
): void {
  container.replaceChildren();
  const recs = view.recommendations;
  const heading = el("h2", undefined, "Recommendations");
  container.appendChild(heading);

  const modeRow = el("div", "mode-row");
  for (const mode of ["rank", "path"]) {
    const button = el("button", "mode-button", mode);
    button.addEventListener("click", () => callbacks.onModeChange(mode));
    modeRow.appendChild(button);
  }
  container.appendChild(modeRow);

  if (!recs) return;
  if (recs.complete) {
    container.appendChild(el("p", "banner banner-complete", recs.notice ?? "Exploration complete."));
    return;
  }
  const list = el("ol", "rec-list");
  recs.items.forEach((item) => {
    const row = el("li", "rec-item");
    const title = el("div", "rec-title", `${item.poi} — interest ${item.interest.toFixed(4)}`);
    if (item.serendipitous) title.appendChild(el("span", "badge-serendipity", "serendipity"));
    row.appendChild(title);
    const chain = item.explanation.chain;
    row.appendChild(
      el(
        "div",
        "rec-chain",
        chain.length ? `ready because: ${chain.join(" -> ")} -> ${item.poi}` : item.explanation.summary ?? "",
      ),
    );
    for (const justification of item.explanation.justifications) {
      row.appendChild(el("div", "rec-text", `${justification.from} -> ${justification.to}: ${justification.text}`));
    }
    const actions = el("div", "actions");
    for (const kind of ["quick-visit", "long-visit", "rating"] as const) {
      const button = el("button", "action-button", kind.replace("-", " "));
      button.addEventListener("click", () => callbacks.onCheckIn(item.poi, kind));
      actions.appendChild(button);
    }
    row.appendChild(actions);
    list.appendChild(row);
  });
  container.appendChild(list);
}

export function renderSidebar(container: HTMLElement, view: SessionView): void {
  container.replaceChildren();
  container.appendChild(el("h2", undefined, "State distribution (top 10)"));
  const table = el("table", "dist-table");
  for (const row of view.distributionTop) {
    const tr = el("tr");
    tr.appendChild(el("td", "dist-state", row.state || "(empty)"));
    tr.appendChild(el("td", "dist-p", row.p.toFixed(4)));
    table.appendChild(tr);
  }
  container.appendChild(table);
  container.appendChild(el("h2", undefined, "Event log"));
  const log = el("ul", "event-log");
  for (const entry of view.eventLog.slice(-12).reverse()) {
    log.appendChild(el("li", undefined, entry));
  }
  container.appendChild(log);
}

export function renderBanners(
  container: HTMLElement,
  view: SessionView | null,
  warning: string | null,
  connectionError: string | null,
): void {
  container.replaceChildren();
  if (connectionError) {
    container.appendChild(el("div", "banner banner-error", `Connection error: ${connectionError}`));
  }
  if (view?.stale) {
    container.appendChild(
      el("div", "banner banner-stale", "Prerequisite structure changed on the server — view may be stale."),
    );
  }
  if (warning) {
    container.appendChild(el("div", "banner banner-warning", warning));
  }
}
