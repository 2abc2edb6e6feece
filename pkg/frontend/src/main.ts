import { ApiClient } from "./api.js";
import { startSession, type SessionController } from "./controller.js";
import { renderBanners, renderDiagram, renderRecommendations, renderSidebar } from "./render.js";

const DEFAULT_BASE = "http://127.0.0.1:8000";

function element(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

async function repaint(
  api: ApiClient,
  controller: SessionController,
  unlocked: string[],
  warning: string | null,
): Promise<void> {
  const view = controller.currentView();
  if (!view) return;
  const hasse = await api.getHasse();
  renderBanners(element("banners"), view, warning, null);
  renderDiagram(element("diagram"), hasse, view, unlocked);
  renderRecommendations(element("recommendations"), view, {
    onCheckIn: (poi, kind) => {
      const signal = kind === "rating" ? { rating: promptRating() } : kind;
      controller
        .checkIn(poi, signal)
        .then((result) => repaint(api, controller, result.unlocked, result.warning))
        .catch((error) => renderBanners(element("banners"), view, null, String(error)));
    },
    onModeChange: (mode) => {
      controller.setMode(mode);
      controller
        .refresh()
        .then((result) => repaint(api, controller, result.unlocked, result.warning))
        .catch((error) => renderBanners(element("banners"), view, null, String(error)));
    },
  });
  renderSidebar(element("sidebar"), view);
}

function promptRating(): number {
  const raw = window.prompt("Rating (0-5)", "4.5");
  const value = raw === null ? 4.5 : Number(raw);
  return Number.isFinite(value) ? Math.min(5, Math.max(0, value)) : 4.5;
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? DEFAULT_BASE;
  const api = new ApiClient(base);
  try {
    const controller = await startSession(api, { strategy: "decline" });
    const first = await controller.refresh("session started");
    await repaint(api, controller, first.unlocked, first.warning);
  } catch (error) {
    renderBanners(element("banners"), null, null, String(error));
  }
}

boot();
