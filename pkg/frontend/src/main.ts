/** Single-page wiring: hash routes for triage, registers, and overlap.
 *
 * All business logic lives behind the gateway API; this module only
 * projects API responses into the DOM and forwards keyboard input.
 */

import { ApiClient } from "./api.js";
import { resolveConfig } from "./config.js";
import { buildOverlapGrid, renderOverlapGrid } from "./overlapView.js";
import { renderCard } from "./render.js";
import { buildRegisterView, renderRegisterView } from "./registerView.js";
import { TriageQueue } from "./triage.js";

const config = resolveConfig();
const client = new ApiClient(config);

const app = document.getElementById("app") as HTMLElement;
const status = document.getElementById("status") as HTMLElement;

let queue: TriageQueue | null = null;

function renderTriage(): void {
  if (!queue) return;
  if (queue.loading) {
    app.innerHTML = '<p class="empty">Loading candidates…</p>';
    return;
  }
  if (queue.empty) {
    app.innerHTML = `<div class="empty-state">
      <h2>Queue is empty</h2>
      <p>No candidates match the current filter. 🎉</p>
    </div>`;
    return;
  }
  const cards = queue.cards
    .map((card, i) => renderCard(card, i === queue!.cursor))
    .join("");
  app.innerHTML = `<div class="triage">
    <p class="hint">a = accept (CORRECT) · x = reject (INCORRECT) · j/k = move · t = retrain</p>
    ${cards}
  </div>`;
  app.querySelector(".card.active")?.scrollIntoView({ block: "nearest" });
}

async function showTriage(entity?: string): Promise<void> {
  queue = new TriageQueue(client, config.annotator, renderTriage);
  await queue.load({ status: "UNREVIEWED", entity });
}

async function showRegister(entityId: string): Promise<void> {
  queue = null;
  const [register, plan] = await Promise.all([
    client.register(entityId),
    client.plan(entityId),
  ]);
  app.innerHTML = renderRegisterView(buildRegisterView(register, plan));
}

async function showOverlap(portfolioId: string): Promise<void> {
  queue = null;
  const payload = await client.overlap(portfolioId);
  app.innerHTML = renderOverlapGrid(buildOverlapGrid(payload));
}

async function refreshHealth(): Promise<void> {
  try {
    const health = await client.health();
    status.textContent =
      `model v${health.model_version} · ${health.mentions} mentions · ${health.judgments} judgments`;
  } catch (err) {
    status.textContent = `gateway unreachable at ${config.baseUrl}`;
  }
}

async function retrain(): Promise<void> {
  status.textContent = "retraining…";
  try {
    const result = await client.retrain();
    status.textContent = `retrained: model v${result.model_version}`;
    if (queue) await queue.load({ status: "UNREVIEWED" });
  } catch (err) {
    status.textContent = `retrain failed: ${err instanceof Error ? err.message : err}`;
  }
}

async function route(): Promise<void> {
  const hash = window.location.hash || "#/triage";
  const [, view, arg] = hash.split("/");
  try {
    if (view === "register" && arg) await showRegister(decodeURIComponent(arg));
    else if (view === "overlap" && arg) await showOverlap(decodeURIComponent(arg));
    else await showTriage(arg ? decodeURIComponent(arg) : undefined);
  } catch (err) {
    app.innerHTML = `<p class="error">${err instanceof Error ? err.message : err}</p>`;
  }
  await refreshHealth();
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("keydown", (event) => {
  if (event.target instanceof HTMLInputElement) return;
  if (event.key === "t") {
    void retrain();
    return;
  }
  void queue?.handleKey(event.key);
});

void route();
