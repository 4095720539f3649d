/** Register browser: quantitative table with swan badges and plan actions. */

import type { PlanPayload, RegisterPayload } from "./types.js";
import { escapeHtml } from "./render.js";

export interface RegisterRow {
  riskType: string;
  count: number;
  firstSeen: string;
  lastSeen: string;
  likelihood: string;
  impact: string;
  swanClass: "OBVIOUS" | "GRAY" | "UNCLASSIFIED";
  action: string;
  note: string;
}

export interface RegisterView {
  entityId: string;
  entityName: string;
  modelVersion: number;
  asOf: string;
  rows: RegisterRow[];
}

export function buildRegisterView(
  register: RegisterPayload,
  plan?: PlanPayload,
): RegisterView {
  const actions = new Map<string, { action: string; note: string }>();
  for (const entry of plan?.actions ?? []) {
    actions.set(entry.risk_type, { action: entry.action, note: entry.note });
  }
  const rows = register.entries.map((entry) => {
    const planned = actions.get(entry.risk_type);
    return {
      riskType: entry.risk_type,
      count: entry.count,
      firstSeen: entry.first_seen,
      lastSeen: entry.last_seen,
      likelihood: entry.likelihood === null ? "—" : String(entry.likelihood),
      impact: entry.impact === null
        ? "—"
        : Array.isArray(entry.impact) ? entry.impact.join(" / ") : String(entry.impact),
      swanClass: entry.swan_class,
      action: planned?.action ?? "",
      note: planned?.note ?? "",
    };
  });
  rows.sort((a, b) => a.riskType.localeCompare(b.riskType));
  return {
    entityId: register.entity_id,
    entityName: register.entity_name ?? register.entity_id,
    modelVersion: register.model_version,
    asOf: register.as_of ?? "",
    rows,
  };
}

export function renderRegisterView(view: RegisterView): string {
  if (view.rows.length === 0) {
    return `<div class="register">
      <h2>${escapeHtml(view.entityName)}</h2>
      <p class="meta">model v${view.modelVersion}</p>
      <p class="empty">No risks in this register.</p>
    </div>`;
  }
  const rows = view.rows.map((row) => `
      <tr>
        <td>${escapeHtml(row.riskType)}</td>
        <td class="num">${row.count}</td>
        <td>${escapeHtml(row.firstSeen)}</td>
        <td>${escapeHtml(row.lastSeen)}</td>
        <td>${escapeHtml(row.likelihood)}</td>
        <td>${escapeHtml(row.impact)}</td>
        <td><span class="swan swan-${row.swanClass.toLowerCase()}">${row.swanClass}</span></td>
        <td>${escapeHtml(row.action.toLowerCase())}${row.note ? ` <span class="note">(${escapeHtml(row.note)})</span>` : ""}</td>
      </tr>`).join("");
  return `<div class="register">
    <h2>${escapeHtml(view.entityName)}</h2>
    <p class="meta">as of ${escapeHtml(view.asOf)} · model v${view.modelVersion}</p>
    <table>
      <thead><tr>
        <th>Risk Type</th><th>Count</th><th>First Seen</th><th>Last Seen</th>
        <th>Likelihood</th><th>Impact</th><th>Class</th><th>Management</th>
      </tr></thead>
      <tbody>${rows}</tbody>
    </table>
  </div>`;
}
