/** Portfolio overlap: occupancy heat-grid plus the diversity score. */

import type { OverlapPayload } from "./types.js";
import { escapeHtml } from "./render.js";

export interface OverlapGrid {
  portfolioId: string;
  columns: string[];
  rows: { entityId: string; name: string; cells: boolean[] }[];
  diversity: number;
  /** (row, column) coordinates of every filled cell, for exactness checks. */
  filledCells: [number, number][];
}

export function buildOverlapGrid(payload: OverlapPayload): OverlapGrid {
  const rows = payload.holdings.map((entityId, i) => ({
    entityId,
    name: payload.holding_names[i] ?? entityId,
    cells: payload.matrix[i].map((cell) => cell === 1),
  }));
  const filledCells: [number, number][] = [];
  rows.forEach((row, i) =>
    row.cells.forEach((filled, j) => {
      if (filled) filledCells.push([i, j]);
    }),
  );
  return {
    portfolioId: payload.portfolio_id,
    columns: payload.risk_types,
    rows,
    diversity: payload.diversity,
    filledCells,
  };
}

export function renderOverlapGrid(grid: OverlapGrid): string {
  const header = grid.columns.map((c) => `<th class="rot">${escapeHtml(c)}</th>`).join("");
  const body = grid.rows.map((row) => {
    const cells = row.cells
      .map((filled) => `<td class="${filled ? "cell filled" : "cell"}">${filled ? "●" : ""}</td>`)
      .join("");
    return `<tr><th>${escapeHtml(row.name)}</th>${cells}</tr>`;
  }).join("");
  return `<div class="overlap">
    <h2>Portfolio ${escapeHtml(grid.portfolioId)}</h2>
    <table class="grid">
      <thead><tr><th></th>${header}</tr></thead>
      <tbody>${body}</tbody>
    </table>
    <p class="meta">diversity ${grid.diversity.toFixed(4)} (1 − mean pairwise Jaccard)</p>
  </div>`;
}
