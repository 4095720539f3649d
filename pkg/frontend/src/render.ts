/** Small HTML-string helpers shared by the views. */

import type { CandidateCard } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderSnippet(card: CandidateCard): string {
  return card.segments
    .map((segment) => {
      const text = escapeHtml(segment.text);
      if (segment.kind === "plain") return text;
      return `<mark class="${segment.kind}">${text}</mark>`;
    })
    .join(" ");
}

export function renderCard(card: CandidateCard, active: boolean): string {
  const classes = ["card", `state-${card.state}`, `judgment-${card.judgment.toLowerCase()}`];
  if (active) classes.push("active");
  const badge = card.judgment === "UNREVIEWED"
    ? `<span class="verdict">${card.verdict} @ ${card.score.toFixed(3)}</span>`
    : `<span class="judgment">${card.judgment}</span>`;
  const error = card.error ? `<p class="error">${escapeHtml(card.error)}</p>` : "";
  return `<article class="${classes.join(" ")}" data-pair="${card.pairId}">
    <header>
      <strong>${escapeHtml(card.entityName)}</strong>
      <span class="risk-phrase">${escapeHtml(card.riskPhrase)}</span>
      ${badge}
    </header>
    <p class="snippet">${renderSnippet(card)}</p>
    ${error}
  </article>`;
}
