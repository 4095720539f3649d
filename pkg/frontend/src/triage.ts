/** Keyboard-driven triage queue with optimistic judgments.
 *
 * Accepting or rejecting a card applies the judgment locally at once and
 * advances the queue; the POST runs in the background. A failed POST rolls
 * the card back to its previous judgment, flags it, and re-queues it by
 * moving the cursor back to the card. No judgment exists client-side only:
 * a card reads "confirmed" solely after the API acknowledged the write.
 */

import type { ApiClient } from "./api.js";
import { cardSegments } from "./highlight.js";
import type { CandidateCard, CandidateItem, Judgment } from "./types.js";

export function buildCard(item: CandidateItem): CandidateCard {
  return {
    pairId: item.pair_id,
    entityId: item.entity_id,
    entityName: item.entity_name,
    riskPhrase: item.risk_type_id,
    snippet: item.snippet,
    segments: cardSegments(item),
    score: item.score,
    verdict: item.verdict,
    judgment: item.judgment,
    state: "idle",
  };
}

export interface TriageFilters {
  status?: Judgment | "ALL";
  entity?: string;
  pageSize?: number;
}

export class TriageQueue {
  cards: CandidateCard[] = [];
  cursor = 0;
  total = 0;
  loading = false;

  constructor(
    private readonly client: ApiClient,
    private readonly annotator: string,
    private readonly onChange: () => void = () => {},
  ) {}

  async load(filters: TriageFilters = {}): Promise<void> {
    this.loading = true;
    this.onChange();
    try {
      const page = await this.client.candidates({
        status: filters.status ?? "UNREVIEWED",
        entity: filters.entity,
        page: 1,
        pageSize: filters.pageSize ?? 50,
      });
      this.cards = page.items.map(buildCard);
      this.total = page.total;
      this.cursor = 0;
    } finally {
      this.loading = false;
      this.onChange();
    }
  }

  get empty(): boolean {
    return this.cards.length === 0;
  }

  current(): CandidateCard | undefined {
    return this.cards[this.cursor];
  }

  next(): void {
    if (this.cursor < this.cards.length - 1) {
      this.cursor += 1;
      this.onChange();
    }
  }

  prev(): void {
    if (this.cursor > 0) {
      this.cursor -= 1;
      this.onChange();
    }
  }

  accept(): Promise<void> {
    return this.judgeCurrent("CORRECT");
  }

  reject(): Promise<void> {
    return this.judgeCurrent("INCORRECT");
  }

  private async judgeCurrent(judgment: Judgment): Promise<void> {
    const card = this.current();
    if (!card || card.state === "pending") return;
    const previous = card.judgment;
    // Optimistic: apply locally, advance the queue, then confirm.
    card.judgment = judgment;
    card.state = "pending";
    card.error = undefined;
    const index = this.cards.indexOf(card);
    if (this.cursor === index && this.cursor < this.cards.length - 1) {
      this.cursor += 1;
    }
    this.onChange();
    try {
      await this.client.postJudgment(card.pairId, judgment, this.annotator);
      card.state = "confirmed";
    } catch (err) {
      card.judgment = previous;
      card.state = "error";
      card.error = err instanceof Error ? err.message : String(err);
      this.cursor = index; // re-queue the failed card
    }
    this.onChange();
  }

  /** Keyboard map: a=accept, x=reject, j/n=next, k/p=previous. */
  handleKey(key: string): Promise<void> | void {
    switch (key) {
      case "a":
        return this.accept();
      case "x":
        return this.reject();
      case "j":
      case "n":
        return this.next();
      case "k":
      case "p":
        return this.prev();
      default:
        return undefined;
    }
  }
}
