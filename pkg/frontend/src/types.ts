/** Payload shapes served by the gateway API, plus the UI view models. */

export interface SpanPayload {
  token_start: number;
  token_end: number;
  kind: "COMPANY" | "RISK";
  resolved_id: string;
  surface: string;
  ambiguous: boolean;
}

export interface CandidateItem {
  pair_id: string;
  entity_id: string;
  entity_name: string;
  risk_type_id: string;
  doc_id: string;
  sent_index: number;
  snippet: string;
  company_span: SpanPayload;
  risk_span: SpanPayload;
  score: number;
  verdict: "ACCEPTED" | "REJECTED";
  judgment: Judgment;
  published_at: string | null;
  ambiguous: boolean;
}

export interface CandidatesPage {
  items: CandidateItem[];
  total: number;
  page: number;
  page_size: number;
}

export type Judgment = "CORRECT" | "INCORRECT" | "UNREVIEWED";

export interface JudgmentResponse {
  pair_id: string;
  judgment: Judgment;
  annotator: string;
  judged_at: string;
  model_version_at_judgment: number;
}

export interface RegisterEntry {
  risk_type: string;
  count: number;
  first_seen: string;
  last_seen: string;
  likelihood: string | number | null;
  impact: string | number[] | null;
  swan_class: "OBVIOUS" | "GRAY" | "UNCLASSIFIED";
  provenance: string[];
}

export interface RegisterPayload {
  entity_id: string;
  entity_name?: string;
  as_of: string | null;
  form: string;
  entries: RegisterEntry[];
  model_version: number;
}

export interface QualitativeRegisterPayload {
  entity_id: string;
  entity_name?: string;
  form: "QUALITATIVE";
  risk_types: string[];
  model_version: number;
}

export interface PlanAction {
  risk_type: string;
  action: "AVOID" | "TRANSFER" | "MITIGATE" | "ACCEPT";
  note: string;
}

export interface PlanPayload {
  entity_id: string;
  actions: PlanAction[];
  model_version: number;
}

export interface OverlapPayload {
  portfolio_id: string;
  holdings: string[];
  holding_names: string[];
  risk_types: string[];
  matrix: number[][];
  jaccard: { a: string; b: string; value: number }[];
  diversity: number;
}

export interface HealthPayload {
  status: string;
  model_version: number;
  mentions: number;
  judgments: number;
}

// ---------------------------------------------------------------------------
// View models
// ---------------------------------------------------------------------------

/** A snippet split into plain / company / risk runs of whole tokens. */
export interface SnippetSegment {
  text: string;
  kind: "plain" | "company" | "risk";
}

export type CardState = "idle" | "pending" | "confirmed" | "error";

export interface CandidateCard {
  pairId: string;
  entityId: string;
  entityName: string;
  riskPhrase: string;
  snippet: string;
  segments: SnippetSegment[];
  score: number;
  verdict: "ACCEPTED" | "REJECTED";
  judgment: Judgment;
  state: CardState;
  error?: string;
}
