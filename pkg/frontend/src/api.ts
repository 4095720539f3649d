/** Typed client for the gateway HTTP API; the UI's only data source. */

import type { ApiConfig } from "./config.js";
import type {
  CandidatesPage,
  HealthPayload,
  Judgment,
  JudgmentResponse,
  OverlapPayload,
  PlanPayload,
  QualitativeRegisterPayload,
  RegisterPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export interface CandidateFilters {
  status?: Judgment | "ALL";
  entity?: string;
  page?: number;
  pageSize?: number;
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(readonly config: ApiConfig, fetchImpl?: FetchLike) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private headers(json: boolean): Record<string, string> {
    const headers: Record<string, string> = {};
    if (json) headers["Content-Type"] = "application/json";
    if (this.config.token) headers["Authorization"] = `Bearer ${this.config.token}`;
    return headers;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.config.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail);
      } catch {
        // non-JSON error body: keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  health(): Promise<HealthPayload> {
    return this.request<HealthPayload>("/health");
  }

  candidates(filters: CandidateFilters = {}): Promise<CandidatesPage> {
    const params = new URLSearchParams();
    if (filters.status) params.set("status", filters.status);
    if (filters.entity) params.set("entity", filters.entity);
    if (filters.page) params.set("page", String(filters.page));
    if (filters.pageSize) params.set("page_size", String(filters.pageSize));
    const query = params.toString();
    return this.request<CandidatesPage>(
      `/candidates${query ? `?${query}` : ""}`,
      { headers: this.headers(false) },
    );
  }

  postJudgment(pairId: string, judgment: Judgment, annotator: string): Promise<JudgmentResponse> {
    return this.request<JudgmentResponse>("/judgments", {
      method: "POST",
      headers: this.headers(true),
      body: JSON.stringify({ pair_id: pairId, judgment, annotator }),
    });
  }

  retrain(): Promise<{ model_version: number }> {
    return this.request<{ model_version: number }>("/models/retrain", {
      method: "POST",
      headers: this.headers(false),
    });
  }

  register(entityId: string): Promise<RegisterPayload> {
    return this.request<RegisterPayload>(
      `/registers/${encodeURIComponent(entityId)}?view=quantitative`,
      { headers: this.headers(false) },
    );
  }

  qualitativeRegister(entityId: string): Promise<QualitativeRegisterPayload> {
    return this.request<QualitativeRegisterPayload>(
      `/registers/${encodeURIComponent(entityId)}?view=qualitative`,
      { headers: this.headers(false) },
    );
  }

  plan(entityId: string): Promise<PlanPayload> {
    return this.request<PlanPayload>(
      `/registers/${encodeURIComponent(entityId)}/plan`,
      { headers: this.headers(false) },
    );
  }

  overlap(portfolioId: string): Promise<OverlapPayload> {
    return this.request<OverlapPayload>(
      `/portfolio/${encodeURIComponent(portfolioId)}/overlap`,
      { headers: this.headers(false) },
    );
  }
}
