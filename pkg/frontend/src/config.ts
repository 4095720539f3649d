/** Endpoint + token resolution: one URL setting and the shared auth token. */

export interface ApiConfig {
  baseUrl: string;
  token?: string;
  annotator: string;
}

const DEFAULT_BASE_URL = "http://127.0.0.1:8400";

export function resolveConfig(overrides: Partial<ApiConfig> = {}): ApiConfig {
  let baseUrl = DEFAULT_BASE_URL;
  let token: string | undefined;
  let annotator = "analyst";
  if (typeof window !== "undefined" && typeof window.localStorage !== "undefined") {
    baseUrl = window.localStorage.getItem("riskmine.baseUrl") ?? baseUrl;
    token = window.localStorage.getItem("riskmine.token") ?? undefined;
    annotator = window.localStorage.getItem("riskmine.annotator") ?? annotator;
  }
  return {
    baseUrl: overrides.baseUrl ?? baseUrl,
    token: overrides.token ?? token,
    annotator: overrides.annotator ?? annotator,
  };
}
