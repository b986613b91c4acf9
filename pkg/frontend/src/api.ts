// Thin typed client for the engine's HTTP API. Errors keep the server's
// {code, message} body so views can branch on the code (version_conflict,
// overlapping_activities, ...) instead of parsing prose.

import type {
  ActivitiesPayload,
  AnalyticsPayload,
  ApiErrorBody,
  CorrelationResult,
  ExtremaEntry,
  MediaManifest,
  SessionDetail,
  SessionList,
  StatsRow,
  StreamPayload,
  TestComparison,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(`${body.code}: ${body.message}`);
    this.name = "ApiError";
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let body: ApiErrorBody;
    try {
      body = (await response.json()) as ApiErrorBody;
    } catch {
      body = { code: "unknown", message: response.statusText };
    }
    throw new ApiError(response.status, body);
  }
  return (await response.json()) as T;
}

export const api = {
  listSessions: () => request<SessionList>("/api/sessions"),

  getSession: (sessionId: string) => request<SessionDetail>(`/api/sessions/${sessionId}`),

  getActivities: (sessionId: string) =>
    request<ActivitiesPayload>(`/api/sessions/${sessionId}/activities`),

  putActivities: (
    sessionId: string,
    body: { base_version: number; activities: { name: string; start_ms: number; end_ms: number }[] },
  ) =>
    request<ActivitiesPayload>(`/api/sessions/${sessionId}/activities`, {
      method: "PUT",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    }),

  getStream: (sessionId: string, modality: string, sourceId: string, smoothMs?: number) => {
    const query = smoothMs === undefined ? "" : `?smooth=${smoothMs}`;
    return request<StreamPayload>(
      `/api/sessions/${sessionId}/streams/${modality}/${sourceId}${query}`,
    );
  },

  getActivityStats: (sessionId: string) =>
    request<AnalyticsPayload<StatsRow[]>>(`/api/sessions/${sessionId}/analytics/activity_stats`),

  getCorrelations: (sessionId: string) =>
    request<AnalyticsPayload<CorrelationResult | null>>(
      `/api/sessions/${sessionId}/analytics/correlations`,
    ),

  getExtrema: (sessionId: string) =>
    request<AnalyticsPayload<ExtremaEntry[]>>(`/api/sessions/${sessionId}/analytics/extrema`),

  getTestComparison: (sessionId: string) =>
    request<AnalyticsPayload<TestComparison | null>>(
      `/api/sessions/${sessionId}/analytics/test_comparison`,
    ),

  getMedia: (sessionId: string) => request<MediaManifest>(`/api/sessions/${sessionId}/media`),
};
