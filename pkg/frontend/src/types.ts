// JSON shapes served by the session engine's HTTP API. Field names match
// the wire format exactly; the dashboard never reshapes them on the way in.

export interface SessionSummary {
  session_id: string;
  activities_version: number;
  n_streams: number;
  n_activities: number;
  n_media: number;
  start_ms: number;
  end_ms: number;
  has_tests: boolean;
}

export interface SessionList {
  sessions: SessionSummary[];
}

export interface Activity {
  name: string;
  start_ms: number;
  end_ms: number;
}

export interface Span {
  start_ms: number;
  end_ms: number;
}

export interface ActivitiesPayload {
  session_id: string;
  activities_version: number;
  span: Span;
  activities: Activity[];
}

export interface CleaningReport {
  total: number;
  kept: number;
  non_finite: number;
  out_of_range: number;
  duplicate_ts: number;
}

export interface StreamInfo {
  modality: string;
  source_id: string;
  n_samples: number;
  report: CleaningReport;
}

export interface SessionDetail {
  session_id: string;
  session_start_ms: number;
  start_ms: number;
  end_ms: number;
  activities_version: number;
  activities: Activity[];
  streams: StreamInfo[];
}

export interface StreamPayload {
  session_id: string;
  activities_version: number;
  modality: string;
  source_id: string;
  smooth_window_ms: number | null;
  activity: string | null;
  samples: [number, number][];
  bands: Activity[];
}

export interface AnalyticsPayload<T> {
  session_id: string;
  activities_version: number;
  kind: string;
  result: T;
}

export interface StatsRow {
  activity_name: string;
  modality: string;
  source_id: string;
  n: number;
  mean: number;
  min: number;
  max: number;
  stddev: number;
}

export interface CorrelationResult {
  labels: [string, string][];
  r: (number | null)[][];
  n_common: number[][];
  step_ms: number;
}

export interface ExtremumEvent {
  kind: "peak" | "trough";
  t_ms: number;
  value: number;
  prominence: number;
  activity_name: string;
}

export interface ExtremaEntry {
  modality: string;
  source_id: string;
  window_ms: number;
  prominence_frac: number;
  events: ExtremumEvent[];
}

export interface TestComparison {
  pre_score: number;
  post_score: number;
  max_score: number;
  delta: number;
  relative_gain: number | null;
}

export interface MediaAsset {
  media_id: string;
  kind: string;
  url: string;
  master_start_ms: number;
  duration_ms: number;
}

export interface MediaManifest {
  session_id: string;
  assets: MediaAsset[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  stage?: string;
}
