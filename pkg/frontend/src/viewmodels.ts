// View models: payload JSON in, render-ready rows out. Raw numbers are
// kept alongside their formatted text so tests can verify that what the
// tables display is exactly what the API returned, not a recomputation.

import { formatClock, formatGain, formatR, formatValue } from "./format.js";
import type {
  CorrelationResult,
  ExtremaEntry,
  StatsRow,
  StreamPayload,
  TestComparison,
} from "./types.js";

export interface StatsVmRow {
  activity: string;
  n: number;
  mean: { raw: number; text: string };
  min: { raw: number; text: string };
  max: { raw: number; text: string };
  stddev: { raw: number; text: string };
}

export interface StatsTableVm {
  stream: string;
  rows: StatsVmRow[];
}

/** Per-activity stats for one stream, in the payload's activity order. */
export function statsTable(rows: StatsRow[], modality: string, sourceId: string): StatsTableVm {
  const cell = (raw: number) => ({ raw, text: formatValue(raw) });
  return {
    stream: `${modality}/${sourceId}`,
    rows: rows
      .filter((r) => r.modality === modality && r.source_id === sourceId)
      .map((r) => ({
        activity: r.activity_name,
        n: r.n,
        mean: cell(r.mean),
        min: cell(r.min),
        max: cell(r.max),
        stddev: cell(r.stddev),
      })),
  };
}

export interface CorrelationCell {
  raw: number | null;
  text: string;
  nCommon: number;
}

export interface CorrelationGridVm {
  stepMs: number;
  labels: string[];
  cells: CorrelationCell[][];
}

/** Square correlation grid with one row and column per stream. */
export function correlationGrid(result: CorrelationResult): CorrelationGridVm {
  return {
    stepMs: result.step_ms,
    labels: result.labels.map(([modality, sourceId]) => `${modality}/${sourceId}`),
    cells: result.r.map((row, i) =>
      row.map((r, j) => ({
        raw: r,
        text: formatR(r),
        nCommon: result.n_common[i]![j]!,
      })),
    ),
  };
}

export interface ExtremumVmRow {
  stream: string;
  kind: "peak" | "trough";
  clock: string;
  tMs: number;
  value: { raw: number; text: string };
  prominence: { raw: number; text: string };
  activity: string;
}

/** All streams' extrema flattened into one time-ordered list. */
export function extremaRows(entries: ExtremaEntry[]): ExtremumVmRow[] {
  const rows: ExtremumVmRow[] = [];
  for (const entry of entries) {
    for (const event of entry.events) {
      rows.push({
        stream: `${entry.modality}/${entry.source_id}`,
        kind: event.kind,
        clock: formatClock(event.t_ms),
        tMs: event.t_ms,
        value: { raw: event.value, text: formatValue(event.value) },
        prominence: { raw: event.prominence, text: formatValue(event.prominence) },
        activity: event.activity_name,
      });
    }
  }
  return rows.sort((a, b) => a.tMs - b.tMs || a.stream.localeCompare(b.stream));
}

export interface ComparisonCardVm {
  pre: { raw: number; text: string };
  post: { raw: number; text: string };
  max: { raw: number; text: string };
  delta: { raw: number; text: string };
  gain: { raw: number | null; text: string };
}

/** Pre/post test card; gain is "n/a" when the API reports null. */
export function comparisonCard(tc: TestComparison): ComparisonCardVm {
  const cell = (raw: number) => ({ raw, text: formatValue(raw) });
  return {
    pre: cell(tc.pre_score),
    post: cell(tc.post_score),
    max: cell(tc.max_score),
    delta: cell(tc.delta),
    gain: { raw: tc.relative_gain, text: formatGain(tc.relative_gain) },
  };
}

export interface ChartBand {
  name: string;
  x0: number;
  x1: number;
}

export interface ChartVm {
  width: number;
  height: number;
  /** SVG polyline points, "x,y x,y ..." in pixel space. */
  points: string;
  bands: ChartBand[];
  tMin: number;
  tMax: number;
  vMin: number;
  vMax: number;
}

/**
 * Pixel-space line for one stream plus activity band extents. X maps the
 * sample span onto [0, width]; Y maps the value range onto [height, 0]
 * (SVG y grows downward). A flat series draws at mid-height.
 */
export function chartSeries(stream: StreamPayload, width: number, height: number): ChartVm {
  const samples = stream.samples;
  if (samples.length === 0) {
    return { width, height, points: "", bands: [], tMin: 0, tMax: 0, vMin: 0, vMax: 0 };
  }
  const ts = samples.map(([t]) => t);
  const vs = samples.map(([, v]) => v);
  const tMin = Math.min(...ts);
  const tMax = Math.max(...ts);
  const vMin = Math.min(...vs);
  const vMax = Math.max(...vs);
  const xOf = (t: number) => (tMax === tMin ? 0 : ((t - tMin) / (tMax - tMin)) * width);
  const yOf = (v: number) =>
    vMax === vMin ? height / 2 : height - ((v - vMin) / (vMax - vMin)) * height;

  const points = samples
    .map(([t, v]) => `${xOf(t).toFixed(1)},${yOf(v).toFixed(1)}`)
    .join(" ");
  const clamp = (x: number) => Math.min(Math.max(x, 0), width);
  const bands = stream.bands.map((band) => ({
    name: band.name,
    x0: clamp(xOf(band.start_ms)),
    x1: clamp(xOf(band.end_ms)),
  }));
  return { width, height, points, bands, tMin, tMax, vMin, vMax };
}
