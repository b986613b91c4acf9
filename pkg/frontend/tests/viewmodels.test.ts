import { describe, expect, it } from "vitest";

import { formatClock, formatGain, formatR, formatSpan, formatValue } from "../src/format.js";
import {
  renderComparisonCard,
  renderCorrelationGrid,
  renderExtremaList,
  renderStatsTable,
  esc,
} from "../src/render.js";
import type {
  AnalyticsPayload,
  CorrelationResult,
  ExtremaEntry,
  StatsRow,
  StreamPayload,
  TestComparison,
} from "../src/types.js";
import {
  chartSeries,
  comparisonCard,
  correlationGrid,
  extremaRows,
  statsTable,
} from "../src/viewmodels.js";
import { loadFixture } from "./helpers.js";

const stats = loadFixture<AnalyticsPayload<StatsRow[]>>("analytics_activity_stats.json");
const correlations = loadFixture<AnalyticsPayload<CorrelationResult>>(
  "analytics_correlations.json");
const extrema = loadFixture<AnalyticsPayload<ExtremaEntry[]>>("analytics_extrema.json");
const comparison = loadFixture<AnalyticsPayload<TestComparison>>(
  "analytics_test_comparison.json");
const smoothed = loadFixture<StreamPayload>("stream_attention_smoothed.json");

describe("formatting", () => {
  it("renders master-clock times as m:ss", () => {
    expect(formatClock(0)).toBe("0:00");
    expect(formatClock(59_999)).toBe("0:59");
    expect(formatClock(330_000)).toBe("5:30");
    expect(formatClock(600_000)).toBe("10:00");
    expect(formatSpan(60_000, 210_000)).toBe("1:00 - 3:30");
  });

  it("marks undefined coefficients and gains", () => {
    expect(formatR(null)).toBe("n/a");
    expect(formatR(-0.705)).toBe("-0.70");
    expect(formatGain(null)).toBe("n/a");
    expect(formatGain(0.5)).toBe("0.50");
  });
});

describe("statsTable", () => {
  it("shows exactly the payload's numbers for the chosen stream", () => {
    const vm = statsTable(stats.result, "attention", "headset-01");
    const source = stats.result.filter(
      (r) => r.modality === "attention" && r.source_id === "headset-01");
    expect(vm.rows).toHaveLength(source.length);
    expect(vm.rows.length).toBeGreaterThan(0);

    vm.rows.forEach((row, i) => {
      const payload = source[i]!;
      expect(row.activity).toBe(payload.activity_name);
      expect(row.n).toBe(payload.n);
      // Raw cell values are the payload fields themselves, untouched.
      expect(row.mean.raw).toBe(payload.mean);
      expect(row.min.raw).toBe(payload.min);
      expect(row.max.raw).toBe(payload.max);
      expect(row.stddev.raw).toBe(payload.stddev);
      // Cell text is a fixed rendering of that same value.
      expect(row.mean.text).toBe(formatValue(payload.mean));
      expect(row.stddev.text).toBe(formatValue(payload.stddev));
    });
  });

  it("keeps every stream in the payload reachable", () => {
    const streams = new Set(stats.result.map((r) => `${r.modality}/${r.source_id}`));
    expect(streams.size).toBe(9);
    for (const key of streams) {
      const [modality, sourceId] = key.split("/") as [string, string];
      expect(statsTable(stats.result, modality, sourceId).rows.length).toBeGreaterThan(0);
    }
  });

  it("renders each displayed value into the table HTML", () => {
    const vm = statsTable(stats.result, "attention", "headset-01");
    const html = renderStatsTable(vm);
    for (const row of vm.rows) {
      expect(html).toContain(`>${esc(row.activity)}</td>`);
      expect(html).toContain(`>${row.mean.text}</td>`);
      expect(html).toContain(`title="${row.mean.raw}"`);
    }
  });
});

describe("correlationGrid", () => {
  it("mirrors the payload matrix cell for cell", () => {
    const vm = correlationGrid(correlations.result);
    expect(vm.stepMs).toBe(correlations.result.step_ms);
    expect(vm.labels).toEqual(
      correlations.result.labels.map(([m, s]) => `${m}/${s}`));

    correlations.result.r.forEach((row, i) => {
      row.forEach((r, j) => {
        const cell = vm.cells[i]![j]!;
        expect(cell.raw).toBe(r);
        expect(cell.text).toBe(formatR(r));
        expect(cell.nCommon).toBe(correlations.result.n_common[i]![j]!);
      });
    });
  });

  it("keeps the diagonal at exactly 1", () => {
    const vm = correlationGrid(correlations.result);
    vm.labels.forEach((_label, i) => {
      expect(vm.cells[i]![i]!.raw).toBe(1.0);
      expect(vm.cells[i]![i]!.text).toBe("1.00");
    });
  });

  it("renders every coefficient into the grid HTML", () => {
    const vm = correlationGrid(correlations.result);
    const html = renderCorrelationGrid(vm);
    for (const row of vm.cells) {
      for (const cell of row) {
        expect(html).toContain(`>${cell.text}</td>`);
        expect(html).toContain(`title="r=${cell.raw} n=${cell.nCommon}"`);
      }
    }
    expect(html).toContain(`${vm.stepMs} ms grid`);
  });
});

describe("extremaRows", () => {
  it("flattens every event with its payload values", () => {
    const rows = extremaRows(extrema.result);
    const total = extrema.result.reduce((n, entry) => n + entry.events.length, 0);
    expect(rows).toHaveLength(total);
    for (let i = 1; i < rows.length; i++) {
      expect(rows[i]!.tMs).toBeGreaterThanOrEqual(rows[i - 1]!.tMs);
    }

    const attention = extrema.result.find((e) => e.modality === "attention")!;
    for (const event of attention.events) {
      const row = rows.find(
        (r) => r.stream === "attention/headset-01" && r.tMs === event.t_ms)!;
      expect(row.kind).toBe(event.kind);
      expect(row.value.raw).toBe(event.value);
      expect(row.prominence.raw).toBe(event.prominence);
      expect(row.activity).toBe(event.activity_name);
      expect(row.clock).toBe(formatClock(event.t_ms));
    }
  });

  it("renders rows and survives an empty list", () => {
    const rows = extremaRows(extrema.result);
    const html = renderExtremaList(rows);
    expect(html).toContain(rows[0]!.clock);
    expect(renderExtremaList([])).toContain("no prominent extrema");
  });
});

describe("comparisonCard", () => {
  it("shows the payload's scores and gain verbatim", () => {
    const vm = comparisonCard(comparison.result);
    expect(vm.pre.raw).toBe(comparison.result.pre_score);
    expect(vm.post.raw).toBe(comparison.result.post_score);
    expect(vm.max.raw).toBe(comparison.result.max_score);
    expect(vm.delta.raw).toBe(comparison.result.delta);
    expect(vm.gain.raw).toBe(comparison.result.relative_gain);

    // The demo recording's known story: 40 -> 70 out of 100.
    expect(vm.pre.text).toBe("40.00");
    expect(vm.post.text).toBe("70.00");
    expect(vm.delta.text).toBe("30.00");
    expect(vm.gain.text).toBe("0.50");

    const html = renderComparisonCard(vm);
    expect(html).toContain("40.00 / 100.00");
    expect(html).toContain("70.00 / 100.00");
    expect(html).toContain("0.50");
  });

  it("labels an undefined gain as n/a", () => {
    const vm = comparisonCard({ ...comparison.result, relative_gain: null });
    expect(vm.gain.text).toBe("n/a");
    expect(renderComparisonCard(null)).toContain("no pre/post tests");
  });
});

describe("chartSeries", () => {
  it("maps every sample into the pixel box", () => {
    const vm = chartSeries(smoothed, 960, 220);
    const points = vm.points.split(" ");
    expect(points).toHaveLength(smoothed.samples.length);
    for (const point of points) {
      const [x, y] = point.split(",").map(Number) as [number, number];
      expect(x).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThanOrEqual(960);
      expect(y).toBeGreaterThanOrEqual(0);
      expect(y).toBeLessThanOrEqual(220);
    }
    expect(points[0]!.startsWith("0.0,")).toBe(true);
    expect(points[points.length - 1]!.startsWith("960.0,")).toBe(true);
    expect(vm.bands.map((b) => b.name)).toEqual(smoothed.bands.map((b) => b.name));
    for (const band of vm.bands) {
      expect(band.x0).toBeGreaterThanOrEqual(0);
      expect(band.x1).toBeLessThanOrEqual(960);
      expect(band.x1).toBeGreaterThanOrEqual(band.x0);
    }
  });

  it("handles flat and empty series", () => {
    const flat = {
      ...smoothed,
      samples: [[0, 5], [1_000, 5]] as [number, number][],
      bands: [],
    };
    const vm = chartSeries(flat, 100, 50);
    expect(vm.points).toBe("0.0,25.0 100.0,25.0");
    expect(chartSeries({ ...flat, samples: [] }, 100, 50).points).toBe("");
  });
});

describe("esc", () => {
  it("escapes markup-significant characters", () => {
    expect(esc(`<b a="c">&`)).toBe("&lt;b a=&quot;c&quot;&gt;&amp;");
  });
});
