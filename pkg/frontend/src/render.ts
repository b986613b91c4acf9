// HTML renderers for the view models. Pure string builders so they can
// run (and be checked) without a browser; main.ts owns the live DOM.

import type { ConflictState, DraftActivity, DraftIssue } from "./activityEditor.js";
import type {
  ChartVm,
  ComparisonCardVm,
  CorrelationGridVm,
  ExtremumVmRow,
  StatsTableVm,
} from "./viewmodels.js";
import { formatSpan } from "./format.js";

/** Escape text for interpolation into HTML. */
export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderStatsTable(vm: StatsTableVm): string {
  const body = vm.rows
    .map(
      (row) => `<tr>
      <td>${esc(row.activity)}</td>
      <td class="num">${row.n}</td>
      <td class="num" title="${row.mean.raw}">${row.mean.text}</td>
      <td class="num" title="${row.min.raw}">${row.min.text}</td>
      <td class="num" title="${row.max.raw}">${row.max.text}</td>
      <td class="num" title="${row.stddev.raw}">${row.stddev.text}</td>
    </tr>`,
    )
    .join("\n");
  return `<table class="stats">
    <caption>${esc(vm.stream)}</caption>
    <thead><tr><th>activity</th><th>n</th><th>mean</th><th>min</th><th>max</th><th>stddev</th></tr></thead>
    <tbody>${body}</tbody>
  </table>`;
}

export function renderCorrelationGrid(vm: CorrelationGridVm): string {
  const head = vm.labels.map((label) => `<th>${esc(label)}</th>`).join("");
  const body = vm.cells
    .map((row, i) => {
      const cells = row
        .map((cell) => {
          const cls = cell.raw === null ? "undef" : cell.raw < 0 ? "neg" : "pos";
          return `<td class="num ${cls}" title="r=${cell.raw} n=${cell.nCommon}">${cell.text}</td>`;
        })
        .join("");
      return `<tr><th>${esc(vm.labels[i] ?? "")}</th>${cells}</tr>`;
    })
    .join("\n");
  return `<table class="corr">
    <caption>pearson r on a shared ${vm.stepMs} ms grid</caption>
    <thead><tr><th></th>${head}</tr></thead>
    <tbody>${body}</tbody>
  </table>`;
}

export function renderExtremaList(rows: ExtremumVmRow[]): string {
  if (rows.length === 0) return `<p class="empty">no prominent extrema</p>`;
  const items = rows
    .map(
      (row) => `<tr class="${row.kind}">
      <td>${row.clock}</td>
      <td>${row.kind}</td>
      <td>${esc(row.stream)}</td>
      <td class="num" title="${row.value.raw}">${row.value.text}</td>
      <td class="num" title="${row.prominence.raw}">${row.prominence.text}</td>
      <td>${esc(row.activity)}</td>
    </tr>`,
    )
    .join("\n");
  return `<table class="extrema">
    <thead><tr><th>time</th><th>kind</th><th>stream</th><th>value</th><th>prominence</th><th>during</th></tr></thead>
    <tbody>${items}</tbody>
  </table>`;
}

export function renderComparisonCard(vm: ComparisonCardVm | null): string {
  if (vm === null) return `<p class="empty">no pre/post tests recorded</p>`;
  return `<dl class="comparison">
    <div><dt>pretest</dt><dd title="${vm.pre.raw}">${vm.pre.text} / ${vm.max.text}</dd></div>
    <div><dt>posttest</dt><dd title="${vm.post.raw}">${vm.post.text} / ${vm.max.text}</dd></div>
    <div><dt>delta</dt><dd title="${vm.delta.raw}">${vm.delta.text}</dd></div>
    <div><dt>relative gain</dt><dd title="${vm.gain.raw}">${vm.gain.text}</dd></div>
  </dl>`;
}

export function renderChart(vm: ChartVm): string {
  const bands = vm.bands
    .map(
      (band) =>
        `<rect x="${band.x0.toFixed(1)}" y="0" width="${(band.x1 - band.x0).toFixed(1)}" ` +
        `height="${vm.height}" class="band"><title>${esc(band.name)}</title></rect>`,
    )
    .join("");
  return `<svg viewBox="0 0 ${vm.width} ${vm.height}" preserveAspectRatio="none" class="chart">
    ${bands}
    <polyline points="${vm.points}" fill="none" />
  </svg>`;
}

export function renderEditorRows(draft: readonly DraftActivity[], issues: readonly DraftIssue[]): string {
  const flagged = new Set<number>();
  for (const issue of issues) {
    flagged.add(issue.index);
    if (issue.otherIndex !== undefined) flagged.add(issue.otherIndex);
  }
  return draft
    .map(
      (row, index) => `<tr data-index="${index}" class="${flagged.has(index) ? "invalid" : ""}">
      <td><input data-field="name" value="${esc(row.name)}"></td>
      <td><input data-field="start_ms" type="number" value="${row.start_ms}"></td>
      <td><input data-field="end_ms" type="number" value="${row.end_ms}"></td>
      <td>${formatSpan(row.start_ms, row.end_ms)}</td>
      <td><button data-action="remove">remove</button></td>
    </tr>`,
    )
    .join("\n");
}

export function renderIssues(issues: readonly DraftIssue[]): string {
  if (issues.length === 0) return "";
  return `<ul class="issues">${issues
    .map((issue) => `<li class="${issue.kind}">${esc(issue.message)}</li>`)
    .join("")}</ul>`;
}

export function renderConflict(conflict: ConflictState): string {
  const rows = conflict.diff
    .map((row) => {
      const yours = row.yours ? formatSpan(row.yours.start_ms, row.yours.end_ms) : "absent";
      const server = row.server ? formatSpan(row.server.start_ms, row.server.end_ms) : "absent";
      return `<tr class="${row.status}">
      <td>${esc(row.name)}</td>
      <td>${yours}</td>
      <td>${server}</td>
      <td>${row.status.replace("_", " ")}</td>
    </tr>`;
    })
    .join("\n");
  return `<div class="conflict">
    <p>someone relabeled this session first: you edited version ${conflict.baseVersion},
    the server is at version ${conflict.serverVersion}. Their list is shown next to yours;
    reload to pick up version ${conflict.serverVersion} and reapply what still matters.</p>
    <table>
      <thead><tr><th>activity</th><th>yours</th><th>server</th><th>status</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>
  </div>`;
}
