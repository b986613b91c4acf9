// Dashboard bootstrap: load one session, render every panel, and keep the
// activity editor, timeline cursor, and media players in sync.

import { ActivityEditor } from "./activityEditor.js";
import { api, ApiError } from "./api.js";
import { formatClock } from "./format.js";
import { cursorToMediaSeconds, cursorWithinMedia } from "./mediaSync.js";
import {
  renderChart,
  renderComparisonCard,
  renderConflict,
  renderCorrelationGrid,
  renderEditorRows,
  renderExtremaList,
  renderIssues,
  renderStatsTable,
} from "./render.js";
import type { MediaAsset, SessionSummary, StreamPayload } from "./types.js";
import {
  chartSeries,
  comparisonCard,
  correlationGrid,
  extremaRows,
  statsTable,
} from "./viewmodels.js";

const $ = <T extends HTMLElement>(selector: string): T => {
  const node = document.querySelector<T>(selector);
  if (node === null) throw new Error(`missing element ${selector}`);
  return node;
};

let editor: ActivityEditor | null = null;
let mediaAssets: MediaAsset[] = [];
let sessionStart = 0;
let sessionEnd = 0;

function syncEditorView(): void {
  if (editor === null) return;
  const issues = editor.issues();
  $("#editor-rows").innerHTML = renderEditorRows(editor.draft(), issues);
  $("#editor-issues").innerHTML = renderIssues(issues);
  $<HTMLButtonElement>("#editor-submit").disabled = !editor.canSubmit();
}

function syncCursor(cursorMs: number): void {
  $("#cursor-clock").textContent = formatClock(cursorMs);
  for (const asset of mediaAssets) {
    const video = document.querySelector<HTMLVideoElement>(
      `video[data-media-id="${asset.media_id}"]`,
    );
    if (video === null) continue;
    video.currentTime = cursorToMediaSeconds(cursorMs, asset);
    video.classList.toggle("outside", !cursorWithinMedia(cursorMs, asset));
  }
}

async function loadSession(summary: SessionSummary): Promise<void> {
  const sessionId = summary.session_id;
  sessionStart = summary.start_ms;
  sessionEnd = summary.end_ms;

  const [activities, stats, correlations, extrema, comparison, media] = await Promise.all([
    api.getActivities(sessionId),
    api.getActivityStats(sessionId),
    api.getCorrelations(sessionId),
    api.getExtrema(sessionId),
    api.getTestComparison(sessionId),
    api.getMedia(sessionId),
  ]);

  $("#session-title").textContent =
    `${sessionId} (v${activities.activities_version}, ` +
    `${formatClock(sessionStart)} to ${formatClock(sessionEnd)})`;

  // One smoothed stream as the headline chart; the picker swaps it.
  const streams = (await api.getSession(sessionId)).streams;
  const picker = $<HTMLSelectElement>("#stream-picker");
  picker.innerHTML = streams
    .map((s) => `<option value="${s.modality}/${s.source_id}">${s.modality}/${s.source_id}</option>`)
    .join("");
  const drawStream = async (): Promise<void> => {
    const choice = picker.value.split("/");
    const payload: StreamPayload = await api.getStream(
      sessionId, choice[0] ?? "", choice[1] ?? "", 30_000);
    $("#chart").innerHTML = renderChart(chartSeries(payload, 960, 220));
    const statsVm = statsTable(stats.result, payload.modality, payload.source_id);
    $("#stats").innerHTML = renderStatsTable(statsVm);
  };
  picker.onchange = () => void drawStream();
  await drawStream();

  $("#correlations").innerHTML =
    correlations.result === null
      ? `<p class="empty">fewer than two streams</p>`
      : renderCorrelationGrid(correlationGrid(correlations.result));
  $("#extrema").innerHTML = renderExtremaList(extremaRows(extrema.result));
  $("#comparison").innerHTML = renderComparisonCard(
    comparison.result === null ? null : comparisonCard(comparison.result),
  );

  mediaAssets = media.assets;
  $("#media").innerHTML = mediaAssets
    .map((asset) =>
      asset.kind === "fixation_overlay"
        ? `<p class="asset">${asset.media_id} (overlay data, <a href="${asset.url}">download</a>)</p>`
        : `<figure class="asset"><video data-media-id="${asset.media_id}" src="${asset.url}" muted preload="metadata"></video>
           <figcaption>${asset.media_id} from ${formatClock(asset.master_start_ms)}</figcaption></figure>`,
    )
    .join("\n");

  const cursor = $<HTMLInputElement>("#cursor");
  cursor.min = String(sessionStart);
  cursor.max = String(sessionEnd);
  cursor.value = String(sessionStart);
  cursor.oninput = () => syncCursor(Number(cursor.value));
  syncCursor(sessionStart);

  editor = new ActivityEditor(activities);
  $("#conflict").innerHTML = "";
  syncEditorView();
}

function wireEditor(sessionId: () => string): void {
  const rows = $("#editor-rows");
  rows.addEventListener("input", (event) => {
    if (editor === null) return;
    const input = event.target as HTMLInputElement;
    const tr = input.closest("tr");
    if (tr === null || input.dataset.field === undefined) return;
    const index = Number(tr.dataset.index);
    const patch =
      input.dataset.field === "name"
        ? { name: input.value }
        : { [input.dataset.field]: input.valueAsNumber };
    editor.update(index, patch);
    // Re-render issues and the submit gate, but leave the focused input alone.
    const issues = editor.issues();
    $("#editor-issues").innerHTML = renderIssues(issues);
    $<HTMLButtonElement>("#editor-submit").disabled = !editor.canSubmit();
  });
  rows.addEventListener("click", (event) => {
    const button = (event.target as HTMLElement).closest("button[data-action=remove]");
    if (button === null || editor === null) return;
    const tr = button.closest("tr");
    if (tr === null) return;
    editor.remove(Number(tr.dataset.index));
    syncEditorView();
  });
  $("#editor-add").addEventListener("click", () => {
    if (editor === null) return;
    editor.insert({ name: "", start_ms: sessionStart, end_ms: sessionStart + 1 });
    syncEditorView();
  });
  $("#editor-submit").addEventListener("click", () => {
    void (async () => {
      if (editor === null || !editor.canSubmit()) return;
      try {
        const accepted = await api.putActivities(sessionId(), editor.payload());
        editor = new ActivityEditor(accepted);
        $("#conflict").innerHTML = "";
        syncEditorView();
        $("#session-title").textContent =
          `${accepted.session_id} (v${accepted.activities_version}, ` +
          `${formatClock(sessionStart)} to ${formatClock(sessionEnd)})`;
      } catch (error) {
        if (error instanceof ApiError && error.body.code === "version_conflict") {
          // Show what the server holds now next to the rejected draft.
          const server = await api.getActivities(sessionId());
          $("#conflict").innerHTML = renderConflict(editor.conflict(server));
        } else {
          throw error;
        }
      }
    })();
  });
}

async function boot(): Promise<void> {
  const list = await api.listSessions();
  const first = list.sessions[0];
  if (first === undefined) {
    $("#session-title").textContent = "no sessions ingested yet";
    return;
  }
  let current = first;
  const picker = $<HTMLSelectElement>("#session-picker");
  picker.innerHTML = list.sessions
    .map((s) => `<option value="${s.session_id}">${s.session_id}</option>`)
    .join("");
  picker.onchange = () => {
    const next = list.sessions.find((s) => s.session_id === picker.value);
    if (next !== undefined) {
      current = next;
      void loadSession(next);
    }
  };
  wireEditor(() => current.session_id);
  await loadSession(current);
}

document.addEventListener("DOMContentLoaded", () => void boot());
