import { describe, expect, it } from "vitest";

import {
  ActivityEditor,
  canSubmit,
  diffAgainstServer,
  validateDraft,
} from "../src/activityEditor.js";
import { renderConflict, renderEditorRows } from "../src/render.js";
import type { ActivitiesPayload, ApiErrorBody } from "../src/types.js";
import { loadFixture } from "./helpers.js";

const v1 = loadFixture<ActivitiesPayload>("activities_v1.json");
const v2 = loadFixture<ActivitiesPayload>("activities_v2.json");
const conflict409 = loadFixture<{ status: number; body: ApiErrorBody }>("conflict_error.json");

const span = v1.span;

describe("validateDraft", () => {
  it("accepts the recorded activity list unchanged", () => {
    expect(validateDraft(v1.activities, span)).toEqual([]);
  });

  it("accepts touching half-open spans", () => {
    const draft = [
      { name: "a", start_ms: 0, end_ms: 1_000 },
      { name: "b", start_ms: 1_000, end_ms: 2_000 },
    ];
    expect(validateDraft(draft, span)).toEqual([]);
  });

  it("flags an overlapping pair by both indices", () => {
    const draft = [
      { name: "reading", start_ms: 0, end_ms: 5_000 },
      { name: "quiz", start_ms: 4_999, end_ms: 9_000 },
    ];
    const issues = validateDraft(draft, span);
    expect(issues).toHaveLength(1);
    expect(issues[0]).toMatchObject({ kind: "overlap", index: 1, otherIndex: 0 });
    expect(issues[0]!.message).toContain("quiz");
    expect(issues[0]!.message).toContain("reading");
  });

  it("finds overlaps regardless of row order", () => {
    const draft = [
      { name: "late", start_ms: 8_000, end_ms: 20_000 },
      { name: "early", start_ms: 0, end_ms: 10_000 },
    ];
    const issues = validateDraft(draft, span);
    expect(issues.map((i) => i.kind)).toEqual(["overlap"]);
  });

  it("flags inverted, unnamed, fractional, and out-of-span rows", () => {
    const bad = [
      { name: "", start_ms: 0, end_ms: 1_000 },
      { name: "backwards", start_ms: 5_000, end_ms: 5_000 },
      { name: "halfway", start_ms: 0.5, end_ms: 1_000 },
      { name: "outside", start_ms: span.start_ms, end_ms: span.end_ms + 1 },
    ];
    const kinds = validateDraft(bad, span).map((i) => i.kind).sort();
    expect(kinds).toEqual(["empty_name", "inverted", "not_integer", "out_of_span"]);
  });

  it("keeps rows with broken bounds out of the overlap scan", () => {
    const draft = [
      { name: "broken", start_ms: 9_000, end_ms: 1_000 },
      { name: "fine", start_ms: 0, end_ms: 10_000 },
    ];
    const kinds = validateDraft(draft, span).map((i) => i.kind);
    expect(kinds).toEqual(["inverted"]);
  });
});

describe("submit gating", () => {
  it("a clean draft can be submitted", () => {
    const editor = new ActivityEditor(v1);
    expect(editor.canSubmit()).toBe(true);
    expect(editor.payload()).toEqual({
      base_version: v1.activities_version,
      activities: v1.activities,
    });
  });

  it("an overlap in the draft disables submit until it is fixed", () => {
    const editor = new ActivityEditor(v1);
    const reading = v1.activities.findIndex((a) => a.name === "reading");
    const quiz = v1.activities.findIndex((a) => a.name === "quiz");
    expect(reading).toBeGreaterThanOrEqual(0);
    expect(quiz).toBeGreaterThanOrEqual(0);

    // Drag reading's end past the quiz start: the save button must lock.
    editor.update(reading, { end_ms: v1.activities[quiz]!.start_ms + 1 });
    expect(editor.canSubmit()).toBe(false);
    expect(editor.issues().map((i) => i.kind)).toContain("overlap");

    // The row table marks both colliding rows and the button stays off
    // until the boundary is pulled back.
    const html = renderEditorRows(editor.draft(), editor.issues());
    expect(html.match(/class="invalid"/g)).toHaveLength(2);
    editor.update(reading, { end_ms: v1.activities[quiz]!.start_ms });
    expect(editor.canSubmit()).toBe(true);
  });

  it("row edits, inserts, and removals re-validate", () => {
    const editor = new ActivityEditor(v1);
    // The recorded session leaves 8:00-8:15 unlabeled; drop a row there.
    editor.insert({ name: "", start_ms: 480_000, end_ms: 495_000 });
    expect(editor.canSubmit()).toBe(false);
    editor.update(editor.draft().length - 1, { name: "debrief" });
    expect(editor.canSubmit()).toBe(true);
    editor.remove(editor.draft().length - 1);
    expect(editor.draft()).toEqual(v1.activities);
    expect(() => editor.remove(99)).toThrow(RangeError);
    expect(() => editor.update(99, { name: "x" })).toThrow(RangeError);
  });
});

describe("version conflict", () => {
  it("the recorded 409 body names the conflict", () => {
    expect(conflict409.status).toBe(409);
    expect(conflict409.body.code).toBe("version_conflict");
    expect(conflict409.body.message).toContain("base_version");
  });

  it("shows the server's activity list next to the rejected draft", () => {
    // This editor was opened at v1 and renamed the wrap-up while another
    // editor moved the quiz and saved first (the recorded v2 state).
    const editor = new ActivityEditor(v1);
    const wrapup = v1.activities.findIndex((a) => a.name === "wrapup_survey");
    editor.update(wrapup, { name: "debrief" });

    const conflict = editor.conflict(v2);
    expect(conflict.baseVersion).toBe(v1.activities_version);
    expect(conflict.serverVersion).toBe(v2.activities_version);
    expect(conflict.server).toEqual(v2.activities);

    const byName = new Map(conflict.diff.map((row) => [row.name, row]));
    const quizRow = byName.get("quiz")!;
    expect(quizRow.status).toBe("moved");
    // The server column is the server's span, verbatim.
    expect(quizRow.server).toEqual(v2.activities.find((a) => a.name === "quiz"));
    expect(quizRow.yours).toEqual(v1.activities.find((a) => a.name === "quiz"));
    expect(byName.get("baseline_rest")!.status).toBe("unchanged");
    expect(byName.get("debrief")!.status).toBe("only_yours");
    expect(byName.get("wrapup_survey")!.status).toBe("only_server");

    const html = renderConflict(conflict);
    expect(html).toContain(`version ${v1.activities_version}`);
    expect(html).toContain(`version ${v2.activities_version}`);
    for (const activity of v2.activities) {
      expect(html).toContain(activity.name);
    }
  });

  it("pairs duplicate names by occurrence", () => {
    const yours = [
      { name: "break", start_ms: 0, end_ms: 10 },
      { name: "break", start_ms: 20, end_ms: 30 },
    ];
    const server = [
      { name: "break", start_ms: 0, end_ms: 10 },
      { name: "break", start_ms: 25, end_ms: 30 },
    ];
    const diff = diffAgainstServer(yours, server);
    expect(diff.map((row) => row.status)).toEqual(["unchanged", "moved"]);
  });

  it("canSubmit helper mirrors issue count", () => {
    expect(canSubmit([])).toBe(true);
    expect(canSubmit([{ kind: "overlap", index: 0, message: "x" }])).toBe(false);
  });
});
