/**
 * Edit support: diff the annotations across an edit and walk the history.
 */

import type { AnnotationDto, EditRecordDto, SessionState } from "./types.js";

export interface AnnotationDiff {
  added: string[];
  removed: string[];
  changed: string[];
  unchanged: string[];
}

function sameAnnotation(a: AnnotationDto, b: AnnotationDto): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

/**
 * Compare annotation sets by id. "Changed" means the id survived the edit
 * but its span, counts, or options differ, e.g. when re-verification turns
 * a contradiction count into a support count.
 */
export function diffAnnotations(
  before: AnnotationDto[],
  after: AnnotationDto[],
): AnnotationDiff {
  const beforeById = new Map(before.map((a) => [a.id, a]));
  const afterById = new Map(after.map((a) => [a.id, a]));

  const diff: AnnotationDiff = { added: [], removed: [], changed: [], unchanged: [] };
  for (const annotation of after) {
    const old = beforeById.get(annotation.id);
    if (!old) diff.added.push(annotation.id);
    else if (sameAnnotation(old, annotation)) diff.unchanged.push(annotation.id);
    else diff.changed.push(annotation.id);
  }
  for (const annotation of before) {
    if (!afterById.has(annotation.id)) diff.removed.push(annotation.id);
  }
  return diff;
}

export interface HistoryView {
  entries: EditRecordDto[];
  /** Index into entries; -1 when the history is empty. */
  cursor: number;
}

export function historyView(state: SessionState): HistoryView {
  return { entries: state.edit_history, cursor: state.edit_history.length - 1 };
}

export function stepHistory(view: HistoryView, delta: number): HistoryView {
  if (view.entries.length === 0) return view;
  const cursor = Math.min(Math.max(view.cursor + delta, 0), view.entries.length - 1);
  return { ...view, cursor };
}

export function currentEntry(view: HistoryView): EditRecordDto | null {
  return view.cursor >= 0 ? (view.entries[view.cursor] ?? null) : null;
}

export function renderDiffBadges(diff: AnnotationDiff): string {
  const badge = (ids: string[], kind: string) =>
    ids.map((id) => `<span class="cc-diff cc-diff-${kind}" data-annotation="${id}">${kind}</span>`).join("");
  return (
    `<div class="cc-diff-row">` +
    badge(diff.added, "added") +
    badge(diff.changed, "changed") +
    badge(diff.removed, "removed") +
    `</div>`
  );
}
