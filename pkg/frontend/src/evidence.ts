/**
 * Evidence panel: the additional samples in one of two modes.
 *
 * Passage mode shows every additional sample in full. Evidence mode, entered
 * by selecting a cluster option or a claim row, keeps only the samples the
 * evidence set references and highlights exactly its recorded spans, colored
 * by polarity with the shared palette. The presented response is never part
 * of the panel; it has its own view.
 */

import { polarityClass } from "./colors.js";
import { escapeHtml } from "./response.js";
import type { EvidenceItemDto, EvidenceSetDto, SampleDto } from "./types.js";

export type PanelMode = "passage" | "evidence";

export interface EvidencePanelState {
  mode: PanelMode;
  evidence: EvidenceSetDto | null;
}

export function passageMode(): EvidencePanelState {
  return { mode: "passage", evidence: null };
}

export function evidenceMode(evidence: EvidenceSetDto): EvidencePanelState {
  return { mode: "evidence", evidence };
}

/** Sample indices the panel shows, ascending. Index 0 is never shown. */
export function visibleSampleIndices(
  state: EvidencePanelState,
  samples: SampleDto[],
): number[] {
  const additional = samples.map((s) => s.index).filter((i) => i > 0);
  if (state.mode === "passage" || !state.evidence) return additional;
  const referenced = new Set(state.evidence.items.map((i) => i.sample_index));
  return additional.filter((i) => referenced.has(i));
}

function itemsForSample(state: EvidencePanelState, sampleIndex: number): EvidenceItemDto[] {
  if (!state.evidence) return [];
  return state.evidence.items.filter((i) => i.sample_index === sampleIndex);
}

/** The recorded span to highlight: the answer span when one exists, else the sentence. */
export function highlightSpan(item: EvidenceItemDto): { start: number; end: number } {
  if (item.answer_start !== null && item.answer_end !== null) {
    return { start: item.answer_start, end: item.answer_end };
  }
  return { start: item.sentence_start, end: item.sentence_end };
}

function renderSampleText(sample: SampleDto, items: EvidenceItemDto[]): string {
  const codePoints = Array.from(sample.text);
  const spans = items
    .map((item) => ({ ...highlightSpan(item), polarity: item.polarity }))
    .sort((a, b) => a.start - b.start || a.end - b.end);

  const parts: string[] = [];
  let cursor = 0;
  for (const span of spans) {
    if (span.start < cursor) continue;
    if (span.start > cursor) parts.push(escapeHtml(codePoints.slice(cursor, span.start).join("")));
    const text = escapeHtml(codePoints.slice(span.start, span.end).join(""));
    parts.push(`<mark class="${polarityClass(span.polarity)}">${text}</mark>`);
    cursor = span.end;
  }
  parts.push(escapeHtml(codePoints.slice(cursor).join("")));
  return parts.join("");
}

export function renderEvidencePanel(
  state: EvidencePanelState,
  samples: SampleDto[],
): string {
  const visible = new Set(visibleSampleIndices(state, samples));
  const blocks = samples
    .filter((sample) => visible.has(sample.index))
    .map((sample) => {
      const body =
        state.mode === "evidence"
          ? renderSampleText(sample, itemsForSample(state, sample.index))
          : escapeHtml(sample.text);
      return `<section class="cc-sample" data-sample="${sample.index}">${body}</section>`;
    })
    .join("");
  const target = state.evidence ? ` data-target="${escapeHtml(state.evidence.target)}"` : "";
  return `<div class="cc-evidence" data-mode="${state.mode}"${target}>${blocks}</div>`;
}
