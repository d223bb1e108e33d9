/**
 * Response view: the presented text with in-text keyword annotations,
 * proportion bars above each keyword, and expandable option lists.
 *
 * Rendering never alters the text itself. Every non-content element (bars,
 * option lists) carries data-ui="1", and extractText() strips exactly those
 * subtrees, so extractText(renderResponse(state)) equals the session text.
 */

import { renderBar, renderOptionBar } from "./bars.js";
import { relationColor } from "./colors.js";
import type { AnnotationDto, SampleDto, SessionState } from "./types.js";
import { presentedSample } from "./types.js";

export interface ResponseViewState {
  expandedAnnotation: string | null;
  selectedSentence: number | null;
  marking: boolean;
}

export function initialViewState(): ResponseViewState {
  return { expandedAnnotation: null, selectedSentence: null, marking: false };
}

export function toggleAnnotation(view: ResponseViewState, id: string): ResponseViewState {
  return {
    ...view,
    expandedAnnotation: view.expandedAnnotation === id ? null : id,
  };
}

export function selectSentence(view: ResponseViewState, index: number): ResponseViewState {
  return {
    ...view,
    selectedSentence: view.selectedSentence === index ? null : index,
  };
}

export function setMarking(view: ResponseViewState, marking: boolean): ResponseViewState {
  return { ...view, marking };
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function decodeEntities(text: string): string {
  return text
    .replace(/&lt;/g, "<")
    .replace(/&gt;/g, ">")
    .replace(/&quot;/g, '"')
    .replace(/&#39;/g, "'")
    .replace(/&amp;/g, "&");
}

function renderOptions(annotation: AnnotationDto, sampleCount: number): string {
  const rows = annotation.options
    .map(
      (option) =>
        `<span class="cc-option" data-cluster="${option.cluster_id}" data-relation="${option.relation}">` +
        `<i class="cc-option-chip" style="background:${relationColor(option.relation)}"></i>` +
        `${renderOptionBar(option.size, sampleCount, option.relation)}` +
        `<b class="cc-option-text">${escapeHtml(option.representative_text)}</b>` +
        `<small class="cc-option-size">${option.size}/${sampleCount}</small>` +
        `</span>`,
    )
    .join("");
  return `<span class="cc-options" data-ui="1" aria-hidden="true">${rows}</span>`;
}

function renderAnnotation(
  codePoints: string[],
  annotation: AnnotationDto,
  view: ResponseViewState,
  sampleCount: number,
): string {
  const keyword = escapeHtml(codePoints.slice(annotation.start, annotation.end).join(""));
  const expanded = view.expandedAnnotation === annotation.id;
  const options = expanded ? renderOptions(annotation, sampleCount) : "";
  return (
    `<span class="cc-annotation" data-annotation="${annotation.id}"` +
    `${expanded ? ' data-expanded="1"' : ""}>` +
    `${renderBar(annotation.counts)}<mark class="cc-keyword">${keyword}</mark>${options}` +
    `</span>`
  );
}

function annotationsInSentence(
  annotations: AnnotationDto[],
  start: number,
  end: number,
): AnnotationDto[] {
  const inside = annotations
    .filter((a) => a.start >= start && a.end <= end)
    .sort((a, b) => a.start - b.start || a.end - b.end);
  // Overlaps cannot come out of one decomposition, but never trust a payload:
  // drop anything that would double-render a character.
  const kept: AnnotationDto[] = [];
  let cursor = start;
  for (const annotation of inside) {
    if (annotation.start < cursor) continue;
    kept.push(annotation);
    cursor = annotation.end;
  }
  return kept;
}

export function renderResponse(state: SessionState, view: ResponseViewState): string {
  const sample = presentedSample(state);
  const codePoints = Array.from(sample.text);
  const sampleCount = state.result.samples.length - 1;
  const unverified = new Set(state.result.unverified.map((m) => m.sentence_index));

  const pieces: string[] = [];
  let cursor = 0;
  for (const sentence of sample.sentences) {
    if (sentence.start > cursor) {
      pieces.push(escapeHtml(codePoints.slice(cursor, sentence.start).join("")));
    }
    const attrs = [
      `data-sentence="${sentence.index}"`,
      view.selectedSentence === sentence.index ? 'data-selected="1"' : "",
      unverified.has(sentence.index) ? 'data-unverified="1"' : "",
    ]
      .filter(Boolean)
      .join(" ");

    const parts: string[] = [];
    let inner = sentence.start;
    for (const annotation of annotationsInSentence(state.annotations, sentence.start, sentence.end)) {
      if (annotation.start > inner) {
        parts.push(escapeHtml(codePoints.slice(inner, annotation.start).join("")));
      }
      parts.push(renderAnnotation(codePoints, annotation, view, sampleCount));
      inner = annotation.end;
    }
    if (inner < sentence.end) {
      parts.push(escapeHtml(codePoints.slice(inner, sentence.end).join("")));
    }
    pieces.push(`<span class="cc-sentence" ${attrs}>${parts.join("")}</span>`);
    cursor = sentence.end;
  }
  if (cursor < codePoints.length) {
    pieces.push(escapeHtml(codePoints.slice(cursor).join("")));
  }

  const marking = view.marking ? ' data-marking="1"' : "";
  return `<div class="cc-response"${marking}>${pieces.join("")}</div>`;
}

/**
 * Inverse of the renderer for content: drops data-ui subtrees, strips the
 * remaining tags, and decodes entities.
 */
export function extractText(html: string): string {
  let out = "";
  let skipDepth = 0;
  let i = 0;
  while (i < html.length) {
    const open = html.indexOf("<", i);
    if (open === -1) {
      if (skipDepth === 0) out += html.slice(i);
      break;
    }
    if (open > i && skipDepth === 0) out += html.slice(i, open);
    const close = html.indexOf(">", open);
    if (close === -1) break;
    const tag = html.slice(open, close + 1);
    if (tag.startsWith("</")) {
      if (skipDepth > 0) skipDepth--;
    } else if (skipDepth > 0 || tag.includes('data-ui="1"')) {
      skipDepth++;
    }
    i = close + 1;
  }
  return decodeEntities(out);
}

/** The sentence spans a host page binds click handlers to. */
export function sentenceAt(sample: SampleDto, index: number) {
  const span = sample.sentences.find((s) => s.index === index);
  if (!span) throw new Error(`no sentence ${index}`);
  return span;
}
