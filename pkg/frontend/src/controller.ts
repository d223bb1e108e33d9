/**
 * Interaction state machines that sit between the DOM and the client.
 *
 * The brush flow is: marking mode -> selection -> suggested-question dialog
 * -> confirm (or cancel, which changes nothing). Selections arrive in
 * UTF-16 offsets from the DOM and leave as sentence-relative code point
 * offsets for the API, validated against the single-sentence rule.
 */

import { ApiError, isStaleSession } from "./client.js";
import { utf16ToCodePoint } from "./offsets.js";
import type { SampleDto } from "./types.js";

export interface BrushSelection {
  sentenceIndex: number;
  start: number;
  end: number;
}

export class SelectionError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SelectionError";
  }
}

/**
 * Map a DOM selection over the presented text to a brush request.
 * Offsets are UTF-16 positions within the whole text, as a Selection
 * reports them against a normalized text node.
 */
export function selectionToBrush(
  sample: SampleDto,
  selStartUtf16: number,
  selEndUtf16: number,
): BrushSelection {
  if (selEndUtf16 <= selStartUtf16) {
    throw new SelectionError("selection is empty");
  }
  const start = utf16ToCodePoint(sample.text, selStartUtf16);
  const end = utf16ToCodePoint(sample.text, selEndUtf16);
  const sentence = sample.sentences.find((s) => start >= s.start && start < s.end);
  if (!sentence) {
    throw new SelectionError("selection starts outside any sentence");
  }
  if (end > sentence.end) {
    throw new SelectionError("selection must stay within a single sentence");
  }
  return {
    sentenceIndex: sentence.index,
    start: start - sentence.start,
    end: end - sentence.start,
  };
}

export type BrushPhase =
  | { kind: "idle" }
  | { kind: "marking" }
  | { kind: "dialog"; selection: BrushSelection; suggestedQuestion: string; token: string };

export function idlePhase(): BrushPhase {
  return { kind: "idle" };
}

export function startMarking(): BrushPhase {
  return { kind: "marking" };
}

export function openDialog(
  selection: BrushSelection,
  suggestedQuestion: string,
  token: string,
): BrushPhase {
  return { kind: "dialog", selection, suggestedQuestion, token };
}

/** Abort path: ignore the suggestion, post nothing, keep the session as-is. */
export function cancelDialog(): BrushPhase {
  return { kind: "idle" };
}

export interface Banner {
  kind: "refetch" | "error";
  message: string;
}

/** What to show when a call fails; stale sessions ask for a refetch. */
export function bannerFor(error: unknown): Banner {
  if (isStaleSession(error)) {
    return { kind: "refetch", message: "This session changed elsewhere. Reload to continue." };
  }
  if (error instanceof ApiError) {
    return { kind: "error", message: error.message };
  }
  if (error instanceof SelectionError) {
    return { kind: "error", message: error.message };
  }
  return { kind: "error", message: "Something went wrong. Try again." };
}
