/**
 * Claim list rows, filterable by the sentence the user clicked.
 */

import { relationColor } from "./colors.js";
import { escapeHtml } from "./response.js";
import type { ClaimVerificationDto, SessionState } from "./types.js";

export interface ClaimRowVm {
  claimId: string;
  text: string;
  sentenceIndex: number;
  status: string;
  score: number | null;
  /** Relation of the cluster containing the presented answer, if any. */
  relation: string | null;
  support: number;
  contradiction: number;
  neutral: number;
}

function focalRelation(verification: ClaimVerificationDto): string | null {
  const cluster = verification.clusters.find((c) => c.member_indices.includes(0));
  return cluster ? cluster.relation : null;
}

function tally(labels: string[], label: string): number {
  return labels.filter((l) => l === label).length;
}

export function claimRows(
  state: SessionState,
  sentenceIndex: number | null = null,
): ClaimRowVm[] {
  const verifications = [...state.result.claim_verifications, ...state.brush_verifications];
  return verifications
    .filter((v) => sentenceIndex === null || v.claim.sentence_index === sentenceIndex)
    .map((v) => ({
      claimId: v.claim.id,
      text: v.claim.text,
      sentenceIndex: v.claim.sentence_index,
      status: v.status,
      score: v.consistency_score,
      relation: focalRelation(v),
      support: tally(v.per_sample_labels, "support"),
      // The wire label for a contradicting sample is "contradict".
      contradiction: tally(v.per_sample_labels, "contradict"),
      neutral: tally(v.per_sample_labels, "neutral"),
    }));
}

export function renderClaimList(rows: ClaimRowVm[]): string {
  const items = rows
    .map((row) => {
      const score = row.score === null ? "n/a" : row.score.toFixed(2);
      const chip =
        row.relation === null
          ? ""
          : `<i class="cc-option-chip" style="background:${relationColor(row.relation)}"></i>`;
      return (
        `<li class="cc-claim" data-claim="${row.claimId}" data-sentence="${row.sentenceIndex}">` +
        `${chip}<span class="cc-claim-text">${escapeHtml(row.text)}</span>` +
        `<span class="cc-claim-score">${score}</span>` +
        `<span class="cc-claim-tally">${row.support}/${row.contradiction}/${row.neutral}</span>` +
        `</li>`
      );
    })
    .join("");
  return `<ul class="cc-claims">${items}</ul>`;
}
