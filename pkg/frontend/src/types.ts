/**
 * Wire types for the session service API.
 *
 * Field names mirror the JSON payloads exactly. All text offsets are in
 * Unicode code points, not UTF-16 units; convert at the DOM boundary with
 * the helpers in offsets.ts.
 */

export interface SentenceSpanDto {
  index: number;
  start: number;
  end: number;
}

export interface SampleDto {
  index: number;
  text: string;
  sentences: SentenceSpanDto[];
}

export interface ClaimDto {
  id: string;
  text: string;
  sentence_index: number;
  ordinal: number;
}

export interface QuestionSourceDto {
  kind: "from_claim" | "from_span";
  claim_id: string | null;
  sentence_index: number | null;
  start: number | null;
  end: number | null;
}

export interface QuestionDto {
  text: string;
  validated: boolean;
  source: QuestionSourceDto;
}

export interface AnswerDto {
  sample_index: number;
  status: "valid" | "filtered_na" | "no_answer";
  text: string;
  start: number | null;
  end: number | null;
  qa_confidence: number;
}

export interface ClusterDto {
  id: string;
  member_indices: number[];
  representative_text: string;
  relation: string | null;
  size: number;
}

export interface ClaimVerificationDto {
  claim: ClaimDto;
  status: string;
  question: QuestionDto | null;
  focal_answer: AnswerDto | null;
  answers: AnswerDto[];
  clusters: ClusterDto[];
  per_sample_labels: string[];
  per_sample_sentences: (number | null)[];
  consistency_score: number | null;
}

export interface UnverifiedMarkerDto {
  sentence_index: number;
  reason: string;
  claim_id: string | null;
  claim_text: string | null;
}

export interface VerificationResultDto {
  samples: SampleDto[];
  claim_verifications: ClaimVerificationDto[];
  unverified: UnverifiedMarkerDto[];
  config: Record<string, unknown>;
}

export interface AnnotationSourceDto {
  kind: "claim" | "brush";
  claim_id: string | null;
  sentence_index: number | null;
  start: number | null;
  end: number | null;
}

export interface AnnotationOptionDto {
  cluster_id: string;
  representative_text: string;
  relation: string;
  size: number;
}

/** Per-sample verdict tallies; `absent` is the empty-axis category. */
export interface CountsDto {
  support: number;
  contradiction: number;
  neutral: number;
  absent: number;
}

export interface AnnotationDto {
  id: string;
  source: AnnotationSourceDto;
  start: number;
  end: number;
  counts: CountsDto;
  options: AnnotationOptionDto[];
}

export interface EditRecordDto {
  timestamp: number;
  old_text: string;
  new_text: string;
  recomputed_claim_ids: string[];
}

export interface SessionState {
  session_id: string;
  prompt: string;
  num_samples: number;
  backend: string;
  result: VerificationResultDto;
  annotations: AnnotationDto[];
  skipped_annotations: string[];
  brush_verifications: ClaimVerificationDto[];
  edit_history: EditRecordDto[];
  cache_stats: Record<string, Record<string, number>>;
  brush_sequence: number;
}

export interface EvidenceItemDto {
  sample_index: number;
  sentence_index: number;
  sentence_start: number;
  sentence_end: number;
  answer_start: number | null;
  answer_end: number | null;
  polarity: "support" | "contradiction" | null;
}

export interface EvidenceSetDto {
  target: string;
  items: EvidenceItemDto[];
}

export function presentedSample(state: SessionState): SampleDto {
  const sample = state.result.samples[0];
  if (!sample) throw new Error("session has no samples");
  return sample;
}

export function additionalSamples(state: SessionState): SampleDto[] {
  return state.result.samples.slice(1);
}
