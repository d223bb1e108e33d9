import { readFileSync } from "node:fs";

import type { EvidenceSetDto, SessionState } from "../src/types.js";

function load<T>(name: string): T {
  const url = new URL(`./fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf8")) as T;
}

/** Fresh parse per call so tests can mutate their copy freely. */
export const sessionFixture = (): SessionState => load<SessionState>("session.json");
export const editedFixture = (): SessionState => load<SessionState>("edited.json");
export const clusterEvidence = (): EvidenceSetDto =>
  load<EvidenceSetDto>("evidence_cluster.json");
export const claimEvidence = (): EvidenceSetDto =>
  load<EvidenceSetDto>("evidence_claim.json");
export const neutralEvidence = (): EvidenceSetDto =>
  load<EvidenceSetDto>("evidence_neutral.json");
