/**
 * Word-scale proportion bars.
 *
 * A bar is an axis of AXIS_UNITS layout units split between the verdict
 * categories of one annotation. Widths are apportioned by largest
 * remainder, which keeps every segment within one unit of exact
 * proportionality and makes the segments plus the empty axis always sum to
 * the full axis. The absent category is not drawn; it is the empty axis.
 */

import { relationColor } from "./colors.js";
import type { CountsDto } from "./types.js";

export const AXIS_UNITS = 100;

const CATEGORIES = ["support", "contradiction", "neutral", "absent"] as const;
export type BarCategory = (typeof CATEGORIES)[number];

export interface BarSegment {
  category: BarCategory;
  units: number;
}

/**
 * Split the axis between categories, largest remainder first.
 * Ties go to the earlier category so the result is deterministic.
 */
export function apportionUnits(
  counts: CountsDto,
  axisUnits: number = AXIS_UNITS,
): BarSegment[] {
  const total = CATEGORIES.reduce((sum, c) => sum + counts[c], 0);
  if (total <= 0) throw new Error("bar needs a positive sample count");
  for (const category of CATEGORIES) {
    if (counts[category] < 0) throw new Error(`negative count for ${category}`);
  }

  const quotas = CATEGORIES.map((category) => (counts[category] * axisUnits) / total);
  const units = quotas.map(Math.floor);
  let leftover = axisUnits - units.reduce((a, b) => a + b, 0);

  const byRemainder = CATEGORIES.map((_, i) => i).sort((a, b) => {
    const ra = quotas[a]! - units[a]!;
    const rb = quotas[b]! - units[b]!;
    return rb - ra || a - b;
  });
  for (const i of byRemainder) {
    if (leftover === 0) break;
    units[i]!++;
    leftover--;
  }

  return CATEGORIES.map((category, i) => ({ category, units: units[i]! }));
}

export interface BarLayout {
  filled: BarSegment[];
  emptyUnits: number;
  axisUnits: number;
}

export function barLayout(counts: CountsDto, axisUnits: number = AXIS_UNITS): BarLayout {
  const segments = apportionUnits(counts, axisUnits);
  const filled = segments.filter((s) => s.category !== "absent" && s.units > 0);
  const absent = segments.find((s) => s.category === "absent");
  return { filled, emptyUnits: absent ? absent.units : 0, axisUnits };
}

/** Bar for one annotation, drawn above its keyword. */
export function renderBar(counts: CountsDto, axisUnits: number = AXIS_UNITS): string {
  const layout = barLayout(counts, axisUnits);
  const segments = layout.filled
    .map(
      (s) =>
        `<i class="cc-bar-seg" data-category="${s.category}" style="width:${s.units}%;background:${relationColor(s.category)}"></i>`,
    )
    .join("");
  return `<span class="cc-bar" data-ui="1" aria-hidden="true">${segments}</span>`;
}

/** Smaller bar for one option row: cluster size out of the sample count. */
export function renderOptionBar(
  size: number,
  sampleCount: number,
  relation: string,
  axisUnits: number = AXIS_UNITS,
): string {
  if (sampleCount <= 0) throw new Error("option bar needs a positive sample count");
  const units = Math.round((size * axisUnits) / sampleCount);
  return (
    `<span class="cc-bar cc-bar-option" data-ui="1" aria-hidden="true">` +
    `<i class="cc-bar-seg" style="width:${units}%;background:${relationColor(relation)}"></i>` +
    `</span>`
  );
}
