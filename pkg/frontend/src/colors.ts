/**
 * The single relation-to-color mapping shared by every view.
 *
 * Each cluster relation owns exactly one CSS custom property; the response
 * view, the option lists, and the evidence panel all resolve colors through
 * this table so a category never changes hue between views.
 */

export const RELATIONS = ["equal", "support", "contradiction", "neutral"] as const;
export type Relation = (typeof RELATIONS)[number];

export type Polarity = "support" | "contradiction" | null;

export const COLOR_TOKENS: Record<Relation, string> = {
  equal: "var(--cc-color-equal)",
  support: "var(--cc-color-support)",
  contradiction: "var(--cc-color-contradiction)",
  neutral: "var(--cc-color-neutral)",
};

/** Default values for the custom properties; hosts may override them. */
export const COLOR_DEFAULTS: Record<Relation, string> = {
  equal: "#1d5bbf",
  support: "#5b8def",
  contradiction: "#e07a29",
  neutral: "#9aa0a6",
};

export function relationColor(relation: string): string {
  const token = COLOR_TOKENS[relation as Relation];
  if (!token) throw new Error(`unknown relation ${JSON.stringify(relation)}`);
  return token;
}

/**
 * Highlight class for an evidence span. Neutral evidence has no polarity,
 * so it gets a plain marker without a category color.
 */
export function polarityClass(polarity: Polarity): string {
  if (polarity === null) return "cc-hl-plain";
  if (polarity === "support") return "cc-hl-support";
  if (polarity === "contradiction") return "cc-hl-contradiction";
  throw new Error(`unknown polarity ${JSON.stringify(polarity)}`);
}

export function polarityColor(polarity: Polarity): string | null {
  return polarity === null ? null : relationColor(polarity);
}
