/**
 * Offset conversion between DOM selections and the API.
 *
 * The DOM measures strings in UTF-16 code units; the verification service
 * indexes text by Unicode code points. Anything outside the Basic
 * Multilingual Plane (emoji, some CJK, mathematical alphanumerics) occupies
 * two UTF-16 units but one code point, so the two scales drift apart and
 * every selection must be converted before it is posted.
 */

export function codePointLength(text: string): number {
  let count = 0;
  for (let i = 0; i < text.length; i++) {
    count++;
    const code = text.codePointAt(i);
    if (code !== undefined && code > 0xffff) i++;
  }
  return count;
}

/** Convert a UTF-16 offset into a code point offset. */
export function utf16ToCodePoint(text: string, utf16Offset: number): number {
  if (utf16Offset < 0 || utf16Offset > text.length) {
    throw new RangeError(`offset ${utf16Offset} outside [0, ${text.length}]`);
  }
  let codePoints = 0;
  let i = 0;
  while (i < utf16Offset) {
    const code = text.codePointAt(i);
    const width = code !== undefined && code > 0xffff ? 2 : 1;
    if (i + width > utf16Offset) {
      throw new RangeError(`offset ${utf16Offset} splits a surrogate pair`);
    }
    i += width;
    codePoints++;
  }
  return codePoints;
}

/** Convert a code point offset into a UTF-16 offset. */
export function codePointToUtf16(text: string, codePointOffset: number): number {
  if (codePointOffset < 0) {
    throw new RangeError(`offset ${codePointOffset} is negative`);
  }
  let i = 0;
  for (let seen = 0; seen < codePointOffset; seen++) {
    if (i >= text.length) {
      throw new RangeError(`offset ${codePointOffset} beyond end of text`);
    }
    const code = text.codePointAt(i);
    i += code !== undefined && code > 0xffff ? 2 : 1;
  }
  return i;
}

/** Slice by code point offsets, the same semantics the backend applies. */
export function sliceByCodePoint(text: string, start: number, end: number): string {
  return text.slice(codePointToUtf16(text, start), codePointToUtf16(text, end));
}
