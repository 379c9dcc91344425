/**
 * Client-side tokenization and word-boundary snapping.
 *
 * This must stay byte-compatible with the server's rule so that a span
 * snapped in the browser is never re-snapped (and never rejected) by the
 * server. The contract test replays a frozen fixture produced by the
 * server implementation.
 */

export interface CharSpan {
  start: number;
  end: number;
}

export class SnapEmptyError extends Error {
  constructor(raw: CharSpan) {
    super(`selection [${raw.start}, ${raw.end}) overlaps no token`);
    this.name = "SnapEmptyError";
  }
}

// Whitespace per the server's rule: ASCII control spacing characters
// (\t \n \v \f \r \x1c-\x1f \x85) plus Unicode Zs/Zl/Zp.
const SPACE_RE =
  /[\t\n\v\f\r\x1c-\x1f\x85\u0020\u00a0\u1680\u2000-\u200a\u2028\u2029\u202f\u205f\u3000]/;

// Unicode general category P (punctuation), same class the server peels.
const PUNCT_RE = /\p{P}/u;

export function isSpace(ch: string): boolean {
  return SPACE_RE.test(ch);
}

export function isPunct(ch: string): boolean {
  return PUNCT_RE.test(ch);
}

/**
 * Split on whitespace, then peel leading/trailing punctuation into
 * single-character tokens; interior punctuation stays attached.
 */
export function tokenize(text: string): CharSpan[] {
  const spans: CharSpan[] = [];
  const n = text.length;
  let i = 0;
  while (i < n) {
    if (isSpace(text[i])) {
      i += 1;
      continue;
    }
    let j = i;
    while (j < n && !isSpace(text[j])) {
      j += 1;
    }
    let lo = i;
    let hi = j;
    const head: CharSpan[] = [];
    while (lo < hi && isPunct(text[lo])) {
      head.push({ start: lo, end: lo + 1 });
      lo += 1;
    }
    const tail: CharSpan[] = [];
    while (hi > lo && isPunct(text[hi - 1])) {
      tail.push({ start: hi - 1, end: hi });
      hi -= 1;
    }
    spans.push(...head);
    if (lo < hi) {
      spans.push({ start: lo, end: hi });
    }
    tail.reverse();
    spans.push(...tail);
    i = j;
  }
  return spans;
}

function overlaps(a: CharSpan, b: CharSpan): boolean {
  return a.start < b.end && b.start < a.end;
}

/** Indices of tokens overlapping the span by at least one character. */
export function spanTokens(span: CharSpan, tokens: CharSpan[]): number[] {
  const out: number[] = [];
  tokens.forEach((t, i) => {
    if (overlaps(t, span)) out.push(i);
  });
  return out;
}

/** Expand a raw selection outward to cover every touched token exactly. */
export function snapToWordBoundaries(raw: CharSpan, tokens: CharSpan[]): CharSpan {
  const hit = spanTokens(raw, tokens);
  if (hit.length === 0) {
    throw new SnapEmptyError(raw);
  }
  return { start: tokens[hit[0]].start, end: tokens[hit[hit.length - 1]].end };
}
