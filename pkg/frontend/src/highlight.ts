/** Snippet highlighting from token-offset spans.
 *
 * Snippets are normalized sentences (tokens joined by single spaces) and
 * spans are [token_start, token_end) indices into that token list, exactly
 * as the API serves them. Splitting on single spaces therefore recovers the
 * original tokens, and joining the produced segments back with single
 * spaces reproduces the snippet byte for byte -- the round-trip the tests
 * assert.
 */

import type { CandidateItem, SnippetSegment, SpanPayload } from "./types.js";

interface TokenRange {
  start: number;
  end: number;
  kind: "company" | "risk";
}

export function snippetSegments(
  snippet: string,
  companySpan: Pick<SpanPayload, "token_start" | "token_end">,
  riskSpan: Pick<SpanPayload, "token_start" | "token_end">,
): SnippetSegment[] {
  const tokens = snippet.split(" ");
  const company: TokenRange = {
    start: companySpan.token_start, end: companySpan.token_end, kind: "company",
  };
  const risk: TokenRange = {
    start: riskSpan.token_start, end: riskSpan.token_end, kind: "risk",
  };
  const ranges = [company, risk].sort((a, b) => a.start - b.start);
  for (const range of ranges) {
    if (range.start < 0 || range.end > tokens.length || range.start >= range.end) {
      throw new Error(
        `span [${range.start}, ${range.end}) out of bounds for ${tokens.length} tokens`,
      );
    }
  }
  if (ranges[0].end > ranges[1].start) {
    throw new Error("company and risk spans overlap");
  }
  const segments: SnippetSegment[] = [];
  const push = (start: number, end: number, kind: SnippetSegment["kind"]) => {
    if (end > start) segments.push({ text: tokens.slice(start, end).join(" "), kind });
  };
  push(0, ranges[0].start, "plain");
  push(ranges[0].start, ranges[0].end, ranges[0].kind);
  push(ranges[0].end, ranges[1].start, "plain");
  push(ranges[1].start, ranges[1].end, ranges[1].kind);
  push(ranges[1].end, tokens.length, "plain");
  return segments;
}

export function joinSegments(segments: SnippetSegment[]): string {
  return segments.map((s) => s.text).join(" ");
}

export function cardSegments(item: CandidateItem): SnippetSegment[] {
  return snippetSegments(item.snippet, item.company_span, item.risk_span);
}
