import type { SearchMatch } from "./types.js";

/** One row of the locals side pane; name and value come from the match
 *  payload untouched. */
export interface LocalsRow {
  name: string;
  value: string;
}

export function localsRows(match: SearchMatch): LocalsRow[] {
  return match.frame_locals.map(([name, value]) => ({ name, value }));
}

export interface MatchSummary {
  location: string;
  heading: string;
  matchedText: string;
}

export function matchSummary(match: SearchMatch): MatchSummary {
  return {
    location: `${match.file}:${match.line}`,
    heading: `${match.origin} ${match.label} in ${match.method}`,
    matchedText: match.text,
  };
}

export interface HighlightSpan {
  text: string;
  hit: boolean;
}

/** Split the matched text so every needle occurrence can be highlighted. */
export function highlightSpans(
  text: string,
  needle: string,
  caseSensitive = true,
): HighlightSpan[] {
  if (needle.length === 0) {
    return [{ text, hit: false }];
  }
  const haystack = caseSensitive ? text : text.toLowerCase();
  const target = caseSensitive ? needle : needle.toLowerCase();
  const spans: HighlightSpan[] = [];
  let from = 0;
  for (;;) {
    const at = haystack.indexOf(target, from);
    if (at < 0) {
      break;
    }
    if (at > from) {
      spans.push({ text: text.slice(from, at), hit: false });
    }
    spans.push({ text: text.slice(at, at + needle.length), hit: true });
    from = at + needle.length;
  }
  if (from < text.length) {
    spans.push({ text: text.slice(from), hit: false });
  }
  return spans;
}
