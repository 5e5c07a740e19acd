import type { DocEntry } from "./types.js";

/** One method block in the docs browser; sentences pass through verbatim. */
export interface DocsPanelRow {
  method: string;
  sentences: string[];
  counts: string;
}

export function buildDocsPanel(entries: DocEntry[]): DocsPanelRow[] {
  return entries.map((entry) => ({
    method: entry.method,
    sentences: entry.sentences,
    counts: `${entry.example_count} call(s), ${entry.distinct_count} distinct`,
  }));
}

/** Client-side narrowing for the prefix box (the server also filters). */
export function filterByPrefix(rows: DocsPanelRow[], prefix: string): DocsPanelRow[] {
  return rows.filter((row) => row.method.startsWith(prefix));
}
