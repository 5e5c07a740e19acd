import type { Annotation, AnnotationEntry, IterationRef } from "./types.js";

/** One rendered source row: the code plus its gray end-of-line values. */
export interface SourceViewLine {
  lineNo: number;
  code: string;
  suffix: string | null;
  iteration: IterationRef | null;
}

/** The display form of one line's entries: `x = 5, items = [1, 2]`.
 *  Variable names and value texts pass through byte for byte. */
export function entrySuffix(entries: AnnotationEntry[]): string {
  return entries.map((e) => `${e.var} = ${e.repr}`).join(", ");
}

export function sameIteration(a: IterationRef, b: IterationRef): boolean {
  return a.act === b.act && a.index === b.index;
}

/** Distinct iterations present in the annotation set, in payload order;
 *  the override dropdown is built from exactly these. */
export function iterationsIn(annotations: Annotation[]): IterationRef[] {
  const seen: IterationRef[] = [];
  for (const annotation of annotations) {
    if (!seen.some((it) => sameIteration(it, annotation.iteration))) {
      seen.push(annotation.iteration);
    }
  }
  return seen;
}

/** Join source text with its annotations.  Unexecuted lines get no suffix;
 *  lines whose entries were all filtered keep their iteration tag but show
 *  nothing.  An override narrows suffixes to one iteration returned by the
 *  API, without recomputing anything client-side. */
export function buildSourceView(
  sourceText: string,
  annotations: Annotation[],
  override: IterationRef | null = null,
): SourceViewLine[] {
  const byLine = new Map<number, Annotation>();
  for (const annotation of annotations) {
    if (override === null || sameIteration(annotation.iteration, override)) {
      byLine.set(annotation.line, annotation);
    }
  }
  const lines = sourceText.split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop(); // trailing newline is not a source line
  }
  return lines.map((code, i) => {
    const annotation = byLine.get(i + 1);
    if (annotation === undefined) {
      return { lineNo: i + 1, code, suffix: null, iteration: null };
    }
    return {
      lineNo: i + 1,
      code,
      suffix: annotation.entries.length > 0 ? entrySuffix(annotation.entries) : null,
      iteration: annotation.iteration,
    };
  });
}
