/** Payload shapes of the /api endpoints. The UI never recomputes analysis
 *  results; everything displayed is lifted verbatim from these fields. */

export interface IterationRef {
  act: number;
  index: number;
}

export interface AnnotationEntry {
  var: string;
  repr: string;
  access: "read" | "write";
}

export interface Annotation {
  file: string;
  line: number;
  iteration: IterationRef;
  entries: AnnotationEntry[];
}

export interface AnnotationsResponse {
  file: string;
  cursor: number;
  annotations: Annotation[];
  stale: boolean;
}

export interface DocEntry {
  method: string;
  sentences: string[];
  example_count: number;
  distinct_count: number;
  succinctness?: number | null;
}

export interface DocsResponse {
  entries: DocEntry[];
  stale: boolean;
}

export interface SearchMatch {
  seq: number;
  index: number;
  origin: string;
  label: string;
  text: string;
  method: string;
  file: string;
  line: number;
  act: number;
  frame_locals: [string, string][];
}

export interface NextResponse {
  match?: SearchMatch;
  exhausted?: boolean;
  stale: boolean;
}

export interface SessionResponse {
  id: string;
  stale: boolean;
}

export interface FilesResponse {
  files: string[];
  stale: boolean;
}

export interface SourceResponse {
  file: string;
  text: string;
  stale: boolean;
}

export interface SearchScopeBody {
  method_prefixes?: string[];
  file_globs?: string[];
}
