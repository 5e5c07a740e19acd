import type {
  AnnotationsResponse,
  DocsResponse,
  FilesResponse,
  NextResponse,
  SearchScopeBody,
  SessionResponse,
  SourceResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
    public readonly stale: boolean = false,
  ) {
    super(message);
  }
}

async function unwrap<T>(response: Response): Promise<T> {
  const body = await response.json();
  if (!response.ok) {
    throw new ApiError(response.status, body.error ?? response.statusText,
      Boolean(body.stale));
  }
  return body as T;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  private url(path: string, params?: Record<string, string>): string {
    const query = params ? `?${new URLSearchParams(params)}` : "";
    return `${this.baseUrl}${path}${query}`;
  }

  async getFiles(): Promise<FilesResponse> {
    return unwrap(await fetch(this.url("/api/files")));
  }

  async getSource(file: string): Promise<SourceResponse> {
    return unwrap(await fetch(this.url("/api/source", { file })));
  }

  async getAnnotations(
    file: string,
    cursor: number,
    allowStale = false,
  ): Promise<AnnotationsResponse> {
    const params: Record<string, string> = { file, cursor: String(cursor) };
    if (allowStale) {
      params.allow_stale = "true";
    }
    return unwrap(await fetch(this.url("/api/annotations", params)));
  }

  async createSession(
    needle: string,
    options: { caseSensitive?: boolean; scope?: SearchScopeBody } = {},
  ): Promise<SessionResponse> {
    const response = await fetch(this.url("/api/search/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        query: { needle, case_sensitive: options.caseSensitive ?? true },
        scope: options.scope ?? {},
      }),
    });
    return unwrap(response);
  }

  async nextMatch(sessionId: string): Promise<NextResponse> {
    const response = await fetch(
      this.url(`/api/search/sessions/${sessionId}/next`),
      { method: "POST" },
    );
    return unwrap(response);
  }

  async getDocs(prefix = "", k?: number): Promise<DocsResponse> {
    const params: Record<string, string> = {};
    if (prefix) {
      params.prefix = prefix;
    }
    if (k !== undefined) {
      params.k = String(k);
    }
    return unwrap(await fetch(this.url("/api/docs", params)));
  }

  async invalidate(file?: string): Promise<{ stale: boolean }> {
    const response = await fetch(this.url("/api/invalidate"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(file ? { file } : {}),
    });
    return unwrap(response);
  }
}
