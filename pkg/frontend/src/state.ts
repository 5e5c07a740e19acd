import type { IterationRef, SearchMatch } from "./types.js";

/** What the explorer is looking at.  The cursor stays within the open
 *  file's bounds and the iteration override always refers to an iteration
 *  the API returned for the current view (enforced by the transitions). */
export interface ViewState {
  file: string | null;
  lineCount: number;
  cursorLine: number;
  sessionId: string | null;
  lastMatch: SearchMatch | null;
  iterationOverride: IterationRef | null;
  stale: boolean;
}

export function initialState(): ViewState {
  return {
    file: null,
    lineCount: 0,
    cursorLine: 1,
    sessionId: null,
    lastMatch: null,
    iterationOverride: null,
    stale: false,
  };
}

export function withFile(state: ViewState, file: string, lineCount: number): ViewState {
  return {
    ...state,
    file,
    lineCount,
    cursorLine: 1,
    iterationOverride: null, // refers to iterations of the previous view
  };
}

export function withCursor(state: ViewState, line: number): ViewState {
  const bounded = Math.min(Math.max(1, Math.trunc(line)), Math.max(1, state.lineCount));
  return { ...state, cursorLine: bounded };
}

export function withOverride(
  state: ViewState,
  override: IterationRef | null,
  available: IterationRef[],
): ViewState {
  if (
    override !== null &&
    !available.some((it) => it.act === override.act && it.index === override.index)
  ) {
    return state; // not an iteration the API returned; ignore
  }
  return { ...state, iterationOverride: override };
}

export function withMatch(state: ViewState, match: SearchMatch): ViewState {
  return { ...state, lastMatch: match };
}
