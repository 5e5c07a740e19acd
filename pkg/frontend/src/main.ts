import { ApiClient, ApiError } from "./api.js";
import { buildDocsPanel, filterByPrefix } from "./docsPanel.js";
import { highlightSpans, localsRows, matchSummary } from "./searchPanel.js";
import { buildSourceView, iterationsIn, sameIteration } from "./sourceView.js";
import {
  initialState,
  withCursor,
  withFile,
  withMatch,
  withOverride,
  type ViewState,
} from "./state.js";
import type { Annotation, IterationRef } from "./types.js";

const api = new ApiClient("");
let state: ViewState = initialState();
let sourceText = "";
let annotations: Annotation[] = [];
let allowStale = false;
let findPending = false;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function setStale(stale: boolean): void {
  state = { ...state, stale };
  el("stale-banner").classList.toggle("hidden", !stale);
}

async function refreshAnnotations(): Promise<void> {
  if (state.file === null) {
    return;
  }
  try {
    const response = await api.getAnnotations(state.file, state.cursorLine, allowStale);
    annotations = response.annotations;
    setStale(response.stale);
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      annotations = [];
      setStale(true);
    } else {
      throw err;
    }
  }
  renderSource();
  renderIterationPicker();
}

function renderSource(): void {
  const pane = el("source-pane");
  pane.textContent = "";
  const view = buildSourceView(sourceText, annotations, state.iterationOverride);
  for (const line of view) {
    const row = document.createElement("div");
    row.className = "source-line";
    if (line.lineNo === state.cursorLine) {
      row.classList.add("cursor");
    }
    const num = document.createElement("span");
    num.className = "lineno";
    num.textContent = String(line.lineNo).padStart(4, " ");
    const code = document.createElement("span");
    code.className = "code";
    code.textContent = line.code;
    row.append(num, code);
    if (line.suffix !== null) {
      const suffix = document.createElement("span");
      suffix.className = "value-suffix";
      suffix.textContent = `  ${line.suffix}`;
      row.append(suffix);
    }
    row.addEventListener("click", () => {
      state = withCursor(state, line.lineNo);
      void refreshAnnotations();
    });
    pane.append(row);
  }
}

function renderIterationPicker(): void {
  const picker = el<HTMLSelectElement>("iteration-picker");
  const available = iterationsIn(annotations);
  picker.textContent = "";
  const auto = document.createElement("option");
  auto.value = "";
  auto.textContent = "cursor-selected iteration";
  picker.append(auto);
  for (const it of available) {
    const option = document.createElement("option");
    option.value = `${it.act}:${it.index}`;
    option.textContent = `activation ${it.act}, pass ${it.index}`;
    if (state.iterationOverride !== null && sameIteration(it, state.iterationOverride)) {
      option.selected = true;
    }
    picker.append(option);
  }
  picker.onchange = () => {
    let override: IterationRef | null = null;
    if (picker.value !== "") {
      const [act, index] = picker.value.split(":").map(Number);
      override = { act, index };
    }
    state = withOverride(state, override, available);
    renderSource();
  };
}

async function openFile(file: string, focusLine?: number): Promise<void> {
  const source = await api.getSource(file);
  sourceText = source.text;
  state = withFile(state, file, sourceText.split("\n").length);
  if (focusLine !== undefined) {
    state = withCursor(state, focusLine);
  }
  el("source-title").textContent = file;
  await refreshAnnotations();
  document.querySelector(".source-line.cursor")?.scrollIntoView({ block: "center" });
}

async function renderFiles(): Promise<void> {
  const response = await api.getFiles();
  setStale(response.stale);
  const list = el("file-list");
  list.textContent = "";
  for (const file of response.files) {
    const item = document.createElement("li");
    item.textContent = file;
    item.addEventListener("click", () => void openFile(file));
    list.append(item);
  }
}

async function findNext(): Promise<void> {
  if (findPending) {
    return; // one in-flight next per session
  }
  const needle = el<HTMLInputElement>("needle").value;
  if (needle === "") {
    return;
  }
  const button = el<HTMLButtonElement>("find-next");
  findPending = true;
  button.disabled = true;
  try {
    let sessionId = state.sessionId;
    if (sessionId === null) {
      const prefix = el<HTMLInputElement>("scope-prefix").value.trim();
      const session = await api.createSession(needle, {
        caseSensitive: !el<HTMLInputElement>("ignore-case").checked,
        scope: prefix === "" ? {} : { method_prefixes: [prefix] },
      });
      sessionId = session.id;
      state = { ...state, sessionId };
      setStale(session.stale);
    }
    const response = await api.nextMatch(sessionId);
    if (response.exhausted === true) {
      el("match-info").textContent = "exhausted: no further occurrences";
      return;
    }
    const match = response.match;
    if (match === undefined) {
      return;
    }
    state = withMatch(state, match);
    const summary = matchSummary(match);
    const info = el("match-info");
    info.textContent = "";
    const head = document.createElement("div");
    head.textContent = `${summary.heading} @ ${summary.location}`;
    const text = document.createElement("div");
    text.className = "matched-text";
    for (const span of highlightSpans(summary.matchedText, needle,
                                      !el<HTMLInputElement>("ignore-case").checked)) {
      const piece = document.createElement(span.hit ? "mark" : "span");
      piece.textContent = span.text;
      text.append(piece);
    }
    info.append(head, text);

    const pane = el("locals-pane");
    pane.textContent = "";
    for (const row of localsRows(match)) {
      const item = document.createElement("div");
      item.className = "local-row";
      const name = document.createElement("span");
      name.className = "local-name";
      name.textContent = row.name;
      const value = document.createElement("span");
      value.className = "local-value";
      value.textContent = row.value;
      item.append(name, " = ", value);
      pane.append(item);
    }
    await openFile(match.file, match.line);
  } finally {
    findPending = false;
    button.disabled = false;
  }
}

function resetSession(): void {
  state = { ...state, sessionId: null, lastMatch: null };
  el("match-info").textContent = "";
}

async function renderDocs(): Promise<void> {
  const prefix = el<HTMLInputElement>("docs-prefix").value.trim();
  const response = await api.getDocs();
  setStale(response.stale);
  const rows = filterByPrefix(buildDocsPanel(response.entries), prefix);
  const pane = el("docs-pane");
  pane.textContent = "";
  for (const row of rows) {
    const block = document.createElement("div");
    block.className = "doc-block";
    const title = document.createElement("div");
    title.className = "doc-method";
    title.textContent = row.method;
    title.addEventListener("click", () => {
      const file = annotationsFileFor(row.method);
      if (file !== null) {
        void openFile(file);
      }
    });
    block.append(title);
    for (const sentence of row.sentences) {
      const item = document.createElement("div");
      item.className = "doc-sentence";
      item.textContent = sentence;
      block.append(item);
    }
    const counts = document.createElement("div");
    counts.className = "doc-counts";
    counts.textContent = row.counts;
    block.append(counts);
    pane.append(block);
  }
}

let knownFiles: string[] = [];

function annotationsFileFor(method: string): string | null {
  // Guess the defining file from the qualified name's module part.
  const moduleName = method.split(".").slice(0, -1).join("/");
  for (const file of knownFiles) {
    const stem = file.replace(/\.[^./]+$/, "");
    if (moduleName.startsWith(stem) || stem.endsWith(moduleName)) {
      return file;
    }
  }
  return null;
}

async function start(): Promise<void> {
  const files = await api.getFiles();
  knownFiles = files.files;
  await renderFiles();
  await renderDocs();
  el<HTMLButtonElement>("find-next").addEventListener("click", () => void findNext());
  el<HTMLInputElement>("needle").addEventListener("change", resetSession);
  el<HTMLInputElement>("scope-prefix").addEventListener("change", resetSession);
  el<HTMLInputElement>("ignore-case").addEventListener("change", resetSession);
  el<HTMLInputElement>("docs-prefix").addEventListener("input", () => void renderDocs());
  el<HTMLInputElement>("allow-stale").addEventListener("change", (event) => {
    allowStale = (event.target as HTMLInputElement).checked;
    void refreshAnnotations();
  });
  if (knownFiles.length > 0) {
    await openFile(knownFiles[0]);
  }
}

void start();
