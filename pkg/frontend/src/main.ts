/**
 * Application wiring: one state value, one analysis client, rerender on
 * every transition. Each graph edit queues a debounced analysis of the
 * current graph; the canonical JSON panel tracks the graph so it can be
 * copied out or replaced and re-imported at any time.
 */

import { AnalyzeClient, DEFAULT_DEBOUNCE_MS, type FetchLike } from "./api.js";
import { renderApp, type Dom } from "./render.js";
import {
  addEdge,
  addNode,
  applyError,
  applyVerdicts,
  canonicalEdges,
  EditError,
  exportGraphText,
  graphPayload,
  importGraphText,
  initialState,
  nodeByNumber,
  removeEdge,
  removeNode,
  setPosition,
  toggleRole,
  type EditorState,
  type NodeRole,
} from "./state.js";

export interface AppOptions {
  baseUrl?: string;
  debounceMs?: number;
  fetchFn?: FetchLike;
}

export interface App {
  state(): EditorState;
  /** Resolves once no analysis is pending or in flight. */
  settled(): Promise<void>;
  addNode(): void;
  removeNodeByNumber(num: number): void;
  toggleRoleByNumber(num: number, role: NodeRole): void;
  addEdgeByNumbers(from: number, to: number): void;
  moveNodeByNumber(num: number, x: number, y: number): void;
  importText(text: string): void;
  exportText(): string;
  dom: Dom & {
    root: HTMLElement;
    textarea: HTMLTextAreaElement;
    edgeError: HTMLElement;
    ioError: HTMLElement;
  };
}

const SKELETON = `
  <div class="banner" data-role="banner" hidden></div>
  <div class="layout">
    <div class="canvas">
      <svg viewBox="0 0 520 420" data-role="graph"></svg>
    </div>
    <div class="panel">
      <div class="status" data-role="status"></div>
      <section>
        <h2>Nodes</h2>
        <ul class="node-list" data-role="nodes"></ul>
        <button type="button" data-role="add-node">Add node</button>
      </section>
      <section>
        <h2>Edges</h2>
        <ul class="edge-list" data-role="edges"></ul>
        <div class="edge-form">
          <input type="number" min="1" data-role="edge-from" placeholder="from" aria-label="edge source" />
          <span>→</span>
          <input type="number" min="1" data-role="edge-to" placeholder="to" aria-label="edge target" />
          <button type="button" data-role="add-edge">Add edge</button>
        </div>
        <div class="inline-error" data-role="edge-error"></div>
      </section>
      <section>
        <h2>Graph JSON</h2>
        <textarea data-role="graph-json" rows="10" spellcheck="false"></textarea>
        <div class="io-buttons">
          <button type="button" data-role="export">Export</button>
          <button type="button" data-role="import">Import</button>
        </div>
        <div class="inline-error" data-role="io-error"></div>
      </section>
    </div>
  </div>
`;

function query<T extends Element>(root: HTMLElement, selector: string): T {
  const el = root.querySelector(selector);
  if (!el) {
    throw new Error(`app skeleton is missing ${selector}`);
  }
  return el as T;
}

export function createApp(root: HTMLElement, options: AppOptions = {}): App {
  root.innerHTML = SKELETON;
  const dom = {
    root,
    banner: query<HTMLElement>(root, '[data-role="banner"]'),
    status: query<HTMLElement>(root, '[data-role="status"]'),
    svg: query<SVGSVGElement>(root, '[data-role="graph"]'),
    nodeList: query<HTMLElement>(root, '[data-role="nodes"]'),
    edgeList: query<HTMLElement>(root, '[data-role="edges"]'),
    textarea: query<HTMLTextAreaElement>(root, '[data-role="graph-json"]'),
    edgeError: query<HTMLElement>(root, '[data-role="edge-error"]'),
    ioError: query<HTMLElement>(root, '[data-role="io-error"]'),
  };

  let state = initialState();

  const client = new AnalyzeClient<number[]>({
    baseUrl: options.baseUrl,
    debounceMs: options.debounceMs ?? DEFAULT_DEBOUNCE_MS,
    fetchFn: options.fetchFn,
    onResult(outcome) {
      // tag holds the edge ids that were sent, in the same canonical
      // order the response booleans come back in
      const verdicts = new Map<number, boolean>();
      outcome.tag.forEach((edgeId, k) => verdicts.set(edgeId, outcome.verdicts[k] ?? false));
      state = applyVerdicts(state, verdicts, outcome.network);
      rerender();
    },
    onError(message) {
      state = applyError(state, message);
      rerender();
    },
  });

  const actions = {
    toggleRole(nodeId: number, role: NodeRole): void {
      apply(() => toggleRole(state, nodeId, role));
    },
    removeNode(nodeId: number): void {
      apply(() => removeNode(state, nodeId));
    },
    removeEdge(edgeId: number): void {
      apply(() => removeEdge(state, edgeId));
    },
  };

  function rerender(): void {
    renderApp(state, dom, actions);
  }

  function syncTextarea(): void {
    dom.textarea.value = exportGraphText(state);
  }

  function scheduleAnalysis(): void {
    if (state.nodes.length === 0) {
      // nothing to analyze; drop any verdicts left from a larger graph
      state = { ...state, verdicts: null, networkIdentifiable: null, error: null, stale: false };
      rerender();
      return;
    }
    const edgeIds = canonicalEdges(state).map((e) => e.id);
    client.schedule(graphPayload(state), edgeIds);
  }

  /** Run a graph edit; on success resync, rerender, queue analysis. */
  function apply(edit: () => EditorState): void {
    dom.edgeError.textContent = "";
    state = edit();
    syncTextarea();
    rerender();
    scheduleAnalysis();
  }

  query<HTMLButtonElement>(root, '[data-role="add-node"]').addEventListener("click", () => {
    apply(() => addNode(state));
  });

  const fromInput = query<HTMLInputElement>(root, '[data-role="edge-from"]');
  const toInput = query<HTMLInputElement>(root, '[data-role="edge-to"]');
  query<HTMLButtonElement>(root, '[data-role="add-edge"]').addEventListener("click", () => {
    const from = nodeByNumber(state, Number(fromInput.value));
    const to = nodeByNumber(state, Number(toInput.value));
    try {
      if (!from || !to) {
        throw new EditError("both endpoints must be existing node numbers");
      }
      apply(() => addEdge(state, from.id, to.id));
      fromInput.value = "";
      toInput.value = "";
    } catch (err) {
      if (err instanceof EditError) {
        dom.edgeError.textContent = err.message;
        return;
      }
      throw err;
    }
  });

  query<HTMLButtonElement>(root, '[data-role="export"]').addEventListener("click", () => {
    dom.ioError.textContent = "";
    syncTextarea();
    dom.textarea.select?.();
  });

  query<HTMLButtonElement>(root, '[data-role="import"]').addEventListener("click", () => {
    importText(dom.textarea.value);
  });

  function importText(text: string): void {
    dom.ioError.textContent = "";
    try {
      state = importGraphText(text);
    } catch (err) {
      if (err instanceof EditError) {
        dom.ioError.textContent = err.message;
        return;
      }
      throw err;
    }
    syncTextarea();
    rerender();
    scheduleAnalysis();
  }

  rerender();
  syncTextarea();

  return {
    state: () => state,
    settled: () => client.settled(),
    addNode: () => apply(() => addNode(state)),
    removeNodeByNumber(num) {
      const node = nodeByNumber(state, num);
      if (!node) throw new EditError(`no node ${num}`);
      apply(() => removeNode(state, node.id));
    },
    toggleRoleByNumber(num, role) {
      const node = nodeByNumber(state, num);
      if (!node) throw new EditError(`no node ${num}`);
      apply(() => toggleRole(state, node.id, role));
    },
    addEdgeByNumbers(from, to) {
      const a = nodeByNumber(state, from);
      const b = nodeByNumber(state, to);
      if (!a || !b) throw new EditError("no such node");
      apply(() => addEdge(state, a.id, b.id));
    },
    moveNodeByNumber(num, x, y) {
      const node = nodeByNumber(state, num);
      if (!node) throw new EditError(`no node ${num}`);
      state = setPosition(state, node.id, x, y);
      syncTextarea();
      rerender();
    },
    importText,
    exportText: () => exportGraphText(state),
    dom,
  };
}

const boot = typeof document !== "undefined" ? document.getElementById("app") : null;
if (boot !== null && boot.hasAttribute("data-autoboot")) {
  createApp(boot);
}
