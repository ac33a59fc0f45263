/**
 * Application wiring: one state value, one analysis client, rerender on
 * every transition. Each graph edit queues a debounced analysis of the
 * current graph; the canonical JSON panel tracks the graph so it can be
 * copied out or replaced and re-imported at any time.
 */
import { AnalyzeClient, DEFAULT_DEBOUNCE_MS } from "./api.js";
import { renderApp } from "./render.js";
import { addEdge, addNode, applyError, applyVerdicts, canonicalEdges, EditError, exportGraphText, graphPayload, importGraphText, initialState, nodeByNumber, removeEdge, removeNode, setPosition, toggleRole, } from "./state.js";
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
function query(root, selector) {
    const el = root.querySelector(selector);
    if (!el) {
        throw new Error(`app skeleton is missing ${selector}`);
    }
    return el;
}
export function createApp(root, options = {}) {
    root.innerHTML = SKELETON;
    const dom = {
        root,
        banner: query(root, '[data-role="banner"]'),
        status: query(root, '[data-role="status"]'),
        svg: query(root, '[data-role="graph"]'),
        nodeList: query(root, '[data-role="nodes"]'),
        edgeList: query(root, '[data-role="edges"]'),
        textarea: query(root, '[data-role="graph-json"]'),
        edgeError: query(root, '[data-role="edge-error"]'),
        ioError: query(root, '[data-role="io-error"]'),
    };
    let state = initialState();
    const client = new AnalyzeClient({
        baseUrl: options.baseUrl,
        debounceMs: options.debounceMs ?? DEFAULT_DEBOUNCE_MS,
        fetchFn: options.fetchFn,
        onResult(outcome) {
            // tag holds the edge ids that were sent, in the same canonical
            // order the response booleans come back in
            const verdicts = new Map();
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
        toggleRole(nodeId, role) {
            apply(() => toggleRole(state, nodeId, role));
        },
        removeNode(nodeId) {
            apply(() => removeNode(state, nodeId));
        },
        removeEdge(edgeId) {
            apply(() => removeEdge(state, edgeId));
        },
    };
    function rerender() {
        renderApp(state, dom, actions);
    }
    function syncTextarea() {
        dom.textarea.value = exportGraphText(state);
    }
    function scheduleAnalysis() {
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
    function apply(edit) {
        dom.edgeError.textContent = "";
        state = edit();
        syncTextarea();
        rerender();
        scheduleAnalysis();
    }
    query(root, '[data-role="add-node"]').addEventListener("click", () => {
        apply(() => addNode(state));
    });
    const fromInput = query(root, '[data-role="edge-from"]');
    const toInput = query(root, '[data-role="edge-to"]');
    query(root, '[data-role="add-edge"]').addEventListener("click", () => {
        const from = nodeByNumber(state, Number(fromInput.value));
        const to = nodeByNumber(state, Number(toInput.value));
        try {
            if (!from || !to) {
                throw new EditError("both endpoints must be existing node numbers");
            }
            apply(() => addEdge(state, from.id, to.id));
            fromInput.value = "";
            toInput.value = "";
        }
        catch (err) {
            if (err instanceof EditError) {
                dom.edgeError.textContent = err.message;
                return;
            }
            throw err;
        }
    });
    query(root, '[data-role="export"]').addEventListener("click", () => {
        dom.ioError.textContent = "";
        syncTextarea();
        dom.textarea.select?.();
    });
    query(root, '[data-role="import"]').addEventListener("click", () => {
        importText(dom.textarea.value);
    });
    function importText(text) {
        dom.ioError.textContent = "";
        try {
            state = importGraphText(text);
        }
        catch (err) {
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
            if (!node)
                throw new EditError(`no node ${num}`);
            apply(() => removeNode(state, node.id));
        },
        toggleRoleByNumber(num, role) {
            const node = nodeByNumber(state, num);
            if (!node)
                throw new EditError(`no node ${num}`);
            apply(() => toggleRole(state, node.id, role));
        },
        addEdgeByNumbers(from, to) {
            const a = nodeByNumber(state, from);
            const b = nodeByNumber(state, to);
            if (!a || !b)
                throw new EditError("no such node");
            apply(() => addEdge(state, a.id, b.id));
        },
        moveNodeByNumber(num, x, y) {
            const node = nodeByNumber(state, num);
            if (!node)
                throw new EditError(`no node ${num}`);
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
