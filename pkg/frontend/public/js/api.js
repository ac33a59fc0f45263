/**
 * Client for POST /api/analyze with the UI's concurrency rules:
 * schedules are debounced (300 ms), and at most one request is ever in
 * flight. Scheduling while a request runs aborts it (latest wins), and
 * a generation counter drops any response that still slips through
 * after a newer schedule.
 */
export const DEFAULT_DEBOUNCE_MS = 300;
function parseDocument(text) {
    const doc = JSON.parse(text);
    if (typeof doc !== "object" ||
        doc === null ||
        typeof doc.network !== "boolean" ||
        !Array.isArray(doc.edges) ||
        typeof doc.input !== "object") {
        throw new Error("unrecognized analysis document");
    }
    return doc;
}
function errorMessage(status, text) {
    try {
        const body = JSON.parse(text);
        const message = body?.error?.message;
        if (typeof message === "string" && message) {
            return message;
        }
    }
    catch {
        // fall through to the generic line
    }
    return `analysis request failed with HTTP ${status}`;
}
export class AnalyzeClient {
    url;
    debounceMs;
    fetchFn;
    onResult;
    onError;
    timer = null;
    controller = null;
    generation = 0;
    idleWaiters = [];
    constructor(options) {
        this.url = (options.baseUrl ?? "") + "/api/analyze";
        this.debounceMs = options.debounceMs ?? DEFAULT_DEBOUNCE_MS;
        this.fetchFn = options.fetchFn ?? globalThis.fetch;
        this.onResult = options.onResult;
        this.onError = options.onError;
    }
    /** Queue an analysis of this graph; earlier pending ones are superseded. */
    schedule(graph, tag) {
        this.generation += 1;
        const generation = this.generation;
        if (this.timer !== null) {
            clearTimeout(this.timer);
        }
        this.timer = setTimeout(() => {
            this.timer = null;
            void this.fire(graph, tag, generation);
        }, this.debounceMs);
    }
    /** Resolves once no request is pending or in flight. */
    settled() {
        if (this.timer === null && this.controller === null) {
            return Promise.resolve();
        }
        return new Promise((resolve) => this.idleWaiters.push(resolve));
    }
    finish() {
        if (this.timer === null && this.controller === null) {
            const waiters = this.idleWaiters;
            this.idleWaiters = [];
            for (const resolve of waiters)
                resolve();
        }
    }
    async fire(graph, tag, generation) {
        if (this.controller !== null) {
            this.controller.abort();
        }
        const controller = new AbortController();
        this.controller = controller;
        try {
            const response = await this.fetchFn(this.url, {
                method: "POST",
                headers: { "Content-Type": "application/json" },
                // the body is the graph document itself; server-side options
                // stay at their defaults so results match the CLI's
                body: JSON.stringify(graph),
                signal: controller.signal,
            });
            const text = await response.text();
            if (generation !== this.generation) {
                return; // a newer schedule owns the callbacks now
            }
            if (!response.ok) {
                this.onError(errorMessage(response.status, text), tag);
                return;
            }
            const doc = parseDocument(text);
            this.onResult({
                tag,
                edges: doc.input.edges,
                verdicts: doc.edges,
                network: doc.network,
                document: doc,
            });
        }
        catch (err) {
            if (err?.name === "AbortError") {
                return;
            }
            if (generation !== this.generation) {
                return;
            }
            this.onError(`analysis request failed: ${err.message}`, tag);
        }
        finally {
            if (this.controller === controller) {
                this.controller = null;
            }
            this.finish();
        }
    }
}
