/**
 * Client for POST /api/analyze with the UI's concurrency rules:
 * schedules are debounced (300 ms), and at most one request is ever in
 * flight. Scheduling while a request runs aborts it (latest wins), and
 * a generation counter drops any response that still slips through
 * after a newer schedule.
 */

import type { GraphPayload } from "./state.js";

/** Structural subset of fetch so tests can inject a transport. */
export interface FetchResponseLike {
  ok: boolean;
  status: number;
  text(): Promise<string>;
}

export type FetchLike = (
  url: string,
  init: {
    method: string;
    headers: Record<string, string>;
    body: string;
    signal: AbortSignal;
  },
) => Promise<FetchResponseLike>;

export interface AnalyzeOutcome<Tag> {
  tag: Tag;
  /** Edge pairs echoed by the server, canonical order. */
  edges: Array<[number, number]>;
  /** Per-edge identifiability booleans, aligned with edges. */
  verdicts: boolean[];
  network: boolean;
  document: unknown;
}

export interface AnalyzeClientOptions<Tag> {
  baseUrl?: string;
  debounceMs?: number;
  fetchFn?: FetchLike;
  onResult: (outcome: AnalyzeOutcome<Tag>) => void;
  onError: (message: string, tag: Tag) => void;
}

export const DEFAULT_DEBOUNCE_MS = 300;

interface ResponseDocument {
  network: boolean;
  edges: boolean[];
  input: { edges: Array<[number, number]> };
}

function parseDocument(text: string): ResponseDocument {
  const doc = JSON.parse(text);
  if (
    typeof doc !== "object" ||
    doc === null ||
    typeof doc.network !== "boolean" ||
    !Array.isArray(doc.edges) ||
    typeof doc.input !== "object"
  ) {
    throw new Error("unrecognized analysis document");
  }
  return doc as ResponseDocument;
}

function errorMessage(status: number, text: string): string {
  try {
    const body = JSON.parse(text);
    const message = body?.error?.message;
    if (typeof message === "string" && message) {
      return message;
    }
  } catch {
    // fall through to the generic line
  }
  return `analysis request failed with HTTP ${status}`;
}

export class AnalyzeClient<Tag = undefined> {
  private readonly url: string;
  private readonly debounceMs: number;
  private readonly fetchFn: FetchLike;
  private readonly onResult: (outcome: AnalyzeOutcome<Tag>) => void;
  private readonly onError: (message: string, tag: Tag) => void;

  private timer: ReturnType<typeof setTimeout> | null = null;
  private controller: AbortController | null = null;
  private generation = 0;
  private idleWaiters: Array<() => void> = [];

  constructor(options: AnalyzeClientOptions<Tag>) {
    this.url = (options.baseUrl ?? "") + "/api/analyze";
    this.debounceMs = options.debounceMs ?? DEFAULT_DEBOUNCE_MS;
    this.fetchFn = options.fetchFn ?? (globalThis.fetch as unknown as FetchLike);
    this.onResult = options.onResult;
    this.onError = options.onError;
  }

  /** Queue an analysis of this graph; earlier pending ones are superseded. */
  schedule(graph: GraphPayload, tag: Tag): void {
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
  settled(): Promise<void> {
    if (this.timer === null && this.controller === null) {
      return Promise.resolve();
    }
    return new Promise((resolve) => this.idleWaiters.push(resolve));
  }

  private finish(): void {
    if (this.timer === null && this.controller === null) {
      const waiters = this.idleWaiters;
      this.idleWaiters = [];
      for (const resolve of waiters) resolve();
    }
  }

  private async fire(graph: GraphPayload, tag: Tag, generation: number): Promise<void> {
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
    } catch (err) {
      if ((err as Error)?.name === "AbortError") {
        return;
      }
      if (generation !== this.generation) {
        return;
      }
      this.onError(`analysis request failed: ${(err as Error).message}`, tag);
    } finally {
      if (this.controller === controller) {
        this.controller = null;
      }
      this.finish();
    }
  }
}
