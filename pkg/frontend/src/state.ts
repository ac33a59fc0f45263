/**
 * Editor state and pure transition functions.
 *
 * Nodes and edges carry stable internal ids that never change across
 * edits; the 1-based numbers shown to the user (and written to graph
 * JSON) are recomputed from array position, so removing node 2 of 3
 * renumbers the display without touching any record's identity, flags,
 * or position.
 *
 * Verdicts are never computed here. The only source of edge colors is
 * the last analysis response, applied via applyVerdicts; every graph
 * edit marks those verdicts stale until the next response lands.
 */

export interface NodeRecord {
  id: number;
  excited: boolean;
  measured: boolean;
  x: number;
  y: number;
}

export interface EdgeRecord {
  id: number;
  /** Internal node ids, not display numbers. */
  from: number;
  to: number;
}

export interface EditorState {
  nodes: NodeRecord[];
  edges: EdgeRecord[];
  nextNodeId: number;
  nextEdgeId: number;
  /** edge id -> identifiable, from the last successful analysis; null before one arrives. */
  verdicts: Map<number, boolean> | null;
  networkIdentifiable: boolean | null;
  /** True when the graph changed after the verdicts were computed. */
  stale: boolean;
  /** Banner text for the last server/transport failure, or null. */
  error: string | null;
  /** Set when positions came from an import or an explicit move; controls export. */
  positionsExplicit: boolean;
}

export type NodeRole = "excited" | "measured";

/** Invalid edits (duplicate edge, missing endpoint, bad import) raise this. */
export class EditError extends Error {}

export function initialState(): EditorState {
  return {
    nodes: [],
    edges: [],
    nextNodeId: 1,
    nextEdgeId: 1,
    verdicts: null,
    networkIdentifiable: null,
    stale: false,
    error: null,
    positionsExplicit: false,
  };
}

/** Display number (1-based) of a node id, or 0 if the id is gone. */
export function displayNumber(state: EditorState, nodeId: number): number {
  return state.nodes.findIndex((n) => n.id === nodeId) + 1;
}

export function nodeByNumber(state: EditorState, num: number): NodeRecord | undefined {
  return state.nodes[num - 1];
}

function markEdited(state: EditorState): EditorState {
  // an edit invalidates nothing until the next response; old colors stay, dimmed
  return { ...state, stale: true };
}

/** Default layout: slots on a circle, filled in node order. */
function autoPosition(index: number): { x: number; y: number } {
  const cx = 260;
  const cy = 210;
  const r = 150;
  const angle = -Math.PI / 2 + (index * 2 * Math.PI) / 12;
  return { x: Math.round(cx + r * Math.cos(angle)), y: Math.round(cy + r * Math.sin(angle)) };
}

export function addNode(state: EditorState): EditorState {
  const pos = autoPosition(state.nodes.length);
  const node: NodeRecord = {
    id: state.nextNodeId,
    excited: false,
    measured: false,
    x: pos.x,
    y: pos.y,
  };
  return markEdited({
    ...state,
    nodes: [...state.nodes, node],
    nextNodeId: state.nextNodeId + 1,
  });
}

export function removeNode(state: EditorState, nodeId: number): EditorState {
  if (!state.nodes.some((n) => n.id === nodeId)) {
    throw new EditError(`no such node id ${nodeId}`);
  }
  return markEdited({
    ...state,
    nodes: state.nodes.filter((n) => n.id !== nodeId),
    edges: state.edges.filter((e) => e.from !== nodeId && e.to !== nodeId),
  });
}

export function addEdge(state: EditorState, fromId: number, toId: number): EditorState {
  const from = state.nodes.find((n) => n.id === fromId);
  const to = state.nodes.find((n) => n.id === toId);
  if (!from || !to) {
    throw new EditError("both endpoints must be existing nodes");
  }
  if (fromId === toId) {
    throw new EditError("self-loops are not allowed");
  }
  if (state.edges.some((e) => e.from === fromId && e.to === toId)) {
    const j = displayNumber(state, fromId);
    const i = displayNumber(state, toId);
    throw new EditError(`edge ${j} → ${i} already exists`);
  }
  const edge: EdgeRecord = { id: state.nextEdgeId, from: fromId, to: toId };
  return markEdited({
    ...state,
    edges: [...state.edges, edge],
    nextEdgeId: state.nextEdgeId + 1,
  });
}

export function removeEdge(state: EditorState, edgeId: number): EditorState {
  if (!state.edges.some((e) => e.id === edgeId)) {
    throw new EditError(`no such edge id ${edgeId}`);
  }
  return markEdited({
    ...state,
    edges: state.edges.filter((e) => e.id !== edgeId),
  });
}

export function toggleRole(state: EditorState, nodeId: number, role: NodeRole): EditorState {
  const node = state.nodes.find((n) => n.id === nodeId);
  if (!node) {
    throw new EditError(`no such node id ${nodeId}`);
  }
  const flipped = { ...node, [role]: !node[role] };
  return markEdited({
    ...state,
    nodes: state.nodes.map((n) => (n.id === nodeId ? flipped : n)),
  });
}

export function setPosition(state: EditorState, nodeId: number, x: number, y: number): EditorState {
  const node = state.nodes.find((n) => n.id === nodeId);
  if (!node) {
    throw new EditError(`no such node id ${nodeId}`);
  }
  const moved = { ...node, x: Math.round(x), y: Math.round(y) };
  // layout is not part of the analyzed graph, so verdicts stay fresh
  return {
    ...state,
    nodes: state.nodes.map((n) => (n.id === nodeId ? moved : n)),
    positionsExplicit: true,
  };
}

/**
 * Record the booleans of an analysis response.
 *
 * verdicts maps edge records (by id) to the response booleans; edges
 * created after the request simply have no entry and render as unknown.
 */
export function applyVerdicts(
  state: EditorState,
  verdicts: Map<number, boolean>,
  network: boolean,
): EditorState {
  return { ...state, verdicts, networkIdentifiable: network, stale: false, error: null };
}

/** Record a failed analysis: banner up, no verdicts to show. */
export function applyError(state: EditorState, message: string): EditorState {
  return { ...state, verdicts: null, networkIdentifiable: null, stale: false, error: message };
}

/** Edges in canonical order: sorted by (from number, to number). */
export function canonicalEdges(state: EditorState): EdgeRecord[] {
  const num = new Map(state.nodes.map((n, idx) => [n.id, idx + 1]));
  return [...state.edges].sort((a, b) => {
    const aj = num.get(a.from)!;
    const bj = num.get(b.from)!;
    if (aj !== bj) return aj - bj;
    return num.get(a.to)! - num.get(b.to)!;
  });
}

export interface GraphPayload {
  n: number;
  edges: Array<[number, number]>;
  excited: number[];
  measured: number[];
}

/** The analyzable graph in display numbers, edges in canonical order. */
export function graphPayload(state: EditorState): GraphPayload {
  const num = new Map(state.nodes.map((n, idx) => [n.id, idx + 1]));
  return {
    n: state.nodes.length,
    edges: canonicalEdges(state).map((e) => [num.get(e.from)!, num.get(e.to)!]),
    excited: state.nodes.filter((n) => n.excited).map((n) => num.get(n.id)!),
    measured: state.nodes.filter((n) => n.measured).map((n) => num.get(n.id)!),
  };
}

function formatNumber(value: number): string {
  if (!Number.isFinite(value)) {
    throw new EditError("positions must be finite numbers");
  }
  return String(value);
}

/**
 * Canonical graph JSON: the exact format the analyzer CLI reads.
 * Two-space indented object, arrays inline, trailing newline. Positions
 * go into a separate field the analyzer ignores, emitted only when they
 * were imported or explicitly set, so an untouched import round-trips
 * byte for byte.
 */
export function exportGraphText(state: EditorState): string {
  const g = graphPayload(state);
  const edges = g.edges.map(([j, i]) => `[${j}, ${i}]`).join(", ");
  const lines = [
    "{",
    `  "n": ${g.n},`,
    `  "edges": [${edges}],`,
    `  "excited": [${g.excited.join(", ")}],`,
    `  "measured": [${g.measured.join(", ")}]`,
  ];
  if (state.positionsExplicit) {
    lines[lines.length - 1] += ",";
    const entries = state.nodes
      .map((n, idx) => `"${idx + 1}": [${formatNumber(n.x)}, ${formatNumber(n.y)}]`)
      .join(", ");
    lines.push(`  "positions": {${entries}}`);
  }
  lines.push("}");
  return lines.join("\n") + "\n";
}

function isInt(value: unknown): value is number {
  return typeof value === "number" && Number.isInteger(value);
}

/**
 * Parse graph JSON into a fresh editor state.
 *
 * Mirrors the analyzer's structural checks (field presence, 1-based
 * range, duplicate edges, self-loops) so broken files are refused with
 * a message instead of a banner later. Emptiness of the excited and
 * measured sets is left to the server: the editor must be able to hold
 * such states, since toggling passes through them.
 */
export function importGraphText(text: string): EditorState {
  let data: unknown;
  try {
    data = JSON.parse(text);
  } catch (err) {
    throw new EditError(`not valid JSON: ${(err as Error).message}`);
  }
  if (typeof data !== "object" || data === null || Array.isArray(data)) {
    throw new EditError("graph JSON must be an object");
  }
  const obj = data as Record<string, unknown>;
  for (const field of ["n", "edges", "excited", "measured"]) {
    if (!(field in obj)) {
      throw new EditError(`missing graph field: ${field}`);
    }
  }
  const n = obj.n;
  if (!isInt(n) || n < 1) {
    throw new EditError("node count n must be a positive integer");
  }
  if (!Array.isArray(obj.edges)) {
    throw new EditError("edges must be a list of [from, to] pairs");
  }
  const edges: Array<[number, number]> = [];
  for (const entry of obj.edges) {
    if (!Array.isArray(entry) || entry.length !== 2 || !isInt(entry[0]) || !isInt(entry[1])) {
      throw new EditError(`malformed edge ${JSON.stringify(entry)}`);
    }
    const [j, i] = entry as [number, number];
    if (j < 1 || j > n || i < 1 || i > n) {
      throw new EditError(`edge [${j}, ${i}] references a node outside 1..${n}`);
    }
    if (j === i) {
      throw new EditError(`self-loop [${j}, ${i}] is not allowed`);
    }
    if (edges.some(([a, b]) => a === j && b === i)) {
      throw new EditError(`duplicate edge [${j}, ${i}]`);
    }
    edges.push([j, i]);
  }
  const selections: Record<NodeRole, Set<number>> = { excited: new Set(), measured: new Set() };
  for (const role of ["excited", "measured"] as const) {
    const raw = obj[role];
    if (!Array.isArray(raw)) {
      throw new EditError(`${role} must be a list of node numbers`);
    }
    for (const v of raw) {
      if (!isInt(v) || v < 1 || v > n) {
        throw new EditError(`${role} entry ${JSON.stringify(v)} is not a node in 1..${n}`);
      }
      if (selections[role].has(v)) {
        throw new EditError(`duplicate ${role} entry ${v}`);
      }
      selections[role].add(v);
    }
  }
  let positions: Map<number, [number, number]> | null = null;
  if ("positions" in obj) {
    const raw = obj.positions;
    if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
      throw new EditError("positions must map node numbers to [x, y]");
    }
    positions = new Map();
    for (const [key, value] of Object.entries(raw as Record<string, unknown>)) {
      const num = Number(key);
      if (!Number.isInteger(num) || num < 1 || num > n) {
        throw new EditError(`positions key ${JSON.stringify(key)} is not a node in 1..${n}`);
      }
      if (
        !Array.isArray(value) ||
        value.length !== 2 ||
        typeof value[0] !== "number" ||
        typeof value[1] !== "number"
      ) {
        throw new EditError(`position for node ${key} must be [x, y]`);
      }
      positions.set(num, [value[0], value[1]]);
    }
  }

  let state = initialState();
  for (let k = 0; k < n; k++) {
    state = addNode(state);
  }
  state = {
    ...state,
    nodes: state.nodes.map((node, idx) => {
      const num = idx + 1;
      const pos = positions?.get(num);
      return {
        ...node,
        excited: selections.excited.has(num),
        measured: selections.measured.has(num),
        x: pos ? pos[0] : node.x,
        y: pos ? pos[1] : node.y,
      };
    }),
  };
  for (const [j, i] of edges) {
    state = addEdge(state, state.nodes[j - 1]!.id, state.nodes[i - 1]!.id);
  }
  return { ...state, stale: false, positionsExplicit: positions !== null };
}
