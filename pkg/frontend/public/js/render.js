/**
 * DOM rendering. Every call rebuilds the dynamic regions (SVG canvas,
 * node and edge lists, status, banner) from the current state; graphs
 * here are small enough that diffing would be ceremony.
 *
 * Verdict styling is a straight lookup of the last response's booleans:
 * identifiable edges are solid green, non-identifiable edges dashed
 * crimson, and edges without a verdict (no response yet, or the server
 * rejected the current graph) dashed gray. Excited nodes get a
 * lightblue fill and measured nodes a double outline, matching the
 * analyzer's DOT annotations. Stale verdicts are dimmed until the next
 * response.
 */
import { canonicalEdges } from "./state.js";
const SVG_NS = "http://www.w3.org/2000/svg";
export const VERDICT_STYLE = {
    identifiable: { stroke: "#1a7f37", dash: "" },
    "non-identifiable": { stroke: "crimson", dash: "6 4" },
    unknown: { stroke: "#8a8a8a", dash: "6 4" },
};
const NODE_RADIUS = 18;
const EXCITED_FILL = "lightblue";
export function verdictClass(state, edge) {
    const verdict = state.verdicts?.get(edge.id);
    if (verdict === undefined) {
        return "unknown";
    }
    return verdict ? "identifiable" : "non-identifiable";
}
function svgEl(tag, attrs) {
    const el = document.createElementNS(SVG_NS, tag);
    for (const [k, v] of Object.entries(attrs)) {
        el.setAttribute(k, v);
    }
    return el;
}
function arrowMarker(id, color) {
    const marker = svgEl("marker", {
        id,
        viewBox: "0 0 10 10",
        refX: "9",
        refY: "5",
        markerWidth: "7",
        markerHeight: "7",
        orient: "auto-start-reverse",
    });
    marker.appendChild(svgEl("path", { d: "M 0 0 L 10 5 L 0 10 z", fill: color }));
    return marker;
}
function edgePath(from, to, curved) {
    const dx = to.x - from.x;
    const dy = to.y - from.y;
    const len = Math.hypot(dx, dy) || 1;
    const ux = dx / len;
    const uy = dy / len;
    // start at the source rim, stop short of the target rim for the arrowhead
    const sx = from.x + ux * (NODE_RADIUS + 2);
    const sy = from.y + uy * (NODE_RADIUS + 2);
    const ex = to.x - ux * (NODE_RADIUS + 9);
    const ey = to.y - uy * (NODE_RADIUS + 9);
    if (!curved) {
        return `M ${sx} ${sy} L ${ex} ${ey}`;
    }
    // bow reciprocal edges apart so both directions stay visible
    const mx = (sx + ex) / 2 - uy * 22;
    const my = (sy + ey) / 2 + ux * 22;
    return `M ${sx} ${sy} Q ${mx} ${my} ${ex} ${ey}`;
}
function roleSuffix(node) {
    if (node.excited && node.measured)
        return "[EM]";
    if (node.excited)
        return "[E]";
    if (node.measured)
        return "[M]";
    return "";
}
function renderSvg(state, svg) {
    svg.textContent = "";
    const defs = svgEl("defs", {});
    for (const [cls, style] of Object.entries(VERDICT_STYLE)) {
        defs.appendChild(arrowMarker(`arrow-${cls}`, style.stroke));
    }
    svg.appendChild(defs);
    const numbers = new Map(state.nodes.map((n, idx) => [n.id, idx + 1]));
    const nodesById = new Map(state.nodes.map((n) => [n.id, n]));
    const hasEdge = new Set(state.edges.map((e) => `${e.from}>${e.to}`));
    const edgeGroup = svgEl("g", { class: "edges" });
    if (state.stale && state.verdicts !== null) {
        edgeGroup.setAttribute("opacity", "0.35");
        edgeGroup.setAttribute("data-stale", "true");
    }
    for (const edge of canonicalEdges(state)) {
        const from = nodesById.get(edge.from);
        const to = nodesById.get(edge.to);
        const cls = verdictClass(state, edge);
        const style = VERDICT_STYLE[cls];
        const path = svgEl("path", {
            d: edgePath(from, to, hasEdge.has(`${edge.to}>${edge.from}`)),
            fill: "none",
            stroke: style.stroke,
            "stroke-width": "2",
            "marker-end": `url(#arrow-${cls})`,
            "data-edge-id": String(edge.id),
            "data-from": String(numbers.get(edge.from)),
            "data-to": String(numbers.get(edge.to)),
            "data-verdict": cls,
        });
        if (style.dash) {
            path.setAttribute("stroke-dasharray", style.dash);
        }
        const title = svgEl("title", {});
        title.textContent = `${numbers.get(edge.from)} → ${numbers.get(edge.to)}: ${cls}`;
        path.appendChild(title);
        edgeGroup.appendChild(path);
    }
    svg.appendChild(edgeGroup);
    const nodeGroup = svgEl("g", { class: "nodes" });
    for (const node of state.nodes) {
        const num = numbers.get(node.id);
        const g = svgEl("g", {
            class: "node",
            "data-node-id": String(node.id),
            "data-number": String(num),
            "data-excited": String(node.excited),
            "data-measured": String(node.measured),
        });
        if (node.measured) {
            // double outline marks a measured node, like peripheries=2 in DOT
            g.appendChild(svgEl("circle", {
                cx: String(node.x),
                cy: String(node.y),
                r: String(NODE_RADIUS + 5),
                fill: "none",
                stroke: "#333",
                "stroke-width": "1.5",
                class: "measured-ring",
            }));
        }
        g.appendChild(svgEl("circle", {
            cx: String(node.x),
            cy: String(node.y),
            r: String(NODE_RADIUS),
            fill: node.excited ? EXCITED_FILL : "#ffffff",
            stroke: "#333",
            "stroke-width": "1.5",
        }));
        const label = svgEl("text", {
            x: String(node.x),
            y: String(node.y),
            "text-anchor": "middle",
            "dominant-baseline": "central",
            "font-size": "14",
        });
        label.textContent = String(num);
        g.appendChild(label);
        const suffix = roleSuffix(node);
        if (suffix) {
            const tag = svgEl("text", {
                x: String(node.x),
                y: String(node.y + NODE_RADIUS + 16),
                "text-anchor": "middle",
                "font-size": "11",
                class: "role-tag",
            });
            tag.textContent = suffix;
            g.appendChild(tag);
        }
        nodeGroup.appendChild(g);
    }
    svg.appendChild(nodeGroup);
}
function renderNodeList(state, list, actions) {
    list.textContent = "";
    for (const [idx, node] of state.nodes.entries()) {
        const row = document.createElement("li");
        row.dataset.nodeId = String(node.id);
        row.dataset.number = String(idx + 1);
        const num = document.createElement("span");
        num.className = "num";
        num.textContent = String(idx + 1);
        row.appendChild(num);
        for (const role of ["excited", "measured"]) {
            const label = document.createElement("label");
            const box = document.createElement("input");
            box.type = "checkbox";
            box.className = role;
            box.checked = node[role];
            box.addEventListener("change", () => actions.toggleRole(node.id, role));
            label.appendChild(box);
            label.appendChild(document.createTextNode(role));
            row.appendChild(label);
        }
        const remove = document.createElement("button");
        remove.type = "button";
        remove.className = "remove";
        remove.textContent = "✕";
        remove.title = `remove node ${idx + 1}`;
        remove.addEventListener("click", () => actions.removeNode(node.id));
        row.appendChild(remove);
        list.appendChild(row);
    }
}
function renderEdgeList(state, list, actions) {
    list.textContent = "";
    const numbers = new Map(state.nodes.map((n, idx) => [n.id, idx + 1]));
    for (const edge of canonicalEdges(state)) {
        const row = document.createElement("li");
        row.dataset.edgeId = String(edge.id);
        const cls = verdictClass(state, edge);
        const label = document.createElement("span");
        label.className = `verdict ${cls}`;
        label.textContent = `${numbers.get(edge.from)} → ${numbers.get(edge.to)}`;
        label.style.color = VERDICT_STYLE[cls].stroke;
        row.appendChild(label);
        const remove = document.createElement("button");
        remove.type = "button";
        remove.className = "remove";
        remove.textContent = "✕";
        remove.title = `remove edge ${numbers.get(edge.from)} → ${numbers.get(edge.to)}`;
        remove.addEventListener("click", () => actions.removeEdge(edge.id));
        row.appendChild(remove);
        list.appendChild(row);
    }
}
function renderStatus(state, status) {
    const parts = [`${state.nodes.length} nodes`, `${state.edges.length} edges`];
    if (state.verdicts !== null && state.networkIdentifiable !== null) {
        const word = state.networkIdentifiable ? "identifiable" : "non-identifiable";
        parts.push(`network: ${word}${state.stale ? " (stale)" : ""}`);
    }
    else {
        parts.push("network: no verdict");
    }
    status.textContent = parts.join(" · ");
}
export function renderApp(state, dom, actions) {
    dom.banner.hidden = state.error === null;
    dom.banner.textContent = state.error ?? "";
    renderStatus(state, dom.status);
    renderSvg(state, dom.svg);
    renderNodeList(state, dom.nodeList, actions);
    renderEdgeList(state, dom.edgeList, actions);
}
