import type { LineageEntry } from "./types";

export interface LineageNode {
  id: string;
  kind: "base" | "cte";
  layer: number; // base tables in layer 0, CTEs by creation order
  row: number;
}

export interface LineageEdge {
  from: string;
  to: string;
}

export interface LineageGraph {
  nodes: LineageNode[];
  edges: LineageEdge[];
}

/**
 * Build the flow-diagram model purely from the service's lineage entries
 * (cte_id + parent_ids) — no client-side SQL parsing.
 */
export function buildGraph(lineage: LineageEntry[]): LineageGraph {
  const cteIds = new Set(lineage.map((entry) => entry.cte_id));
  const nodes: LineageNode[] = [];
  const edges: LineageEdge[] = [];
  const seenBases: string[] = [];
  for (const entry of lineage) {
    for (const parent of entry.parent_ids) {
      if (!cteIds.has(parent) && !seenBases.includes(parent)) {
        seenBases.push(parent);
      }
      edges.push({ from: parent, to: entry.cte_id });
    }
  }
  seenBases.forEach((base, row) => {
    nodes.push({ id: base, kind: "base", layer: 0, row });
  });
  lineage.forEach((entry, index) => {
    nodes.push({ id: entry.cte_id, kind: "cte", layer: index + 1, row: 0 });
  });
  return { nodes, edges };
}

const LAYER_WIDTH = 140;
const ROW_HEIGHT = 60;
const NODE_W = 110;
const NODE_H = 34;

function nodeCenter(node: LineageNode): { x: number; y: number } {
  return {
    x: 30 + node.layer * LAYER_WIDTH + NODE_W / 2,
    y: 20 + node.row * ROW_HEIGHT + NODE_H / 2,
  };
}

/** Render the layered left-to-right diagram as an SVG string. */
export function renderLineageSvg(
  graph: LineageGraph,
  highlightId?: string,
): string {
  const byId = new Map(graph.nodes.map((node) => [node.id, node]));
  const maxLayer = Math.max(0, ...graph.nodes.map((n) => n.layer));
  const maxRow = Math.max(0, ...graph.nodes.map((n) => n.row));
  const width = 60 + (maxLayer + 1) * LAYER_WIDTH;
  const height = 40 + (maxRow + 1) * ROW_HEIGHT;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${width} ${height}" class="lineage">`,
  ];
  for (const edge of graph.edges) {
    const from = byId.get(edge.from);
    const to = byId.get(edge.to);
    if (!from || !to) continue;
    const a = nodeCenter(from);
    const b = nodeCenter(to);
    parts.push(
      `<line x1="${a.x}" y1="${a.y}" x2="${b.x}" y2="${b.y}" class="edge"/>`,
    );
  }
  for (const node of graph.nodes) {
    const c = nodeCenter(node);
    const x = c.x - NODE_W / 2;
    const y = c.y - NODE_H / 2;
    const classes = [
      "node",
      node.kind,
      node.id === highlightId ? "highlight" : "",
    ]
      .filter(Boolean)
      .join(" ");
    const shape =
      node.kind === "base"
        ? `<rect x="${x}" y="${y}" width="${NODE_W}" height="${NODE_H}" rx="3"/>`
        : `<ellipse cx="${c.x}" cy="${c.y}" rx="${NODE_W / 2}" ry="${NODE_H / 2}"/>`;
    parts.push(
      `<g class="${classes}" data-node-id="${node.id}">${shape}` +
        `<text x="${c.x}" y="${c.y + 4}" text-anchor="middle">${node.id}</text></g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
