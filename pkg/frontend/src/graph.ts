/**
 * Editable canvas model. Node attributes live in plain component objects
 * so a load-edit-save cycle reproduces the stored document; positions stay
 * in a separate layout sidecar and never enter the network document.
 */

import type {
  ComponentDoc,
  EdgeDoc,
  NetworkDoc,
  ObjectiveDoc,
  PollutantDoc,
  Tag,
} from "./types.js";

export interface CanvasNode {
  id: string;
  x: number;
  y: number;
  attrs: ComponentDoc;
}

export interface CanvasEdge {
  from: string;
  to: string;
  capacity?: number;
  option?: string;
  /** Filled from the last solution; display only. */
  flow?: number;
}

export interface Layout {
  [nodeId: string]: { x: number; y: number };
}

export const edgeKey = (from: string, to: string): string => `${from}->${to}`;

export class CanvasGraph {
  nodes = new Map<string, CanvasNode>();
  edges: CanvasEdge[] = [];
  pollutants: PollutantDoc[] = [];
  objective?: ObjectiveDoc;

  addNode(id: string, tag: Tag, x = 0, y = 0): CanvasNode {
    if (!id) throw new Error("node id must not be empty");
    if (this.nodes.has(id)) throw new Error(`node ${id} already exists`);
    const node: CanvasNode = { id, x, y, attrs: { tag } };
    this.nodes.set(id, node);
    return node;
  }

  moveNode(id: string, x: number, y: number): void {
    const node = this.mustNode(id);
    node.x = x;
    node.y = y;
  }

  /** Removes the node and every incident edge. */
  deleteNode(id: string): void {
    this.mustNode(id);
    this.nodes.delete(id);
    this.edges = this.edges.filter((e) => e.from !== id && e.to !== id);
  }

  addEdge(from: string, to: string): CanvasEdge {
    this.mustNode(from);
    this.mustNode(to);
    if (from === to) throw new Error("self-loops are not allowed");
    if (this.findEdge(from, to)) throw new Error(`edge ${edgeKey(from, to)} already exists`);
    const edge: CanvasEdge = { from, to };
    this.edges.push(edge);
    return edge;
  }

  deleteEdge(from: string, to: string): void {
    const n = this.edges.length;
    this.edges = this.edges.filter((e) => e.from !== from || e.to !== to);
    if (this.edges.length === n) throw new Error(`no edge ${edgeKey(from, to)}`);
  }

  findEdge(from: string, to: string): CanvasEdge | undefined {
    return this.edges.find((e) => e.from === from && e.to === to);
  }

  setFlows(flows: Record<string, number>): void {
    for (const e of this.edges) e.flow = flows[edgeKey(e.from, e.to)];
  }

  clearFlows(): void {
    for (const e of this.edges) delete e.flow;
  }

  layout(): Layout {
    const out: Layout = {};
    for (const node of this.nodes.values()) out[node.id] = { x: node.x, y: node.y };
    return out;
  }

  applyLayout(layout: Layout): void {
    for (const node of this.nodes.values()) {
      const pos = layout[node.id];
      if (pos) {
        node.x = pos.x;
        node.y = pos.y;
      }
    }
  }

  private mustNode(id: string): CanvasNode {
    const node = this.nodes.get(id);
    if (!node) throw new Error(`no node ${id}`);
    return node;
  }
}

/** Loads a document; positions default to a grid until a layout is applied. */
export function docToGraph(doc: NetworkDoc): CanvasGraph {
  const graph = new CanvasGraph();
  graph.pollutants = doc.pollutants.map((p) => ({ ...p }));
  if (doc.objective) {
    graph.objective = { ...doc.objective, scope: [...doc.objective.scope] };
  }
  let i = 0;
  for (const [id, comp] of Object.entries(doc.components)) {
    const node = graph.addNode(id, comp.tag, 80 + (i % 5) * 140, 80 + Math.floor(i / 5) * 120);
    node.attrs = cloneComponent(comp);
    i += 1;
  }
  for (const e of doc.edges) {
    const edge = graph.addEdge(e.from, e.to);
    if (e.capacity !== undefined) edge.capacity = e.capacity;
    if (e.option !== undefined) edge.option = e.option;
  }
  return graph;
}

/** Emits the document only; flow annotations and positions are dropped. */
export function graphToDoc(graph: CanvasGraph): NetworkDoc {
  const components: Record<string, ComponentDoc> = {};
  for (const [id, node] of graph.nodes) components[id] = cloneComponent(node.attrs);
  const edges: EdgeDoc[] = graph.edges.map((e) => {
    const out: EdgeDoc = { from: e.from, to: e.to };
    if (e.capacity !== undefined) out.capacity = e.capacity;
    if (e.option !== undefined) out.option = e.option;
    return out;
  });
  const doc: NetworkDoc = {
    pollutants: graph.pollutants.map((p) => ({ ...p })),
    components,
    edges,
  };
  if (graph.objective) {
    doc.objective = { ...graph.objective, scope: [...graph.objective.scope] };
  }
  return doc;
}

function cloneComponent(comp: ComponentDoc): ComponentDoc {
  const out: ComponentDoc = { tag: comp.tag };
  for (const [key, value] of Object.entries(comp)) {
    if (key === "tag" || value === undefined) continue;
    (out as unknown as Record<string, unknown>)[key] =
      typeof value === "object" && value !== null ? { ...(value as object) } : value;
  }
  return out;
}

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

/** Positions persist client-side per network id, apart from the document. */
export class LayoutStore {
  constructor(private readonly store: KeyValueStore) {}

  load(networkId: string): Layout {
    const raw = this.store.getItem(`waternet.layout.${networkId}`);
    if (!raw) return {};
    try {
      return JSON.parse(raw) as Layout;
    } catch {
      return {};
    }
  }

  save(networkId: string, layout: Layout): void {
    this.store.setItem(`waternet.layout.${networkId}`, JSON.stringify(layout));
  }
}
