/** Small DOM builders; all rendering goes through these. */

import type { CanvasGraph } from "./graph.js";
import { edgeKey } from "./graph.js";
import type { FrequencyRow } from "./trials.js";
import type { MetricRow } from "./optimize.js";
import type { FieldError } from "./forms.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  node.append(...children);
  return node;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl(tag: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

const TAG_COLORS: Record<string, string> = {
  fresh_water_source: "#2d7ff9",
  wastewater_source: "#8a5a00",
  treatment: "#1a9850",
  application: "#7b3294",
  discharge: "#5a5a5a",
};

export interface GraphCallbacks {
  onSelectNode?: (id: string) => void;
  onSelectEdge?: (from: string, to: string) => void;
}

/** Redraws the whole canvas; flows render as edge labels when present. */
export function renderGraph(
  svg: SVGSVGElement,
  graph: CanvasGraph,
  cb: GraphCallbacks = {},
): void {
  svg.replaceChildren();
  const defs = svgEl("defs", {});
  const marker = svgEl("marker", {
    id: "arrow",
    viewBox: "0 0 8 8",
    refX: "7",
    refY: "4",
    markerWidth: "7",
    markerHeight: "7",
    orient: "auto-start-reverse",
  });
  marker.append(svgEl("path", { d: "M0,0 L8,4 L0,8 z", fill: "#666" }));
  defs.append(marker);
  svg.append(defs);

  for (const edge of graph.edges) {
    const a = graph.nodes.get(edge.from);
    const b = graph.nodes.get(edge.to);
    if (!a || !b) continue;
    // trim the segment so the arrowhead stops at the node circle
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const len = Math.hypot(dx, dy) || 1;
    const r = 22;
    const x1 = a.x + (dx / len) * r;
    const y1 = a.y + (dy / len) * r;
    const x2 = b.x - (dx / len) * r;
    const y2 = b.y - (dy / len) * r;
    const line = svgEl("line", {
      x1: String(x1),
      y1: String(y1),
      x2: String(x2),
      y2: String(y2),
      stroke: edge.flow ? "#1a62c9" : "#999",
      "stroke-width": edge.flow ? "2.5" : "1.5",
      "marker-end": "url(#arrow)",
    });
    line.addEventListener("click", () => cb.onSelectEdge?.(edge.from, edge.to));
    svg.append(line);
    const labels: string[] = [];
    if (edge.option) labels.push(`[${edge.option}]`);
    if (edge.flow !== undefined) labels.push(edge.flow.toFixed(3));
    if (labels.length > 0) {
      const text = svgEl("text", {
        x: String((x1 + x2) / 2),
        y: String((y1 + y2) / 2 - 6),
        "text-anchor": "middle",
        "font-size": "11",
        fill: edge.flow !== undefined ? "#1a62c9" : "#777",
      });
      text.textContent = labels.join(" ");
      svg.append(text);
    }
  }

  for (const node of graph.nodes.values()) {
    const group = svgEl("g", { cursor: "pointer" });
    const circle = svgEl("circle", {
      cx: String(node.x),
      cy: String(node.y),
      r: "20",
      fill: TAG_COLORS[node.attrs.tag] ?? "#333",
      "fill-opacity": "0.85",
    });
    const label = svgEl("text", {
      x: String(node.x),
      y: String(node.y + 34),
      "text-anchor": "middle",
      "font-size": "12",
    });
    label.textContent = node.id;
    group.append(circle, label);
    group.addEventListener("click", () => cb.onSelectNode?.(node.id));
    svg.append(group);
  }
}

export function renderMetrics(container: HTMLElement, rows: MetricRow[]): void {
  container.replaceChildren();
  if (rows.length === 0) return;
  const table = el("table", { class: "metrics" });
  for (const row of rows) {
    table.append(el("tr", {}, [el("th", {}, [row.label]), el("td", {}, [row.value])]));
  }
  container.append(table);
}

export function renderFrequencies(container: HTMLElement, rows: FrequencyRow[]): void {
  container.replaceChildren();
  if (rows.length === 0) return;
  const table = el("table", { class: "frequencies" });
  table.append(
    el("tr", {}, [el("th", {}, ["option"]), el("th", {}, ["count"]), el("th", {}, [""])]),
  );
  for (const row of rows) {
    const bar = el("div", {
      class: "bar",
      style: `width:${Math.round(row.share * 240)}px`,
      title: `${(row.share * 100).toFixed(1)}%`,
    });
    table.append(
      el("tr", {}, [
        el("td", {}, [row.option]),
        el("td", {}, [String(row.count)]),
        el("td", {}, [bar]),
      ]),
    );
  }
  container.append(table);
}

export function renderFieldErrors(container: HTMLElement, errors: FieldError[]): void {
  container.replaceChildren();
  for (const e of errors) {
    container.append(
      el("div", { class: "field-error" }, [e.field ? `${e.field}: ${e.message}` : e.message]),
    );
  }
}

export function banner(container: HTMLElement, text: string, kind = "info"): void {
  container.replaceChildren();
  if (text) container.append(el("div", { class: `banner ${kind}` }, [text]));
}
