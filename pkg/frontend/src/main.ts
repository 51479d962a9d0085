/**
 * App entry: tabbed shell around the editor, optimize, and trials panels.
 * The service origin defaults to same-origin and can be overridden with
 * ?api=http://host:port.
 */

import { Client } from "./api.js";
import { banner, el, renderFieldErrors, renderFrequencies, renderGraph, renderMetrics } from "./dom.js";
import { NetworkEditor } from "./editor.js";
import { AttributeForm, QUALITY_FIELDS, SCALAR_FIELDS } from "./forms.js";
import { LayoutStore } from "./graph.js";
import { OptimizePanel } from "./optimize.js";
import { TrialsPanel } from "./trials.js";
import { TAGS, type Tag } from "./types.js";

const apiBase =
  new URLSearchParams(location.search).get("api") ?? location.origin;
const client = new Client(apiBase);
const editor = new NetworkEditor(client, new LayoutStore(localStorage));
const optimizePanel = new OptimizePanel(client);
const trialsPanel = new TrialsPanel(client);

const root = document.getElementById("app") ?? document.body;
const status = el("div", { class: "status" });
const tabBar = el("div", { class: "tabs" });
const page = el("div", { class: "page" });
root.append(status, tabBar, page);

type TabName = "editor" | "optimize" | "trials";
let activeTab: TabName = "editor";

function note(text: string): void {
  banner(status, text);
}

function switchTab(tab: TabName): void {
  // navigation cancels any live polling loop
  optimizePanel.cancel();
  trialsPanel.cancel();
  activeTab = tab;
  render();
}

for (const tab of ["editor", "optimize", "trials"] as TabName[]) {
  const button = el("button", {}, [tab]);
  button.addEventListener("click", () => switchTab(tab));
  tabBar.append(button);
}

function render(): void {
  page.replaceChildren();
  if (activeTab === "editor") renderEditor();
  if (activeTab === "optimize") renderOptimize();
  if (activeTab === "trials") renderTrials();
}

// --- editor tab -------------------------------------------------------------

let selectedNode: string | null = null;

function renderEditor(): void {
  const controls = el("div", { class: "controls" });
  const idInput = el("input", {
    placeholder: "network id",
    value: editor.networkId,
  });
  const loadButton = el("button", {}, ["load"]);
  loadButton.addEventListener("click", () => {
    editor
      .load(idInput.value)
      .then(() => {
        selectedNode = null;
        note(`loaded ${idInput.value}`);
        render();
      })
      .catch((err) => note(String(err)));
  });
  const newButton = el("button", {}, ["new"]);
  newButton.addEventListener("click", () => {
    editor.newNetwork(idInput.value);
    selectedNode = null;
    render();
  });
  const saveButton = el("button", {}, ["save"]);
  saveButton.addEventListener("click", () => {
    editor
      .save()
      .then((ok) => {
        note(ok ? "saved" : "rejected: fix the highlighted fields");
        render();
      })
      .catch((err) => note(String(err)));
  });
  controls.append(idInput, loadButton, newButton, saveButton);

  const addControls = el("div", { class: "controls" });
  const nodeId = el("input", { placeholder: "new node id" });
  const tagSelect = el("select", {});
  for (const tag of TAGS) tagSelect.append(el("option", { value: tag }, [tag]));
  const addNode = el("button", {}, ["add node"]);
  addNode.addEventListener("click", () => {
    try {
      editor.graph.addNode(nodeId.value, tagSelect.value as Tag, 120, 120);
      render();
    } catch (err) {
      note(String(err));
    }
  });
  const fromInput = el("input", { placeholder: "from" });
  const toInput = el("input", { placeholder: "to" });
  const addEdge = el("button", {}, ["add edge"]);
  addEdge.addEventListener("click", () => {
    try {
      editor.graph.addEdge(fromInput.value, toInput.value);
      render();
    } catch (err) {
      note(String(err));
    }
  });
  addControls.append(nodeId, tagSelect, addNode, fromInput, toInput, addEdge);

  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("width", "760");
  svg.setAttribute("height", "520");
  svg.setAttribute("class", "canvas");
  renderGraph(svg, editor.graph, {
    onSelectNode: (id) => {
      selectedNode = id;
      render();
    },
    onSelectEdge: (from, to) => {
      if (confirm(`delete edge ${from}->${to}?`)) {
        editor.graph.deleteEdge(from, to);
        render();
      }
    },
  });

  page.append(controls, addControls, svg);
  if (selectedNode && editor.graph.nodes.has(selectedNode)) {
    page.append(renderNodeForm(selectedNode));
  }
}

function renderNodeForm(nodeId: string): HTMLElement {
  const form = editor.openForm(nodeId);
  const box = el("div", { class: "node-form" });
  box.append(el("h3", {}, [nodeId]));
  const errors = el("div", { class: "errors" });

  const refreshErrors = () => {
    renderFieldErrors(errors, [...form.blockers(), ...form.serverErrors]);
  };

  const tagSelect = el("select", {});
  for (const tag of TAGS) {
    const option = el("option", { value: tag }, [tag]);
    if (tag === form.tag) option.setAttribute("selected", "");
    tagSelect.append(option);
  }
  tagSelect.addEventListener("change", () => form.setTag(tagSelect.value as Tag));
  box.append(el("label", {}, ["tag ", tagSelect]));

  for (const field of SCALAR_FIELDS) {
    const input = el("input", {
      type: "number",
      step: "any",
      value: form.getScalar(field)?.toString() ?? "",
    });
    input.addEventListener("change", () => {
      form.setScalar(field, input.value === "" ? undefined : Number(input.value));
      refreshErrors();
    });
    box.append(el("label", {}, [`${field} `, input]));
  }

  for (const field of QUALITY_FIELDS) {
    const row = el("div", { class: "quality-row" }, [`${field}: `]);
    for (const pollutant of editor.graph.pollutants) {
      const input = el("input", {
        type: "number",
        step: "any",
        placeholder: pollutant.id,
        value: form.getQuality(field, pollutant.id)?.toString() ?? "",
      });
      input.addEventListener("change", () => {
        form.setQuality(
          field,
          pollutant.id,
          input.value === "" ? undefined : Number(input.value),
        );
        refreshErrors();
      });
      row.append(el("label", {}, [`${pollutant.id} `, input]));
    }
    box.append(row);
  }

  const apply = el("button", {}, ["apply"]);
  apply.addEventListener("click", () => {
    try {
      editor.applyForm(nodeId, form);
      note(`updated ${nodeId}`);
      render();
    } catch (err) {
      note(String(err));
      refreshErrors();
    }
  });
  const remove = el("button", {}, ["delete node"]);
  remove.addEventListener("click", () => {
    editor.graph.deleteNode(nodeId);
    selectedNode = null;
    render();
  });
  box.append(apply, remove, errors);
  refreshErrors();
  return box;
}

// --- optimize tab -----------------------------------------------------------

function renderOptimize(): void {
  const controls = el("div", { class: "controls" });
  const partsInput = el("input", {
    type: "number",
    value: String(optimizePanel.config.parts),
  });
  partsInput.addEventListener("change", () => {
    optimizePanel.config.parts = Number(partsInput.value);
  });
  const senseSelect = el("select", {});
  for (const sense of ["max", "min"]) senseSelect.append(el("option", {}, [sense]));
  senseSelect.addEventListener("change", () =>
    optimizePanel.setSense(senseSelect.value as "min" | "max"),
  );
  const modeSelect = el("select", {});
  for (const mode of ["exclusive", "all"]) modeSelect.append(el("option", {}, [mode]));
  modeSelect.addEventListener("change", () => {
    optimizePanel.config.mode = modeSelect.value as "exclusive" | "all";
  });
  const run = el("button", {}, ["Optimize"]);
  run.addEventListener("click", () => {
    if (!optimizePanel.canLaunch()) return;
    run.setAttribute("disabled", "");
    optimizePanel.launch(editor.networkId).finally(() => {
      run.removeAttribute("disabled");
      editor.graph.setFlows(optimizePanel.flows);
      render();
    });
    render();
  });
  const back = el("button", {}, ["Back to configuration menu"]);
  back.addEventListener("click", () => {
    optimizePanel.reset();
    editor.graph.clearFlows();
    render();
  });
  controls.append("parts ", partsInput, " sense ", senseSelect, " mode ", modeSelect, run, back);

  const messages = el("div", {});
  if (optimizePanel.phase === "running") banner(messages, "running...");
  if (optimizePanel.banner) banner(messages, optimizePanel.banner, "warn");
  if (optimizePanel.phase === "failed") {
    banner(messages, optimizePanel.failureDetail, "error");
  }

  const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  svg.setAttribute("width", "760");
  svg.setAttribute("height", "520");
  svg.setAttribute("class", "canvas");
  renderGraph(svg, editor.graph);

  const metrics = el("div", {});
  renderMetrics(metrics, optimizePanel.metrics());
  page.append(controls, messages, svg, metrics);
}

// --- trials tab -------------------------------------------------------------

function renderTrials(): void {
  const controls = el("div", { class: "controls" });
  const trialsInput = el("input", { type: "number", value: String(trialsPanel.trials) });
  trialsInput.addEventListener("change", () => {
    trialsPanel.trials = Number(trialsInput.value);
  });
  const seedInput = el("input", { type: "number", value: String(trialsPanel.seed) });
  seedInput.addEventListener("change", () => {
    trialsPanel.seed = Number(seedInput.value);
  });
  const modeSelect = el("select", {});
  for (const mode of ["exclusive", "all"]) modeSelect.append(el("option", {}, [mode]));
  modeSelect.addEventListener("change", () => {
    trialsPanel.mode = modeSelect.value as "exclusive" | "all";
  });
  const run = el("button", {}, ["Run Trials"]);
  run.addEventListener("click", () => {
    if (trialsPanel.phase === "running") return;
    trialsPanel.launch(editor.networkId).finally(() => render());
    render();
  });
  controls.append("trials ", trialsInput, " seed ", seedInput, " compare ", modeSelect, run);

  const paramBox = el("div", { class: "controls" });
  const target = el("input", { placeholder: "component" });
  const field = el("input", { placeholder: "field" });
  const pollutant = el("input", { placeholder: "pollutant (optional)" });
  const low = el("input", { type: "number", placeholder: "low" });
  const high = el("input", { type: "number", placeholder: "high" });
  const dist = el("select", {});
  for (const d of ["uniform", "normal"]) dist.append(el("option", {}, [d]));
  const addParam = el("button", {}, ["add parameter"]);
  addParam.addEventListener("click", () => {
    try {
      trialsPanel.addParameter({
        target: target.value,
        field: field.value,
        pollutant: pollutant.value || undefined,
        low: Number(low.value),
        high: Number(high.value),
        distribution: dist.value as "uniform" | "normal",
      });
      render();
    } catch (err) {
      note(String(err));
    }
  });
  paramBox.append(target, field, pollutant, low, high, dist, addParam);

  const paramList = el("ul", {});
  trialsPanel.parameters.forEach((p, i) => {
    const item = el("li", {}, [
      `${p.target}.${p.field}${p.pollutant ? `[${p.pollutant}]` : ""} in [${p.low}, ${p.high}] ${p.distribution} `,
    ]);
    const drop = el("button", {}, ["x"]);
    drop.addEventListener("click", () => {
      trialsPanel.removeParameter(i);
      render();
    });
    item.append(drop);
    paramList.append(item);
  });

  const messages = el("div", {});
  if (trialsPanel.phase === "running") {
    banner(messages, `study ${trialsPanel.progress}...`);
  }
  if (trialsPanel.phase === "failed") banner(messages, trialsPanel.failureDetail, "error");

  const results = el("div", {});
  renderFrequencies(results, trialsPanel.frequencyRows());
  if (trialsPanel.report) {
    const means = Object.entries(trialsPanel.report.kpi_means)
      .map(([k, v]) => `${k}=${v.toFixed(3)}`)
      .join("  ");
    results.append(el("div", { class: "kpis" }, [means]));
  }
  page.append(controls, paramBox, paramList, messages, results);
}

render();
