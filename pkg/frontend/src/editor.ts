/**
 * Editor controller: load a stored document onto the canvas, apply form
 * edits, and save back. The server owns canonical serialization, so a
 * save round-trips byte-exactly through load and re-save.
 */

import { ApiError, Client } from "./api.js";
import {
  CanvasGraph,
  LayoutStore,
  docToGraph,
  graphToDoc,
} from "./graph.js";
import { AttributeForm, violationsToFieldErrors, type FieldError } from "./forms.js";
import type { NetworkDoc, Violation } from "./types.js";

export class NetworkEditor {
  graph = new CanvasGraph();
  networkId = "";
  /** Violations from the last rejected save, for inline rendering. */
  saveErrors: Violation[] = [];

  constructor(
    private readonly client: Client,
    private readonly layouts: LayoutStore,
  ) {}

  newNetwork(id: string): void {
    this.networkId = id;
    this.graph = new CanvasGraph();
    this.saveErrors = [];
  }

  async load(id: string): Promise<void> {
    const text = await this.client.getNetworkText(id);
    this.networkId = id;
    this.graph = docToGraph(JSON.parse(text) as NetworkDoc);
    this.graph.applyLayout(this.layouts.load(id));
    this.saveErrors = [];
  }

  /** PUTs the document; positions go to the sidecar, never the server. */
  async save(): Promise<boolean> {
    if (!this.networkId) throw new Error("no network id");
    this.layouts.save(this.networkId, this.graph.layout());
    const doc = graphToDoc(this.graph);
    try {
      await this.client.putNetwork(this.networkId, JSON.stringify(doc));
      this.saveErrors = [];
      return true;
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        this.saveErrors = err.violations;
        return false;
      }
      throw err;
    }
  }

  openForm(nodeId: string): AttributeForm {
    const node = this.graph.nodes.get(nodeId);
    if (!node) throw new Error(`no node ${nodeId}`);
    const form = new AttributeForm(node.attrs);
    form.serverErrors = violationsToFieldErrors(this.saveErrors, nodeId);
    return form;
  }

  /** Commits the form into the node; throws while blockers remain. */
  applyForm(nodeId: string, form: AttributeForm): void {
    const node = this.graph.nodes.get(nodeId);
    if (!node) throw new Error(`no node ${nodeId}`);
    node.attrs = form.commit();
  }

  fieldErrors(nodeId: string): FieldError[] {
    return violationsToFieldErrors(this.saveErrors, nodeId);
  }
}
