/**
 * Attribute form model for one node. Edits build a draft component;
 * conflicting attribute pairs are blocked in the form before any save.
 */

import type { ComponentDoc, Tag, Violation } from "./types.js";

export const SCALAR_FIELDS = [
  "capacity",
  "supply",
  "demand",
  "outflow_rate",
  "outflow_fixed",
  "fixed_cost",
  "variable_cost",
  "fixed_energy",
  "variable_energy",
] as const;

export const QUALITY_FIELDS = [
  "removal_rate",
  "exit_quality",
  "quality",
  "quality_min",
  "quality_max",
] as const;

export type ScalarField = (typeof SCALAR_FIELDS)[number];
export type QualityField = (typeof QUALITY_FIELDS)[number];

/** One of each pair may be set: constant-fraction vs constant-amount. */
export const FLOW_PAIR: [ScalarField, ScalarField] = ["outflow_rate", "outflow_fixed"];
export const QUALITY_PAIR: [QualityField, QualityField] = ["removal_rate", "exit_quality"];

export interface FieldError {
  field: string;
  message: string;
}

export class AttributeForm {
  private draft: ComponentDoc;
  /** Server-reported problems attached after a rejected save. */
  serverErrors: FieldError[] = [];

  constructor(attrs: ComponentDoc) {
    this.draft = structuredClone(attrs);
  }

  get tag(): Tag {
    return this.draft.tag;
  }

  setTag(tag: Tag): void {
    this.draft.tag = tag;
  }

  getScalar(field: ScalarField): number | undefined {
    return this.draft[field];
  }

  setScalar(field: ScalarField, value: number | undefined): void {
    if (value === undefined) {
      delete this.draft[field];
    } else {
      this.draft[field] = value;
    }
  }

  getQuality(field: QualityField, pollutant: string): number | undefined {
    return this.draft[field]?.[pollutant];
  }

  setQuality(field: QualityField, pollutant: string, value: number | undefined): void {
    const table = this.draft[field] ?? {};
    if (value === undefined) {
      delete table[pollutant];
    } else {
      table[pollutant] = value;
    }
    if (Object.keys(table).length === 0) {
      delete this.draft[field];
    } else {
      this.draft[field] = table;
    }
  }

  /**
   * Everything that blocks a save. Both members of a conflicting pair are
   * flagged so the form can highlight each offending input.
   */
  blockers(): FieldError[] {
    const out: FieldError[] = [];
    const [fr, ff] = FLOW_PAIR;
    if (this.draft[fr] !== undefined && this.draft[ff] !== undefined) {
      const message = `${fr} and ${ff} are mutually exclusive`;
      out.push({ field: fr, message }, { field: ff, message });
    }
    const [qr, qf] = QUALITY_PAIR;
    const both = Object.keys(this.draft[qr] ?? {}).filter(
      (pid) => this.draft[qf]?.[pid] !== undefined,
    );
    for (const pid of both) {
      const message = `${qr} and ${qf} both set for ${pid}`;
      out.push({ field: `${qr}.${pid}`, message }, { field: `${qf}.${pid}`, message });
    }
    for (const field of SCALAR_FIELDS) {
      const v = this.draft[field];
      if (v !== undefined && (!Number.isFinite(v) || v < 0)) {
        out.push({ field, message: `${field} must be a finite number >= 0` });
      }
    }
    for (const field of QUALITY_FIELDS) {
      for (const [pid, v] of Object.entries(this.draft[field] ?? {})) {
        if (!Number.isFinite(v) || v < 0) {
          out.push({
            field: `${field}.${pid}`,
            message: `${field}[${pid}] must be a finite number >= 0`,
          });
        }
      }
    }
    return out;
  }

  /** The committed attributes; throws if blockers remain. */
  commit(): ComponentDoc {
    const blockers = this.blockers();
    if (blockers.length > 0) {
      throw new Error(blockers.map((b) => b.message).join("; "));
    }
    return structuredClone(this.draft);
  }
}

/**
 * Routes a 422 validation report onto form fields: a violation belongs to
 * the field its message names, or to the whole node when none matches.
 */
export function violationsToFieldErrors(
  violations: Violation[],
  nodeId: string,
): FieldError[] {
  const fields: string[] = [...SCALAR_FIELDS, ...QUALITY_FIELDS];
  const out: FieldError[] = [];
  for (const v of violations) {
    if (v.element !== nodeId) continue;
    // whole-word match: "quality" must not hit inside "exit_quality"
    const named = fields.filter((f) => new RegExp(`\\b${f}\\b`).test(v.message));
    if (named.length === 0) {
      out.push({ field: "", message: v.message });
    } else {
      for (const field of named) out.push({ field, message: v.message });
    }
  }
  return out;
}
