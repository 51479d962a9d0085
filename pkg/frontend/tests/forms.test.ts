import { describe, expect, it } from "vitest";

import { AttributeForm, violationsToFieldErrors } from "../src/forms.js";
import type { Violation } from "../src/types.js";

describe("attribute form", () => {
  it("edits scalars and quality tables on a draft", () => {
    const form = new AttributeForm({ tag: "treatment" });
    form.setScalar("capacity", 10);
    form.setQuality("removal_rate", "cod", 0.9);
    const out = form.commit();
    expect(out).toEqual({
      tag: "treatment",
      capacity: 10,
      removal_rate: { cod: 0.9 },
    });
  });

  it("clearing the last pollutant drops the table entirely", () => {
    const form = new AttributeForm({ tag: "treatment", removal_rate: { cod: 0.9 } });
    form.setQuality("removal_rate", "cod", undefined);
    expect(form.commit()).toEqual({ tag: "treatment" });
  });

  it("blocks outflow_rate together with outflow_fixed", () => {
    const form = new AttributeForm({ tag: "treatment", outflow_rate: 0.8 });
    expect(form.blockers()).toEqual([]);
    form.setScalar("outflow_fixed", 5);
    const fields = form.blockers().map((b) => b.field);
    expect(fields).toContain("outflow_rate");
    expect(fields).toContain("outflow_fixed");
    expect(() => form.commit()).toThrow(/mutually exclusive/);
    // dropping one side unblocks the save
    form.setScalar("outflow_rate", undefined);
    expect(form.blockers()).toEqual([]);
    expect(form.commit().outflow_fixed).toBe(5);
  });

  it("blocks removal_rate together with exit_quality per pollutant", () => {
    const form = new AttributeForm({ tag: "treatment", removal_rate: { cod: 0.9 } });
    form.setQuality("exit_quality", "tss", 2.0);
    expect(form.blockers()).toEqual([]);
    form.setQuality("exit_quality", "cod", 1.0);
    const fields = form.blockers().map((b) => b.field);
    expect(fields).toContain("removal_rate.cod");
    expect(fields).toContain("exit_quality.cod");
    expect(() => form.commit()).toThrow(/both set/);
  });

  it("rejects negative and non-finite values", () => {
    const form = new AttributeForm({ tag: "application" });
    form.setScalar("demand", -1);
    form.setQuality("quality_max", "cod", Number.NaN);
    const fields = form.blockers().map((b) => b.field);
    expect(fields).toContain("demand");
    expect(fields).toContain("quality_max.cod");
  });

  it("commit returns a copy, not the draft", () => {
    const form = new AttributeForm({ tag: "treatment" });
    form.setScalar("capacity", 1);
    const out = form.commit();
    form.setScalar("capacity", 2);
    expect(out.capacity).toBe(1);
  });
});

describe("server violation routing", () => {
  const violations: Violation[] = [
    {
      code: "flow-mode-conflict",
      element: "T1",
      message: "outflow_rate and outflow_fixed are mutually exclusive",
    },
    { code: "bad-value", element: "T1", message: "supply must be a finite number >= 0" },
    { code: "bad-value", element: "other", message: "demand must be a finite number >= 0" },
    { code: "cycle", element: "T1", message: "component sits on a directed cycle" },
  ];

  it("routes messages onto the fields they name, for this node only", () => {
    const errors = violationsToFieldErrors(violations, "T1");
    const byField = new Map(errors.map((e) => [e.field, e.message]));
    expect(byField.get("outflow_rate")).toMatch(/mutually exclusive/);
    expect(byField.get("outflow_fixed")).toMatch(/mutually exclusive/);
    expect(byField.get("supply")).toMatch(/finite/);
    // no field named: reported as a node-level error
    expect(byField.get("")).toMatch(/cycle/);
    expect(errors.some((e) => e.message.includes("demand"))).toBe(false);
  });

  it("quality does not match inside exit_quality", () => {
    const errors = violationsToFieldErrors(
      [
        {
          code: "quality-mode-conflict",
          element: "T1",
          message: "removal_rate and exit_quality both set for 'cod'",
        },
      ],
      "T1",
    );
    const fields = errors.map((e) => e.field);
    expect(fields).toContain("removal_rate");
    expect(fields).toContain("exit_quality");
    expect(fields).not.toContain("quality");
  });
});
