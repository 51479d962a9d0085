/** Shared test fixtures: a small blend network in document form. */

import type { NetworkDoc } from "../src/types.js";

export function mixerDoc(): NetworkDoc {
  return {
    pollutants: [{ id: "cod" }],
    components: {
      A: { tag: "fresh_water_source", capacity: 1.0, quality: { cod: 0.0 } },
      B: { tag: "wastewater_source", supply: 0.5, quality: { cod: 100.0 } },
      R: { tag: "discharge" },
      // the even blend (cod 50) sits inside the limit, so a coarse
      // two-part mix ladder already admits the optimum
      W: { tag: "treatment", quality_max: { cod: 60.0 } },
    },
    edges: [
      { from: "A", to: "W" },
      { from: "B", to: "W" },
      { from: "W", to: "R" },
    ],
    objective: { kind: "total_flow", sense: "max", scope: ["W"] },
  };
}

/**
 * Two exclusive routes from one source; at most one may carry flow.
 * removal_rate is the fraction of inlet concentration that survives, so
 * route_a cleans hard (keeps 10%) and route_b barely cleans (keeps 50%).
 */
export function optionDoc(): NetworkDoc {
  return {
    pollutants: [{ id: "cod" }],
    components: {
      S: { tag: "wastewater_source", supply: 1.0, quality: { cod: 50.0 } },
      TA: { tag: "treatment", removal_rate: { cod: 0.1 } },
      TB: { tag: "treatment", removal_rate: { cod: 0.5 } },
      D: { tag: "discharge", quality_max: { cod: 30.0 } },
    },
    edges: [
      { from: "S", to: "TA", option: "route_a" },
      { from: "S", to: "TB", option: "route_b" },
      { from: "TA", to: "D" },
      { from: "TB", to: "D" },
    ],
    objective: { kind: "total_flow", sense: "max", scope: ["D"] },
  };
}
