import { describe, expect, it } from "vitest";

import {
  buildCampaignVM,
  CONFIG_DEFAULTS,
  parseObservationInput,
  whatIf,
} from "../src/model.js";
import { Report, SuggestionsResponse } from "../src/types.js";
import {
  FRESH_REPORT_TEXT,
  FRESH_SUGGESTIONS_TEXT,
  fromText,
  REPORT_TEXT,
  SUGGESTIONS_TEXT,
} from "./fixtures.js";

const report = () => fromText<Report>(REPORT_TEXT);
const suggestions = () => fromText<SuggestionsResponse>(SUGGESTIONS_TEXT);

describe("buildCampaignVM", () => {
  it("copies metric strings byte-for-byte from the payload", () => {
    const vm = buildCampaignVM(report(), suggestions());
    const byLabel = Object.fromEntries(vm.metrics.map((c) => [c.label, c.value]));
    // trailing zeros and exponent forms survive exactly as served
    expect(byLabel.hv).toBe("12.0");
    expect(byLabel.phv).toBe("0.6780");
    expect(byLabel.aphv).toBe("0.755");
    expect(byLabel.gd).toBe("1e-07");
    expect(byLabel.igd).toBe("0.30000000000000004");
    expect(byLabel.utilization).toBe("0.50");
    expect(vm.utilizationText).toBe("0.50");
    for (const cell of vm.metrics) {
      expect(REPORT_TEXT).toContain(`"${cell.label}":${cell.value}`);
    }
  });

  it("renders null metrics as absent, not the string null", () => {
    // first batch of a fresh campaign: hv known, ratio metrics still null
    const text =
      '{"campaign_id":"c3","created_at":"t","status":"running","mode":"live",' +
      '"iteration":0,"feature_names":["f1"],"objective_names":["y1","y2"],' +
      '"directions":["max","max"],"catalog_rows":4,"config":{},' +
      '"trace":[{"front_indices":[0],"hv":2.50,"utilization":0.25,' +
      '"phv":null,"aphv":null,"gd":null,"igd":null}],' +
      '"evaluated":[{"catalog_index":0,"values":[1.0,2.0]}],' +
      '"front":{"positions":[0],"catalog_indices":[0]},' +
      '"pending_count":0,"predictions":null}';
    const vm = buildCampaignVM(fromText<Report>(text), null);
    const byLabel = Object.fromEntries(vm.metrics.map((c) => [c.label, c.value]));
    expect(byLabel.hv).toBe("2.50");
    expect(byLabel.phv).toBeNull();
    expect(byLabel.gd).toBeNull();
    expect(vm.metrics.every((c) => c.value !== "null")).toBe(true);
  });

  it("front role comes only from the report's front positions", () => {
    const vm = buildCampaignVM(report(), suggestions());
    const front = vm.scatter.filter((p) => p.role === "front");
    // positions [0, 2] of the evaluated list -> catalog rows 4 and 3
    expect(front.map((p) => p.catalogIndex)).toEqual([4, 3]);
    expect(vm.frontCatalogIndices).toEqual([4, 3]);
    const evaluated = vm.scatter.filter((p) => p.role === "evaluated");
    expect(evaluated.map((p) => p.catalogIndex)).toEqual([1]);
  });

  it("marks unresolved pending cards in the scatter at predicted means", () => {
    const vm = buildCampaignVM(report(), suggestions());
    const pending = vm.scatter.filter((p) => p.role === "pending");
    expect(pending.map((p) => p.catalogIndex).sort()).toEqual([0, 5]);
    const row0 = pending.find((p) => p.catalogIndex === 0)!;
    expect(row0.x).toBe(180.0);
    expect(row0.labels).toEqual(["180.0", "85.0"]);
  });

  it("omits pending marks when the service has no predictions yet", () => {
    const vm = buildCampaignVM(
      fromText<Report>(FRESH_REPORT_TEXT),
      fromText<SuggestionsResponse>(FRESH_SUGGESTIONS_TEXT),
    );
    expect(vm.scatter).toEqual([]);
    expect(vm.metrics.every((c) => c.value === null)).toBe(true);
  });

  it("builds cards for unresolved suggestions with byte-exact fields", () => {
    const vm = buildCampaignVM(report(), suggestions());
    expect(vm.cards.map((c) => c.snappedIndex)).toEqual([0, 5]);
    const first = vm.cards[0];
    expect(first.features).toEqual([
      { name: "f1", value: "1.50" },
      { name: "f2", value: "2.0" },
    ]);
    expect(first.weights).toEqual(["0.250", "0.750"]);
    expect(first.acquisitionValue).toBe("0.0625");
    expect(first.predicted).toEqual([
      { name: "y1", mean: "180.0", sd: "12.50" },
      { name: "y2", mean: "85.0", sd: "3.0E+1" },
    ]);
    expect(vm.cards[1].acquisitionValue).toBe("1e-07");
  });

  it("skips resolved cards and hides predictions when absent", () => {
    const vm = buildCampaignVM(
      fromText<Report>(FRESH_REPORT_TEXT),
      fromText<SuggestionsResponse>(FRESH_SUGGESTIONS_TEXT),
    );
    // row 5 is resolved; only row 2 remains actionable
    expect(vm.cards.map((c) => c.snappedIndex)).toEqual([2]);
    expect(vm.cards[0].predicted).toBeNull();
  });

  it("carries the iteration counter as served text", () => {
    expect(buildCampaignVM(report(), null).iterationText).toBe("1");
    expect(
      buildCampaignVM(fromText<Report>(FRESH_REPORT_TEXT), null).iterationText,
    ).toBe("0");
  });

  it("exposes phv/aphv/igd traces with per-point literals", () => {
    const vm = buildCampaignVM(report(), null);
    const names = vm.traces.map((t) => t.name);
    expect(names).toEqual(["phv", "aphv", "igd"]);
    const phv = vm.traces[0];
    // the null first row is skipped; only iteration 1 has a value
    expect(phv.points).toEqual([{ iteration: 1, value: 0.678, text: "0.6780" }]);
  });
});

describe("whatIf", () => {
  it("shows observed values for evaluated rows", () => {
    const info = whatIf(report(), 4)!;
    expect(info.kind).toBe("observed");
    expect(info.lines).toEqual([
      { name: "y1", text: "212.52" },
      { name: "y2", text: "96.125" },
    ]);
  });

  it("shows mean ± sd for unevaluated rows", () => {
    const info = whatIf(report(), 0)!;
    expect(info.kind).toBe("predicted");
    expect(info.lines).toEqual([
      { name: "y1", text: "180.0 ± 12.50" },
      { name: "y2", text: "85.0 ± 3.0E+1" },
    ]);
  });

  it("returns null when the service exposes no predictions", () => {
    expect(whatIf(fromText<Report>(FRESH_REPORT_TEXT), 0)).toBeNull();
  });
});

describe("parseObservationInput", () => {
  it("accepts finite numbers with surrounding whitespace", () => {
    expect(parseObservationInput([" 212.5 ", "96"])).toEqual({
      values: [212.5, 96],
    });
  });

  it("blocks non-numeric, empty, and non-finite entries", () => {
    expect(parseObservationInput(["abc", "1"])).toEqual({
      errors: ["must be a finite number", null],
    });
    expect(parseObservationInput(["", "1"])).toEqual({
      errors: ["required", null],
    });
    expect(parseObservationInput(["Infinity", "1"])).toEqual({
      errors: ["must be a finite number", null],
    });
    expect(parseObservationInput(["NaN", "1"])).toEqual({
      errors: ["must be a finite number", null],
    });
  });
});

describe("CONFIG_DEFAULTS", () => {
  it("mirrors the engine's stock configuration", () => {
    expect(CONFIG_DEFAULTS.max_iterations).toBe(150);
    expect(CONFIG_DEFAULTS.initial_samples).toBe(10);
    expect(CONFIG_DEFAULTS.batch_size).toBe(5);
    expect(CONFIG_DEFAULTS.hv_threshold).toBe(0.97);
    expect(CONFIG_DEFAULTS.aphv_alpha + CONFIG_DEFAULTS.aphv_beta).toBe(1.0);
  });
});
