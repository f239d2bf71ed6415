/**
 * View models for the dashboard.
 *
 * Display strings are the service's own byte representations (via the raw
 * literal map); the client never recomputes a metric, a front membership, or
 * a prediction. Parsed numbers are used only for plot geometry.
 */

import { ApiResponse } from "./api.js";
import { rawAt, RawMap } from "./rawjson.js";
import { Report, SuggestionsResponse } from "./types.js";

export interface MetricCellVM {
  label: string;
  /** Byte-exact literal from the service payload, or null when absent. */
  value: string | null;
}

export type PointRole = "evaluated" | "front" | "pending";

export interface ScatterPointVM {
  catalogIndex: number;
  x: number;
  y: number;
  role: PointRole;
  /** Display strings for the tooltip, byte-exact. */
  labels: string[];
}

export interface TracePointVM {
  iteration: number;
  value: number;
  /** Byte-exact literal for hover/label use. */
  text: string;
}

export interface CardFieldVM {
  name: string;
  value: string;
}

export interface SuggestionCardVM {
  snappedIndex: number;
  features: CardFieldVM[];
  weights: string[];
  acquisitionValue: string;
  predicted: { name: string; mean: string; sd: string }[] | null;
}

export interface WhatIfVM {
  catalogIndex: number;
  kind: "observed" | "predicted";
  /** One line per objective: observed value, or mean ± sd. */
  lines: { name: string; text: string }[];
}

export interface CampaignVM {
  id: string;
  statusBanner: string;
  iterationText: string;
  utilizationText: string | null;
  objectiveNames: string[];
  directions: string[];
  metrics: MetricCellVM[];
  scatter: ScatterPointVM[];
  frontCatalogIndices: number[];
  traces: { name: string; points: TracePointVM[] }[];
  cards: SuggestionCardVM[];
  pendingCount: number;
}

function lastTracePath(report: Report, field: string): string {
  return `trace.${report.trace.length - 1}.${field}`;
}

function tracePoints(report: Report, raw: RawMap, field: keyof Report["trace"][number]): TracePointVM[] {
  const points: TracePointVM[] = [];
  report.trace.forEach((row, i) => {
    const value = row[field];
    if (typeof value === "number") {
      points.push({
        iteration: i,
        value,
        text: rawAt(raw, `trace.${i}.${field}`) ?? String(value),
      });
    }
  });
  return points;
}

export function buildCampaignVM(
  report: ApiResponse<Report>,
  suggestions: ApiResponse<SuggestionsResponse> | null,
): CampaignVM {
  const data = report.data;
  const raw = report.raw;
  const hasTrace = data.trace.length > 0;

  const metricFields = ["hv", "phv", "aphv", "gd", "igd", "utilization"];
  const metrics: MetricCellVM[] = metricFields.map((field) => ({
    label: field,
    value: hasTrace ? rawAt(raw, lastTracePath(data, field)) : null,
  }));
  const nullLiteral = (cell: MetricCellVM) =>
    cell.value === "null" ? { ...cell, value: null } : cell;

  const frontPositions = new Set(data.front.positions);
  const scatter: ScatterPointVM[] = data.evaluated.map((row, pos) => ({
    catalogIndex: row.catalog_index,
    x: row.values[0],
    y: row.values[1],
    role: frontPositions.has(pos) ? "front" : "evaluated",
    labels: row.values.map(
      (v, j) => rawAt(raw, `evaluated.${pos}.values.${j}`) ?? String(v),
    ),
  }));

  if (suggestions !== null && data.predictions !== null) {
    const evaluatedSet = new Set(data.evaluated.map((r) => r.catalog_index));
    for (const card of suggestions.data.suggestions) {
      if (card.resolved_values !== null) continue;
      if (evaluatedSet.has(card.snapped_index)) continue;
      const prediction = data.predictions[card.snapped_index];
      scatter.push({
        catalogIndex: card.snapped_index,
        x: prediction.means[0],
        y: prediction.means[1],
        role: "pending",
        labels: prediction.means.map(
          (v, j) =>
            rawAt(raw, `predictions.${card.snapped_index}.means.${j}`) ?? String(v),
        ),
      });
    }
  }

  const traceNames: (keyof Report["trace"][number])[] = ["phv", "aphv", "igd"];
  const traces = traceNames
    .map((name) => ({ name: String(name), points: tracePoints(data, raw, name) }))
    .filter((t) => t.points.length > 0);

  const cards: SuggestionCardVM[] = [];
  if (suggestions !== null) {
    const sraw = suggestions.raw;
    suggestions.data.suggestions.forEach((card, i) => {
      if (card.resolved_values !== null) return;
      cards.push({
        snappedIndex: card.snapped_index,
        features: Object.keys(card.catalog_row).map((name) => ({
          name,
          value:
            rawAt(sraw, `suggestions.${i}.catalog_row.${name}`) ??
            String(card.catalog_row[name]),
        })),
        weights: card.weights.map(
          (w, j) => rawAt(sraw, `suggestions.${i}.weights.${j}`) ?? String(w),
        ),
        acquisitionValue:
          rawAt(sraw, `suggestions.${i}.acquisition_value`) ??
          String(card.acquisition_value),
        predicted:
          card.predicted === null
            ? null
            : Object.keys(card.predicted).map((name) => ({
                name,
                mean:
                  rawAt(sraw, `suggestions.${i}.predicted.${name}.mean`) ??
                  String(card.predicted![name].mean),
                sd:
                  rawAt(sraw, `suggestions.${i}.predicted.${name}.sd`) ??
                  String(card.predicted![name].sd),
              })),
      });
    });
  }

  return {
    id: data.campaign_id,
    statusBanner: `${data.mode} campaign — ${data.status}`,
    iterationText: rawAt(raw, "iteration") ?? String(data.iteration),
    utilizationText: hasTrace ? rawAt(raw, lastTracePath(data, "utilization")) : null,
    objectiveNames: data.objective_names,
    directions: data.directions,
    metrics: metrics.map(nullLiteral),
    scatter,
    frontCatalogIndices: data.front.catalog_indices,
    traces,
    cards,
    pendingCount: data.pending_count,
  };
}

/**
 * What-if lookup for a catalog row: observed values when evaluated,
 * otherwise the surrogate prediction; null when the service exposes neither.
 */
export function whatIf(
  report: ApiResponse<Report>,
  catalogIndex: number,
): WhatIfVM | null {
  const data = report.data;
  const raw = report.raw;
  const pos = data.evaluated.findIndex((r) => r.catalog_index === catalogIndex);
  if (pos >= 0) {
    return {
      catalogIndex,
      kind: "observed",
      lines: data.objective_names.map((name, j) => ({
        name,
        text:
          rawAt(raw, `evaluated.${pos}.values.${j}`) ??
          String(data.evaluated[pos].values[j]),
      })),
    };
  }
  if (data.predictions === null) {
    return null;
  }
  const prediction = data.predictions[catalogIndex];
  if (prediction === undefined) {
    return null;
  }
  return {
    catalogIndex,
    kind: "predicted",
    lines: data.objective_names.map((name, j) => ({
      name,
      text:
        `${rawAt(raw, `predictions.${catalogIndex}.means.${j}`) ?? String(prediction.means[j])}` +
        ` ± ${rawAt(raw, `predictions.${catalogIndex}.sds.${j}`) ?? String(prediction.sds[j])}`,
    })),
  };
}

/**
 * Local validation of one observation form: every objective needs a finite
 * number. Returns the parsed values or a per-field error map; never submits
 * bad input to the service.
 */
export function parseObservationInput(
  inputs: string[],
): { values: number[] } | { errors: (string | null)[] } {
  const errors: (string | null)[] = inputs.map((text) => {
    const trimmed = text.trim();
    if (trimmed === "") return "required";
    const value = Number(trimmed);
    if (!Number.isFinite(value)) return "must be a finite number";
    return null;
  });
  if (errors.some((e) => e !== null)) {
    return { errors };
  }
  return { values: inputs.map((text) => Number(text.trim())) };
}

/** Default create-form values: the engine's stock configuration. */
export const CONFIG_DEFAULTS = {
  max_iterations: 150,
  initial_samples: 10,
  batch_size: 5,
  hv_threshold: 0.97,
  aphv_alpha: 0.3,
  aphv_beta: 0.7,
  mode: "live",
  seed: 0,
} as const;
