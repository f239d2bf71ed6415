/**
 * DOM rendering for the dashboard. Dumb by design: everything shown comes
 * from view models built in model.js; handlers are injected by main.js.
 */

import {
  CampaignVM,
  SuggestionCardVM,
  TracePointVM,
  WhatIfVM,
} from "./model.js";
import { CampaignHandle } from "./types.js";

export interface FieldErrors {
  [field: string]: string;
}

export interface ListViewState {
  view: "list";
  handles: CampaignHandle[];
  formErrors: FieldErrors;
  formMessage: string | null;
  busy: boolean;
}

export interface CampaignViewState {
  view: "campaign";
  vm: CampaignVM;
  whatIfLookup: (catalogIndex: number) => WhatIfVM | null;
  busy: boolean;
  message: string | null;
  /** Per-card service errors, keyed by snapped index. */
  cardErrors: Map<number, string>;
  mode: "simulation" | "live";
}

export type ViewState = ListViewState | CampaignViewState;

export interface Handlers {
  onCreate(fields: Record<string, string>): void;
  onOpenCampaign(id: string): void;
  onSubmitObservation(snappedIndex: number, inputs: string[]): void;
  onRefresh(): void;
  onBack(): void;
  onRunSimulation(): void;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

const CONFIG_FIELDS: { name: string; value: string }[] = [
  { name: "max_iterations", value: "150" },
  { name: "initial_samples", value: "10" },
  { name: "batch_size", value: "5" },
  { name: "hv_threshold", value: "0.97" },
  { name: "aphv_alpha", value: "0.3" },
  { name: "aphv_beta", value: "0.7" },
  { name: "seed", value: "0" },
];

function renderCreateForm(
  doc: Document,
  state: ListViewState,
  handlers: Handlers,
): HTMLElement {
  const form = el(doc, "form", "create-form");
  form.id = "create-form";
  form.appendChild(el(doc, "h2", undefined, "New campaign"));

  for (const field of CONFIG_FIELDS) {
    const row = el(doc, "label", "field-row", field.name + " ");
    const input = el(doc, "input");
    input.name = field.name;
    input.value = field.value;
    row.appendChild(input);
    const error = state.formErrors[field.name];
    if (error) {
      const msg = el(doc, "span", "field-error", error);
      msg.dataset.field = field.name;
      row.appendChild(msg);
    }
    form.appendChild(row);
  }

  const modeRow = el(doc, "label", "field-row", "mode ");
  const mode = el(doc, "select");
  mode.name = "mode";
  for (const value of ["live", "simulation"]) {
    const option = el(doc, "option", undefined, value);
    option.value = value;
    mode.appendChild(option);
  }
  modeRow.appendChild(mode);
  form.appendChild(modeRow);

  const catalogRow = el(doc, "label", "field-row", "catalog ");
  const catalog = el(doc, "select");
  catalog.name = "catalog_source";
  const sources: [string, string][] = [
    ["campaign", "bundled: campaign"],
    ["full", "bundled: full"],
    ["upload", "upload CSV"],
  ];
  for (const [value, label] of sources) {
    const option = el(doc, "option", undefined, label);
    option.value = value;
    catalog.appendChild(option);
  }
  catalogRow.appendChild(catalog);
  form.appendChild(catalogRow);

  const upload = el(doc, "div", "upload-fields");
  const fileInput = (name: string, label: string, accept: string, field: string) => {
    const row = el(doc, "label", "field-row", label);
    const input = el(doc, "input");
    input.type = "file";
    input.name = name;
    input.accept = accept;
    row.appendChild(input);
    const error = state.formErrors[field];
    if (error) {
      const msg = el(doc, "span", "field-error", error);
      msg.dataset.field = field;
      row.appendChild(msg);
    }
    upload.appendChild(row);
    return input;
  };
  const csvInput = fileInput(
    "catalog_csv_file", "catalog CSV ", ".csv", "catalog_csv",
  );
  const schemaInput = fileInput(
    "catalog_schema_file", "schema JSON ", ".json", "catalog_schema",
  );
  // keep the upload fields open when their errors need showing
  const uploadActive =
    "catalog_csv" in state.formErrors || "catalog_schema" in state.formErrors;
  if (uploadActive) catalog.value = "upload";
  upload.style.display = uploadActive ? "" : "none";
  catalog.addEventListener("change", () => {
    upload.style.display = catalog.value === "upload" ? "" : "none";
  });
  form.appendChild(upload);

  if (state.formMessage) {
    const banner = el(doc, "div", "form-error", state.formMessage);
    banner.id = "form-message";
    form.appendChild(banner);
  }

  const submit = el(doc, "button", undefined, "Create");
  submit.type = "submit";
  submit.disabled = state.busy;
  form.appendChild(submit);

  const readPicked = async (): Promise<Record<string, string>> => {
    const extra: Record<string, string> = {};
    const csv = csvInput.files?.[0];
    if (csv !== undefined) extra.catalog_csv = await csv.text();
    const schema = schemaInput.files?.[0];
    if (schema !== undefined) extra.catalog_schema = await schema.text();
    return extra;
  };

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const fields: Record<string, string> = {};
    form
      .querySelectorAll<HTMLInputElement | HTMLSelectElement>(
        'input:not([type="file"]), select',
      )
      .forEach((node) => {
        fields[node.name] = node.value;
      });
    if (fields.catalog_source === "upload") {
      void readPicked().then((extra) =>
        handlers.onCreate({ ...fields, ...extra }),
      );
    } else {
      handlers.onCreate(fields);
    }
  });
  return form;
}

function renderList(
  doc: Document,
  state: ListViewState,
  handlers: Handlers,
): HTMLElement {
  const root = el(doc, "div", "list-view");
  root.appendChild(el(doc, "h1", undefined, "Campaigns"));
  root.appendChild(renderCreateForm(doc, state, handlers));

  const table = el(doc, "table", "campaign-table");
  table.id = "campaign-table";
  const head = el(doc, "tr");
  for (const title of ["id", "mode", "status", "created"]) {
    head.appendChild(el(doc, "th", undefined, title));
  }
  table.appendChild(head);
  for (const handle of state.handles) {
    const row = el(doc, "tr", "campaign-row");
    row.dataset.id = handle.id;
    row.appendChild(el(doc, "td", undefined, handle.id));
    row.appendChild(el(doc, "td", undefined, handle.mode));
    row.appendChild(el(doc, "td", undefined, handle.status));
    row.appendChild(el(doc, "td", undefined, handle.created_at));
    row.addEventListener("click", () => handlers.onOpenCampaign(handle.id));
    table.appendChild(row);
  }
  root.appendChild(table);
  return root;
}

interface Scale {
  x(value: number): number;
  y(value: number): number;
}

function makeScale(
  points: { x: number; y: number }[],
  width: number,
  height: number,
  margin: number,
): Scale {
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const xMin = Math.min(...xs);
  const xMax = Math.max(...xs);
  const yMin = Math.min(...ys);
  const yMax = Math.max(...ys);
  const xSpan = xMax - xMin || 1;
  const ySpan = yMax - yMin || 1;
  return {
    x: (v) => margin + ((v - xMin) / xSpan) * (width - 2 * margin),
    y: (v) => height - margin - ((v - yMin) / ySpan) * (height - 2 * margin),
  };
}

function renderScatter(
  doc: Document,
  vm: CampaignVM,
  whatIfLookup: (catalogIndex: number) => WhatIfVM | null,
): HTMLElement {
  const wrap = el(doc, "div", "scatter-wrap");
  const title = `${vm.objectiveNames[0]} (${vm.directions[0]}) vs ` +
    `${vm.objectiveNames[1]} (${vm.directions[1]})`;
  wrap.appendChild(el(doc, "h3", undefined, title));

  const width = 420;
  const height = 320;
  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("class", "scatter");

  const tooltip = el(doc, "div", "tooltip");
  tooltip.id = "what-if";
  tooltip.style.display = "none";

  if (vm.scatter.length > 0) {
    const scale = makeScale(vm.scatter, width, height, 24);
    for (const point of vm.scatter) {
      const circle = doc.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(scale.x(point.x)));
      circle.setAttribute("cy", String(scale.y(point.y)));
      circle.setAttribute("r", point.role === "front" ? "6" : "4");
      circle.setAttribute("class", `point point-${point.role}`);
      circle.setAttribute("data-catalog-index", String(point.catalogIndex));
      circle.addEventListener("mouseenter", () => {
        const info = whatIfLookup(point.catalogIndex);
        if (info === null) {
          tooltip.style.display = "none";
          return;
        }
        tooltip.textContent = "";
        tooltip.appendChild(
          el(doc, "div", "tooltip-title", `row ${info.catalogIndex} (${info.kind})`),
        );
        for (const line of info.lines) {
          tooltip.appendChild(el(doc, "div", "tooltip-line", `${line.name}: ${line.text}`));
        }
        tooltip.style.display = "block";
      });
      circle.addEventListener("mouseleave", () => {
        tooltip.style.display = "none";
      });
      svg.appendChild(circle);
    }
  }
  wrap.appendChild(svg as unknown as HTMLElement);
  wrap.appendChild(tooltip);
  return wrap;
}

function renderTrace(
  doc: Document,
  name: string,
  points: TracePointVM[],
): HTMLElement {
  const wrap = el(doc, "div", "trace-wrap");
  wrap.appendChild(el(doc, "h4", undefined, `${name} vs iteration`));
  const width = 260;
  const height = 140;
  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(width));
  svg.setAttribute("height", String(height));
  svg.setAttribute("class", `trace trace-${name}`);
  const scale = makeScale(
    points.map((p) => ({ x: p.iteration, y: p.value })),
    width,
    height,
    14,
  );
  const line = doc.createElementNS(SVG_NS, "polyline");
  line.setAttribute(
    "points",
    points.map((p) => `${scale.x(p.iteration)},${scale.y(p.value)}`).join(" "),
  );
  line.setAttribute("class", "trace-line");
  svg.appendChild(line);
  for (const p of points) {
    const dot = doc.createElementNS(SVG_NS, "circle");
    dot.setAttribute("cx", String(scale.x(p.iteration)));
    dot.setAttribute("cy", String(scale.y(p.value)));
    dot.setAttribute("r", "2.5");
    dot.setAttribute("data-value", p.text);
    svg.appendChild(dot);
  }
  wrap.appendChild(svg as unknown as HTMLElement);
  return wrap;
}

function renderCard(
  doc: Document,
  card: SuggestionCardVM,
  vm: CampaignVM,
  state: CampaignViewState,
  handlers: Handlers,
  preserved: string[] | undefined,
): HTMLElement {
  const box = el(doc, "div", "card");
  box.dataset.snappedIndex = String(card.snappedIndex);
  box.appendChild(el(doc, "h4", undefined, `catalog row ${card.snappedIndex}`));

  const features = el(doc, "dl", "card-features");
  for (const field of card.features) {
    features.appendChild(el(doc, "dt", undefined, field.name));
    features.appendChild(el(doc, "dd", undefined, field.value));
  }
  box.appendChild(features);

  box.appendChild(
    el(doc, "div", "card-weights", `weights: ${card.weights.join(", ")}`),
  );
  box.appendChild(
    el(doc, "div", "card-acq", `acquisition: ${card.acquisitionValue}`),
  );
  if (card.predicted !== null) {
    for (const p of card.predicted) {
      box.appendChild(
        el(doc, "div", "card-predicted", `${p.name}: ${p.mean} ± ${p.sd}`),
      );
    }
  }

  const form = el(doc, "form", "observe-form");
  vm.objectiveNames.forEach((name, j) => {
    const row = el(doc, "label", "field-row", `${name} `);
    const input = el(doc, "input");
    input.name = `value-${j}`;
    input.setAttribute("inputmode", "decimal");
    if (preserved !== undefined && preserved[j] !== undefined) {
      input.value = preserved[j];
    }
    row.appendChild(input);
    form.appendChild(row);
  });
  const localError = el(doc, "div", "local-error");
  localError.style.display = "none";
  form.appendChild(localError);

  const serviceError = state.cardErrors.get(card.snappedIndex);
  if (serviceError !== undefined) {
    form.appendChild(el(doc, "div", "service-error", serviceError));
  }

  const submit = el(doc, "button", undefined, "Submit observation");
  submit.type = "submit";
  submit.disabled = state.busy;
  form.appendChild(submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const inputs = Array.from(
      form.querySelectorAll<HTMLInputElement>("input"),
    ).map((node) => node.value);
    handlers.onSubmitObservation(card.snappedIndex, inputs);
  });
  box.appendChild(form);
  return box;
}

function renderCampaign(
  doc: Document,
  state: CampaignViewState,
  handlers: Handlers,
  preservedInputs: Map<number, string[]>,
): HTMLElement {
  const vm = state.vm;
  const root = el(doc, "div", "campaign-view");

  const banner = el(doc, "div", "status-banner");
  banner.id = "status-banner";
  banner.appendChild(el(doc, "span", "banner-status", vm.statusBanner));
  const iteration = el(doc, "span", "banner-iteration", vm.iterationText);
  iteration.id = "iteration-counter";
  banner.appendChild(el(doc, "span", undefined, " · iteration "));
  banner.appendChild(iteration);
  if (vm.utilizationText !== null) {
    banner.appendChild(el(doc, "span", undefined, " · utilization "));
    banner.appendChild(el(doc, "span", "banner-utilization", vm.utilizationText));
  }
  root.appendChild(banner);

  const controls = el(doc, "div", "controls");
  const back = el(doc, "button", undefined, "Back");
  back.id = "back-button";
  back.disabled = state.busy;
  back.addEventListener("click", () => handlers.onBack());
  controls.appendChild(back);
  const refresh = el(doc, "button", undefined, "Refresh");
  refresh.id = "refresh-button";
  refresh.disabled = state.busy;
  refresh.addEventListener("click", () => handlers.onRefresh());
  controls.appendChild(refresh);
  if (state.mode === "simulation") {
    const run = el(doc, "button", undefined, "Run to completion");
    run.id = "run-button";
    run.disabled = state.busy;
    run.addEventListener("click", () => handlers.onRunSimulation());
    controls.appendChild(run);
  }
  root.appendChild(controls);

  if (state.message !== null) {
    root.appendChild(el(doc, "div", "view-message", state.message));
  }

  const metrics = el(doc, "div", "metrics");
  metrics.id = "metrics";
  for (const cell of vm.metrics) {
    const boxCell = el(doc, "div", "metric-cell");
    boxCell.appendChild(el(doc, "div", "metric-label", cell.label));
    const value = el(doc, "div", "metric-value", cell.value ?? "—");
    value.dataset.metric = cell.label;
    boxCell.appendChild(value);
    metrics.appendChild(boxCell);
  }
  root.appendChild(metrics);

  root.appendChild(renderScatter(doc, vm, state.whatIfLookup));

  const traces = el(doc, "div", "traces");
  for (const trace of vm.traces) {
    traces.appendChild(renderTrace(doc, trace.name, trace.points));
  }
  root.appendChild(traces);

  const cards = el(doc, "div", "cards");
  cards.id = "cards";
  for (const card of vm.cards) {
    cards.appendChild(
      renderCard(doc, card, vm, state, handlers, preservedInputs.get(card.snappedIndex)),
    );
  }
  root.appendChild(cards);
  return root;
}

/** Entered-but-unsubmitted observation inputs, keyed by snapped index. */
export function collectEnteredInputs(container: HTMLElement): Map<number, string[]> {
  const preserved = new Map<number, string[]>();
  container.querySelectorAll<HTMLElement>(".card").forEach((card) => {
    const index = Number(card.dataset.snappedIndex);
    const values = Array.from(
      card.querySelectorAll<HTMLInputElement>("input"),
    ).map((node) => node.value);
    if (values.some((v) => v.trim() !== "")) {
      preserved.set(index, values);
    }
  });
  return preserved;
}

/** Show a local validation error on one card without touching anything else. */
export function showLocalCardError(
  container: HTMLElement,
  snappedIndex: number,
  message: string,
): void {
  const card = container.querySelector<HTMLElement>(
    `.card[data-snapped-index="${snappedIndex}"]`,
  );
  if (card === null) return;
  const node = card.querySelector<HTMLElement>(".local-error");
  if (node === null) return;
  node.textContent = message;
  node.style.display = "block";
}

export function render(
  container: HTMLElement,
  state: ViewState,
  handlers: Handlers,
): void {
  const doc = container.ownerDocument;
  const preserved =
    state.view === "campaign" ? collectEnteredInputs(container) : new Map<number, string[]>();
  container.textContent = "";
  if (state.view === "list") {
    container.appendChild(renderList(doc, state, handlers));
  } else {
    container.appendChild(renderCampaign(doc, state, handlers, preserved));
  }
}
