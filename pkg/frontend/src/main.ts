/**
 * Dashboard controller: owns state, calls the service, re-renders.
 *
 * The service base address comes from the `?service=` query parameter and
 * defaults to the page origin. Refreshes happen on navigation and after
 * mutations; there is no push transport.
 */

import { ApiClient, ApiResponse, ServiceError } from "./api.js";
import {
  FieldErrors,
  Handlers,
  render,
  showLocalCardError,
  ViewState,
} from "./dom.js";
import {
  buildCampaignVM,
  CONFIG_DEFAULTS,
  parseObservationInput,
  whatIf,
} from "./model.js";
import { CreateCampaignBody, Report, SuggestionsResponse } from "./types.js";

const INT_FIELDS = new Set(["max_iterations", "initial_samples", "batch_size", "seed"]);

export function fieldsToConfig(fields: Record<string, string>): Record<string, unknown> {
  const config: Record<string, unknown> = {};
  for (const key of Object.keys(CONFIG_DEFAULTS)) {
    if (key === "mode") continue;
    const text = fields[key];
    if (text === undefined || text.trim() === "") continue;
    config[key] = Number(text);
  }
  config.mode = fields.mode ?? "live";
  return config;
}

export function validateConfigFields(fields: Record<string, string>): FieldErrors {
  const errors: FieldErrors = {};
  for (const key of Object.keys(CONFIG_DEFAULTS)) {
    if (key === "mode") continue;
    const text = fields[key];
    if (text === undefined) continue;
    const value = Number(text.trim());
    if (text.trim() === "" || !Number.isFinite(value)) {
      errors[key] = "must be a number";
    } else if (INT_FIELDS.has(key) && !Number.isInteger(value)) {
      errors[key] = "must be an integer";
    }
  }
  return errors;
}

/**
 * Resolve the create form's catalog choice: a bundled name, or an uploaded
 * CSV with its schema JSON. Upload problems land in `errors` per field.
 */
export function catalogFromFields(
  fields: Record<string, string>,
  errors: FieldErrors,
): CreateCampaignBody["catalog"] | null {
  const source = fields.catalog_source ?? "campaign";
  if (source !== "upload") {
    return { bundled: source };
  }
  const csv = fields.catalog_csv;
  if (csv === undefined || csv.trim() === "") {
    errors.catalog_csv = "choose a catalog CSV file";
  }
  const schemaText = fields.catalog_schema;
  let schema: Record<string, unknown> | null = null;
  if (schemaText === undefined || schemaText.trim() === "") {
    errors.catalog_schema = "choose a schema JSON file";
  } else {
    try {
      schema = JSON.parse(schemaText) as Record<string, unknown>;
    } catch {
      errors.catalog_schema = "must be valid JSON";
    }
  }
  if (csv === undefined || csv.trim() === "" || schema === null) {
    return null;
  }
  return { csv, schema };
}

/** Map a service validation error onto form fields where possible. */
export function serviceDetailToFormErrors(detail: unknown): {
  fieldErrors: FieldErrors;
  message: string | null;
} {
  if (Array.isArray(detail)) {
    const fieldErrors: FieldErrors = {};
    const leftovers: string[] = [];
    for (const item of detail as { loc?: unknown[]; msg?: string }[]) {
      const loc = item.loc ?? [];
      const field = String(loc[loc.length - 1] ?? "");
      if (field && item.msg) {
        fieldErrors[field] = item.msg;
      } else if (item.msg) {
        leftovers.push(item.msg);
      }
    }
    return {
      fieldErrors,
      message: leftovers.length > 0 ? leftovers.join("; ") : null,
    };
  }
  return { fieldErrors: {}, message: String(detail) };
}

export class App {
  private state: ViewState = {
    view: "list",
    handles: [],
    formErrors: {},
    formMessage: null,
    busy: false,
  };
  private report: ApiResponse<Report> | null = null;
  private suggestions: ApiResponse<SuggestionsResponse> | null = null;
  private campaignId: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly container: HTMLElement,
  ) {}

  private readonly handlers: Handlers = {
    onCreate: (fields) => void this.create(fields),
    onOpenCampaign: (id) => void this.openCampaign(id),
    onSubmitObservation: (index, inputs) => void this.submit(index, inputs),
    onRefresh: () => void this.refreshCampaign(),
    onBack: () => void this.showList(),
    onRunSimulation: () => void this.runSimulation(),
  };

  private paint(): void {
    render(this.container, this.state, this.handlers);
  }

  private setBusy(busy: boolean): void {
    this.state = { ...this.state, busy };
    this.paint();
  }

  async showList(): Promise<void> {
    try {
      const handles = await this.api.listCampaigns();
      this.state = {
        view: "list",
        handles: handles.data,
        formErrors: {},
        formMessage: null,
        busy: false,
      };
    } catch (error) {
      this.state = {
        view: "list",
        handles: [],
        formErrors: {},
        formMessage: `service unreachable: ${String(error)}`,
        busy: false,
      };
    }
    this.campaignId = null;
    this.paint();
  }

  async create(fields: Record<string, string>): Promise<void> {
    if (this.state.view !== "list") return;
    const localErrors = validateConfigFields(fields);
    const catalog = catalogFromFields(fields, localErrors);
    if (Object.keys(localErrors).length > 0 || catalog === null) {
      this.state = { ...this.state, formErrors: localErrors, formMessage: null };
      this.paint();
      return;
    }
    this.setBusy(true);
    try {
      const handle = await this.api.createCampaign({
        config: fieldsToConfig(fields),
        catalog,
      });
      await this.openCampaign(handle.data.id);
    } catch (error) {
      const detail = error instanceof ServiceError ? error.detail : String(error);
      const { fieldErrors, message } = serviceDetailToFormErrors(detail);
      const handles = this.state.view === "list" ? this.state.handles : [];
      this.state = {
        view: "list",
        handles,
        formErrors: fieldErrors,
        formMessage: message,
        busy: false,
      };
      this.paint();
    }
  }

  async openCampaign(id: string): Promise<void> {
    this.campaignId = id;
    await this.refreshCampaign();
  }

  async refreshCampaign(message: string | null = null): Promise<void> {
    if (this.campaignId === null) return;
    const id = this.campaignId;
    try {
      this.report = await this.api.getReport(id);
      if (this.report.data.mode === "live") {
        this.suggestions = await this.api.getSuggestions(id);
      } else {
        this.suggestions = null;
      }
    } catch (error) {
      if (
        error instanceof ServiceError &&
        (error.status === 409 || error.status === 404)
      ) {
        // stopped campaign: suggestions legitimately unavailable
        this.suggestions = null;
      } else {
        this.state = {
          view: "list",
          handles: [],
          formErrors: {},
          formMessage: `failed to load campaign: ${String(error)}`,
          busy: false,
        };
        this.paint();
        return;
      }
    }
    const report = this.report!;
    this.state = {
      view: "campaign",
      vm: buildCampaignVM(report, this.suggestions),
      whatIfLookup: (catalogIndex) => whatIf(report, catalogIndex),
      busy: false,
      message,
      cardErrors: new Map(),
      mode: report.data.mode,
    };
    this.paint();
  }

  async submit(snappedIndex: number, inputs: string[]): Promise<void> {
    if (this.state.view !== "campaign") return;
    const parsed = parseObservationInput(inputs);
    if ("errors" in parsed) {
      // local validation failure: annotate in place, keep entered values
      const first = parsed.errors.find((e) => e !== null) ?? "invalid input";
      showLocalCardError(this.container, snappedIndex, first);
      return;
    }
    this.setBusy(true);
    try {
      const outcome = await this.api.postObservation(
        this.campaignId!,
        snappedIndex,
        parsed.values,
      );
      const note =
        outcome.data.report !== null
          ? `batch complete — iteration ${outcome.data.iteration}`
          : `recorded; ${outcome.data.pending_remaining} observations remaining`;
      await this.refreshCampaign(note);
    } catch (error) {
      // service rejection: surface the error on the card; render() preserves
      // all entered input values across the repaint
      const detail =
        error instanceof ServiceError ? String(error.message) : String(error);
      if (this.state.view === "campaign") {
        const cardErrors = new Map(this.state.cardErrors);
        cardErrors.set(snappedIndex, detail);
        this.state = { ...this.state, busy: false, cardErrors };
      }
      this.paint();
    }
  }

  async runSimulation(): Promise<void> {
    if (this.campaignId === null) return;
    this.setBusy(true);
    try {
      await this.api.runCampaign(this.campaignId);
      await this.refreshCampaign("simulation finished");
    } catch (error) {
      await this.refreshCampaign(`run failed: ${String(error)}`);
    }
  }
}

export function serviceBaseFromLocation(loc: Location): string {
  const params = new URLSearchParams(loc.search);
  return params.get("service") ?? loc.origin;
}

export function bootstrap(doc: Document, loc: Location): App {
  const container = doc.getElementById("app");
  if (container === null) {
    throw new Error("missing #app container");
  }
  const app = new App(new ApiClient(serviceBaseFromLocation(loc)), container);
  void app.showList();
  return app;
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  const start = () => {
    // pages without the mount point (including test runners) skip auto-start
    if (document.getElementById("app") !== null) {
      bootstrap(document, window.location);
    }
  };
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", start);
  } else {
    start();
  }
}
