/**
 * Thin HTTP client for the campaign service.
 *
 * Every response keeps both the parsed body and the raw-literal map of the
 * response text, so the UI can show service numbers byte-for-byte instead of
 * re-formatting them.
 */

import { extractRawLiterals, RawMap } from "./rawjson.js";
import {
  CampaignHandle,
  CreateCampaignBody,
  ObservationResponse,
  Report,
  SuggestionsResponse,
} from "./types.js";

export interface ApiResponse<T> {
  data: T;
  raw: RawMap;
  text: string;
}

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : JSON.stringify(detail));
    this.name = "ServiceError";
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly base: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl: string, fetchFn?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn ?? ((url, init) => globalThis.fetch(url, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<ApiResponse<T>> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.base + path, init);
    const text = await response.text();
    if (!response.ok) {
      let detail: unknown = text;
      try {
        detail = (JSON.parse(text) as { detail?: unknown }).detail ?? text;
      } catch {
        // non-JSON error body; keep the raw text
      }
      throw new ServiceError(response.status, detail);
    }
    return { data: JSON.parse(text) as T, raw: extractRawLiterals(text), text };
  }

  listCampaigns(): Promise<ApiResponse<CampaignHandle[]>> {
    return this.request("GET", "/campaigns");
  }

  createCampaign(body: CreateCampaignBody): Promise<ApiResponse<CampaignHandle>> {
    return this.request("POST", "/campaigns", body);
  }

  getCampaign(id: string): Promise<ApiResponse<CampaignHandle>> {
    return this.request("GET", `/campaigns/${id}`);
  }

  getSuggestions(id: string): Promise<ApiResponse<SuggestionsResponse>> {
    return this.request("GET", `/campaigns/${id}/suggestions`);
  }

  postObservation(
    id: string,
    snappedIndex: number,
    values: number[],
  ): Promise<ApiResponse<ObservationResponse>> {
    return this.request("POST", `/campaigns/${id}/observations`, {
      snapped_index: snappedIndex,
      values,
    });
  }

  getReport(id: string): Promise<ApiResponse<Report>> {
    return this.request("GET", `/campaigns/${id}/report`);
  }

  runCampaign(id: string): Promise<ApiResponse<Record<string, unknown>>> {
    return this.request("POST", `/campaigns/${id}/run`);
  }
}
