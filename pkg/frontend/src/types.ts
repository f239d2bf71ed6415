/** Wire types mirroring the campaign service's JSON payloads. */

export interface CampaignHandle {
  id: string;
  created_at: string;
  config_digest: string;
  mode: "simulation" | "live";
  status: string;
}

export interface TraceRow {
  front_indices: number[];
  hv: number;
  utilization: number;
  phv: number | null;
  aphv: number | null;
  gd: number | null;
  igd: number | null;
}

export interface EvaluatedRow {
  catalog_index: number;
  values: number[];
}

export interface PredictionRow {
  catalog_index: number;
  means: number[];
  sds: number[];
  evaluated: boolean;
}

export interface Report {
  campaign_id: string;
  created_at: string;
  status: string;
  mode: "simulation" | "live";
  iteration: number;
  feature_names: string[];
  objective_names: string[];
  directions: string[];
  catalog_rows: number;
  config: Record<string, unknown>;
  trace: TraceRow[];
  evaluated: EvaluatedRow[];
  front: { positions: number[]; catalog_indices: number[] };
  pending_count: number;
  predictions: PredictionRow[] | null;
}

export interface SuggestionCard {
  raw_point: number[];
  snapped_index: number;
  weights: number[];
  acquisition_value: number;
  created_at: string;
  resolved_values: number[] | null;
  catalog_row: Record<string, number>;
  predicted: Record<string, { mean: number; sd: number }> | null;
}

export interface SuggestionsResponse {
  campaign_id: string;
  iteration: number;
  status: string;
  suggestions: SuggestionCard[];
}

export interface ObservationResponse {
  campaign_id: string;
  iteration: number;
  status: string;
  pending_remaining: number;
  report: TraceRow | null;
}

export interface CreateCampaignBody {
  config: Record<string, unknown>;
  catalog: {
    csv?: string;
    schema?: Record<string, unknown>;
    path?: string;
    bundled?: string;
  };
}
