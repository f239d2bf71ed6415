import { ApiResponse } from "../src/api.js";
import { extractRawLiterals } from "../src/rawjson.js";

/** Build an ApiResponse the way the client does, from raw JSON text. */
export function fromText<T>(text: string): ApiResponse<T> {
  return { data: JSON.parse(text) as T, raw: extractRawLiterals(text), text };
}

/**
 * A live campaign report after one completed batch. Number literals are
 * deliberately awkward (trailing zeros, 1e-07) so byte-preservation is
 * actually exercised.
 */
export const REPORT_TEXT =
  '{"campaign_id":"c1","created_at":"2026-08-14T00:00:00+00:00",' +
  '"status":"running","mode":"live","iteration":1,' +
  '"feature_names":["f1","f2"],"objective_names":["y1","y2"],' +
  '"directions":["max","max"],"catalog_rows":6,"config":{"batch_size":2},' +
  '"trace":[' +
  '{"front_indices":[0],"hv":10.50,"utilization":0.25,"phv":null,"aphv":null,"gd":null,"igd":null},' +
  '{"front_indices":[0,2],"hv":12.0,"utilization":0.50,"phv":0.6780,"aphv":0.755,"gd":1e-07,"igd":0.30000000000000004}' +
  '],' +
  '"evaluated":[' +
  '{"catalog_index":4,"values":[212.52,96.125]},' +
  '{"catalog_index":1,"values":[100.0,40.0]},' +
  '{"catalog_index":3,"values":[150.0,120.50]}' +
  '],' +
  '"front":{"positions":[0,2],"catalog_indices":[4,3]},' +
  '"pending_count":2,' +
  '"predictions":[' +
  '{"catalog_index":0,"means":[180.0,85.0],"sds":[12.50,3.0E+1],"evaluated":false},' +
  '{"catalog_index":1,"means":[100.0,40.0],"sds":[0.10,0.20],"evaluated":true},' +
  '{"catalog_index":2,"means":[90.0,30.0],"sds":[5.0,6.0],"evaluated":false},' +
  '{"catalog_index":3,"means":[150.0,120.5],"sds":[0.30,0.40],"evaluated":true},' +
  '{"catalog_index":4,"means":[212.0,96.0],"sds":[0.50,0.60],"evaluated":true},' +
  '{"catalog_index":5,"means":[60.0,20.0],"sds":[7.0,8.0],"evaluated":false}' +
  ']}';

/** Matching pending batch: two unresolved cards pointing at rows 0 and 5. */
export const SUGGESTIONS_TEXT =
  '{"campaign_id":"c1","iteration":1,"status":"running","suggestions":[' +
  '{"raw_point":[0.10,0.20],"snapped_index":0,"weights":[0.250,0.750],' +
  '"acquisition_value":0.0625,"created_at":"t0","resolved_values":null,' +
  '"catalog_row":{"f1":1.50,"f2":2.0},' +
  '"predicted":{"y1":{"mean":180.0,"sd":12.50},"y2":{"mean":85.0,"sd":3.0E+1}}},' +
  '{"raw_point":[0.90,0.80],"snapped_index":5,"weights":[0.60,0.40],' +
  '"acquisition_value":1e-07,"created_at":"t1","resolved_values":null,' +
  '"catalog_row":{"f1":9.0,"f2":8.0},' +
  '"predicted":{"y1":{"mean":60.0,"sd":7.0},"y2":{"mean":20.0,"sd":8.0}}}' +
  ']}';

/** Fresh live campaign: no trace yet, init cards pending, no predictions. */
export const FRESH_REPORT_TEXT =
  '{"campaign_id":"c2","created_at":"t","status":"running","mode":"live",' +
  '"iteration":0,"feature_names":["f1","f2"],"objective_names":["y1","y2"],' +
  '"directions":["max","max"],"catalog_rows":6,"config":{},' +
  '"trace":[],"evaluated":[],"front":{"positions":[],"catalog_indices":[]},' +
  '"pending_count":2,"predictions":null}';

export const FRESH_SUGGESTIONS_TEXT =
  '{"campaign_id":"c2","iteration":0,"status":"running","suggestions":[' +
  '{"raw_point":[0.10,0.20],"snapped_index":2,"weights":[0.50,0.50],' +
  '"acquisition_value":0.0,"created_at":"t0","resolved_values":null,' +
  '"catalog_row":{"f1":3.0,"f2":4.0},"predicted":null},' +
  '{"raw_point":[0.30,0.40],"snapped_index":5,"weights":[0.50,0.50],' +
  '"acquisition_value":0.0,"created_at":"t1","resolved_values":[1.0,2.0],' +
  '"catalog_row":{"f1":9.0,"f2":8.0},"predicted":null}' +
  ']}';
