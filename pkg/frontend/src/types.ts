// Payload shapes of the /api/v1 endpoints. The client never derives
// numbers from these; it only displays fields.

export interface AppConfig {
  municipalities: string[];
  year_bands: string[];
  family_bands: string[];
  fuel_kinds: Record<string, string[]>;
  rating_classes: string[];
  rating_labels: string[];
  targets: Record<string, number>;
  target_years: number[];
  min_group_size: number;
  estimators: string[];
  surrogates: string[];
  record_count: number;
  dataset_provenance: string;
}

export interface BillPayload {
  sek_month: number;
  sek_price: number;
  sek_vat: number;
  sek_fee: number;
  sek_tax: number;
  sek_network: number;
  months_covered: number;
  separate_supplier_and_grid: boolean;
}

export interface FuelPayload {
  kind: string;
  quantity: number;
  unit: string;
}

export interface BenchmarkRequest {
  municipality: string;
  year_band: string;
  family_band: string;
  area_m2: number;
  energy_input_method: "kwh" | "sek";
  kwh_last_12_months?: number | null;
  bill?: BillPayload | null;
  fuels: FuelPayload[];
  target_year: number;
}

export interface BenchmarkResponse {
  user_eui: number;
  energy: {
    method: string;
    electricity_kwh: number;
    fuel_kwh: number;
    total_kwh: number;
    area_m2: number;
  };
  rating: string;
  rating_label: string;
  advice: {
    needs_renovation: boolean;
    allowed_eui: number;
    target_year: number;
    reasons: string[];
  };
  comparison: {
    percentile: number;
    user_eui: number;
    group_mean: number;
    delta_vs_mean: number;
    boundaries: Record<string, number>;
  };
  reference_group: {
    municipality: string;
    year_band: string;
    family_band: string;
    count: number;
    widened: boolean;
    level: string;
  };
  group_stats: Record<string, number>;
}

export interface FieldError {
  field: string;
  message: string;
}

export interface ApiErrorBody {
  error: string;
  detail: string;
  fields: FieldError[];
}

export interface SensitivityReport {
  surrogate: string;
  estimator: string;
  n_samples: number;
  skip: number;
  factors: string[];
  first_order: number[] | null;
  total_effect: number[] | null;
  sum_first_order: number | null;
  sum_total_effect: number | null;
  mean: number;
  variance: number;
  zero_variance: boolean;
  noise_floor: number;
  below_noise_floor: boolean[] | null;
  fit: {
    r2: number | null;
    r2_adj: number | null;
    n_samples: number;
    n_coefficients: number;
  } | null;
  bounds: number[][];
}

export type RunStatus = "queued" | "running" | "done" | "failed";

export interface SaRunHandle {
  run_id: string;
  status: RunStatus;
  config: Record<string, unknown>;
  reports: SensitivityReport[] | null;
  error: string | null;
}
