import type { AppConfig, BenchmarkResponse } from "./types.js";

/** View model for the results panel. Every number is copied verbatim from
 *  the API response; the client adds no arithmetic of its own. */
export interface ResultsViewModel {
  verdict: string;
  needsRenovation: boolean;
  reasons: string[];
  rating: string;
  ratingLabel: string;
  ratingIndex: number;
  ratingClasses: { value: string; label: string; active: boolean }[];
  userEui: number;
  allowedEui: number;
  targetYear: number;
  percentile: number;
  groupMean: number;
  groupCount: number;
  widened: boolean;
  groupLevel: string;
  totalKwh: number;
  electricityKwh: number;
  fuelKwh: number;
}

export function resultsViewModel(response: BenchmarkResponse,
                                 config: AppConfig): ResultsViewModel {
  const ratingIndex = config.rating_classes.indexOf(response.rating);
  return {
    verdict: response.advice.needs_renovation
      ? "Renovation recommended"
      : "No renovation needed",
    needsRenovation: response.advice.needs_renovation,
    reasons: response.advice.reasons,
    rating: response.rating,
    ratingLabel: response.rating_label,
    ratingIndex,
    ratingClasses: config.rating_classes.map((value, i) => ({
      value,
      label: config.rating_labels[i] ?? value,
      active: value === response.rating,
    })),
    userEui: response.user_eui,
    allowedEui: response.advice.allowed_eui,
    targetYear: response.advice.target_year,
    percentile: response.comparison.percentile,
    groupMean: response.comparison.group_mean,
    groupCount: response.reference_group.count,
    widened: response.reference_group.widened,
    groupLevel: response.reference_group.level,
    totalKwh: response.energy.total_kwh,
    electricityKwh: response.energy.electricity_kwh,
    fuelKwh: response.energy.fuel_kwh,
  };
}

/** Display formatting only; never used to derive new quantities. */
export function formatNumber(value: number, decimals = 1): string {
  return value.toFixed(decimals);
}
