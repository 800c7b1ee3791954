import type { AppConfig, BenchmarkRequest, FieldError } from "./types.js";

export const NO_FUEL = "no";

/** Raw questionnaire answers; numeric fields stay strings until submission
 *  so partially typed input never breaks the form. */
export interface Answers {
  municipality: string;
  yearBand: string;
  familyBand: string;
  areaM2: string;
  energyInputMethod: "" | "kwh" | "sek";
  kwhLast12Months: string;
  billSekMonth: string;
  billSekPrice: string;
  billSekVat: string;
  billSekFee: string;
  billSekTax: string;
  billSekNetwork: string;
  billMonthsCovered: string;
  billSeparateSupplier: boolean;
  fuelKind: string;
  fuelQuantity: string;
  targetYear: string;
}

export function emptyAnswers(): Answers {
  return {
    municipality: "",
    yearBand: "",
    familyBand: "",
    areaM2: "",
    energyInputMethod: "",
    kwhLast12Months: "",
    billSekMonth: "",
    billSekPrice: "",
    billSekVat: "0",
    billSekFee: "0",
    billSekTax: "0",
    billSekNetwork: "0",
    billMonthsCovered: "12",
    billSeparateSupplier: false,
    fuelKind: NO_FUEL,
    fuelQuantity: "",
    targetYear: "2022",
  };
}

export interface Visibility {
  kwhField: boolean;
  billFields: boolean;
  fuelQuantity: boolean;
}

/** Conditional question visibility: the energy branch follows the chosen
 *  input method, and the fuel quantity only appears once a fuel is picked. */
export function visibility(answers: Answers): Visibility {
  return {
    kwhField: answers.energyInputMethod === "kwh",
    billFields: answers.energyInputMethod === "sek",
    fuelQuantity: answers.fuelKind !== NO_FUEL && answers.fuelKind !== "",
  };
}

function numberField(raw: string, field: string, errors: FieldError[],
                     opts: { positive?: boolean } = {}): number | null {
  if (raw.trim() === "") {
    errors.push({ field, message: "required" });
    return null;
  }
  const value = Number(raw);
  if (!Number.isFinite(value)) {
    errors.push({ field, message: "must be a number" });
    return null;
  }
  if (opts.positive && value <= 0) {
    errors.push({ field, message: "must be greater than zero" });
    return null;
  }
  if (!opts.positive && value < 0) {
    errors.push({ field, message: "must not be negative" });
    return null;
  }
  return value;
}

export function validate(answers: Answers, config: AppConfig): FieldError[] {
  const errors: FieldError[] = [];
  if (!config.municipalities.includes(answers.municipality)) {
    errors.push({ field: "municipality", message: "choose a municipality" });
  }
  if (!config.year_bands.includes(answers.yearBand)) {
    errors.push({ field: "year_band", message: "choose a construction period" });
  }
  if (!config.family_bands.includes(answers.familyBand)) {
    errors.push({ field: "family_band", message: "choose a family count" });
  }
  numberField(answers.areaM2, "area_m2", errors, { positive: true });

  const seen = visibility(answers);
  if (answers.energyInputMethod !== "kwh" && answers.energyInputMethod !== "sek") {
    errors.push({ field: "energy_input_method", message: "choose an input method" });
  } else if (seen.kwhField) {
    numberField(answers.kwhLast12Months, "kwh_last_12_months", errors);
  } else if (seen.billFields) {
    numberField(answers.billSekMonth, "bill.sek_month", errors);
    numberField(answers.billSekPrice, "bill.sek_price", errors);
    numberField(answers.billSekVat, "bill.sek_vat", errors);
    numberField(answers.billSekFee, "bill.sek_fee", errors);
    numberField(answers.billSekTax, "bill.sek_tax", errors);
    numberField(answers.billSekNetwork, "bill.sek_network", errors);
    const months = numberField(answers.billMonthsCovered, "bill.months_covered",
                               errors);
    if (months !== null && (months < 1 || months > 12 || !Number.isInteger(months))) {
      errors.push({ field: "bill.months_covered", message: "must be 1..12" });
    }
  }
  if (seen.fuelQuantity) {
    if (!(answers.fuelKind in config.fuel_kinds)) {
      errors.push({ field: "fuels", message: "unknown fuel" });
    }
    numberField(answers.fuelQuantity, "fuels.0.quantity", errors);
  }
  return errors;
}

export function isSubmittable(answers: Answers, config: AppConfig): boolean {
  return validate(answers, config).length === 0;
}

/** Build the benchmark request; exactly one energy branch is populated. */
export function toBenchmarkRequest(answers: Answers,
                                   config: AppConfig): BenchmarkRequest {
  const seen = visibility(answers);
  const request: BenchmarkRequest = {
    municipality: answers.municipality,
    year_band: answers.yearBand,
    family_band: answers.familyBand,
    area_m2: Number(answers.areaM2),
    energy_input_method: answers.energyInputMethod as "kwh" | "sek",
    fuels: [],
    target_year: Number(answers.targetYear),
  };
  if (seen.kwhField) {
    request.kwh_last_12_months = Number(answers.kwhLast12Months);
  } else {
    request.bill = {
      sek_month: Number(answers.billSekMonth),
      sek_price: Number(answers.billSekPrice),
      sek_vat: Number(answers.billSekVat),
      sek_fee: Number(answers.billSekFee),
      sek_tax: Number(answers.billSekTax),
      sek_network: Number(answers.billSekNetwork),
      months_covered: Number(answers.billMonthsCovered),
      separate_supplier_and_grid: answers.billSeparateSupplier,
    };
  }
  if (seen.fuelQuantity) {
    const units = config.fuel_kinds[answers.fuelKind] ?? [];
    request.fuels.push({
      kind: answers.fuelKind,
      quantity: Number(answers.fuelQuantity),
      unit: units[0] ?? "",
    });
  }
  return request;
}

export function serializeAnswers(answers: Answers): string {
  return JSON.stringify(answers);
}

export function deserializeAnswers(text: string): Answers {
  return { ...emptyAnswers(), ...(JSON.parse(text) as Partial<Answers>) };
}
