import { chartSvg, chartsForReport } from "./charts.js";
import { clear, el } from "./dom.js";
import type { Answers, Visibility } from "./questionnaire.js";
import { NO_FUEL, isSubmittable, visibility } from "./questionnaire.js";
import { formatNumber } from "./results.js";
import type { ResultsViewModel } from "./results.js";
import type { AppConfig, FieldError, SaRunHandle } from "./types.js";

export interface FormHandlers {
  onChange: (patch: Partial<Answers>) => void;
  onSubmit: () => void;
}

const BAND_LABELS: Record<string, string> = {
  until_1960: "until 1960",
  y1961_1980: "1961-1980",
  after_1980: "after 1980",
  one_or_two: "one or two families",
  more_than_two: "more than two families",
};

const FUEL_LABELS: Record<string, string> = {
  fuel_oil: "Fuel oil",
  natural_gas: "Natural gas",
  firewood: "Firewood",
  lignite_briquette: "Lignite briquette",
};

function bandLabel(value: string): string {
  return BAND_LABELS[value] ?? value;
}

function errorSpan(field: string, errors: FieldError[]): HTMLElement {
  const match = errors.filter((e) => e.field === field || e.field.startsWith(`${field}.`));
  const span = el("span", { class: "error", "data-field": field });
  if (match.length) {
    span.textContent = match.map((e) => e.message).join("; ");
  }
  return span;
}

function textInput(id: string, field: string, value: string, label: string,
                   errors: FieldError[], handlers: FormHandlers,
                   onValue: (raw: string) => Partial<Answers>): HTMLElement {
  const input = el("input", {
    id,
    type: "text",
    value,
    oninput: (event) =>
      handlers.onChange(onValue((event.target as HTMLInputElement).value)),
  }) as HTMLInputElement;
  input.value = value;
  return el("div", { class: "field" },
            el("label", { for: id }, label), input, errorSpan(field, errors));
}

function selectInput(id: string, field: string, value: string, label: string,
                     options: { value: string; label: string }[],
                     errors: FieldError[],
                     onValue: (raw: string) => Partial<Answers>,
                     handlers: FormHandlers): HTMLElement {
  const select = el("select", {
    id,
    onchange: (event) =>
      handlers.onChange(onValue((event.target as HTMLSelectElement).value)),
  }) as HTMLSelectElement;
  select.append(el("option", { value: "" }, "-- choose --"));
  for (const option of options) {
    const node = el("option", { value: option.value }, option.label);
    select.append(node);
  }
  select.value = value;
  return el("div", { class: "field" },
            el("label", { for: id }, label), select, errorSpan(field, errors));
}

export function renderQuestionnaire(root: HTMLElement, config: AppConfig,
                                    answers: Answers, errors: FieldError[],
                                    handlers: FormHandlers): void {
  clear(root);
  const seen: Visibility = visibility(answers);
  const form = el("form", {
    class: "questionnaire",
    onsubmit: (event) => {
      event.preventDefault();
      handlers.onSubmit();
    },
  });

  form.append(selectInput(
    "q-municipality", "municipality", answers.municipality,
    "1. House location (municipality) *",
    config.municipalities.map((m) => ({ value: m, label: m })),
    errors, (raw) => ({ municipality: raw }), handlers));

  form.append(selectInput(
    "q-year-band", "year_band", answers.yearBand,
    "2. Construction year of the house *",
    config.year_bands.map((b) => ({ value: b, label: bandLabel(b) })),
    errors, (raw) => ({ yearBand: raw }), handlers));

  form.append(selectInput(
    "q-family-band", "family_band", answers.familyBand,
    "3. Number of families living in the house *",
    config.family_bands.map((b) => ({ value: b, label: bandLabel(b) })),
    errors, (raw) => ({ familyBand: raw }), handlers));

  form.append(textInput("q-area", "area_m2", answers.areaM2,
                        "4. Total floor area of the house (m²) *", errors,
                        handlers, (raw) => ({ areaM2: raw })));

  const methods = el("div", { class: "field", id: "q-method" },
                     el("label", {}, "5. Choose energy use input method *"));
  for (const method of ["kwh", "sek"] as const) {
    const radio = el("input", {
      type: "radio",
      name: "energy-method",
      id: `q-method-${method}`,
      value: method,
      onchange: () => handlers.onChange({ energyInputMethod: method }),
    }) as HTMLInputElement;
    radio.checked = answers.energyInputMethod === method;
    methods.append(el("label", { class: "radio", for: `q-method-${method}` },
                      radio,
                      method === "kwh" ? "in units (kWh) consumed"
                                       : "in bill amount (SEK)"));
  }
  methods.append(errorSpan("energy_input_method", errors));
  form.append(methods);

  if (seen.kwhField) {
    const kwh = el("div", { class: "kwh-field" });
    kwh.append(textInput("q-kwh", "kwh_last_12_months", answers.kwhLast12Months,
                         "6. Total units (kWh) consumed in the last 12 months *",
                         errors, handlers, (raw) => ({ kwhLast12Months: raw })));
    form.append(kwh);
  }
  if (seen.billFields) {
    const bill = el("div", { class: "bill-fields" });
    bill.append(textInput("q-bill-month", "bill.sek_month", answers.billSekMonth,
                          "6a. Bill amount (SEK) *", errors, handlers,
                          (raw) => ({ billSekMonth: raw })));
    bill.append(textInput("q-bill-price", "bill.sek_price", answers.billSekPrice,
                          "6b. Electricity unit price (SEK/kWh) *", errors,
                          handlers, (raw) => ({ billSekPrice: raw })));
    bill.append(textInput("q-bill-vat", "bill.sek_vat", answers.billSekVat,
                          "6c. Energy tax and VAT (SEK)", errors, handlers,
                          (raw) => ({ billSekVat: raw })));
    bill.append(textInput("q-bill-fee", "bill.sek_fee", answers.billSekFee,
                          "6d. Fuse connection charge (SEK)", errors, handlers,
                          (raw) => ({ billSekFee: raw })));
    bill.append(textInput("q-bill-tax", "bill.sek_tax", answers.billSekTax,
                          "6e. Energy tax per kWh (SEK)", errors, handlers,
                          (raw) => ({ billSekTax: raw })));
    bill.append(textInput("q-bill-network", "bill.sek_network",
                          answers.billSekNetwork,
                          "6f. Network charge per kWh (SEK)", errors, handlers,
                          (raw) => ({ billSekNetwork: raw })));
    bill.append(textInput("q-bill-months", "bill.months_covered",
                          answers.billMonthsCovered,
                          "6g. Months covered by the bill", errors, handlers,
                          (raw) => ({ billMonthsCovered: raw })));
    const separate = el("input", {
      type: "checkbox",
      id: "q-bill-separate",
      onchange: (event) => handlers.onChange({
        billSeparateSupplier: (event.target as HTMLInputElement).checked,
      }),
    }) as HTMLInputElement;
    separate.checked = answers.billSeparateSupplier;
    bill.append(el("div", { class: "field" },
                   el("label", { for: "q-bill-separate" }, separate,
                      "supplier and grid operator are different companies")));
    form.append(bill);
  }

  const fuelOptions = [{ value: NO_FUEL, label: "No" }].concat(
    Object.keys(config.fuel_kinds).map((kind) => ({
      value: kind,
      label: FUEL_LABELS[kind] ?? kind,
    })));
  const fuelSelect = el("select", {
    id: "q-fuel-kind",
    onchange: (event) =>
      handlers.onChange({ fuelKind: (event.target as HTMLSelectElement).value }),
  }) as HTMLSelectElement;
  for (const option of fuelOptions) {
    fuelSelect.append(el("option", { value: option.value }, option.label));
  }
  fuelSelect.value = answers.fuelKind;
  form.append(el("div", { class: "field" },
                 el("label", { for: "q-fuel-kind" },
                    "7. Do you have any other energy source? *"),
                 fuelSelect, errorSpan("fuels", errors)));

  if (seen.fuelQuantity) {
    const unit = (config.fuel_kinds[answers.fuelKind] ?? [""])[0] ?? "";
    const wrap = el("div", { class: "fuel-quantity" });
    wrap.append(textInput("q-fuel-quantity", "fuels.0.quantity",
                          answers.fuelQuantity,
                          `8. Yearly consumption (${unit.replace("_", " ")}) *`,
                          errors, handlers, (raw) => ({ fuelQuantity: raw })));
    form.append(wrap);
  }

  const submit = el("button", { type: "submit", id: "submit-btn" },
                    "Submit") as HTMLButtonElement;
  submit.disabled = !isSubmittable(answers, config);
  form.append(submit);
  root.append(form);
}

export type ResultsState =
  | { kind: "idle" }
  | { kind: "loading" }
  | { kind: "results"; vm: ResultsViewModel }
  | { kind: "empty-group"; detail: string }
  | { kind: "error"; detail: string };

export function renderResults(root: HTMLElement, state: ResultsState): void {
  clear(root);
  if (state.kind === "idle") {
    return;
  }
  if (state.kind === "loading") {
    root.append(el("p", { class: "loading" }, "Computing benchmark..."));
    return;
  }
  if (state.kind === "empty-group") {
    root.append(el("div", { class: "empty-state" },
                   el("h3", {}, "No reference group"),
                   el("p", {}, state.detail),
                   el("p", {}, "Too few comparable buildings exist in the "
                     + "dataset for this combination, even after widening "
                     + "the search.")));
    return;
  }
  if (state.kind === "error") {
    root.append(el("div", { class: "request-error" }, state.detail));
    return;
  }
  const vm = state.vm;
  const banner = el("div", {
    class: `verdict-banner ${vm.needsRenovation ? "needs-renovation" : "ok"}`,
  }, vm.verdict);
  const scale = el("div", { class: "rating-scale" });
  for (const entry of vm.ratingClasses) {
    scale.append(el("span", {
      class: `rating-class${entry.active ? " active" : ""}`,
      "data-rating": entry.value,
    }, entry.label));
  }
  const percentileFill = el("div", { class: "percentile-fill" });
  percentileFill.style.width = `${vm.percentile}%`;
  root.append(
    banner,
    el("p", { class: "eui-line" },
       "Your EUI: ",
       el("strong", { class: "eui-value" }, formatNumber(vm.userEui)),
       ` kWh/m²·year (allowed for ${vm.targetYear}: `,
       el("span", { class: "allowed-eui" }, formatNumber(vm.allowedEui)),
       ")"),
    el("ul", { class: "reasons" },
       ...vm.reasons.map((reason) => el("li", {}, reason))),
    scale,
    el("div", { class: "percentile-bar" }, percentileFill),
    el("p", { class: "percentile-line" },
       el("span", { class: "percentile-value" }, formatNumber(vm.percentile)),
       "% of your reference group has a lower EUI than yours"),
    el("p", { class: "group-badge" },
       `${vm.groupCount} comparable buildings`
       + (vm.widened ? " (search widened)" : "")),
    el("p", { class: "energy-breakdown" },
       `Total ${formatNumber(vm.totalKwh)} kWh/year = electricity `
       + `${formatNumber(vm.electricityKwh)} + fuels ${formatNumber(vm.fuelKwh)}`),
  );
}

export interface WhatIfHandlers {
  onRun: (areaM2: string) => void;
}

export function renderWhatIf(root: HTMLElement, base: ResultsViewModel | null,
                             variant: ResultsViewModel | null,
                             handlers: WhatIfHandlers): void {
  clear(root);
  if (base === null) {
    return;
  }
  const input = el("input", { id: "whatif-area", type: "text" }) as HTMLInputElement;
  const button = el("button", {
    id: "whatif-run",
    type: "button",
    onclick: () => handlers.onRun(input.value),
  }, "Re-benchmark with this floor area");
  root.append(el("div", { class: "whatif-controls" },
                 el("label", { for: "whatif-area" },
                    "What if the floor area were (m²):"),
                 input, button));

  const column = (title: string, vm: ResultsViewModel, cls: string) =>
    el("div", { class: `whatif-column ${cls}` },
       el("h4", {}, title),
       el("p", {}, "EUI: ", el("span", { class: "whatif-eui" },
                               formatNumber(vm.userEui))),
       el("p", {}, "Rating: ", el("span", { class: "whatif-rating" },
                                  vm.ratingLabel)),
       el("p", {}, "Percentile: ", el("span", { class: "whatif-percentile" },
                                      formatNumber(vm.percentile))));
  const panel = el("div", { class: "whatif-panel" },
                   column("Current", base, "whatif-base"));
  if (variant !== null) {
    panel.append(column("Variant", variant, "whatif-variant"));
  }
  root.append(panel);
}

export interface SensitivityHandlers {
  onStart: () => void;
}

export function renderSensitivity(root: HTMLElement, handle: SaRunHandle | null,
                                  handlers: SensitivityHandlers): void {
  clear(root);
  root.append(el("button", { id: "sa-start", type: "button",
                             onclick: () => handlers.onStart() },
                 "Run sensitivity analysis"));
  if (handle === null) {
    return;
  }
  root.append(el("p", { class: "sa-status", "data-status": handle.status },
                 `Run ${handle.run_id}: ${handle.status}`));
  if (handle.status === "queued" || handle.status === "running") {
    root.append(el("div", { class: "sa-progress" }, "Analysis in progress..."));
    return;
  }
  if (handle.status === "failed") {
    root.append(el("div", { class: "sa-error" }, handle.error ?? "run failed"));
    return;
  }
  for (const report of handle.reports ?? []) {
    const section = el("section", { class: "sa-report",
                                    "data-surrogate": report.surrogate });
    if (report.zero_variance) {
      section.append(el("p", { class: "sa-zero-variance" },
                        "Model output variance is zero; indices undefined."));
    } else {
      for (const chart of chartsForReport(report)) {
        const wrapper = el("div", { class: "sa-chart" });
        wrapper.innerHTML = chartSvg(chart);
        section.append(wrapper);
      }
    }
    root.append(section);
  }
}
