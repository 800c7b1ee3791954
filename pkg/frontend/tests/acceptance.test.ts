// Contract test against a mock API: branch visibility, request shape,
// verbatim rendering of server numbers, and the single-call what-if loop.

import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { RetrofitApp } from "../src/app.js";
import { MockServer, cannedResponse } from "./mock.js";

let root: HTMLElement;
let server: MockServer;
let app: RetrofitApp;

async function flush(): Promise<void> {
  for (let i = 0; i < 4; i += 1) {
    await new Promise((resolve) => setTimeout(resolve, 0));
  }
}

function setSelect(id: string, value: string): void {
  const select = root.querySelector<HTMLSelectElement>(`#${id}`);
  if (!select) throw new Error(`missing #${id}`);
  select.value = value;
  select.dispatchEvent(new Event("change"));
}

function setText(id: string, value: string): void {
  const input = root.querySelector<HTMLInputElement>(`#${id}`);
  if (!input) throw new Error(`missing #${id}`);
  input.value = value;
  input.dispatchEvent(new Event("input"));
}

function chooseMethod(method: "kwh" | "sek"): void {
  const radio = root.querySelector<HTMLInputElement>(`#q-method-${method}`);
  if (!radio) throw new Error(`missing #q-method-${method}`);
  radio.checked = true;
  radio.dispatchEvent(new Event("change"));
}

async function fillValidForm(): Promise<void> {
  setSelect("q-municipality", "Umeå");
  setSelect("q-year-band", "y1961_1980");
  setSelect("q-family-band", "one_or_two");
  setText("q-area", "120");
  chooseMethod("kwh");
  setText("q-kwh", "15000");
  await flush();
}

beforeEach(async () => {
  document.body.innerHTML = "";
  root = document.createElement("div");
  document.body.append(root);
  server = new MockServer();
  app = new RetrofitApp(root, new ApiClient("", server.fetch));
  await app.start();
});

describe("questionnaire branch visibility", () => {
  it("switches between the kWh and bill branches with Q5", async () => {
    expect(root.querySelector(".kwh-field")).toBeNull();
    expect(root.querySelector(".bill-fields")).toBeNull();

    chooseMethod("sek");
    await flush();
    expect(root.querySelector(".bill-fields")).not.toBeNull();
    expect(root.querySelector(".kwh-field")).toBeNull();

    chooseMethod("kwh");
    await flush();
    expect(root.querySelector(".kwh-field")).not.toBeNull();
    expect(root.querySelector(".bill-fields")).toBeNull();
  });

  it("reveals the fuel quantity only when Q7 names a fuel", async () => {
    expect(root.querySelector(".fuel-quantity")).toBeNull();
    setSelect("q-fuel-kind", "fuel_oil");
    await flush();
    expect(root.querySelector(".fuel-quantity")).not.toBeNull();
    setSelect("q-fuel-kind", "no");
    await flush();
    expect(root.querySelector(".fuel-quantity")).toBeNull();
  });
});

describe("submission", () => {
  it("submits the questionnaire-shaped request and renders the verdict", async () => {
    await fillValidForm();
    const submit = root.querySelector<HTMLButtonElement>("#submit-btn");
    expect(submit?.disabled).toBe(false);
    submit?.click();
    await flush();

    const calls = server.callsTo("/api/v1/benchmark");
    expect(calls.length).toBe(1);
    expect(calls[0].body).toEqual({
      municipality: "Umeå",
      year_band: "y1961_1980",
      family_band: "one_or_two",
      area_m2: 120,
      energy_input_method: "kwh",
      kwh_last_12_months: 15000,
      fuels: [],
      target_year: 2022,
    });

    // every displayed number is the canned server value, formatted only
    expect(root.querySelector(".verdict-banner")?.textContent)
      .toBe("Renovation recommended");
    const active = root.querySelectorAll(".rating-class.active");
    expect(active.length).toBe(1);
    expect(active[0].getAttribute("data-rating")).toBe("good");
    expect(root.querySelector(".percentile-value")?.textContent).toBe("62.5");
    expect(root.querySelector(".eui-value")?.textContent).toBe("125.0");
  });

  it("renders field errors from a 400 inline", async () => {
    server.onBenchmark = () => ({
      status: 400,
      body: {
        error: "validation",
        detail: "request validation failed",
        fields: [{ field: "area_m2", message: "server says no" }],
      },
    });
    await fillValidForm();
    root.querySelector<HTMLButtonElement>("#submit-btn")?.click();
    await flush();
    expect(root.querySelector('.error[data-field="area_m2"]')?.textContent)
      .toBe("server says no");
  });

  it("renders the empty-state panel on 404", async () => {
    server.onBenchmark = () => ({
      status: 404,
      body: { error: "empty_group", detail: "no reference group", fields: [] },
    });
    await fillValidForm();
    root.querySelector<HTMLButtonElement>("#submit-btn")?.click();
    await flush();
    expect(root.querySelector(".empty-state")).not.toBeNull();
    expect(root.querySelector(".verdict-banner")).toBeNull();
  });
});

describe("what-if loop", () => {
  it("floor-area override triggers exactly one call and replaces the panel",
     async () => {
    server.onBenchmark = (call) => {
      const body = call.body as { area_m2: number };
      return {
        status: 200,
        body: cannedResponse({ user_eui: body.area_m2 === 120 ? 125.0 : 250.0 }),
      };
    };
    await fillValidForm();
    root.querySelector<HTMLButtonElement>("#submit-btn")?.click();
    await flush();
    expect(server.callsTo("/api/v1/benchmark").length).toBe(1);
    expect(root.querySelector(".whatif-variant")).toBeNull();

    setText("whatif-area", "60");
    root.querySelector<HTMLButtonElement>("#whatif-run")?.click();
    await flush();

    const calls = server.callsTo("/api/v1/benchmark");
    expect(calls.length).toBe(2);
    expect(calls[1].body).toMatchObject({ area_m2: 60 });

    const variant = root.querySelector(".whatif-variant");
    expect(variant).not.toBeNull();
    expect(variant?.querySelector(".whatif-eui")?.textContent).toBe("250.0");
    expect(root.querySelector(".whatif-base .whatif-eui")?.textContent)
      .toBe("125.0");
  });

  it("a second override replaces the variant panel, not duplicates it",
     async () => {
    server.onBenchmark = (call) => {
      const body = call.body as { area_m2: number };
      return { status: 200, body: cannedResponse({ user_eui: body.area_m2 }) };
    };
    await fillValidForm();
    root.querySelector<HTMLButtonElement>("#submit-btn")?.click();
    await flush();

    setText("whatif-area", "60");
    root.querySelector<HTMLButtonElement>("#whatif-run")?.click();
    await flush();
    setText("whatif-area", "80");
    root.querySelector<HTMLButtonElement>("#whatif-run")?.click();
    await flush();

    expect(server.callsTo("/api/v1/benchmark").length).toBe(3);
    const variants = root.querySelectorAll(".whatif-variant");
    expect(variants.length).toBe(1);
    expect(variants[0].querySelector(".whatif-eui")?.textContent).toBe("80.0");
  });
});

describe("sensitivity view", () => {
  it("polls the run and renders charts from the report labels", async () => {
    const { cannedReport } = await import("./mock.js");
    const report = cannedReport();
    let polls = 0;
    server.onGetRun = () => {
      polls += 1;
      if (polls < 2) {
        return {
          status: 200,
          body: { run_id: "run-0001", status: "running", config: {},
                  reports: null, error: null },
        };
      }
      return {
        status: 200,
        body: { run_id: "run-0001", status: "done", config: {},
                reports: [report], error: null },
      };
    };
    app.saPollInterval = 1;
    root.querySelector<HTMLButtonElement>("#sa-start")?.click();
    await flush();
    await new Promise((resolve) => setTimeout(resolve, 20));
    await flush();
    const charts = root.querySelectorAll(".bar-chart");
    expect(charts.length).toBe(2);
    expect(root.innerHTML).toContain("annual_energy_kwh");
  });
});
