import { ApiClient, ApiError, pollRun } from "./api.js";
import { el } from "./dom.js";
import type { Answers } from "./questionnaire.js";
import { emptyAnswers, toBenchmarkRequest, validate } from "./questionnaire.js";
import { resultsViewModel } from "./results.js";
import type { ResultsViewModel } from "./results.js";
import type { AppConfig, BenchmarkResponse, FieldError, SaRunHandle } from "./types.js";
import { renderQuestionnaire, renderResults, renderSensitivity,
         renderWhatIf } from "./views.js";
import type { ResultsState } from "./views.js";
import { WhatIfController } from "./whatif.js";

/** Single-page flow: questionnaire -> verdict -> what-if -> sensitivity. */
export class RetrofitApp {
  readonly api: ApiClient;
  config: AppConfig | null = null;
  answers: Answers = emptyAnswers();
  fieldErrors: FieldError[] = [];
  resultsState: ResultsState = { kind: "idle" };
  baseResponse: BenchmarkResponse | null = null;
  whatIf: WhatIfController | null = null;
  variantVm: ResultsViewModel | null = null;
  saHandle: SaRunHandle | null = null;
  saPollInterval: number;

  private readonly formRoot: HTMLElement;
  private readonly resultsRoot: HTMLElement;
  private readonly whatIfRoot: HTMLElement;
  private readonly saRoot: HTMLElement;

  constructor(root: HTMLElement, api: ApiClient, opts: { saPollMs?: number } = {}) {
    this.api = api;
    this.saPollInterval = opts.saPollMs ?? 500;
    this.formRoot = el("section", { id: "questionnaire-root" });
    this.resultsRoot = el("section", { id: "results-root" });
    this.whatIfRoot = el("section", { id: "whatif-root" });
    this.saRoot = el("section", { id: "sensitivity-root" });
    root.append(this.formRoot, this.resultsRoot, this.whatIfRoot, this.saRoot);
  }

  async start(): Promise<void> {
    this.config = await this.api.getConfig();
    this.renderAll();
  }

  renderAll(): void {
    if (this.config === null) {
      return;
    }
    renderQuestionnaire(this.formRoot, this.config, this.answers,
                        this.fieldErrors, {
                          onChange: (patch) => this.onChange(patch),
                          onSubmit: () => void this.onSubmit(),
                        });
    renderResults(this.resultsRoot, this.resultsState);
    const baseVm = this.baseResponse === null ? null
      : resultsViewModel(this.baseResponse, this.config);
    renderWhatIf(this.whatIfRoot, baseVm, this.variantVm, {
      onRun: (area) => void this.onWhatIfArea(area),
    });
    renderSensitivity(this.saRoot, this.saHandle, {
      onStart: () => void this.onStartSensitivity(),
    });
  }

  onChange(patch: Partial<Answers>): void {
    this.answers = { ...this.answers, ...patch };
    if (this.fieldErrors.length && this.config) {
      // live-revalidate once the user has seen errors
      this.fieldErrors = validate(this.answers, this.config);
    }
    this.renderAll();
  }

  async onSubmit(): Promise<void> {
    if (this.config === null) {
      return;
    }
    this.fieldErrors = validate(this.answers, this.config);
    if (this.fieldErrors.length) {
      this.renderAll();
      return;
    }
    this.resultsState = { kind: "loading" };
    this.renderAll();
    try {
      const response = await this.api.postBenchmark(
        toBenchmarkRequest(this.answers, this.config));
      this.baseResponse = response;
      this.variantVm = null;
      this.whatIf = new WhatIfController(this.api, this.config);
      this.resultsState = {
        kind: "results",
        vm: resultsViewModel(response, this.config),
      };
    } catch (error) {
      this.baseResponse = null;
      this.variantVm = null;
      if (error instanceof ApiError && error.status === 404) {
        this.resultsState = { kind: "empty-group", detail: error.body.detail };
      } else if (error instanceof ApiError && error.status === 400) {
        this.fieldErrors = error.body.fields;
        this.resultsState = { kind: "error", detail: error.body.detail };
      } else {
        this.resultsState = {
          kind: "error",
          detail: error instanceof Error ? error.message : String(error),
        };
      }
    }
    this.renderAll();
  }

  async onWhatIfArea(areaM2: string): Promise<void> {
    if (this.whatIf === null || this.config === null) {
      return;
    }
    const variant = await this.whatIf.run(this.answers, { areaM2 });
    if (variant !== null) {
      this.variantVm = resultsViewModel(variant.response, this.config);
      this.renderAll();
    }
  }

  async onStartSensitivity(): Promise<void> {
    try {
      this.saHandle = await this.api.startSensitivityRun({});
      this.renderAll();
      this.saHandle = await pollRun(this.api, this.saHandle.run_id, {
        intervalMs: this.saPollInterval,
        onUpdate: (handle) => {
          this.saHandle = handle;
          this.renderAll();
        },
      });
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        return; // another run is already executing; keep showing it
      }
      throw error;
    }
    this.renderAll();
  }
}
