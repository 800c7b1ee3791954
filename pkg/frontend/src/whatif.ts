import type { ApiClient } from "./api.js";
import type { Answers } from "./questionnaire.js";
import { toBenchmarkRequest } from "./questionnaire.js";
import type { AppConfig, BenchmarkResponse } from "./types.js";

export interface Variant {
  id: number;
  overrides: Partial<Answers>;
  answers: Answers;
  response: BenchmarkResponse;
}

/** What-if variants are computed server-side only: each override re-calls
 *  the benchmark endpoint. In-flight requests are keyed by a variant id and
 *  responses arriving for anything but the newest variant are discarded. */
export class WhatIfController {
  private readonly api: ApiClient;
  private readonly config: AppConfig;
  private seq = 0;
  current: Variant | null = null;

  constructor(api: ApiClient, config: AppConfig) {
    this.api = api;
    this.config = config;
  }

  /** Returns the accepted variant, or null when a newer request overtook
   *  this one while it was in flight. */
  async run(base: Answers, overrides: Partial<Answers>): Promise<Variant | null> {
    const id = ++this.seq;
    const answers: Answers = { ...base, ...overrides };
    const response = await this.api.postBenchmark(
      toBenchmarkRequest(answers, this.config));
    if (id !== this.seq) {
      return null; // a newer variant superseded this request
    }
    this.current = { id, overrides, answers, response };
    return this.current;
  }
}
