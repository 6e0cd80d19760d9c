/**
 * Thin client for the decision-support service.
 *
 * Every raw response body is recorded in `log`, in arrival order. The UI
 * never computes probabilities of its own, so any number it displays must
 * trace back to one of these recorded bodies; tests assert exactly that.
 */

import type {
  CreatedPatient,
  DayResult,
  ModelSummary,
  Observations,
  TrajectoryResponse,
  WhatIfResult,
} from "./types.js";

export interface ServiceErrorBody {
  code: string;
  message: string;
  field?: string;
}

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly body: ServiceErrorBody,
  ) {
    super(body.message);
  }
}

export class ApiClient {
  /** Raw response bodies, exactly as received. */
  readonly log: string[] = [];

  constructor(private readonly baseUrl: string = "") {}

  private async request<T>(method: string, path: string, payload?: unknown): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: payload === undefined ? undefined : { "content-type": "application/json" },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
    const raw = await response.text();
    this.log.push(raw);
    const parsed = raw.length > 0 ? JSON.parse(raw) : null;
    if (!response.ok) {
      const body: ServiceErrorBody =
        parsed && typeof parsed.message === "string"
          ? parsed
          : { code: "http-error", message: `request failed with status ${response.status}` };
      throw new ServiceError(response.status, body);
    }
    return parsed as T;
  }

  getModel(): Promise<ModelSummary> {
    return this.request<ModelSummary>("GET", "/model");
  }

  createPatient(observations: Observations): Promise<CreatedPatient> {
    return this.request<CreatedPatient>("POST", "/patients", { observations });
  }

  submitDay(patientId: string, observations: Observations, day?: number): Promise<DayResult> {
    const payload = day === undefined ? { observations } : { day, observations };
    return this.request<DayResult>("POST", `/patients/${patientId}/days`, payload);
  }

  whatIf(patientId: string, observations: Observations): Promise<WhatIfResult> {
    return this.request<WhatIfResult>("POST", `/patients/${patientId}/what-if`, { observations });
  }

  trajectory(patientId: string): Promise<TrajectoryResponse> {
    return this.request<TrajectoryResponse>("GET", `/patients/${patientId}/trajectory`);
  }
}
