/**
 * Patient-session state machine, independent of the DOM so the decision
 * loop can be exercised end-to-end in tests.
 *
 * Every state change waits for server confirmation (no optimistic
 * updates), and the trajectory held here is always the literal content of
 * the latest service response.
 */

import { ApiClient, ServiceError } from "./api.js";
import type { ModelSummary, Observations, TrajectoryPoint, WhatIfResult } from "./types.js";

export interface PendingWhatIf {
  observations: Observations;
  result: WhatIfResult;
}

export class PatientSession {
  patientId: string | null = null;
  trajectory: TrajectoryPoint[] = [];
  pendingWhatIf: PendingWhatIf | null = null;

  constructor(
    readonly client: ApiClient,
    readonly model: ModelSummary,
  ) {}

  get nextDay(): number {
    return this.trajectory.length === 0 ? 1 : Math.max(...this.trajectory.map((p) => p.day)) + 1;
  }

  get currentRisk(): TrajectoryPoint | null {
    return this.trajectory.length > 0 ? this.trajectory[this.trajectory.length - 1]! : null;
  }

  /** True once every admission dropdown has a selection. */
  admissionComplete(obs: Observations): boolean {
    return this.model.admission_variables.every((v) => Boolean(obs[v.name]));
  }

  async admit(observations: Observations): Promise<void> {
    const created = await this.client.createPatient(observations);
    this.patientId = created.patient_id;
    await this.refresh();
  }

  async submitDay(observations: Observations): Promise<void> {
    if (this.patientId === null) throw new Error("no admitted patient");
    await this.client.submitDay(this.patientId, observations, this.nextDay);
    this.pendingWhatIf = null;
    await this.refresh();
  }

  async whatIf(observations: Observations): Promise<WhatIfResult> {
    if (this.patientId === null) throw new Error("no admitted patient");
    const result = await this.client.whatIf(this.patientId, observations);
    this.pendingWhatIf = { observations: { ...observations }, result };
    return result;
  }

  /** Replays the last what-if payload through the committing endpoint. */
  async commitWhatIf(): Promise<void> {
    if (this.pendingWhatIf === null) throw new Error("no what-if to commit");
    await this.submitDay(this.pendingWhatIf.observations);
  }

  /** Re-reads the trajectory; the stored copy is the server's verbatim. */
  async refresh(): Promise<void> {
    if (this.patientId === null) throw new Error("no admitted patient");
    const response = await this.client.trajectory(this.patientId);
    this.trajectory = response.trajectory;
  }
}

export function fieldErrorOf(error: unknown): { field: string; message: string } | null {
  if (error instanceof ServiceError && error.body.field) {
    return { field: error.body.field, message: error.body.message };
  }
  return null;
}
