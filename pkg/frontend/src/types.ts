/** Shapes of the service's JSON responses. */

export interface VariableSpec {
  name: string;
  states: string[];
}

export interface ModelSummary {
  version: string;
  threshold: number;
  result_node: string;
  static_result_node: string | null;
  admission_variables: VariableSpec[];
  daily_variables: VariableSpec[];
  structure: {
    static_variables: number;
    temporal_variables: number;
    inter_slice_arcs: string[][];
    bridge_arcs: string[][];
  };
}

export interface TrajectoryPoint {
  day: number;
  probability: number;
}

export interface CreatedPatient {
  patient_id: string;
  day: number;
  probability: number;
}

export interface DayResult {
  day: number;
  probability: number;
}

export interface WhatIfResult extends DayResult {
  committed: boolean;
}

export interface TrajectoryResponse {
  patient_id: string;
  trajectory: TrajectoryPoint[];
}

export type Observations = Record<string, string>;
