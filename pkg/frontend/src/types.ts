// Payload shapes of the campaign service. The console renders these as-is:
// it never recomputes suggestions, dominance or model numbers client-side.

export interface FactorConfig {
  name: string;
  unit: string;
  cube_low: number;
  cube_high: number;
}

export interface ObjectiveConfig {
  name: string;
  unit?: string;
  threshold?: number | null;
  weight?: number;
}

export interface CampaignRequest {
  factors: FactorConfig[];
  objectives: ObjectiveConfig[];
  alpha: number;
  mode: "single" | "multi";
  seed_count: number;
  batch_size: number;
  max_trials: number;
  seed: number;
  seed_from: "ccd" | "box";
}

export interface TrialView {
  id: string;
  settings: number[];
  responses: number[] | null;
  provenance: string;
  status: "pending" | "observed";
}

export interface CampaignView {
  id: string;
  created_at: string;
  config: {
    space: { alpha: number; factors: FactorConfig[] };
    objectives: { name: string; unit: string; threshold: number | null }[];
    mode: string;
  };
  status: string;
  iteration: number;
  trials: TrialView[];
  stop_reasons: string[];
  surrogate_failed: boolean;
}

export interface ParetoPoint extends TrialView {
  objectives: number[];
}

export interface ConvergenceRow {
  iteration: number;
  trials_observed: number;
  best: (number | null)[];
}

export interface ConvergenceView {
  iterations: ConvergenceRow[];
  proposal_distances: number[];
}
