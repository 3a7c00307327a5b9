// Shapes mirror the backend JSON exactly; no field is renamed or derived here.

export type AlgorithmId =
  | "rule_based"
  | "category_based"
  | "bonds_based"
  | "coedit_based";

export type PoolId = "brand_new" | "moderately_experienced";

export interface ProjectSummary {
  project_id: string;
  name: string;
  member_count: number;
  organizer_count: number;
}

export interface BatchSummary {
  batch_id: string;
  project_id: string;
  as_of: string;
  candidate_count: number;
  decided_count: number;
}

export interface CandidateProfile {
  tier: string;
  recent_in_scope_edits: number;
  quality: number;
  total_edits: number;
}

export interface CellEntry {
  editor_id: string;
  score: number;
  explanation: string;
  profile: CandidateProfile;
}

export interface Decision {
  batch_id: string;
  project_id: string;
  editor_id: string;
  algorithm: AlgorithmId;
  pool: PoolId;
  invited: boolean;
  rating: number | null;
  decided_at: string;
}

export interface BatchDetail {
  batch_id: string;
  project_id: string;
  as_of: string;
  cells: Record<string, CellEntry[]>;
  config_snapshot: Record<string, unknown>;
  decisions: Decision[];
}

export interface DecisionInput {
  editor_id: string;
  algorithm: AlgorithmId;
  pool: PoolId;
  invited: boolean;
  rating?: number;
}

export interface AlgorithmMetrics {
  decisions: number;
  invited?: number;
  invitation_rate?: number;
  rating_count?: number;
  mean_rating?: number;
}

export interface Comparison {
  t?: number;
  df?: number;
  p?: number;
  skipped?: string;
}

export interface TierMetrics {
  decisions: number;
  invited: number;
  invitation_rate: number;
}

export interface MetricsReport {
  algorithms: Record<string, AlgorithmMetrics>;
  comparisons: Record<string, Comparison>;
  tiers: Record<string, TierMetrics>;
  method: string;
}

export interface ImpactSummary {
  window_days: number;
  n_treated: number;
  invited_pre_mean: number;
  invited_post_mean: number;
  baseline_pre_mean: number;
  baseline_post_mean: number;
  estimate: number;
  outside_change_mean: number;
  matches: unknown[];
  skipped: unknown[];
}

export interface ImpactSkipped {
  skipped: string;
  window_days: number;
}

export type ImpactResponse = ImpactSummary | ImpactSkipped;

export function impactWasSkipped(r: ImpactResponse): r is ImpactSkipped {
  return typeof (r as ImpactSkipped).skipped === "string";
}
