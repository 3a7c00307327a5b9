import type {
  AlgorithmId,
  BatchDetail,
  BatchSummary,
  CellEntry,
  Decision,
  ImpactSummary,
  MetricsReport,
  PoolId,
  ProjectSummary,
} from "../../src/api/types";

export const BATCH_ID = "proj_1:20220207T000000Z";
export const AS_OF = "2022-02-07T00:00:00Z";

export function project(
  over: Partial<ProjectSummary> = {},
): ProjectSummary {
  return {
    project_id: "proj_1",
    name: "Project One",
    member_count: 4,
    organizer_count: 1,
    ...over,
  };
}

export function batchSummary(over: Partial<BatchSummary> = {}): BatchSummary {
  return {
    batch_id: BATCH_ID,
    project_id: "proj_1",
    as_of: AS_OF,
    candidate_count: 2,
    decided_count: 0,
    ...over,
  };
}

export function entry(
  editorId: string,
  over: Partial<CellEntry> = {},
): CellEntry {
  return {
    editor_id: editorId,
    score: 7,
    explanation: `7 edits to in-scope articles in the last 90 days`,
    profile: {
      tier: "brand_new",
      recent_in_scope_edits: 7,
      quality: 0.0,
      total_edits: 21,
    },
    ...over,
  };
}

export function emptyCells(): Record<string, CellEntry[]> {
  const cells: Record<string, CellEntry[]> = {};
  const algorithms: AlgorithmId[] = [
    "rule_based",
    "category_based",
    "bonds_based",
    "coedit_based",
  ];
  const pools: PoolId[] = ["brand_new", "moderately_experienced"];
  for (const a of algorithms) {
    for (const p of pools) cells[`${a}|${p}`] = [];
  }
  return cells;
}

export function batchDetail(over: Partial<BatchDetail> = {}): BatchDetail {
  return {
    batch_id: BATCH_ID,
    project_id: "proj_1",
    as_of: AS_OF,
    cells: emptyCells(),
    config_snapshot: {},
    decisions: [],
    ...over,
  };
}

export function decision(over: Partial<Decision> = {}): Decision {
  return {
    batch_id: BATCH_ID,
    project_id: "proj_1",
    editor_id: "ed_a",
    algorithm: "rule_based",
    pool: "brand_new",
    invited: true,
    rating: null,
    decided_at: AS_OF,
    ...over,
  };
}

export function metricsReport(over: Partial<MetricsReport> = {}): MetricsReport {
  return {
    algorithms: {
      rule_based: { decisions: 0 },
      category_based: { decisions: 0 },
      bonds_based: { decisions: 0 },
      coedit_based: { decisions: 0 },
    },
    comparisons: {},
    tiers: {},
    method: "welch unequal-variance t; two-sided p from the t distribution",
    ...over,
  };
}

export function impactSummary(over: Partial<ImpactSummary> = {}): ImpactSummary {
  return {
    window_days: 30,
    n_treated: 12,
    invited_pre_mean: 2.25,
    invited_post_mean: 7.5,
    baseline_pre_mean: 2.1,
    baseline_post_mean: 3.4,
    estimate: 3.95,
    outside_change_mean: 0.4,
    matches: [],
    skipped: [],
    ...over,
  };
}
