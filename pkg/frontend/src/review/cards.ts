import type {
  AlgorithmId,
  BatchDetail,
  Decision,
  PoolId,
} from "../api/types";

export type DecisionState = "pending" | "invited" | "dismissed";

/** View model for one candidate in one cell, including any committed decision. */
export interface CandidateCard {
  editorId: string;
  algorithm: AlgorithmId;
  pool: PoolId;
  score: number;
  explanation: string;
  tier: string;
  quality: number;
  recentInScopeEdits: number;
  totalEdits: number;
  state: DecisionState;
  rating: number | null;
}

export const ALGORITHMS: { id: AlgorithmId; label: string }[] = [
  { id: "rule_based", label: "Rule-based" },
  { id: "category_based", label: "Category match" },
  { id: "bonds_based", label: "Social bonds" },
  { id: "coedit_based", label: "Co-edit similarity" },
];

export const POOLS: { id: PoolId; label: string }[] = [
  { id: "brand_new", label: "Brand-new" },
  { id: "moderately_experienced", label: "Experienced" },
];

export function cellKey(algorithm: AlgorithmId, pool: PoolId): string {
  return `${algorithm}|${pool}`;
}

export function tierLabel(tier: string): string {
  if (tier === "brand_new") return "brand new";
  if (tier === "moderately_experienced") return "experienced";
  return tier.replace(/_/g, " ");
}

export function decisionFor(
  batch: BatchDetail,
  editorId: string,
  algorithm: AlgorithmId,
): Decision | undefined {
  return batch.decisions.find(
    (d) => d.editor_id === editorId && d.algorithm === algorithm,
  );
}

/** Cards for one algorithm/pool cell, in server rank order (never re-sorted). */
export function cardsForCell(
  batch: BatchDetail,
  algorithm: AlgorithmId,
  pool: PoolId,
): CandidateCard[] {
  const entries = batch.cells[cellKey(algorithm, pool)] ?? [];
  return entries.map((entry) => {
    const decision = decisionFor(batch, entry.editor_id, algorithm);
    return {
      editorId: entry.editor_id,
      algorithm,
      pool,
      score: entry.score,
      explanation: entry.explanation,
      tier: entry.profile.tier,
      quality: entry.profile.quality,
      recentInScopeEdits: entry.profile.recent_in_scope_edits,
      totalEdits: entry.profile.total_edits,
      state: decision ? (decision.invited ? "invited" : "dismissed") : "pending",
      rating: decision ? decision.rating : null,
    };
  });
}
