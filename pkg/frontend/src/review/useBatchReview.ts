import { useCallback, useEffect, useRef, useState } from "react";
import { ApiClient, ApiError } from "../api/client";
import type { AlgorithmId, BatchDetail, PoolId } from "../api/types";
import type { CandidateCard } from "./cards";

// The decision log is append-only, so a rating can only travel with the
// decision itself. A click flips the card at once but the POST is sent when
// the rating prompt resolves (a rating, "skip", or starting another card).
export interface ActivityEntry {
  editorId: string;
  algorithm: AlgorithmId;
  pool: PoolId;
  invited: boolean;
  mode: "rating" | "saving";
}

export function cardKey(
  card: Pick<CandidateCard, "editorId" | "algorithm">,
): string {
  return `${card.editorId}|${card.algorithm}`;
}

export interface BatchReview {
  batch: BatchDetail | null;
  loading: boolean;
  offline: boolean;
  notice: string | null;
  activity: Record<string, ActivityEntry>;
  decide: (card: CandidateCard, invited: boolean) => void;
  rate: (card: CandidateCard, rating: number | null) => Promise<void>;
  retry: () => void;
}

export function useBatchReview(
  client: ApiClient,
  batchId: string | null,
): BatchReview {
  const [batch, setBatch] = useState<BatchDetail | null>(null);
  const [loading, setLoading] = useState(false);
  const [offline, setOffline] = useState(false);
  const [notice, setNotice] = useState<string | null>(null);
  const [activity, setActivity] = useState<Record<string, ActivityEntry>>({});
  const activityRef = useRef(activity);
  activityRef.current = activity;
  const currentIdRef = useRef<string | null>(null);

  const load = useCallback(
    async (id: string) => {
      setLoading(true);
      try {
        const detail = await client.getBatch(id);
        if (currentIdRef.current !== id) return;
        setBatch(detail);
        setOffline(false);
      } catch (e) {
        if (currentIdRef.current !== id) return;
        setBatch(null);
        if (e instanceof ApiError) {
          setNotice(`failed to load batch: ${e.message}`);
        } else {
          setOffline(true);
        }
      } finally {
        if (currentIdRef.current === id) setLoading(false);
      }
    },
    [client],
  );

  useEffect(() => {
    currentIdRef.current = batchId;
    setActivity({});
    setNotice(null);
    setBatch(null);
    if (batchId) void load(batchId);
    return () => {
      // leaving the batch must not strand a decided-but-unsaved card
      if (!batchId) return;
      for (const entry of Object.values(activityRef.current)) {
        if (entry.mode !== "rating") continue;
        client
          .postDecision(batchId, {
            editor_id: entry.editorId,
            algorithm: entry.algorithm,
            pool: entry.pool,
            invited: entry.invited,
          })
          .catch(() => {});
      }
    };
  }, [client, batchId, load]);

  const flush = useCallback(
    async (key: string, rating: number | null) => {
      const entry = activityRef.current[key];
      if (!entry || entry.mode !== "rating" || batchId === null) return;
      setActivity((a) => ({ ...a, [key]: { ...entry, mode: "saving" } }));
      try {
        const res = await client.postDecision(batchId, {
          editor_id: entry.editorId,
          algorithm: entry.algorithm,
          pool: entry.pool,
          invited: entry.invited,
          ...(rating === null ? {} : { rating }),
        });
        if (currentIdRef.current !== batchId) return;
        setBatch((b) =>
          b ? { ...b, decisions: [...b.decisions, ...res.recorded] } : b,
        );
        setActivity((a) => {
          const next = { ...a };
          delete next[key];
          return next;
        });
      } catch (e) {
        if (currentIdRef.current !== batchId) return;
        setActivity((a) => {
          const next = { ...a };
          delete next[key];
          return next;
        });
        if (e instanceof ApiError && e.status === 409) {
          setNotice("already decided elsewhere; showing the recorded decision");
          await load(batchId);
        } else if (e instanceof ApiError) {
          setNotice(`decision rejected: ${e.message}`);
        } else {
          setOffline(true);
          setNotice("service unreachable; decision not saved");
        }
      }
    },
    [client, batchId, load],
  );

  const decide = useCallback(
    (card: CandidateCard, invited: boolean) => {
      if (offline || batch === null || card.state !== "pending") return;
      const key = cardKey(card);
      if (activityRef.current[key]) return;
      for (const [k, entry] of Object.entries(activityRef.current)) {
        if (entry.mode === "rating") void flush(k, null);
      }
      setNotice(null);
      setActivity((a) => ({
        ...a,
        [key]: {
          editorId: card.editorId,
          algorithm: card.algorithm,
          pool: card.pool,
          invited,
          mode: "rating",
        },
      }));
    },
    [offline, batch, flush],
  );

  const rate = useCallback(
    (card: CandidateCard, rating: number | null) => flush(cardKey(card), rating),
    [flush],
  );

  const retry = useCallback(() => {
    setOffline(false);
    if (batchId) void load(batchId);
  }, [batchId, load]);

  return { batch, loading, offline, notice, activity, decide, rate, retry };
}
