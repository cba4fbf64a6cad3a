/** Wire types mirrored from the labelloop HTTP API. */

export interface SessionSummary {
  session_id: string;
  phase: string;
  round: number;
  n_labeled: number;
  n_pool: number;
  n_test: number;
  label_set: string[];
}

export interface BatchItem {
  id: string;
  text: string;
}

export interface NextBatchResponse {
  round: number;
  items: BatchItem[];
}

export interface RoundRecord {
  round: number;
  n_labeled: number;
  macro_f1: number | null;
  accuracy: number | null;
  per_class_f1: Record<string, number> | null;
  queried_ids: string[];
  minority_fraction: number | null;
  wall_time_ms: number;
  confusion: number[][] | null;
}

export interface HistoryResponse {
  rounds: RoundRecord[];
}

export interface SubmitLabelsResponse {
  phase: string;
  round_completed: boolean;
  metrics: RoundRecord | null;
}

export interface CorpusUploadResponse {
  corpus_id: string;
  n_docs: number;
  dim: number | null;
}
