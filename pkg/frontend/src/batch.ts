import type { BatchItem } from "./types.js";

/** Labeling state for one pending batch. Pure update helpers, easy to test. */
export interface BatchState {
  round: number;
  items: BatchItem[];
  labels: Record<string, string>;
  cursor: number;
}

export function newBatch(
  round: number,
  items: BatchItem[],
  restored: Record<string, string> = {},
): BatchState {
  const labels: Record<string, string> = {};
  for (const item of items) {
    if (restored[item.id] !== undefined) labels[item.id] = restored[item.id];
  }
  const state: BatchState = { round, items, labels, cursor: 0 };
  state.cursor = firstUnlabeledFrom(state, 0);
  return state;
}

export function labeledCount(state: BatchState): number {
  return state.items.filter((item) => state.labels[item.id] !== undefined).length;
}

export function allLabeled(state: BatchState): boolean {
  return labeledCount(state) === state.items.length;
}

export function counterText(state: BatchState): string {
  if (state.items.length === 0) return "0 of 0";
  return `${state.cursor + 1} of ${state.items.length}`;
}

export function remainingHint(state: BatchState): string {
  const left = state.items.length - labeledCount(state);
  return left === 0 ? "all labeled" : `${left} item${left === 1 ? "" : "s"} left`;
}

/** Index of the first unlabeled item at or after `from`, wrapping; `from` if none. */
export function firstUnlabeledFrom(state: BatchState, from: number): number {
  const n = state.items.length;
  if (n === 0) return 0;
  for (let offset = 0; offset < n; offset++) {
    const index = (from + offset) % n;
    if (state.labels[state.items[index].id] === undefined) return index;
  }
  return Math.min(from, n - 1);
}

/** Assign a label to the current item and advance to the next unlabeled one. */
export function labelCurrent(state: BatchState, label: string): BatchState {
  if (state.items.length === 0) return state;
  const id = state.items[state.cursor].id;
  const labels = { ...state.labels, [id]: label };
  const next = { ...state, labels };
  next.cursor = firstUnlabeledFrom(next, state.cursor + 1);
  return next;
}

export function moveCursor(state: BatchState, index: number): BatchState {
  if (index < 0 || index >= state.items.length) return state;
  return { ...state, cursor: index };
}

/** Drop one item's label (e.g. after a server-side rejection) and focus it. */
export function reopenItem(state: BatchState, id: string): BatchState {
  const labels = { ...state.labels };
  delete labels[id];
  const index = state.items.findIndex((item) => item.id === id);
  return { ...state, labels, cursor: index >= 0 ? index : state.cursor };
}
