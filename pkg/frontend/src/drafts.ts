/** Draft labels survive refreshes: stored locally until the batch is submitted. */

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

function draftKey(sessionId: string, round: number): string {
  return `labelloop-draft:${sessionId}:${round}`;
}

export function saveDraft(
  storage: StorageLike,
  sessionId: string,
  round: number,
  labels: Record<string, string>,
): void {
  storage.setItem(draftKey(sessionId, round), JSON.stringify(labels));
}

export function loadDraft(
  storage: StorageLike,
  sessionId: string,
  round: number,
): Record<string, string> {
  const raw = storage.getItem(draftKey(sessionId, round));
  if (raw === null) return {};
  try {
    const parsed = JSON.parse(raw) as unknown;
    if (parsed && typeof parsed === "object" && !Array.isArray(parsed)) {
      const result: Record<string, string> = {};
      for (const [key, value] of Object.entries(parsed)) {
        if (typeof value === "string") result[key] = value;
      }
      return result;
    }
  } catch {
    // corrupted draft: start fresh
  }
  return {};
}

export function clearDraft(storage: StorageLike, sessionId: string, round: number): void {
  storage.removeItem(draftKey(sessionId, round));
}
