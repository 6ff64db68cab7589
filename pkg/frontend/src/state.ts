/** Local triage state: lives in browser storage, never leaves the client. */

export type TriageStatus = "unreviewed" | "accepted-for-checking" | "dismissed";

export interface TriageState {
  transcript: string | null;
  run: string | null;
  status: Record<string, TriageStatus>;
  panel: { sentence: string | null; r: number };
}

export const STORAGE_KEY = "checkrank-triage";

const STATUSES: TriageStatus[] = ["unreviewed", "accepted-for-checking", "dismissed"];

export function defaultState(): TriageState {
  return { transcript: null, run: null, status: {}, panel: { sentence: null, r: 3 } };
}

/** Clicking a status control steps unreviewed -> accepted -> dismissed -> … */
export function nextStatus(current: TriageStatus): TriageStatus {
  return STATUSES[(STATUSES.indexOf(current) + 1) % STATUSES.length];
}

export function statusOf(state: TriageState, sentenceId: string): TriageStatus {
  return state.status[sentenceId] ?? "unreviewed";
}

export function loadState(storage: Storage, key: string = STORAGE_KEY): TriageState {
  const raw = storage.getItem(key);
  if (raw === null) return defaultState();
  try {
    const parsed = JSON.parse(raw) as Partial<TriageState>;
    const state = defaultState();
    if (typeof parsed.transcript === "string") state.transcript = parsed.transcript;
    if (typeof parsed.run === "string") state.run = parsed.run;
    if (parsed.status && typeof parsed.status === "object") {
      for (const [sid, status] of Object.entries(parsed.status)) {
        if (STATUSES.includes(status as TriageStatus)) {
          state.status[sid] = status as TriageStatus;
        }
      }
    }
    if (parsed.panel && typeof parsed.panel.r === "number" && parsed.panel.r >= 1) {
      state.panel.r = Math.floor(parsed.panel.r);
      state.panel.sentence =
        typeof parsed.panel.sentence === "string" ? parsed.panel.sentence : null;
    }
    return state;
  } catch {
    return defaultState();
  }
}

export function saveState(
  storage: Storage,
  state: TriageState,
  key: string = STORAGE_KEY,
): void {
  storage.setItem(key, JSON.stringify(state));
}
