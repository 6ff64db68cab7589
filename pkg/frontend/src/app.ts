/** Wires the API client, local triage state, and DOM together. */

import {
  Api,
  RankedRow,
  RunRow,
  SentenceEvidence,
  TranscriptRow,
} from "./api.js";
import {
  loadState,
  nextStatus,
  saveState,
  statusOf,
  TriageState,
} from "./state.js";
import {
  el,
  renderErrorBanner,
  renderEvidencePanel,
  renderRankingList,
} from "./render.js";

export interface AppOptions {
  api: Api;
  storage: Storage;
  root: HTMLElement;
}

export class App {
  readonly api: Api;
  readonly root: HTMLElement;
  private readonly storage: Storage;
  private state: TriageState;

  private transcripts: TranscriptRow[] = [];
  private runs: RunRow[] = [];
  private ranking: RankedRow[] = [];
  private evidence: SentenceEvidence | null = null;
  private error: string | null = null;
  private inflight = new Map<string, Promise<unknown>>();

  constructor(options: AppOptions) {
    this.api = options.api;
    this.root = options.root;
    this.storage = options.storage;
    this.state = loadState(this.storage);
  }

  /** Load listings, restore the saved view, and draw the page. */
  async start(): Promise<void> {
    await this.refresh();
  }

  async refresh(): Promise<void> {
    this.error = null;
    try {
      [this.transcripts, this.runs] = await Promise.all([
        this.dedupe("transcripts", () => this.api.transcripts()),
        this.dedupe("runs", () => this.api.runs()),
      ]);
      const tids = this.transcripts.map((t) => t.transcript_id);
      if (this.state.transcript === null || !tids.includes(this.state.transcript)) {
        this.state.transcript = tids[0] ?? null;
      }
      const runIds = this.runs.map((r) => r.run_id);
      if (this.state.run === null || !runIds.includes(this.state.run)) {
        this.state.run = runIds[0] ?? null;
      }
      this.save();
      await this.loadRanking();
      if (this.state.panel.sentence !== null) await this.loadEvidence();
    } catch (err) {
      this.fail(err);
    }
    this.render();
  }

  async selectTranscript(transcriptId: string): Promise<void> {
    this.state.transcript = transcriptId;
    this.state.panel.sentence = null;
    this.evidence = null;
    this.save();
    await this.reloadRanking();
  }

  async selectRun(runId: string): Promise<void> {
    this.state.run = runId;
    this.save();
    await this.reloadRanking();
  }

  async selectSentence(sentenceId: string): Promise<void> {
    this.state.panel.sentence = sentenceId;
    this.save();
    this.error = null;
    try {
      await this.loadEvidence();
    } catch (err) {
      this.fail(err);
    }
    this.render();
  }

  async changeR(r: number): Promise<void> {
    this.state.panel.r = r;
    this.save();
    this.error = null;
    try {
      if (this.state.panel.sentence !== null) await this.loadEvidence();
    } catch (err) {
      this.fail(err);
    }
    this.render();
  }

  /** Triage is a purely local judgement: update storage, never the server. */
  toggleStatus(sentenceId: string): void {
    this.state.status[sentenceId] = nextStatus(statusOf(this.state, sentenceId));
    this.save();
    this.render();
  }

  currentState(): TriageState {
    return this.state;
  }

  private async reloadRanking(): Promise<void> {
    this.error = null;
    try {
      await this.loadRanking();
    } catch (err) {
      this.fail(err);
    }
    this.render();
  }

  private async loadRanking(): Promise<void> {
    if (this.state.transcript === null || this.state.run === null) {
      this.ranking = [];
      return;
    }
    const key = `ranking:${this.state.transcript}:${this.state.run}`;
    this.ranking = await this.dedupe(key, () =>
      this.api.ranking(this.state.transcript as string, this.state.run as string),
    );
  }

  private async loadEvidence(): Promise<void> {
    const sid = this.state.panel.sentence;
    if (sid === null) {
      this.evidence = null;
      return;
    }
    const key = `evidence:${sid}:${this.state.panel.r}`;
    this.evidence = await this.dedupe(key, () =>
      this.api.evidence(sid, this.state.panel.r),
    );
  }

  /** Collapse concurrent identical requests onto one promise. */
  private dedupe<T>(key: string, request: () => Promise<T>): Promise<T> {
    const hit = this.inflight.get(key);
    if (hit !== undefined) return hit as Promise<T>;
    const pending = request().finally(() => this.inflight.delete(key));
    this.inflight.set(key, pending);
    return pending;
  }

  private fail(err: unknown): void {
    this.error = err instanceof Error ? err.message : String(err);
  }

  private save(): void {
    saveState(this.storage, this.state);
  }

  private picker(
    doc: Document,
    name: string,
    ids: string[],
    current: string | null,
    onPick: (id: string) => void,
  ): HTMLElement {
    const label = el(doc, "label", `picker picker-${name}`, `${name} `);
    const select = doc.createElement("select");
    for (const id of ids) {
      const option = doc.createElement("option");
      option.value = id;
      option.textContent = id;
      option.selected = id === current;
      select.append(option);
    }
    select.addEventListener("change", () => onPick(select.value));
    label.append(select);
    return label;
  }

  render(): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";

    if (this.error !== null) {
      this.root.append(
        renderErrorBanner(doc, this.error, () => {
          void this.refresh();
        }),
      );
    }

    const controls = el(doc, "div", "controls");
    controls.append(
      this.picker(
        doc,
        "transcript",
        this.transcripts.map((t) => t.transcript_id),
        this.state.transcript,
        (id) => {
          void this.selectTranscript(id);
        },
      ),
    );
    controls.append(
      this.picker(
        doc,
        "run",
        this.runs.map((r) => r.run_id),
        this.state.run,
        (id) => {
          void this.selectRun(id);
        },
      ),
    );
    this.root.append(controls);

    this.root.append(
      renderRankingList(doc, this.ranking, this.state, {
        onSelect: (row) => {
          void this.selectSentence(row.sentence_id);
        },
        onStatus: (row) => {
          this.toggleStatus(row.sentence_id);
        },
      }),
    );

    if (this.evidence !== null) {
      this.root.append(
        renderEvidencePanel(doc, this.evidence, this.state.panel.r, (r) => {
          void this.changeR(r);
        }),
      );
    }
  }
}

/** Entry point for index.html; reads the API base from a meta tag. */
export function boot(): App {
  const root = document.getElementById("app");
  if (root === null) throw new Error("missing #app container");
  const base =
    document.querySelector('meta[name="api-base"]')?.getAttribute("content") ??
    "http://127.0.0.1:8000/";
  const app = new App({ api: new Api(base), storage: window.localStorage, root });
  void app.start();
  return app;
}
