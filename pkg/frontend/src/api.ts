/** Typed read-only client for the checkrank review API. */

export interface TranscriptRow {
  transcript_id: string;
  event_date: string | null;
  n_sentences: number;
}

export interface RunRow {
  run_id: string;
  transcripts: string[];
  n_sentences: number;
}

export interface ClaimCard {
  claim_id: string;
  statement: string;
  truth_value: string;
  title: string;
  date: string | null;
  verdict: string | null;
  scores: Record<string, number>;
}

export interface RankedRow {
  rank: number;
  sentence_id: string;
  text: string;
  speaker: string | null;
  score: number;
  relevant: boolean | null;
  evidence: ClaimCard[];
}

export interface SentenceEvidence {
  sentence_id: string;
  transcript_id: string;
  text: string;
  relevant: boolean | null;
  evidence: ClaimCard[];
}

export class ApiError extends Error {
  constructor(readonly code: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

/**
 * Every method issues a plain GET; the console never mutates server
 * state. The base URL is configuration so the static build can sit
 * behind any web server.
 */
export class Api {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = (...args) => fetch(...args),
  ) {}

  private async get<T>(
    path: string,
    params: Record<string, string | number> = {},
  ): Promise<T> {
    // Join relative to the base so a prefix like /api/ survives.
    const base = this.baseUrl.endsWith("/") ? this.baseUrl : `${this.baseUrl}/`;
    const url = new URL(path.replace(/^\//, ""), base);
    for (const [key, value] of Object.entries(params)) {
      url.searchParams.set(key, String(value));
    }
    const response = await this.fetchFn(url.toString(), { method: "GET" });
    if (!response.ok) {
      let message = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { message?: string };
        if (body && typeof body.message === "string") message = body.message;
      } catch {
        /* non-JSON error body; keep the status text */
      }
      throw new ApiError(response.status, message);
    }
    return (await response.json()) as T;
  }

  transcripts(): Promise<TranscriptRow[]> {
    return this.get("/transcripts");
  }

  runs(): Promise<RunRow[]> {
    return this.get("/runs");
  }

  ranking(transcriptId: string, run: string): Promise<RankedRow[]> {
    return this.get(`/transcripts/${encodeURIComponent(transcriptId)}/ranking`, {
      run,
    });
  }

  evidence(sentenceId: string, r: number): Promise<SentenceEvidence> {
    return this.get(`/sentences/${encodeURIComponent(sentenceId)}/evidence`, {
      r,
    });
  }
}
