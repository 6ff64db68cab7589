/** Canned API payloads and a recording fake server for tests. */

import type {
  ClaimCard,
  RankedRow,
  RunRow,
  TranscriptRow,
} from "../src/api.js";

export const CLAIMS: ClaimCard[] = [
  {
    claim_id: "c1",
    statement: "the tax plan cuts middle class taxes",
    truth_value: "false",
    title: "tax plan",
    date: "2019-05-01",
    verdict: "false",
    scores: { bm25_statement: 1.5321, nli_entail: 0.9017 },
  },
  {
    claim_id: "c2",
    statement: "crime fell for ten straight years",
    truth_value: "half-true",
    title: "",
    date: null,
    verdict: null,
    scores: { bm25_statement: 0.7002, nli_entail: 0.1188 },
  },
];

export const TRANSCRIPTS: TranscriptRow[] = [
  { transcript_id: "t1", event_date: "2020-10-01", n_sentences: 3 },
  { transcript_id: "t2", event_date: null, n_sentences: 1 },
];

export const RUNS: RunRow[] = [
  { run_id: "full", transcripts: ["t1", "t2"], n_sentences: 4 },
];

export const RANKING: RankedRow[] = [
  {
    rank: 1,
    sentence_id: "t1-s002",
    text: "We cut middle class taxes.",
    speaker: "SPEAKER_A",
    score: 2.3107,
    relevant: true,
    evidence: [CLAIMS[0]],
  },
  {
    rank: 2,
    sentence_id: "t1-s000",
    text: "Good evening everyone.",
    speaker: "MODERATOR",
    score: 0.5211,
    relevant: false,
    evidence: [],
  },
  {
    rank: 3,
    sentence_id: "t1-s001",
    text: "Crime is down again this year.",
    speaker: "SPEAKER_B",
    score: 0.4189,
    relevant: false,
    evidence: [CLAIMS[1]],
  },
];

export interface RecordedCall {
  url: string;
  init: RequestInit | undefined;
}

function json(data: unknown, status = 200): Response {
  return new Response(JSON.stringify(data), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/** In-memory stand-in for the review API; records every request. */
export class FakeServer {
  calls: RecordedCall[] = [];
  down = false;

  fetch: typeof fetch = async (input, init) => {
    const url = new URL(String(input));
    this.calls.push({ url: url.toString(), init });
    if (this.down) throw new TypeError("fetch failed");
    const body = this.route(url);
    if (body === undefined) {
      return json({ code: 404, message: `no route for ${url.pathname}` }, 404);
    }
    return json(body);
  };

  private route(url: URL): unknown {
    const path = url.pathname;
    if (path === "/transcripts") return TRANSCRIPTS;
    if (path === "/runs") return RUNS;

    const ranking = path.match(/^\/transcripts\/([^/]+)\/ranking$/);
    if (ranking) {
      if (url.searchParams.get("run") !== "full") return undefined;
      return ranking[1] === "t1" ? RANKING : [];
    }

    const evidence = path.match(/^\/sentences\/([^/]+)\/evidence$/);
    if (evidence) {
      const row = RANKING.find((r) => r.sentence_id === evidence[1]);
      if (!row) return undefined;
      const r = Number(url.searchParams.get("r") ?? "3");
      return {
        sentence_id: row.sentence_id,
        transcript_id: "t1",
        text: row.text,
        relevant: row.relevant,
        evidence: CLAIMS.slice(0, Math.min(r, CLAIMS.length)),
      };
    }
    return undefined;
  }
}

/** Let queued promise callbacks and timers run. */
export function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}
